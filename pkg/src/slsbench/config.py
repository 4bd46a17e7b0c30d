"""Layered run configuration: flags win over the config file, which wins over
environment fallbacks (SLSBENCH_CONFIG, SLSBENCH_OUTPUT), which win over
defaults. One document configures everything so runs are reproducible from a
file plus a seed.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from slsbench.errors import ConfigurationError

ENV_CONFIG = "SLSBENCH_CONFIG"
ENV_OUTPUT = "SLSBENCH_OUTPUT"


@dataclass
class Config:
    output: Path = Path("slsbench-out")
    seed: int | None = None
    profile_overlay: Path | None = None
    sim_model: str = "default"
    pacing_s: float | None = None
    workloads_root: Path | None = None
    on_limit: str = "queue"
    http_profile: str = "aws"
    http_endpoints: dict[str, str] = field(default_factory=dict)
    http_headers: dict[str, str] = field(default_factory=dict)
    http_auth_token: str = ""

    @property
    def runs_dir(self) -> Path:
        return self.output / "runs"

    @property
    def handles_dir(self) -> Path:
        return self.output / "handles"

    @property
    def packages_dir(self) -> Path:
        return self.output / "packages"


def load_config(path: str | Path | None = None) -> Config:
    """Build a Config from an explicit file, the env fallback, or defaults."""
    if path is None:
        env = os.environ.get(ENV_CONFIG, "")
        path = Path(env) if env else None
    cfg = Config()
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"config file {path} does not exist")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"unparseable config {path}: {exc}") from exc
        if "output" in doc:
            cfg.output = Path(doc["output"])
        if "seed" in doc:
            cfg.seed = doc["seed"]
        if "profile_overlay" in doc:
            cfg.profile_overlay = Path(doc["profile_overlay"])
        cfg.sim_model = doc.get("sim_model", cfg.sim_model)
        if "pacing_s" in doc:
            cfg.pacing_s = float(doc["pacing_s"])
        if "workloads_root" in doc:
            cfg.workloads_root = Path(doc["workloads_root"])
        cfg.on_limit = doc.get("on_limit", cfg.on_limit)
        http = doc.get("http", {})
        cfg.http_profile = http.get("profile", cfg.http_profile)
        cfg.http_endpoints = dict(http.get("endpoints", {}))
        cfg.http_headers = dict(http.get("headers", {}))
        cfg.http_auth_token = http.get("auth_token", "")
    env_output = os.environ.get(ENV_OUTPUT, "")
    if env_output:
        # the env var stands in for the --output flag, so it beats the file
        cfg.output = Path(env_output)
    if cfg.workloads_root is None:
        default_root = Path("workloads") / "suite"
        if default_root.is_dir():
            cfg.workloads_root = default_root
    return cfg
