"""Shared plumbing for exercising the workload suite.

Handlers are standalone scripts living in directories whose names are not
importable, so white-box tests load them through importlib; end-to-end
tests run them as subprocesses with the environment a provider sets up:
a scratch dir, a directory-backed storage stub with input and output
buckets, and the resource-limit variables.
"""

import importlib.util
import json
import os
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

import pytest

SUITE_DIR = Path(__file__).resolve().parents[1] / "suite"

_loaded = {}


def _load_handler(workload_id: str):
    if workload_id not in _loaded:
        path = SUITE_DIR / workload_id / "handler.py"
        name = "wl_" + workload_id.replace("-", "_")
        spec = importlib.util.spec_from_file_location(name, path)
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)
        _loaded[workload_id] = module
    return _loaded[workload_id]


@pytest.fixture
def load_handler():
    return _load_handler


@dataclass
class HandlerOutcome:
    code: int
    reply: dict | None
    stderr: str

    @property
    def result(self) -> dict:
        assert self.code == 0, f"handler failed: {self.stderr}"
        return self.reply["result"]

    @property
    def merged(self) -> dict:
        out = dict(self.result)
        out.update(self.reply.get("metrics") or {})
        return out


class BenchEnv:
    """One simulated instance: scratch dir plus two-bucket storage."""

    def __init__(self, root: Path):
        self.scratch = root / "scratch"
        self.scratch.mkdir()
        self.storage = root / "storage"
        for bucket in ("input", "output"):
            (self.storage / bucket).mkdir(parents=True)

    def env(self, quota_mb=512) -> dict:
        env = dict(os.environ)
        env.update(
            SLSBENCH_SCRATCH_DIR=str(self.scratch),
            SLSBENCH_STORAGE=str(self.storage),
            SLSBENCH_DISK_QUOTA_MB=str(quota_mb),
            SLSBENCH_MEMORY_MB="128",
        )
        return env

    def put_input(self, key: str, data) -> Path:
        path = self.storage / "input" / key
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(data, str):
            path.write_text(data, encoding="utf-8")
        else:
            path.write_bytes(data)
        return path

    def output(self, key: str) -> Path:
        return self.storage / "output" / key

    def run(
        self,
        workload_id: str,
        payload: dict | None = None,
        quota_mb=512,
        env_overrides: dict | None = None,
    ) -> HandlerOutcome:
        """Run a handler the way a provider would: defaults merged, stdin doc."""
        manifest = json.loads((SUITE_DIR / workload_id / "workload.manifest").read_text())
        doc = {**manifest["params"], **(payload or {})}
        env = self.env(quota_mb=quota_mb)
        env.update(env_overrides or {})
        proc = subprocess.run(
            [sys.executable, str(SUITE_DIR / workload_id / "handler.py")],
            input=json.dumps(doc),
            capture_output=True,
            text=True,
            env=env,
            cwd=SUITE_DIR / workload_id,
            timeout=120,
        )
        reply = json.loads(proc.stdout) if proc.returncode == 0 else None
        return HandlerOutcome(proc.returncode, reply, proc.stderr)


@pytest.fixture
def bench(tmp_path) -> BenchEnv:
    return BenchEnv(tmp_path)


@pytest.fixture
def make_png():
    """Deterministic small RGB image written as PNG bytes."""
    from PIL import Image

    def build(width=16, height=12):
        im = Image.new("RGB", (width, height))
        im.putdata(
            [
                (x * 17 % 256, y * 23 % 256, (x * y + 7) % 256)
                for y in range(height)
                for x in range(width)
            ]
        )
        import io

        buf = io.BytesIO()
        im.save(buf, format="PNG")
        return buf.getvalue()

    return build


@pytest.fixture
def make_clip(tmp_path):
    """Deterministic short AVI clip (lossless codec) written to a file."""
    import cv2
    import numpy as np

    def build(frames=10, width=32, height=24, path=None):
        path = Path(path) if path else tmp_path / "fixture.avi"
        writer = cv2.VideoWriter(
            str(path), cv2.VideoWriter_fourcc(*"FFV1"), 10.0, (width, height)
        )
        assert writer.isOpened()
        for i in range(frames):
            rng = np.random.default_rng(1000 + i)
            writer.write(rng.integers(0, 256, (height, width, 3), dtype=np.uint8))
        writer.release()
        return path.read_bytes()

    return build
