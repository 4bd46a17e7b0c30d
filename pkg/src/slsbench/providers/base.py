"""Provider adapter contract: deploy, invoke, logs, teardown.

Every provider answers the same four questions so the experiment engine never
branches on vendor. Durations come exclusively from the client-side monotonic
clock; wall-clock time is recorded for correlation but never subtracted.
"""

from __future__ import annotations

import hashlib
import json
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any

from slsbench.errors import PreconditionError, UnsupportedQueryError
from slsbench.packaging import PackageArtifact
from slsbench.platforms import DeploymentSpec, PlatformProfile, validate

STATUSES = ("ok", "error", "timeout")
COLD_EVIDENCE = ("unknown", "cold", "warm")


@dataclass(frozen=True)
class DeploymentHandle:
    provider: str
    function_id: str
    spec: DeploymentSpec
    endpoint: str
    created_at: float  # wall-clock seconds, informational only


@dataclass
class InvocationRecord:
    """One client-observed invocation, timed with the monotonic clock."""

    handle_ref: str
    seq: int
    t_start: int  # monotonic ns
    t_end: int
    status: str
    result: dict[str, Any] = field(default_factory=dict)
    cold_evidence: str = "unknown"
    exec_ms_reported: float | None = None
    wall_start: float = 0.0
    detail: str = ""  # error cause or retained raw body on parse failure

    def __post_init__(self):
        if self.t_end < self.t_start:
            raise ValueError("t_end precedes t_start")
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.cold_evidence not in COLD_EVIDENCE:
            raise ValueError(f"unknown cold evidence {self.cold_evidence!r}")

    @property
    def response_ms(self) -> float:
        return (self.t_end - self.t_start) / 1e6

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict[str, Any]:
        return {
            "handle_ref": self.handle_ref,
            "seq": self.seq,
            "t_start": self.t_start,
            "t_end": self.t_end,
            "status": self.status,
            "result": self.result,
            "cold_evidence": self.cold_evidence,
            "exec_ms_reported": self.exec_ms_reported,
            "wall_start": self.wall_start,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "InvocationRecord":
        return cls(**doc)


@dataclass(frozen=True)
class LogEvent:
    ts_ns: int
    function_id: str
    message: str
    exec_ms: float | None = None
    instance_id: str = ""


def function_id_for(artifact: PackageArtifact, spec: DeploymentSpec) -> str:
    """Deterministic function identity: same package and spec, same id."""
    key = f"{artifact.content_digest}|{spec.key()}"
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


class Provider(ABC):
    """Adapter contract. Vendor adapters subclass this and nothing else."""

    name: str
    profile: PlatformProfile

    @abstractmethod
    def deploy(self, artifact: PackageArtifact, spec: DeploymentSpec) -> DeploymentHandle:
        """Make the package invocable; idempotent on identical (digest, spec)."""

    @abstractmethod
    def invoke(self, handle: DeploymentHandle, payload: dict[str, Any], timeout_s: float) -> InvocationRecord:
        """One invocation, timed around the request; never raises on workload failure."""

    @abstractmethod
    def teardown(self, handle: DeploymentHandle) -> None:
        """Remove the function and all of its instances."""

    def evict(self, handle: DeploymentHandle) -> None:
        """Drop warm instances without undeploying; simulator-style providers only."""
        raise UnsupportedQueryError(f"{self.name} cannot evict instances on demand")

    def force_cold(self, handle: DeploymentHandle) -> None:
        """Guarantee the next invocation is a cold start."""
        self.evict(handle)

    @abstractmethod
    def fetch_logs(self, handle: DeploymentHandle, since_ns: int = 0) -> list[LogEvent]:
        """Provider-side records in a common schema; raises when unsupported."""

    def check_spec(self, artifact: PackageArtifact, spec: DeploymentSpec) -> None:
        """Refuse to contact the provider with a spec its profile rejects."""
        spec_with_package = spec if spec.package is artifact else DeploymentSpec(
            language_name=spec.language_name,
            language_version=spec.language_version,
            memory_mb=spec.memory_mb,
            timeout_s=spec.timeout_s,
            region=spec.region,
            trigger=spec.trigger,
            package=artifact,
        )
        report = validate(self.profile, spec_with_package)
        if not report.accepted:
            lines = "; ".join(str(v) for v in report.violations)
            raise PreconditionError(f"spec rejected by {self.profile.name} profile: {lines}")

    @staticmethod
    def now_ns() -> int:
        return time.monotonic_ns()


@dataclass(frozen=True)
class ParsedReply:
    status: str
    result: dict[str, Any]
    exec_ms: float | None
    cold_evidence: str
    detail: str = ""


def parse_handler_reply(text: str, expected_schema: tuple[str, ...]) -> ParsedReply:
    """Interpret a workload's reply document.

    Expected shape: {"result": {...}, "exec_ms": num, "first_run": bool,
    "metrics": {...}}; metrics merge into result. A bare key-value document is
    accepted as the result itself (endpoints not written for this harness).
    Missing schema fields degrade to an error reply with the raw text kept.
    """
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError):
        return ParsedReply("error", {}, None, "unknown", detail=text[:4096])
    if not isinstance(doc, dict):
        return ParsedReply("error", {}, None, "unknown", detail=text[:4096])

    if "result" in doc and isinstance(doc.get("result"), dict):
        result = dict(doc["result"])
        metrics = doc.get("metrics")
        if isinstance(metrics, dict):
            result.update(metrics)
        exec_ms = doc.get("exec_ms")
        exec_ms = float(exec_ms) if isinstance(exec_ms, (int, float)) else None
        first_run = doc.get("first_run")
        evidence = "unknown" if not isinstance(first_run, bool) else ("cold" if first_run else "warm")
    else:
        result, exec_ms, evidence = dict(doc), None, "unknown"

    missing = [name for name in expected_schema if name not in result]
    if missing:
        return ParsedReply(
            "error", result, exec_ms, evidence,
            detail=f"fields missing from result: {', '.join(missing)}; raw: {text[:4096]}",
        )
    return ParsedReply("ok", result, exec_ms, evidence)
