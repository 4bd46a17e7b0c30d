"""In-process provider with a parameterized cold-start model and instance pool.

The simulator exists so measurement protocols can be checked against known
ground truth. Cold latency is an explicit additive model: platform base cost,
per-language runtime initialization, package load time for dependencies
imported at init, and a memory-dependent term, all scaled by bounded uniform
jitter from one seeded stream. Warm invocations cost a fixed overhead.

Invocations take real time (the simulated duration is physically slept) so
keep-alive expiry and throughput behave like a live platform, but reported
timings are derived from the model, so a seeded run reproduces exactly.
Workloads packaged as files execute in a subprocess and contribute their real
execution time; the built-in synthetic workload is fully simulated.
"""

from __future__ import annotations

import json
import os
import random
import shutil
import subprocess
import sys
import tempfile
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from slsbench.errors import ConfigurationError, NotFoundError, ProviderError
from slsbench.packaging import BUILTIN_HANDLER_PREFIX, PackageArtifact, extract_package
from slsbench.platforms import DeploymentSpec, PlatformProfile, load_profile
from slsbench.providers.base import (
    DeploymentHandle,
    InvocationRecord,
    LogEvent,
    Provider,
    function_id_for,
    parse_handler_reply,
)

SENTINEL_NAME = ".first-run-sentinel"
_SYNTHETIC = BUILTIN_HANDLER_PREFIX + "synthetic"


@dataclass(frozen=True)
class SimModel:
    """Parameters of the cold/warm latency model; a data file, not code."""

    base_ms: float
    runtime_init_ms: dict[str, float]
    load_bandwidth_bytes_per_ms: float
    mem_coeff_ms_mb: float
    warm_overhead_ms: float
    keepalive_s: float
    jitter_eps: float
    seed: int

    def __post_init__(self):
        numeric = {
            "base_ms": self.base_ms,
            "load_bandwidth_bytes_per_ms": self.load_bandwidth_bytes_per_ms,
            "mem_coeff_ms_mb": self.mem_coeff_ms_mb,
            "warm_overhead_ms": self.warm_overhead_ms,
            "keepalive_s": self.keepalive_s,
            "jitter_eps": self.jitter_eps,
        }
        for name, value in numeric.items():
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        for lang, value in self.runtime_init_ms.items():
            if value < 0:
                raise ValueError(f"runtime_init_ms[{lang!r}] must be >= 0")
        if self.jitter_eps >= 0.5:
            raise ValueError("jitter_eps must be < 0.5")

    def to_dict(self) -> dict[str, Any]:
        return {
            "base_ms": self.base_ms,
            "runtime_init_ms": dict(self.runtime_init_ms),
            "load_bandwidth_bytes_per_ms": self.load_bandwidth_bytes_per_ms,
            "mem_coeff_ms_mb": self.mem_coeff_ms_mb,
            "warm_overhead_ms": self.warm_overhead_ms,
            "keepalive_s": self.keepalive_s,
            "jitter_eps": self.jitter_eps,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "SimModel":
        return cls(
            base_ms=doc["base_ms"],
            runtime_init_ms=dict(doc.get("runtime_init_ms", {})),
            load_bandwidth_bytes_per_ms=doc["load_bandwidth_bytes_per_ms"],
            mem_coeff_ms_mb=doc.get("mem_coeff_ms_mb", 0.0),
            warm_overhead_ms=doc.get("warm_overhead_ms", 0.0),
            keepalive_s=doc.get("keepalive_s", 300.0),
            jitter_eps=doc.get("jitter_eps", 0.0),
            seed=doc.get("seed", 0),
        )


def load_sim_model(source: str | Path = "default") -> SimModel:
    """Load a model by bundled name or file path."""
    path = Path(source)
    if path.is_file():
        doc = json.loads(path.read_text(encoding="utf-8"))
    else:
        ref = resources.files("slsbench").joinpath(f"data/sim-models/{source}.json")
        try:
            doc = json.loads(ref.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise NotFoundError(f"no simulator model named {source!r}") from None
    return SimModel.from_dict(doc)


def sim_cold_latency(
    model: SimModel,
    spec: DeploymentSpec,
    artifact: PackageArtifact,
    rng: random.Random | None = None,
) -> float:
    """Cold-start milliseconds for one instance creation.

    base + runtime_init(language) + imported_bytes/bandwidth + mem_coeff/memory,
    scaled by (1 + u) with u drawn uniformly from [-eps, eps].
    """
    mean = _cold_mean_ms(model, spec, artifact)
    if rng is None:
        return mean
    u = rng.uniform(-model.jitter_eps, model.jitter_eps)
    return mean * (1.0 + u)


def _cold_mean_ms(model: SimModel, spec: DeploymentSpec, artifact: PackageArtifact) -> float:
    imported = artifact.manifest.imported_bytes()
    if imported and model.load_bandwidth_bytes_per_ms <= 0:
        raise ConfigurationError("model has zero load bandwidth but the package imports dependencies")
    load = imported / model.load_bandwidth_bytes_per_ms if imported else 0.0
    init = model.runtime_init_ms.get(spec.language_name, 0.0)
    mem = model.mem_coeff_ms_mb / spec.memory_mb
    return model.base_ms + init + load + mem


@dataclass
class SimInstance:
    instance_id: str
    scratch_dir: Path
    born_at: int
    last_used_at: int
    state: str = "initializing"  # initializing | warm
    busy_slots: int = 0


@dataclass
class _Function:
    handle: DeploymentHandle
    artifact: PackageArtifact
    code_dir: Path | None
    instances: list[SimInstance] = field(default_factory=list)
    logs: list[LogEvent] = field(default_factory=list)
    created: int = 0


class LocalSimProvider(Provider):
    """Deterministic local provider; see the module docstring for the model."""

    def __init__(
        self,
        model: SimModel | None = None,
        profile: PlatformProfile | None = None,
        temp_root: str | Path | None = None,
        seed: int | None = None,
        on_limit: str = "queue",
    ):
        if on_limit not in ("queue", "reject"):
            raise ConfigurationError(f"on_limit must be 'queue' or 'reject', got {on_limit!r}")
        self.name = "local-sim"
        self.model = model or load_sim_model("default")
        self.profile = profile or load_profile("local-sim")
        self._owns_root = temp_root is None
        self._root = Path(temp_root) if temp_root else Path(tempfile.mkdtemp(prefix="slsbench-sim-"))
        self._root.mkdir(parents=True, exist_ok=True)
        self.storage_root = self._root / "storage"
        for bucket in ("input", "output"):
            (self.storage_root / bucket).mkdir(parents=True, exist_ok=True)
        self._rng = random.Random(self.model.seed if seed is None else seed)
        self._on_limit = on_limit
        self._cond = threading.Condition()
        self._functions: dict[str, _Function] = {}

    # -- lifecycle -------------------------------------------------------

    def deploy(self, artifact: PackageArtifact, spec: DeploymentSpec) -> DeploymentHandle:
        self.check_spec(artifact, spec)
        function_id = function_id_for(artifact, spec)
        with self._cond:
            if function_id in self._functions:
                return self._functions[function_id].handle
            code_dir = None
            if not artifact.manifest.is_builtin:
                code_dir = self._root / function_id / "code"
                extract_package(artifact, code_dir)
            handle = DeploymentHandle(
                provider=self.name,
                function_id=function_id,
                spec=spec,
                endpoint=f"sim://{function_id}",
                created_at=time.time(),
            )
            self._functions[function_id] = _Function(handle=handle, artifact=artifact, code_dir=code_dir)
            return handle

    def teardown(self, handle: DeploymentHandle) -> None:
        with self._cond:
            fn = self._functions.pop(handle.function_id, None)
            if fn is None:
                raise NotFoundError(f"function {handle.function_id} is not deployed")
            for inst in fn.instances:
                self._destroy(fn, inst)
            fn.instances.clear()
            if fn.code_dir is not None:
                shutil.rmtree(fn.code_dir.parent, ignore_errors=True)
            self._cond.notify_all()

    def evict(self, handle: DeploymentHandle) -> None:
        with self._cond:
            fn = self._fn(handle)
            for inst in list(fn.instances):
                if inst.busy_slots == 0:
                    self._destroy(fn, inst)
                    fn.instances.remove(inst)
            self._cond.notify_all()

    def _fn(self, handle: DeploymentHandle) -> _Function:
        fn = self._functions.get(handle.function_id)
        if fn is None:
            raise NotFoundError(f"function {handle.function_id} is not deployed")
        return fn

    def _destroy(self, fn: _Function, inst: SimInstance) -> None:
        shutil.rmtree(inst.scratch_dir, ignore_errors=True)
        fn.logs.append(
            LogEvent(
                ts_ns=self.now_ns(),
                function_id=fn.handle.function_id,
                message="instance-evicted",
                instance_id=inst.instance_id,
            )
        )

    def close(self) -> None:
        with self._cond:
            ids = list(self._functions)
        for function_id in ids:
            fn = self._functions.get(function_id)
            if fn is not None:
                self.teardown(fn.handle)
        if self._owns_root:
            shutil.rmtree(self._root, ignore_errors=True)

    def __enter__(self) -> "LocalSimProvider":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- invocation ------------------------------------------------------

    def invoke(self, handle: DeploymentHandle, payload: dict[str, Any], timeout_s: float) -> InvocationRecord:
        wall = time.time()
        t_start = self.now_ns()
        deadline = t_start + int(timeout_s * 1e9)
        with self._cond:
            fn = self._fn(handle)
            inst, cold = self._acquire(fn, deadline)
            if inst is None:
                return self._timeout_record(handle, t_start, timeout_s, wall, "pool saturated")
            if cold:
                latency_ms = sim_cold_latency(self.model, handle.spec, fn.artifact, self._rng)
            else:
                latency_ms = self.model.warm_overhead_ms
        try:
            if fn.artifact.manifest.is_builtin:
                record = self._run_synthetic(fn, inst, cold, latency_ms, payload, timeout_s, t_start, wall)
            else:
                record = self._run_subprocess(fn, inst, cold, latency_ms, payload, timeout_s, t_start, wall)
        finally:
            with self._cond:
                inst.busy_slots -= 1
                inst.state = "warm"
                inst.last_used_at = self.now_ns()
                self._cond.notify_all()
        return record

    def _slots(self) -> int:
        per_instance = self.profile.instance_concurrency
        return per_instance if per_instance > 0 else sys.maxsize

    def _acquire(self, fn: _Function, deadline: int) -> tuple[SimInstance | None, bool]:
        """Pick the most recently used free warm instance, or create one.

        Runs under the pool lock. Returns (None, False) on timeout while
        queueing for capacity.
        """
        limit = self.profile.instance_limit or sys.maxsize
        while True:
            now = self.now_ns()
            keepalive_ns = int(self.model.keepalive_s * 1e9)
            for inst in list(fn.instances):
                if inst.busy_slots == 0 and now - inst.last_used_at > keepalive_ns:
                    self._destroy(fn, inst)
                    fn.instances.remove(inst)

            warm = [i for i in fn.instances if i.state == "warm" and i.busy_slots < self._slots()]
            if warm:
                inst = max(warm, key=lambda i: i.last_used_at)
                inst.busy_slots += 1
                return inst, False

            if len(fn.instances) < limit:
                inst = self._create(fn)
                inst.busy_slots = 1
                return inst, True

            if self._on_limit == "reject":
                raise ProviderError(
                    f"instance limit {limit} reached for function {fn.handle.function_id}"
                )
            remaining = (deadline - self.now_ns()) / 1e9
            if remaining <= 0:
                return None, False
            self._cond.wait(timeout=min(remaining, 0.1))

    def _create(self, fn: _Function) -> SimInstance:
        fn.created += 1
        instance_id = f"{fn.handle.function_id}-{fn.created}"
        scratch = self._root / fn.handle.function_id / f"scratch-{fn.created}"
        scratch.mkdir(parents=True, exist_ok=True)
        now = self.now_ns()
        inst = SimInstance(
            instance_id=instance_id, scratch_dir=scratch, born_at=now, last_used_at=now
        )
        fn.instances.append(inst)
        fn.logs.append(
            LogEvent(
                ts_ns=now,
                function_id=fn.handle.function_id,
                message="instance-created",
                instance_id=instance_id,
            )
        )
        return inst

    def _timeout_record(
        self, handle: DeploymentHandle, t_start: int, timeout_s: float, wall: float, why: str
    ) -> InvocationRecord:
        return InvocationRecord(
            handle_ref=handle.function_id,
            seq=0,
            t_start=t_start,
            t_end=t_start + int(timeout_s * 1e9),
            status="timeout",
            wall_start=wall,
            detail=why,
        )

    def _run_synthetic(
        self,
        fn: _Function,
        inst: SimInstance,
        cold: bool,
        latency_ms: float,
        payload: dict[str, Any],
        timeout_s: float,
        t_start: int,
        wall: float,
    ) -> InvocationRecord:
        name = fn.artifact.manifest.handler
        if name != _SYNTHETIC:
            raise ProviderError(f"unknown built-in workload {name!r}; only {_SYNTHETIC} exists")
        params = {**fn.artifact.manifest.params, **payload}
        sleep_ms = float(params.get("sleep_ms", 0.0))
        if sleep_ms < 0:
            raise ProviderError("sleep_ms must be >= 0")
        echo = params.get("echo")

        sentinel = inst.scratch_dir / SENTINEL_NAME
        first_run = not sentinel.exists()
        if first_run:
            sentinel.touch()

        total_ms = latency_ms + sleep_ms
        if total_ms > timeout_s * 1000.0:
            time.sleep(timeout_s)
            record = self._timeout_record(fn.handle, t_start, timeout_s, wall, f"workload needs {total_ms:.1f} ms")
        else:
            time.sleep(total_ms / 1000.0)
            t_end = t_start + int(total_ms * 1e6)
            record = InvocationRecord(
                handle_ref=fn.handle.function_id,
                seq=0,
                t_start=t_start,
                t_end=t_end,
                status="ok",
                result={"echo": echo},
                cold_evidence="cold" if first_run else "warm",
                exec_ms_reported=sleep_ms,
                wall_start=wall,
            )
        self._log_run(fn, inst, cold, t_start, latency_ms, record)
        return record

    def _run_subprocess(
        self,
        fn: _Function,
        inst: SimInstance,
        cold: bool,
        latency_ms: float,
        payload: dict[str, Any],
        timeout_s: float,
        t_start: int,
        wall: float,
    ) -> InvocationRecord:
        manifest = fn.artifact.manifest
        if manifest.language_name != "python":
            raise ProviderError(
                f"only python handlers are executable locally, not {manifest.language_name!r}"
            )
        time.sleep(latency_ms / 1000.0)
        remaining_s = timeout_s - latency_ms / 1000.0
        if remaining_s <= 0:
            record = self._timeout_record(fn.handle, t_start, timeout_s, wall, "startup consumed the timeout")
            self._log_run(fn, inst, cold, t_start, latency_ms, record)
            return record

        doc = {**manifest.params, **payload}
        env = dict(os.environ)
        env.update(
            SLSBENCH_SCRATCH_DIR=str(inst.scratch_dir),
            SLSBENCH_STORAGE=str(self.storage_root),
            SLSBENCH_DISK_QUOTA_MB=str(self.profile.local_disk_mb),
            SLSBENCH_MEMORY_MB=str(fn.handle.spec.memory_mb),
        )
        try:
            proc = subprocess.run(
                [sys.executable, str(fn.code_dir / manifest.handler)],
                input=json.dumps(doc),
                capture_output=True,
                text=True,
                timeout=remaining_s,
                cwd=fn.code_dir,
                env=env,
            )
        except subprocess.TimeoutExpired:
            record = self._timeout_record(fn.handle, t_start, timeout_s, wall, "workload exceeded the timeout")
            self._log_run(fn, inst, cold, t_start, latency_ms, record)
            return record
        t_end = self.now_ns()

        if proc.returncode != 0:
            record = InvocationRecord(
                handle_ref=fn.handle.function_id,
                seq=0,
                t_start=t_start,
                t_end=t_end,
                status="error",
                wall_start=wall,
                detail=f"handler exit {proc.returncode}: {proc.stderr[-4096:]}",
            )
        else:
            reply = parse_handler_reply(proc.stdout, manifest.expected_output_schema)
            record = InvocationRecord(
                handle_ref=fn.handle.function_id,
                seq=0,
                t_start=t_start,
                t_end=t_end,
                status=reply.status,
                result=reply.result,
                cold_evidence=reply.cold_evidence,
                exec_ms_reported=reply.exec_ms,
                wall_start=wall,
                detail=reply.detail,
            )
        self._log_run(fn, inst, cold, t_start, latency_ms, record)
        return record

    def _log_run(
        self,
        fn: _Function,
        inst: SimInstance,
        cold: bool,
        t_start: int,
        latency_ms: float,
        record: InvocationRecord,
    ) -> None:
        with self._cond:
            if cold:
                fn.logs.append(
                    LogEvent(
                        ts_ns=t_start + int(latency_ms * 1e6),
                        function_id=fn.handle.function_id,
                        message="init-complete",
                        instance_id=inst.instance_id,
                    )
                )
            fn.logs.append(
                LogEvent(
                    ts_ns=record.t_end,
                    function_id=fn.handle.function_id,
                    message="exec-complete",
                    exec_ms=record.exec_ms_reported,
                    instance_id=inst.instance_id,
                )
            )

    def fetch_logs(self, handle: DeploymentHandle, since_ns: int = 0) -> list[LogEvent]:
        with self._cond:
            fn = self._fn(handle)
            return [event for event in fn.logs if event.ts_ns >= since_ns]
