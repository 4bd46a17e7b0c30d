"""Measurement protocols: the invoke-twice cold start estimator, repeated
latency trials with a median-based summary downstream, and fixed-duration
throughput sessions, swept over a plan's axis grid.

A plan names a provider, a workload, the axes to sweep (language, memory,
package variant, region, concurrency) and a protocol. Points run in grid
order; every finished trial is journaled, and re-running a plan against the
same run directory resumes at the first incomplete point.
"""

from __future__ import annotations

import itertools
import json
import random
import tempfile
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

from slsbench.errors import (
    ConfigurationError,
    PackagingError,
    PreconditionError,
    ProviderError,
)
from slsbench.journal import Journal
from slsbench.packaging import (
    BUILTIN_HANDLER_PREFIX,
    PackageArtifact,
    SizeVariant,
    WorkloadManifest,
    build_package,
    load_manifest,
    make_size_variants,
)
from slsbench.platforms import DeploymentSpec
from slsbench.providers.base import DeploymentHandle, InvocationRecord, Provider

AXIS_NAMES = ("language", "memory_mb", "package_variant", "region", "concurrency")
PROTOCOLS = ("coldstart-pair", "latency", "throughput")


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple[Any, ...]

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"unknown axis {self.name!r}; one of {', '.join(AXIS_NAMES)}")
        if not self.values:
            raise ValueError(f"axis {self.name} has no values")


@dataclass(frozen=True)
class ExperimentPlan:
    """One sweep: workload x axis grid x repetitions under one protocol."""

    id: str
    provider: str
    workload: str
    protocol: str = "coldstart-pair"
    repetitions: int = 20
    axes: tuple[Axis, ...] = ()
    base_language: str = "python"
    base_language_version: str = ""
    base_memory_mb: int = 128
    base_timeout_s: int = 60
    base_region: str = ""
    payload: dict[str, Any] = field(default_factory=dict)
    variants: tuple[SizeVariant, ...] = ()
    code_padding_bytes: int = 0
    throughput_concurrency: int = 1
    throughput_duration_s: float = 10.0

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.code_padding_bytes < 0:
            raise ValueError("code_padding_bytes must be >= 0")
        labels = {v.label for v in self.variants}
        for axis in self.axes:
            if axis.name == "package_variant":
                missing = [v for v in axis.values if v != "base" and v not in labels]
                if missing:
                    raise ValueError(f"package_variant values without definitions: {missing}")
            if axis.name == "concurrency" and self.protocol != "throughput":
                raise ValueError("a concurrency axis requires the throughput protocol")

    def points(self) -> list[dict[str, Any]]:
        """Cartesian product of the axes, in axis order; one empty point if none."""
        if not self.axes:
            return [{}]
        names = [axis.name for axis in self.axes]
        return [
            dict(zip(names, combo))
            for combo in itertools.product(*(axis.values for axis in self.axes))
        ]

    def variant(self, label: str) -> SizeVariant:
        for v in self.variants:
            if v.label == label:
                return v
        raise ConfigurationError(f"no package variant named {label!r} in plan {self.id}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "provider": self.provider,
            "workload": self.workload,
            "protocol": self.protocol,
            "repetitions": self.repetitions,
            "axes": [{"name": a.name, "values": list(a.values)} for a in self.axes],
            "base": {
                "language": self.base_language,
                "language_version": self.base_language_version,
                "memory_mb": self.base_memory_mb,
                "timeout_s": self.base_timeout_s,
                "region": self.base_region,
            },
            "payload": self.payload,
            "variants": [
                {"label": v.label, "padding_bytes": v.padding_bytes, "import_at_init": v.import_at_init}
                for v in self.variants
            ],
            "code_padding_bytes": self.code_padding_bytes,
            "throughput": {
                "concurrency": self.throughput_concurrency,
                "duration_s": self.throughput_duration_s,
            },
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "ExperimentPlan":
        base = doc.get("base", {})
        throughput = doc.get("throughput", {})
        return cls(
            id=doc["id"],
            provider=doc["provider"],
            workload=doc["workload"],
            protocol=doc.get("protocol", "coldstart-pair"),
            repetitions=doc.get("repetitions", 20),
            axes=tuple(
                Axis(name=a["name"], values=tuple(a["values"])) for a in doc.get("axes", ())
            ),
            base_language=base.get("language", "python"),
            base_language_version=base.get("language_version", ""),
            base_memory_mb=base.get("memory_mb", 128),
            base_timeout_s=base.get("timeout_s", 60),
            base_region=base.get("region", ""),
            payload=dict(doc.get("payload", {})),
            variants=tuple(
                SizeVariant(
                    label=v["label"],
                    padding_bytes=v["padding_bytes"],
                    import_at_init=v.get("import_at_init", True),
                )
                for v in doc.get("variants", ())
            ),
            code_padding_bytes=doc.get("code_padding_bytes", 0),
            throughput_concurrency=throughput.get("concurrency", 1),
            throughput_duration_s=throughput.get("duration_s", 10.0),
        )


def point_key(point: dict[str, Any]) -> str:
    """Canonical, order-independent encoding of an axis point."""
    return ",".join(f"{k}={point[k]}" for k in sorted(point))


@dataclass
class TrialResult:
    plan_id: str
    point: dict[str, Any]
    trial_index: int
    records: list[InvocationRecord] = field(default_factory=list)
    derived: dict[str, float] = field(default_factory=dict)
    valid: bool = True
    reason: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "plan_id": self.plan_id,
            "point": self.point,
            "point_key": point_key(self.point),
            "trial_index": self.trial_index,
            "records": [r.to_dict() for r in self.records],
            "derived": self.derived,
            "valid": self.valid,
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "TrialResult":
        return cls(
            plan_id=doc["plan_id"],
            point=dict(doc["point"]),
            trial_index=doc["trial_index"],
            records=[InvocationRecord.from_dict(r) for r in doc.get("records", ())],
            derived=dict(doc.get("derived", {})),
            valid=doc.get("valid", True),
            reason=doc.get("reason", ""),
        )


def run_coldstart_trial(
    provider: Provider,
    handle: DeploymentHandle,
    payload: dict[str, Any] | None = None,
    timeout_s: float = 60.0,
    plan_id: str = "",
    point: dict[str, Any] | None = None,
    trial_index: int = 0,
) -> TrialResult:
    """Two strictly sequential invocations against a forced-cold function.

    The difference of the two end-to-end response times estimates the cold
    start. The trial is invalid when either invocation fails, when sentinel
    evidence shows the second invocation was not warm, or when the difference
    is negative.
    """
    payload = payload or {}
    first = provider.invoke(handle, payload, timeout_s)
    first.seq = 1
    second = provider.invoke(handle, payload, timeout_s)
    second.seq = 2
    trial = TrialResult(
        plan_id=plan_id,
        point=dict(point or {}),
        trial_index=trial_index,
        records=[first, second],
    )
    if not first.ok:
        trial.valid, trial.reason = False, f"first-invocation-{first.status}"
        return trial
    if not second.ok:
        trial.valid, trial.reason = False, f"second-invocation-{second.status}"
        return trial
    estimate = first.response_ms - second.response_ms
    trial.derived["coldstart_est_ms"] = estimate
    if second.cold_evidence == "cold":
        trial.valid, trial.reason = False, "second-not-warm"
    elif estimate < 0:
        trial.valid, trial.reason = False, "negative-estimate"
    return trial


def run_throughput(
    provider: Provider,
    handle: DeploymentHandle,
    concurrency: int,
    duration_s: float,
    payload: dict[str, Any] | None = None,
    timeout_s: float = 60.0,
) -> list[InvocationRecord]:
    """Back-to-back invocations from `concurrency` workers until the deadline.

    The handle should be warm-primed first. Failures become error records,
    never silent drops. Records are returned in t_start order with seq set.
    """
    if concurrency <= 0:
        raise PreconditionError("throughput needs at least one worker")
    payload = payload or {}
    records: list[InvocationRecord] = []
    sink = threading.Lock()
    deadline = time.monotonic() + duration_s

    def worker() -> None:
        while time.monotonic() < deadline:
            record = provider.invoke(handle, payload, timeout_s)
            with sink:
                records.append(record)

    threads = [threading.Thread(target=worker, daemon=True) for _ in range(concurrency)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    records.sort(key=lambda r: r.t_start)
    for seq, record in enumerate(records, start=1):
        record.seq = seq
    return records


class PlanRunner:
    """Executes one plan point by point, journaling as it goes."""

    def __init__(
        self,
        plan: ExperimentPlan,
        provider: Provider,
        run_dir: str | Path,
        workloads_root: str | Path | None = None,
        pacing_s: float | None = None,
        seed: int | None = None,
        progress: Callable[[str], None] | None = None,
    ):
        self.plan = plan
        self.provider = provider
        self.run_dir = Path(run_dir)
        self.workloads_root = Path(workloads_root) if workloads_root else None
        if pacing_s is None:
            pacing_s = 0.0 if provider.name == "local-sim" else 1.0
        self.pacing_s = pacing_s
        self.seed = seed
        self.progress = progress or (lambda line: None)
        self.journal = Journal(self.run_dir)
        self._tmp: tempfile.TemporaryDirectory | None = None

    def run(self) -> list[TrialResult]:
        _, completed = self.journal.load()
        self.journal.append_plan(self.plan.to_dict(), self.seed)
        base_artifact = self._build_base()
        variant_artifacts = self._build_variants(base_artifact)

        results: list[TrialResult] = []
        try:
            for point in self.plan.points():
                key = point_key(point)
                if key in completed:
                    results.extend(TrialResult.from_dict(doc) for doc in completed[key])
                    self.progress(f"point {key or '(single)'}: already complete, skipped")
                    continue
                results.extend(self._run_point(point, key, base_artifact, variant_artifacts))
            return results
        finally:
            if self._tmp is not None:
                self._tmp.cleanup()
                self._tmp = None

    # -- workload resolution ----------------------------------------------

    def _build_base(self) -> PackageArtifact:
        workload = self.plan.workload
        packages_dir = self.run_dir / "packages"
        if workload.startswith(BUILTIN_HANDLER_PREFIX):
            self._tmp = tempfile.TemporaryDirectory(prefix="slsbench-plan-")
            tree = Path(self._tmp.name) / "tree"
            tree.mkdir()
            if self.plan.code_padding_bytes:
                filler = random.Random(0xC0DE).randbytes(self.plan.code_padding_bytes)
                (tree / "filler.bin").write_bytes(filler)
            manifest = WorkloadManifest(
                id=self.plan.id,
                language_name=self.plan.base_language,
                language_version=self.plan.base_language_version,
                handler=workload,
                params=dict(self.plan.payload),
            )
            return build_package(tree, manifest, out_dir=packages_dir)
        workload_dir = Path(workload)
        if not workload_dir.is_dir() and self.workloads_root is not None:
            candidate = self.workloads_root / workload
            if candidate.is_dir():
                workload_dir = candidate
        if not workload_dir.is_dir():
            raise ConfigurationError(
                f"workload {workload!r} is neither a directory nor found under "
                f"{self.workloads_root or 'any workloads root'}"
            )
        manifest = load_manifest(workload_dir)
        return build_package(workload_dir, manifest, out_dir=packages_dir)

    def _build_variants(self, base: PackageArtifact) -> dict[str, PackageArtifact]:
        labels: list[str] = []
        for axis in self.plan.axes:
            if axis.name == "package_variant":
                labels = [v for v in axis.values]
        if not labels:
            return {}
        defs = [
            self.plan.variant(label) if label != "base" else SizeVariant("base", 0, False)
            for label in labels
        ]
        built = make_size_variants(base, defs, out_dir=self.run_dir / "packages")
        return dict(zip(labels, built))

    # -- execution ---------------------------------------------------------

    def _spec_for(self, point: dict[str, Any], artifact: PackageArtifact) -> DeploymentSpec:
        return DeploymentSpec(
            language_name=point.get("language", self.plan.base_language),
            language_version=self.plan.base_language_version,
            memory_mb=int(point.get("memory_mb", self.plan.base_memory_mb)),
            timeout_s=self.plan.base_timeout_s,
            region=point.get("region", self.plan.base_region),
            trigger=artifact.manifest.trigger,
            package=artifact,
        )

    def _run_point(
        self,
        point: dict[str, Any],
        key: str,
        base_artifact: PackageArtifact,
        variant_artifacts: dict[str, PackageArtifact],
    ) -> list[TrialResult]:
        artifact = base_artifact
        if "package_variant" in point:
            artifact = variant_artifacts[point["package_variant"]]
        spec = self._spec_for(point, artifact)

        try:
            handle = self.provider.deploy(artifact, spec)
        except (PreconditionError, ProviderError, ConfigurationError, PackagingError) as exc:
            failed = TrialResult(
                plan_id=self.plan.id,
                point=dict(point),
                trial_index=0,
                valid=False,
                reason=f"point-failed: {exc}",
            )
            self.journal.append_trial(failed.to_dict())
            self.journal.append_point_done(key, 1)
            self.progress(f"point {key or '(single)'}: failed ({exc})")
            return [failed]

        trials: list[TrialResult] = []
        try:
            for index in range(self.plan.repetitions):
                trial = self._run_trial(point, index, handle)
                trials.append(trial)
                self.journal.append_trial(trial.to_dict())
                if self.pacing_s > 0 and index + 1 < self.plan.repetitions:
                    time.sleep(self.pacing_s)
            self.journal.append_point_done(key, len(trials))
            self.progress(f"point {key or '(single)'}: {len(trials)} trials")
        finally:
            try:
                self.provider.teardown(handle)
            except Exception:
                pass
        return trials

    def _run_trial(self, point: dict[str, Any], index: int, handle: DeploymentHandle) -> TrialResult:
        payload = dict(self.plan.payload)
        timeout_s = float(self.plan.base_timeout_s)
        if self.plan.protocol == "coldstart-pair":
            self.provider.force_cold(handle)
            return run_coldstart_trial(
                self.provider,
                handle,
                payload,
                timeout_s,
                plan_id=self.plan.id,
                point=point,
                trial_index=index,
            )
        if self.plan.protocol == "latency":
            record = self.provider.invoke(handle, payload, timeout_s)
            record.seq = 1
            trial = TrialResult(
                plan_id=self.plan.id, point=dict(point), trial_index=index, records=[record]
            )
            if record.ok:
                trial.derived["exec_ms"] = (
                    record.exec_ms_reported
                    if record.exec_ms_reported is not None
                    else record.response_ms
                )
                trial.derived["response_ms"] = record.response_ms
            else:
                trial.valid, trial.reason = False, f"invocation-{record.status}"
            return trial

        concurrency = int(point.get("concurrency", self.plan.throughput_concurrency))
        duration_s = self.plan.throughput_duration_s
        prime = self.provider.invoke(handle, payload, timeout_s)
        prime.seq = 0
        records = run_throughput(self.provider, handle, concurrency, duration_s, payload, timeout_s)
        trial = TrialResult(
            plan_id=self.plan.id, point=dict(point), trial_index=index, records=records
        )
        ok = sum(1 for r in records if r.ok)
        if duration_s > 0:
            trial.derived["req_per_s"] = ok / duration_s
        trial.derived["ok_records"] = float(ok)
        if ok == 0 and records:
            trial.valid, trial.reason = False, "all-invocations-failed"
        return trial


def run_plan(
    plan: ExperimentPlan,
    provider: Provider,
    run_dir: str | Path,
    workloads_root: str | Path | None = None,
    pacing_s: float | None = None,
    seed: int | None = None,
    progress: Callable[[str], None] | None = None,
) -> list[TrialResult]:
    """Run (or resume) a plan; see PlanRunner for the mechanics."""
    runner = PlanRunner(
        plan,
        provider,
        run_dir,
        workloads_root=workloads_root,
        pacing_s=pacing_s,
        seed=seed,
        progress=progress,
    )
    return runner.run()


# -- bundled sweeps ---------------------------------------------------------

def _bundled_plan_names() -> list[str]:
    root = resources.files("slsbench").joinpath("data/plans")
    return sorted(ref.name[: -len(".json")] for ref in root.iterdir() if ref.name.endswith(".json"))


def load_plan(source: str | Path) -> ExperimentPlan:
    """Load a plan from a bundled sweep name or a JSON file path."""
    path = Path(source)
    if path.is_file():
        return ExperimentPlan.from_dict(json.loads(path.read_text(encoding="utf-8")))
    ref = resources.files("slsbench").joinpath(f"data/plans/{source}.json")
    try:
        text = ref.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigurationError(
            f"no plan {source!r}; bundled sweeps: {', '.join(_bundled_plan_names())}"
        ) from None
    return ExperimentPlan.from_dict(json.loads(text))


def builtin_sweeps() -> list[ExperimentPlan]:
    """Ready-made sweeps: cold start by language, memory, and package size,
    plus latency-vs-memory for one micro and one macro workload."""
    return [load_plan(name) for name in _bundled_plan_names()]
