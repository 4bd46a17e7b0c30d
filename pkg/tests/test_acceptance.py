"""Acceptance gate: one test per shipping criterion, tolerances pinned below.

Each test prints a single PASS line naming the criterion once its assertions
hold, so a verbose run reads as a checklist.
"""

import json
import os
import random
import subprocess
import sys
import time
from dataclasses import replace

import pytest

from simsupport import make_model
from slsbench.engine import load_plan, run_coldstart_trial, run_plan
from slsbench.errors import NoValidMemoryError, UnsupportedQueryError
from slsbench.packaging import (
    Dependency,
    PackageArtifact,
    WorkloadManifest,
    build_package,
)
from slsbench.platforms import (
    DeploymentSpec,
    builtin_profiles,
    cpu_share,
    snap_memory,
    validate,
)
from slsbench.providers import LocalSimProvider
from slsbench.report import nearest_rank, summaries, summarize

ESTIMATE_TOLERANCE_MS = 2.0       # jitter-free estimate vs injected truth
MEDIAN_TOLERANCE_REL = 0.10       # 20-trial median under 5% jitter
LANGUAGE_RATIO_BOUNDS = (6.0, 8.0)
IMPORT_RATIO_TARGET = 4.6
IMPORT_RATIO_TOLERANCE_REL = 0.15
RANDOM_INPUTS_PER_PROFILE = 1000
RANDOM_LISTS = 500
ESTIMATOR_BUDGET_S = 30.0
TRENDS_BUDGET_S = 300.0

SPEC_128 = DeploymentSpec(language_name="python", memory_mb=128, timeout_s=60)


def synthetic(tmp_path, tag="synthetic", dependencies=()):
    tree = tmp_path / tag
    tree.mkdir()
    manifest = WorkloadManifest(
        id=tag, language_name="python", handler="builtin:synthetic",
        dependencies=tuple(dependencies),
    )
    return build_package(tree, manifest, out_dir=tmp_path / "pkg")


def median_by_point(results):
    return {row.key: row.stats.median for row in summaries(results) if row.stats}


# -- criterion 1: cold start estimator exactness --------------------------------

def test_acceptance_coldstart_estimator_exactness(tmp_path):
    started = time.monotonic()
    model = make_model(
        base_ms=150.0,
        runtime_init_ms={"python": 30.0, "java": 100.0},
        load_bandwidth_bytes_per_ms=100000.0,
        mem_coeff_ms_mb=6400.0,
        warm_overhead_ms=5.0,
        jitter_eps=0.0,
    )
    plain = synthetic(tmp_path, "plain")
    importing = synthetic(
        tmp_path, "importing", dependencies=[Dependency("lib", 1048576, import_at_init=True)]
    )
    points = [
        # (artifact, spec, injected cold mean)
        (plain, SPEC_128, 150.0 + 30.0 + 6400.0 / 128),
        (plain, DeploymentSpec(language_name="java", memory_mb=256, timeout_s=60),
         150.0 + 100.0 + 6400.0 / 256),
        (importing, DeploymentSpec(language_name="python", memory_mb=512, timeout_s=60),
         150.0 + 30.0 + 1048576 / 100000.0 + 6400.0 / 512),
    ]
    with LocalSimProvider(model=model, temp_root=tmp_path / "sim") as provider:
        for artifact, spec, cold_mean in points:
            handle = provider.deploy(artifact, spec)
            trial = run_coldstart_trial(provider, handle, timeout_s=10.0)
            assert trial.valid, trial.reason
            injected = cold_mean - model.warm_overhead_ms
            estimate = trial.derived["coldstart_est_ms"]
            assert abs(estimate - injected) <= ESTIMATE_TOLERANCE_MS, (
                f"{spec.language_name}/{spec.memory_mb}: estimate {estimate:.3f} "
                f"vs injected {injected:.3f}"
            )

    jittered = replace(model, jitter_eps=0.05)
    truth = 150.0 + 30.0 + 6400.0 / 128 - jittered.warm_overhead_ms
    estimates = []
    with LocalSimProvider(model=jittered, temp_root=tmp_path / "sim2", seed=7) as provider:
        handle = provider.deploy(plain, SPEC_128)
        for _ in range(20):
            provider.force_cold(handle)
            trial = run_coldstart_trial(provider, handle, timeout_s=10.0)
            assert trial.valid, trial.reason
            estimates.append(trial.derived["coldstart_est_ms"])
    median = summarize(estimates).median
    assert abs(median - truth) / truth <= MEDIAN_TOLERANCE_REL, (
        f"median {median:.2f} vs truth {truth:.2f}"
    )

    elapsed = time.monotonic() - started
    assert elapsed < ESTIMATOR_BUDGET_S
    print(
        f"PASS estimator-exactness: 3 jitter-free points within {ESTIMATE_TOLERANCE_MS} ms, "
        f"20-trial median {median:.2f} vs {truth:.2f} ms, {elapsed:.1f} s"
    )


# -- criterion 2: configured trends recovered end-to-end -------------------------

def test_acceptance_trend_recovery_end_to_end(tmp_path):
    started = time.monotonic()

    # language sweep with java init configured at 7x python
    language_model = make_model(
        base_ms=0.0,
        runtime_init_ms={"python": 50.0, "nodejs": 60.0, "java": 350.0},
        mem_coeff_ms_mb=0.0,
        warm_overhead_ms=0.0,
        jitter_eps=0.05,
        seed=7,
    )
    with LocalSimProvider(model=language_model, temp_root=tmp_path / "lang") as provider:
        results = run_plan(load_plan("coldstart-language"), provider, tmp_path / "run-lang")
    medians = median_by_point(results)
    ratio = medians["language=java"] / medians["language=python"]
    low, high = LANGUAGE_RATIO_BOUNDS
    assert low <= ratio <= high, f"java/python median ratio {ratio:.2f} outside [{low}, {high}]"

    # memory sweep with a positive memory coefficient
    memory_model = make_model(
        base_ms=10.0,
        runtime_init_ms={"python": 10.0},
        mem_coeff_ms_mb=25600.0,
        warm_overhead_ms=2.0,
        jitter_eps=0.05,
        seed=7,
    )
    with LocalSimProvider(model=memory_model, temp_root=tmp_path / "mem") as provider:
        results = run_plan(load_plan("coldstart-memory"), provider, tmp_path / "run-mem")
    medians = median_by_point(results)
    ordered = [medians[f"memory_mb={mb}"] for mb in (128, 256, 512, 1024, 2048)]
    assert all(a > b for a, b in zip(ordered, ordered[1:])), (
        f"medians not strictly decreasing in memory: {ordered}"
    )

    # package sweep tuned so the 21.9 MB import variant costs 4.6x its twin
    numpy_bytes = 22963814
    base_cold_ms = 50.0
    package_model = make_model(
        base_ms=base_cold_ms,
        runtime_init_ms={"python": 0.0},
        load_bandwidth_bytes_per_ms=numpy_bytes / ((IMPORT_RATIO_TARGET - 1.0) * base_cold_ms),
        mem_coeff_ms_mb=0.0,
        warm_overhead_ms=0.0,
        jitter_eps=0.05,
        seed=7,
    )
    with LocalSimProvider(model=package_model, temp_root=tmp_path / "pkg") as provider:
        results = run_plan(load_plan("coldstart-package"), provider, tmp_path / "run-pkg")
    medians = median_by_point(results)
    for stem in ("pillow", "numpy", "opencv"):
        hot = medians[f"package_variant={stem}-import"]
        inert = medians[f"package_variant={stem}-noimport"]
        assert hot > inert, f"{stem}: import median {hot:.1f} not above no-import {inert:.1f}"
    observed = medians["package_variant=numpy-import"] / medians["package_variant=numpy-noimport"]
    assert abs(observed - IMPORT_RATIO_TARGET) / IMPORT_RATIO_TARGET <= IMPORT_RATIO_TOLERANCE_REL, (
        f"21.9 MB import/no-import ratio {observed:.2f} vs configured {IMPORT_RATIO_TARGET}"
    )

    elapsed = time.monotonic() - started
    assert elapsed < TRENDS_BUDGET_S
    print(
        f"PASS trend-recovery: language ratio {ratio:.2f}, memory medians {ordered[0]:.0f}.."
        f"{ordered[-1]:.1f} ms strictly decreasing, import ratio {observed:.2f}, {elapsed:.0f} s"
    )


# -- criterion 3: validation table and sizing oracles ------------------------------

def test_acceptance_validation_table(tmp_path):
    oversized = PackageArtifact(
        manifest=WorkloadManifest(id="ml-stack", language_name="python", handler="builtin:synthetic"),
        archive_path=tmp_path / "ml-stack.zip",
        zip_bytes=111568486,       # 106.4 MiB
        unzipped_bytes=693948826,  # 661.8 MiB
        content_digest="0" * 64,
    )
    verdicts = {}
    for profile in builtin_profiles():
        spec = DeploymentSpec(
            language_name="python",
            memory_mb=snap_memory(profile, 1536).memory_mb,
            timeout_s=60,
            package=oversized,
        )
        verdicts[profile.name] = validate(profile, spec).accepted
    assert verdicts == {"aws": False, "google": False, "alibaba": False, "azure": True}, verdicts

    rng = random.Random(20260816)
    checked = 0
    for profile in builtin_profiles():
        grid = profile.memory_values()
        for _ in range(RANDOM_INPUTS_PER_PROFILE):
            request = rng.randint(1, profile.memory_max_mb + 512)
            if profile.memory_grid.is_fixed:
                # nothing to select: the platform always answers its one size
                snap = snap_memory(profile, request)
                assert snap.memory_mb == grid[0]
                assert snap.forced == (request != grid[0])
            else:
                fits = [v for v in grid if v >= request]
                if fits:
                    assert snap_memory(profile, request).memory_mb == min(fits)
                else:
                    with pytest.raises(NoValidMemoryError):
                        snap_memory(profile, request)

            memory = rng.randint(1, profile.memory_max_mb * 2)
            full = profile.cpu_full_share_at_mb
            if full is None:
                with pytest.raises(UnsupportedQueryError):
                    cpu_share(profile, memory)
            else:
                cap = (
                    profile.cpu_share_cap
                    if profile.cpu_share_cap is not None
                    else profile.memory_max_mb / full
                )
                expected = min(memory / full, cap)
                assert cpu_share(profile, memory) == pytest.approx(expected, rel=1e-12)
            checked += 1
    print(
        f"PASS validation-table: oversized package rejected by aws/google/alibaba, "
        f"accepted by azure; {checked} random snap/cpu inputs match the enumeration oracle"
    )


# -- criterion 4: percentile oracle --------------------------------------------------

def test_acceptance_statistics_oracle():
    rng = random.Random(41)

    def brute_force(values, p):
        ordered = sorted(values)
        n = len(ordered)
        for k in range(1, n + 1):
            if k >= p * n:
                return ordered[k - 1]
        return ordered[-1]

    for _ in range(RANDOM_LISTS):
        n = rng.randint(1, 100)
        values = [rng.uniform(-1e6, 1e6) for _ in range(n)]
        ordered = sorted(values)
        for p in (0.25, 0.50, 0.75, 0.95, rng.uniform(0.01, 0.99)):
            assert nearest_rank(ordered, p) == brute_force(values, p)
        stats = summarize(values)
        assert stats.p25 == brute_force(values, 0.25)
        assert stats.median == brute_force(values, 0.50)
        assert stats.p75 == brute_force(values, 0.75)
        assert stats.p95 == brute_force(values, 0.95)
        assert stats.min == ordered[0] and stats.max == ordered[-1]
    print(
        f"PASS statistics-oracle: nearest-rank percentiles equal the sort-based "
        f"oracle on {RANDOM_LISTS} random lists, zero tolerance"
    )


# -- criterion 5: seeded end-to-end determinism ----------------------------------------

def test_acceptance_seeded_determinism(tmp_path):
    def sweep(out_dir):
        env = {k: v for k, v in os.environ.items() if not k.startswith("SLSBENCH_")}
        proc = subprocess.run(
            [
                sys.executable, "-m", "slsbench.cli",
                "--output", str(out_dir), "--seed", "7", "--quiet",
                "sweep", "coldstart-memory", "--provider", "local-sim",
            ],
            capture_output=True,
            text=True,
            cwd=tmp_path,
            env=env,
            timeout=300,
        )
        assert proc.returncode == 0, proc.stderr
        run_dir = out_dir / "runs" / "coldstart-memory"
        figures = sorted(p.name for p in (run_dir / "figures").iterdir())
        return run_dir, figures

    first_dir, first_figures = sweep(tmp_path / "o1")
    second_dir, second_figures = sweep(tmp_path / "o2")

    first_csv = (first_dir / "report.csv").read_bytes()
    assert first_csv == (second_dir / "report.csv").read_bytes()
    assert len(first_csv.splitlines()) == 6  # header + one row per memory point

    assert first_figures == second_figures and first_figures
    for name in first_figures:
        assert (first_dir / "figures" / name).read_bytes() == (
            second_dir / "figures" / name
        ).read_bytes()
    print(
        f"PASS seeded-determinism: two seeded sweeps agree byte-for-byte on report.csv "
        f"and {len(first_figures)} figure file(s)"
    )


# -- criterion 6: crash resume ------------------------------------------------------------

class CrashingProvider(LocalSimProvider):
    """Dies with an unhandled error after a fixed number of invocations."""

    def __init__(self, crash_after, **kwargs):
        super().__init__(**kwargs)
        self.crash_after = crash_after
        self.calls = 0

    def invoke(self, handle, payload, timeout_s):
        self.calls += 1
        if self.calls > self.crash_after:
            raise RuntimeError("simulated mid-run crash")
        return super().invoke(handle, payload, timeout_s)


def test_acceptance_crash_resume(tmp_path):
    plan_doc = {
        "id": "resume-check",
        "provider": "local-sim",
        "workload": "builtin:synthetic",
        "protocol": "coldstart-pair",
        "repetitions": 4,
        "axes": [{"name": "memory_mb", "values": [128, 256, 512]}],
    }
    plan_path = tmp_path / "plan.json"
    plan_path.write_text(json.dumps(plan_doc))
    plan = load_plan(plan_path)

    fast = dict(base_ms=3.0, warm_overhead_ms=1.0)

    with LocalSimProvider(model=make_model(**fast), temp_root=tmp_path / "ref") as provider:
        uninterrupted = run_plan(plan, provider, tmp_path / "run-ref")
    assert len(uninterrupted) == 12

    # crash partway through the second point: 8 invocations finish the first
    # point, the next trials of point two are lost with their point incomplete
    crasher = CrashingProvider(crash_after=10, model=make_model(**fast), temp_root=tmp_path / "c")
    try:
        with pytest.raises(RuntimeError, match="crash"):
            run_plan(plan, crasher, tmp_path / "run")
    finally:
        crasher.close()

    with LocalSimProvider(model=make_model(**fast), temp_root=tmp_path / "r2") as provider:
        resumed = run_plan(plan, provider, tmp_path / "run")

    assert len(resumed) == len(uninterrupted) == 12
    per_point = {}
    for trial in resumed:
        per_point[trial.point["memory_mb"]] = per_point.get(trial.point["memory_mb"], 0) + 1
    assert per_point == {128: 4, 256: 4, 512: 4}
    assert all(t.valid for t in resumed)
    print(
        "PASS crash-resume: interrupted run resumed to 12/12 trials, "
        "matching the uninterrupted count"
    )
