"""Provider-agnostic serverless benchmarking: platform limit profiles,
reproducible packaging, a provider adapter contract with a deterministic
local simulator, measurement protocols, and median-centric reporting."""

__version__ = "0.1.0"

from slsbench.engine import (
    Axis,
    ExperimentPlan,
    TrialResult,
    builtin_sweeps,
    load_plan,
    run_coldstart_trial,
    run_plan,
    run_throughput,
)
from slsbench.packaging import (
    Dependency,
    PackageArtifact,
    SizeVariant,
    WorkloadManifest,
    build_package,
    load_manifest,
    make_size_variants,
    write_manifest,
)
from slsbench.platforms import (
    DeploymentSpec,
    MemoryGrid,
    MemorySnap,
    PlatformProfile,
    RateCard,
    ValidationReport,
    Violation,
    builtin_profiles,
    cpu_share,
    estimate_cost,
    get_profile,
    load_profile,
    snap_memory,
    validate,
)
from slsbench.providers import (
    DeploymentHandle,
    HttpProvider,
    InvocationRecord,
    LocalSimProvider,
    Provider,
    SimModel,
    load_sim_model,
    sim_cold_latency,
)
from slsbench.report import (
    FigureSpec,
    MetricsSummary,
    derive_metric,
    report,
    summaries,
    summarize,
)
