"""Command line surface: package, validate, deploy, invoke, run, report, clean.

Machine-readable results go to stdout, progress and diagnostics to stderr.
Exit codes: 0 success, 1 validation violations, 2 provider or runtime error,
3 bad usage.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
import tempfile
from pathlib import Path
from typing import Any

from slsbench.config import Config, load_config
from slsbench.engine import load_plan, run_plan
from slsbench.errors import ConfigurationError, NotFoundError, SlsBenchError
from slsbench.packaging import (
    BUILTIN_HANDLER_PREFIX,
    PackageArtifact,
    WorkloadManifest,
    artifact_from_archive,
    build_package,
    load_manifest,
)
from slsbench.platforms import (
    BUILTIN_PROFILE_NAMES,
    DeploymentSpec,
    get_profile,
    profile_to_dict,
    validate,
)
from slsbench.providers.base import Provider
from slsbench.providers.http import HttpProvider
from slsbench.providers.localsim import LocalSimProvider, load_sim_model
from slsbench.report import load_results, report

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_RUNTIME = 2
EXIT_USAGE = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; the contract here is 3."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="slsbench", description=__doc__)
    parser.add_argument("--config", help="config file (fallback: $SLSBENCH_CONFIG)")
    parser.add_argument("--output", help="output directory (fallback: $SLSBENCH_OUTPUT)")
    parser.add_argument("--seed", type=int, help="seed for all stochastic components")
    parser.add_argument("--profile-overlay", help="profile patch file, merged field-wise")
    parser.add_argument("--quiet", action="store_true", help="suppress progress on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("platforms", help="list or show platform profiles")
    psub = p.add_subparsers(dest="platforms_command", required=True)
    psub.add_parser("list", help="builtin profile names")
    show = psub.add_parser("show", help="print one profile as JSON")
    show.add_argument("name")

    v = sub.add_parser("validate", help="check a workload deployment against a platform")
    v.add_argument("workload", help="workload directory, suite name, or builtin:synthetic")
    v.add_argument("--platform", required=True)
    v.add_argument("--memory", type=int, default=128)
    v.add_argument("--language", default="")
    v.add_argument("--language-version", default="")
    v.add_argument("--timeout", type=int, default=60)
    v.add_argument("--region", default="")

    pk = sub.add_parser("package", help="build the deployable archive")
    pk.add_argument("workload")
    pk.add_argument("--out", help="directory for the archive")

    d = sub.add_parser("deploy", help="deploy a workload to a provider")
    d.add_argument("workload")
    d.add_argument("--provider", required=True, choices=["local-sim", "http"])
    d.add_argument("--memory", type=int, default=128)
    d.add_argument("--region", default="")
    d.add_argument("--language", default="")
    d.add_argument("--timeout", type=int, default=60)

    i = sub.add_parser("invoke", help="invoke a deployed function once")
    i.add_argument("function_id")
    i.add_argument("--payload", help="JSON file with the invocation payload")
    i.add_argument("--timeout", type=float, default=60.0)

    r = sub.add_parser("run", help="run an experiment plan (file or bundled name)")
    r.add_argument("plan")
    r.add_argument("--provider", help="override the plan's provider")

    s = sub.add_parser("sweep", help="run a bundled sweep by name")
    s.add_argument("name")
    s.add_argument("--provider", help="override the sweep's provider")

    rp = sub.add_parser("report", help="regenerate reports from a run directory")
    rp.add_argument("run_dir")
    rp.add_argument("--format", choices=["csv", "figures"], help="default: both")

    c = sub.add_parser("clean", help="remove run output")
    grp = c.add_mutually_exclusive_group(required=True)
    grp.add_argument("--all", action="store_true", help="remove the whole output directory")
    grp.add_argument("--run", metavar="PLAN_ID", help="remove one run directory")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.output:
            cfg.output = Path(args.output)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.profile_overlay:
            cfg.profile_overlay = Path(args.profile_overlay)
        return _dispatch(args, cfg)
    except SlsBenchError as exc:
        print(f"slsbench: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def _dispatch(args: argparse.Namespace, cfg: Config) -> int:
    handlers = {
        "platforms": cmd_platforms,
        "validate": cmd_validate,
        "package": cmd_package,
        "deploy": cmd_deploy,
        "invoke": cmd_invoke,
        "run": cmd_run,
        "sweep": cmd_run,
        "report": cmd_report,
        "clean": cmd_clean,
    }
    return handlers[args.command](args, cfg)


def _progress(args: argparse.Namespace):
    if args.quiet:
        return lambda line: None
    return lambda line: print(line, file=sys.stderr)


def _emit(doc: Any) -> None:
    print(json.dumps(doc, sort_keys=True, default=str))


# -- workload resolution -----------------------------------------------------

def _resolve_workload(arg: str, cfg: Config) -> tuple[Path | None, WorkloadManifest]:
    """Map a workload argument to (directory, manifest).

    Accepts a directory path, a bare name under the configured workloads root,
    or builtin:synthetic (no directory)."""
    if arg.startswith(BUILTIN_HANDLER_PREFIX):
        manifest = WorkloadManifest(id="synthetic", language_name="python", handler=arg)
        return None, manifest
    path = Path(arg)
    if not path.is_dir() and cfg.workloads_root is not None:
        candidate = cfg.workloads_root / arg
        if candidate.is_dir():
            path = candidate
    if not path.is_dir():
        raise NotFoundError(f"workload {arg!r} not found (looked in {cfg.workloads_root or '.'})")
    return path, load_manifest(path)


def _build_artifact(arg: str, cfg: Config, out: str | None = None) -> PackageArtifact:
    workload_dir, manifest = _resolve_workload(arg, cfg)
    out_dir = Path(out) if out else cfg.packages_dir
    if workload_dir is None:
        with tempfile.TemporaryDirectory(prefix="slsbench-pkg-") as tmp:
            tree = Path(tmp) / "tree"
            tree.mkdir()
            return build_package(tree, manifest, out_dir=out_dir)
    return build_package(workload_dir, manifest, out_dir=out_dir)


def _make_provider(name: str, cfg: Config) -> Provider:
    if name == "local-sim":
        return LocalSimProvider(
            model=load_sim_model(cfg.sim_model),
            profile=get_profile("local-sim", overlay=cfg.profile_overlay),
            seed=cfg.seed,
            on_limit=cfg.on_limit,
        )
    if name == "http":
        return HttpProvider(
            profile=get_profile(cfg.http_profile, overlay=cfg.profile_overlay),
            endpoints=cfg.http_endpoints,
            headers=cfg.http_headers,
            auth_token=cfg.http_auth_token,
        )
    raise ConfigurationError(f"unknown provider {name!r}; available: local-sim, http")


# -- commands ----------------------------------------------------------------

def cmd_platforms(args: argparse.Namespace, cfg: Config) -> int:
    if args.platforms_command == "list":
        for name in BUILTIN_PROFILE_NAMES:
            print(name)
        return EXIT_OK
    profile = get_profile(args.name, overlay=cfg.profile_overlay)
    print(json.dumps(profile_to_dict(profile), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, cfg: Config) -> int:
    _, manifest = _resolve_workload(args.workload, cfg)
    with tempfile.TemporaryDirectory(prefix="slsbench-validate-") as tmp:
        artifact = _build_artifact(args.workload, cfg, out=tmp)
        profile = get_profile(args.platform, overlay=cfg.profile_overlay)
        spec = DeploymentSpec(
            language_name=args.language or manifest.language_name,
            language_version=args.language_version or manifest.language_version,
            memory_mb=args.memory,
            timeout_s=args.timeout,
            region=args.region,
            trigger=manifest.trigger,
            package=artifact,
        )
        result = validate(profile, spec)
    if result.accepted:
        print("accepted")
        return EXIT_OK
    for violation in result.violations:
        print(violation)
    return EXIT_VIOLATIONS


def cmd_package(args: argparse.Namespace, cfg: Config) -> int:
    artifact = _build_artifact(args.workload, cfg, out=args.out)
    _emit(
        {
            "id": artifact.manifest.id,
            "archive": str(artifact.archive_path),
            "zip_bytes": artifact.zip_bytes,
            "unzipped_bytes": artifact.unzipped_bytes,
            "content_digest": artifact.content_digest,
        }
    )
    return EXIT_OK


def cmd_deploy(args: argparse.Namespace, cfg: Config) -> int:
    artifact = _build_artifact(args.workload, cfg)
    spec = DeploymentSpec(
        language_name=args.language or artifact.manifest.language_name,
        language_version=artifact.manifest.language_version,
        memory_mb=args.memory,
        timeout_s=args.timeout,
        region=args.region,
        trigger=artifact.manifest.trigger,
        package=artifact,
    )
    provider = _make_provider(args.provider, cfg)
    handle = provider.deploy(artifact, spec)
    cfg.handles_dir.mkdir(parents=True, exist_ok=True)
    handle_doc = {
        "function_id": handle.function_id,
        "provider": handle.provider,
        "endpoint": handle.endpoint,
        "spec": spec.to_dict(),
        "archive": str(artifact.archive_path),
    }
    (cfg.handles_dir / f"{handle.function_id}.json").write_text(
        json.dumps(handle_doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    _emit(handle_doc)
    return EXIT_OK


def cmd_invoke(args: argparse.Namespace, cfg: Config) -> int:
    handle_path = cfg.handles_dir / f"{args.function_id}.json"
    if not handle_path.is_file():
        raise NotFoundError(f"no deployed function {args.function_id!r} under {cfg.handles_dir}")
    doc = json.loads(handle_path.read_text(encoding="utf-8"))
    payload: dict[str, Any] = {}
    if args.payload:
        payload = json.loads(Path(args.payload).read_text(encoding="utf-8"))

    artifact = artifact_from_archive(doc["archive"])
    spec = DeploymentSpec.from_dict(doc["spec"], package=artifact)
    provider = _make_provider(doc["provider"], cfg)
    try:
        handle = provider.deploy(artifact, spec)
        record = provider.invoke(handle, payload, args.timeout)
    finally:
        if isinstance(provider, LocalSimProvider):
            provider.close()
    _emit(record.to_dict())
    return EXIT_OK if record.ok else EXIT_RUNTIME


def cmd_run(args: argparse.Namespace, cfg: Config) -> int:
    plan_arg = args.plan if args.command == "run" else args.name
    plan = load_plan(plan_arg)
    provider_name = args.provider or plan.provider
    provider = _make_provider(provider_name, cfg)
    run_dir = cfg.runs_dir / plan.id
    progress = _progress(args)
    try:
        results = run_plan(
            plan,
            provider,
            run_dir,
            workloads_root=cfg.workloads_root,
            pacing_s=cfg.pacing_s,
            seed=cfg.seed,
            progress=progress,
        )
    finally:
        if isinstance(provider, LocalSimProvider):
            provider.close()
    files = report(results, run_dir)
    valid = sum(1 for t in results if t.valid)
    _emit(
        {
            "run_dir": str(run_dir),
            "plan": plan.id,
            "provider": provider_name,
            "points": len({json.dumps(t.point, sort_keys=True) for t in results}),
            "trials": len(results),
            "valid": valid,
            "invalid": len(results) - valid,
            "files": [str(p) for p in files],
        }
    )
    return EXIT_OK


def cmd_report(args: argparse.Namespace, cfg: Config) -> int:
    run_dir = Path(args.run_dir)
    if not run_dir.is_dir():
        raise NotFoundError(f"run directory {run_dir} does not exist")
    results = load_results(run_dir)
    formats = (args.format,) if args.format else ("csv", "figures")
    files = report(results, run_dir, formats=formats)
    for path in files:
        print(path)
    return EXIT_OK


def cmd_clean(args: argparse.Namespace, cfg: Config) -> int:
    if args.all:
        target = cfg.output
    else:
        target = cfg.runs_dir / args.run
    if not target.exists():
        raise NotFoundError(f"{target} does not exist")
    shutil.rmtree(target)
    print(target)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
