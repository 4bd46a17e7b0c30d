"""Platform limit profiles and the deployment questions asked of them.

A PlatformProfile is a machine-checkable record of one provider's limits and
scaling rules. Profiles ship as JSON documents under ``data/profiles/`` and can
be patched field-wise with a user overlay file (overlay wins); code never
hardcodes a limit. Answers offered here: does a deployment fit the limits,
which grid value does a memory request land on, what CPU fraction does a
memory size buy, and what would an execution cost under a given rate card.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Any

from slsbench.errors import (
    ConfigurationError,
    NotFoundError,
    NoValidMemoryError,
    UnsupportedQueryError,
)

if TYPE_CHECKING:
    from slsbench.packaging import PackageArtifact

_LANGUAGE_STATUSES = ("supported", "beta", "deprecated")
_BILLING_MODES = ("allocated-memory", "consumed-memory")
_TRIGGERS = ("http", "timer", "storage")


@dataclass(frozen=True)
class LanguageSupport:
    """One runtime language row: empty versions means any version is accepted."""

    name: str
    versions: tuple[str, ...] = ()
    status: str = "supported"

    def __post_init__(self):
        if self.status not in _LANGUAGE_STATUSES:
            raise ValueError(f"unknown language status {self.status!r}")


@dataclass(frozen=True)
class MemoryGrid:
    """The discrete memory sizes a platform permits.

    Exactly one of step_mb / values / fixed_mb is set. ``fixed`` models
    platforms where the developer cannot select memory at all.
    """

    step_mb: int | None = None
    values: tuple[int, ...] = ()
    fixed_mb: int | None = None

    def __post_init__(self):
        set_kinds = sum([self.step_mb is not None, bool(self.values), self.fixed_mb is not None])
        if set_kinds != 1:
            raise ValueError("memory grid must be exactly one of step/values/fixed")
        if self.step_mb is not None and self.step_mb <= 0:
            raise ValueError("step_mb must be positive")

    @property
    def is_fixed(self) -> bool:
        return self.fixed_mb is not None

    def enumerate(self, min_mb: int, max_mb: int) -> tuple[int, ...]:
        """All selectable grid values, ascending."""
        if self.fixed_mb is not None:
            return (self.fixed_mb,)
        if self.values:
            return tuple(sorted(self.values))
        return tuple(range(min_mb, max_mb + 1, self.step_mb))


@dataclass(frozen=True)
class PlatformProfile:
    """Limits and scaling rules of one serverless platform.

    Byte/second limits left as None are effectively unlimited; None for
    cpu_full_share_at_mb means the platform publishes no CPU/memory ratio.
    instance_concurrency: 1 = one execution per instance, 0 = the instance
    runs many executions by sharing its resources (exact count unpublished).
    """

    name: str
    languages: tuple[LanguageSupport, ...]
    memory_min_mb: int
    memory_max_mb: int
    memory_grid: MemoryGrid
    timeout_max_s: int
    local_disk_mb: int
    regions: tuple[str, ...]
    runtime_os: tuple[str, ...]
    billing_mode: str
    cpu_full_share_at_mb: int | None = None
    package_zip_limit_bytes: int | None = None
    package_unzipped_limit_bytes: int | None = None
    payload_limit_bytes: int | None = None
    instance_concurrency: int = 1
    instance_limit: int | None = None
    cpu_share_cap: float | None = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.memory_min_mb > self.memory_max_mb:
            raise ValueError("memory_min_mb exceeds memory_max_mb")
        for value in self.memory_grid.enumerate(self.memory_min_mb, self.memory_max_mb):
            if not self.memory_min_mb <= value <= self.memory_max_mb:
                raise ValueError(f"grid value {value} outside [{self.memory_min_mb}, {self.memory_max_mb}]")
        for attr in (
            "timeout_max_s",
            "local_disk_mb",
            "package_zip_limit_bytes",
            "package_unzipped_limit_bytes",
            "payload_limit_bytes",
            "instance_limit",
        ):
            limit = getattr(self, attr)
            if limit is not None and limit <= 0:
                raise ValueError(f"{attr} must be strictly positive, got {limit}")
        if self.cpu_full_share_at_mb is not None and not (
            self.memory_min_mb <= self.cpu_full_share_at_mb <= self.memory_max_mb
        ):
            raise ValueError("cpu_full_share_at_mb outside the memory range")
        if self.billing_mode not in _BILLING_MODES:
            raise ValueError(f"unknown billing mode {self.billing_mode!r}")

    def memory_values(self) -> tuple[int, ...]:
        return self.memory_grid.enumerate(self.memory_min_mb, self.memory_max_mb)

    def language(self, name: str) -> LanguageSupport | None:
        for lang in self.languages:
            if lang.name == name:
                return lang
        return None


@dataclass(frozen=True)
class DeploymentSpec:
    """What the user asks a platform to run: runtime, sizing, placement, package."""

    language_name: str
    language_version: str = ""
    memory_mb: int = 128
    timeout_s: int = 60
    region: str = ""
    trigger: str = "http"
    package: "PackageArtifact | None" = None

    def __post_init__(self):
        if self.memory_mb <= 0:
            raise ValueError("memory_mb must be positive")
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")
        if self.trigger not in _TRIGGERS:
            raise ValueError(f"unknown trigger {self.trigger!r}")

    def key(self) -> str:
        """Canonical identity of this spec, excluding the package (paired separately)."""
        return "|".join(
            [
                self.language_name,
                self.language_version,
                str(self.memory_mb),
                str(self.timeout_s),
                self.region,
                self.trigger,
            ]
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "language": {"name": self.language_name, "version": self.language_version},
            "memory_mb": self.memory_mb,
            "timeout_s": self.timeout_s,
            "region": self.region,
            "trigger": self.trigger,
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any], package: "PackageArtifact | None" = None) -> "DeploymentSpec":
        lang = doc.get("language", {})
        return cls(
            language_name=lang.get("name", ""),
            language_version=lang.get("version", ""),
            memory_mb=doc.get("memory_mb", 128),
            timeout_s=doc.get("timeout_s", 60),
            region=doc.get("region", ""),
            trigger=doc.get("trigger", "http"),
            package=package,
        )


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    profile_name: str
    violations: tuple[Violation, ...] = ()

    @property
    def accepted(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}


@dataclass(frozen=True)
class MemorySnap:
    """Result of snapping a memory request onto a grid.

    forced is True when a fixed (non-selectable) grid ignored the request.
    """

    memory_mb: int
    forced: bool = False


@dataclass(frozen=True)
class RateCard:
    """User-supplied billing rates; no vendor pricing is bundled."""

    per_gb_second: float
    per_invocation: float = 0.0
    currency: str = "USD"


def validate(profile: PlatformProfile, spec: DeploymentSpec) -> ValidationReport:
    """Check a deployment spec against a profile; every violated limit is reported.

    Violations are data, not errors: an empty list means accept.
    """
    violations: list[Violation] = []

    lang = profile.language(spec.language_name)
    if lang is None or lang.status == "deprecated":
        state = "deprecated on" if lang is not None else "not supported by"
        violations.append(
            Violation("language", f"language {spec.language_name!r} is {state} {profile.name}")
        )
    elif spec.language_version and lang.versions and spec.language_version not in lang.versions:
        violations.append(
            Violation(
                "language-version",
                f"{spec.language_name} {spec.language_version} not offered "
                f"(has: {', '.join(lang.versions)})",
            )
        )

    if not profile.memory_grid.is_fixed:
        if spec.memory_mb < profile.memory_min_mb or spec.memory_mb > profile.memory_max_mb:
            violations.append(
                Violation(
                    "memory-range",
                    f"memory {spec.memory_mb} MB outside "
                    f"[{profile.memory_min_mb}, {profile.memory_max_mb}] MB",
                )
            )
        elif spec.memory_mb not in profile.memory_values():
            violations.append(
                Violation("memory-grid", f"memory {spec.memory_mb} MB is not a selectable grid value")
            )

    if spec.timeout_s > profile.timeout_max_s:
        violations.append(
            Violation(
                "timeout",
                f"timeout {spec.timeout_s} s exceeds the {profile.timeout_max_s} s limit",
            )
        )

    if spec.package is not None:
        zl = profile.package_zip_limit_bytes
        ul = profile.package_unzipped_limit_bytes
        if zl is not None and spec.package.zip_bytes > zl:
            violations.append(
                Violation(
                    "package-zip",
                    f"zipped package {spec.package.zip_bytes} B exceeds the {zl} B limit",
                )
            )
        if ul is not None and spec.package.unzipped_bytes > ul:
            violations.append(
                Violation(
                    "package-unzipped",
                    f"unzipped package {spec.package.unzipped_bytes} B exceeds the {ul} B limit",
                )
            )

    if spec.region and spec.region not in profile.regions:
        violations.append(
            Violation("region", f"region {spec.region!r} is not offered by {profile.name}")
        )

    return ValidationReport(profile_name=profile.name, violations=tuple(violations))


def snap_memory(profile: PlatformProfile, requested_mb: int) -> MemorySnap:
    """Smallest grid value >= requested_mb.

    A fixed grid always answers its single value, flagged as forced since the
    request had no effect. Raises NoValidMemoryError when the request exceeds
    every grid value on a selectable grid.
    """
    if requested_mb <= 0:
        raise ValueError("requested_mb must be positive")
    if profile.memory_grid.is_fixed:
        fixed = profile.memory_grid.fixed_mb
        return MemorySnap(memory_mb=fixed, forced=requested_mb != fixed)
    for value in profile.memory_values():
        if value >= requested_mb:
            return MemorySnap(memory_mb=value)
    raise NoValidMemoryError(
        f"{requested_mb} MB exceeds the largest {profile.name} grid value "
        f"({profile.memory_values()[-1]} MB)"
    )


def cpu_share(profile: PlatformProfile, memory_mb: int) -> float:
    """Fraction of one CPU granted at memory_mb: proportional, capped.

    The cap defaults to the share the maximum memory buys (not clamped to 1.0);
    a profile may narrow it via cpu_share_cap.
    """
    if profile.cpu_full_share_at_mb is None:
        raise UnsupportedQueryError(f"{profile.name} publishes no CPU/memory proportionality point")
    cap = profile.cpu_share_cap
    if cap is None:
        cap = profile.memory_max_mb / profile.cpu_full_share_at_mb
    return min(memory_mb / profile.cpu_full_share_at_mb, cap)


def estimate_cost(
    profile: PlatformProfile,
    memory_mb: int,
    duration_s: float,
    consumed_mb: float,
    invocations: int,
    rate_card: RateCard | None,
) -> float:
    """GB-second cost plus per-invocation cost under the profile's billing mode.

    allocated-memory bills the configured memory; consumed-memory bills what
    the executions actually used.
    """
    if rate_card is None:
        raise ConfigurationError("estimate_cost requires a rate card (per-GB-second and per-invocation rates)")
    billed_mb = memory_mb if profile.billing_mode == "allocated-memory" else consumed_mb
    gb_seconds = (billed_mb / 1024.0) * duration_s * invocations
    return gb_seconds * rate_card.per_gb_second + invocations * rate_card.per_invocation


# --- profile documents -------------------------------------------------------

BUILTIN_PROFILE_NAMES = ("alibaba", "aws", "azure", "google")


def profile_from_dict(doc: dict[str, Any]) -> PlatformProfile:
    doc = dict(doc)
    grid_doc = doc.pop("memory_grid")
    if "step_mb" in grid_doc:
        grid = MemoryGrid(step_mb=grid_doc["step_mb"])
    elif "values" in grid_doc:
        grid = MemoryGrid(values=tuple(grid_doc["values"]))
    else:
        grid = MemoryGrid(fixed_mb=grid_doc["fixed_mb"])
    languages = tuple(
        LanguageSupport(
            name=lang["name"],
            versions=tuple(lang.get("versions", ())),
            status=lang.get("status", "supported"),
        )
        for lang in doc.pop("languages")
    )
    return PlatformProfile(
        memory_grid=grid,
        languages=languages,
        regions=tuple(doc.pop("regions")),
        runtime_os=tuple(doc.pop("runtime_os")),
        notes=tuple(doc.pop("notes", ())),
        **doc,
    )


def profile_to_dict(profile: PlatformProfile) -> dict[str, Any]:
    grid = profile.memory_grid
    if grid.fixed_mb is not None:
        grid_doc: dict[str, Any] = {"fixed_mb": grid.fixed_mb}
    elif grid.values:
        grid_doc = {"values": list(grid.values)}
    else:
        grid_doc = {"step_mb": grid.step_mb}
    doc: dict[str, Any] = {
        "name": profile.name,
        "languages": [
            {"name": lang.name, "versions": list(lang.versions), "status": lang.status}
            for lang in profile.languages
        ],
        "memory_min_mb": profile.memory_min_mb,
        "memory_max_mb": profile.memory_max_mb,
        "memory_grid": grid_doc,
        "timeout_max_s": profile.timeout_max_s,
        "local_disk_mb": profile.local_disk_mb,
        "regions": list(profile.regions),
        "runtime_os": list(profile.runtime_os),
        "billing_mode": profile.billing_mode,
        "instance_concurrency": profile.instance_concurrency,
        "notes": list(profile.notes),
    }
    for attr in (
        "cpu_full_share_at_mb",
        "package_zip_limit_bytes",
        "package_unzipped_limit_bytes",
        "payload_limit_bytes",
        "instance_limit",
        "cpu_share_cap",
    ):
        value = getattr(profile, attr)
        if value is not None:
            doc[attr] = value
    return doc


def _read_bundled(name: str) -> dict[str, Any]:
    ref = resources.files("slsbench").joinpath(f"data/profiles/{name}.json")
    return json.loads(ref.read_text(encoding="utf-8"))


def load_profile(source: str | Path, overlay: str | Path | None = None) -> PlatformProfile:
    """Load a profile by builtin name or file path, optionally patched by an overlay file.

    Overlay documents merge field-wise at the top level; an overlay field
    replaces the base field wholesale.
    """
    source = str(source)
    if source in BUILTIN_PROFILE_NAMES or source == "local-sim":
        doc = _read_bundled(source)
    else:
        doc = json.loads(Path(source).read_text(encoding="utf-8"))
    if overlay is not None:
        patch = json.loads(Path(overlay).read_text(encoding="utf-8"))
        doc = merge_overlay(doc, patch)
    return profile_from_dict(doc)


def merge_overlay(base: dict[str, Any], overlay: dict[str, Any]) -> dict[str, Any]:
    """Field-wise merge; the overlay wins on every key it sets."""
    merged = dict(base)
    merged.update(overlay)
    return merged


def builtin_profiles(overlay: str | Path | None = None) -> list[PlatformProfile]:
    """The four bundled platform profiles, alphabetical by name.

    Only limits published in prose are filled in; payload, process/thread and
    file-descriptor limits are intentionally absent and come from an overlay.
    """
    return [load_profile(name, overlay=overlay) for name in BUILTIN_PROFILE_NAMES]


def get_profile(name: str, overlay: str | Path | None = None) -> PlatformProfile:
    """Resolve a profile: builtin name, the simulator profile, or a JSON file path."""
    if name in BUILTIN_PROFILE_NAMES or name == "local-sim" or Path(name).is_file():
        return load_profile(name, overlay=overlay)
    raise NotFoundError(
        f"no profile named {name!r}; builtins: {', '.join(BUILTIN_PROFILE_NAMES)}, local-sim"
    )
