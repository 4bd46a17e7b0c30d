"""Workload manifests and reproducible zip packaging.

An archive is built so that the same input tree always yields the same bytes:
members are sorted, timestamps zeroed, permissions fixed. The archive digest
is therefore a cache key for skip-redeploy logic. Package-size sweep variants
are derived from a base artifact by injecting an inert, incompressible
dependency directory of the requested size.
"""

from __future__ import annotations

import hashlib
import json
import random
import tempfile
import zipfile
import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from slsbench.errors import PackagingError

MANIFEST_NAME = "workload.manifest"
_PAD_DIR = "vendor"
_PAD_FILE = "padding.bin"

_TRIGGERS = ("http", "timer", "storage")
BUILTIN_HANDLER_PREFIX = "builtin:"


@dataclass(frozen=True)
class Dependency:
    """A library the workload ships: its on-disk weight and whether init imports it."""

    name: str
    bytes_on_disk: int
    import_at_init: bool = False

    def __post_init__(self):
        if self.bytes_on_disk < 0:
            raise ValueError("dependency size must be >= 0")


@dataclass(frozen=True)
class WorkloadManifest:
    """Description of one workload: identity, runtime, entry point, parameters.

    handler is either a file path relative to the workload directory or
    ``builtin:<name>`` naming a synthetic workload that ships no code.
    """

    id: str
    language_name: str
    language_version: str = ""
    handler: str = ""
    trigger: str = "http"
    params: dict[str, Any] = field(default_factory=dict)
    dependencies: tuple[Dependency, ...] = ()
    expected_output_schema: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValueError("manifest id must be non-empty")
        if not self.handler:
            raise ValueError("manifest handler must be non-empty")
        if self.trigger not in _TRIGGERS:
            raise ValueError(f"unknown trigger {self.trigger!r}")

    @property
    def is_builtin(self) -> bool:
        return self.handler.startswith(BUILTIN_HANDLER_PREFIX)

    def imported_bytes(self) -> int:
        """Bytes of dependencies the handler loads at initialization."""
        return sum(d.bytes_on_disk for d in self.dependencies if d.import_at_init)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "language": {"name": self.language_name, "version": self.language_version},
            "handler": self.handler,
            "trigger": self.trigger,
            "params": self.params,
            "dependencies": [
                {"name": d.name, "bytes_on_disk": d.bytes_on_disk, "import_at_init": d.import_at_init}
                for d in self.dependencies
            ],
            "expected_output_schema": list(self.expected_output_schema),
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "WorkloadManifest":
        lang = doc.get("language", {})
        return cls(
            id=doc["id"],
            language_name=lang.get("name", ""),
            language_version=lang.get("version", ""),
            handler=doc["handler"],
            trigger=doc.get("trigger", "http"),
            params=dict(doc.get("params", {})),
            dependencies=tuple(
                Dependency(
                    name=d["name"],
                    bytes_on_disk=d["bytes_on_disk"],
                    import_at_init=d.get("import_at_init", False),
                )
                for d in doc.get("dependencies", ())
            ),
            expected_output_schema=tuple(doc.get("expected_output_schema", ())),
        )

    def serialize(self) -> bytes:
        return (json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n").encode("utf-8")


def load_manifest(workload_dir: str | Path) -> WorkloadManifest:
    path = Path(workload_dir) / MANIFEST_NAME
    if not path.is_file():
        raise PackagingError(f"no {MANIFEST_NAME} in {workload_dir}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PackagingError(f"unparseable manifest {path}: {exc}") from exc
    return WorkloadManifest.from_dict(doc)


def write_manifest(workload_dir: str | Path, manifest: WorkloadManifest) -> Path:
    path = Path(workload_dir) / MANIFEST_NAME
    path.write_bytes(manifest.serialize())
    return path


@dataclass(frozen=True)
class PackageArtifact:
    manifest: WorkloadManifest
    archive_path: Path
    zip_bytes: int
    unzipped_bytes: int
    content_digest: str


def build_package(
    workload_dir: str | Path,
    manifest: WorkloadManifest,
    out_dir: str | Path | None = None,
) -> PackageArtifact:
    """Zip a workload directory into a reproducible archive.

    The manifest always travels inside the archive as ``workload.manifest``.
    When the directory already holds that file it must agree with the passed
    manifest and its exact bytes are kept, so extraction reproduces the input
    tree byte-for-byte.
    """
    workload_dir = Path(workload_dir)
    if not workload_dir.is_dir():
        raise PackagingError(f"workload directory {workload_dir} does not exist")
    if not manifest.is_builtin:
        handler_path = workload_dir / manifest.handler
        if not handler_path.is_file():
            raise PackagingError(f"handler file {manifest.handler!r} missing from {workload_dir}")

    on_disk = workload_dir / MANIFEST_NAME
    manifest_bytes = manifest.serialize()
    if on_disk.is_file():
        disk_doc = json.loads(on_disk.read_text(encoding="utf-8"))
        if disk_doc != manifest.to_dict():
            raise PackagingError(
                f"{MANIFEST_NAME} on disk disagrees with the manifest being packaged"
            )
        manifest_bytes = on_disk.read_bytes()

    out_dir = Path(out_dir) if out_dir is not None else workload_dir.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    archive_path = out_dir / f"{manifest.id}.zip"

    members: list[tuple[str, Path]] = []
    for path in sorted(workload_dir.rglob("*")):
        if not path.is_file():
            continue
        rel = path.relative_to(workload_dir).as_posix()
        if rel == MANIFEST_NAME or "__pycache__" in path.parts:
            continue
        members.append((rel, path))

    unzipped = 0
    with zipfile.ZipFile(archive_path, "w", zipfile.ZIP_DEFLATED, compresslevel=6) as zf:
        for arcname, data in _ordered_members(members, manifest_bytes):
            info = zipfile.ZipInfo(arcname, date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            zf.writestr(info, data)
            unzipped += len(data)

    raw = archive_path.read_bytes()
    return PackageArtifact(
        manifest=manifest,
        archive_path=archive_path,
        zip_bytes=len(raw),
        unzipped_bytes=unzipped,
        content_digest=hashlib.sha256(raw).hexdigest(),
    )


def _ordered_members(
    members: list[tuple[str, Path]], manifest_bytes: bytes
) -> list[tuple[str, bytes]]:
    entries = [(arcname, path.read_bytes()) for arcname, path in members]
    entries.append((MANIFEST_NAME, manifest_bytes))
    entries.sort(key=lambda e: e[0])
    return entries


def extract_package(artifact: PackageArtifact, dest: str | Path) -> Path:
    dest = Path(dest)
    with zipfile.ZipFile(artifact.archive_path) as zf:
        zf.extractall(dest)
    return dest


def artifact_from_archive(archive_path: str | Path) -> PackageArtifact:
    """Rehydrate an artifact from an archive built by build_package."""
    archive_path = Path(archive_path)
    if not archive_path.is_file():
        raise PackagingError(f"archive {archive_path} does not exist")
    raw = archive_path.read_bytes()
    with zipfile.ZipFile(archive_path) as zf:
        names = zf.namelist()
        if MANIFEST_NAME not in names:
            raise PackagingError(f"{archive_path} carries no {MANIFEST_NAME}")
        manifest = WorkloadManifest.from_dict(json.loads(zf.read(MANIFEST_NAME)))
        unzipped = sum(zf.getinfo(name).file_size for name in names)
    return PackageArtifact(
        manifest=manifest,
        archive_path=archive_path,
        zip_bytes=len(raw),
        unzipped_bytes=unzipped,
        content_digest=hashlib.sha256(raw).hexdigest(),
    )


@dataclass(frozen=True)
class SizeVariant:
    """One point of a package-size sweep: label, extra bytes, import toggle."""

    label: str
    padding_bytes: int
    import_at_init: bool = True

    def __post_init__(self):
        if self.padding_bytes < 0:
            raise ValueError("padding size must be >= 0")


def make_size_variants(
    base: PackageArtifact,
    variants: list[SizeVariant],
    out_dir: str | Path | None = None,
) -> list[PackageArtifact]:
    """Build one artifact per variant by padding the base tree.

    Padding is a pseudo-random (incompressible) file under an inert dependency
    directory, seeded from the variant label so rebuilds are identical. A
    zero-padding variant changes nothing but the manifest id.
    """
    out_dir = Path(out_dir) if out_dir is not None else base.archive_path.parent
    artifacts = []
    for variant in variants:
        with tempfile.TemporaryDirectory(prefix="slsbench-variant-") as tmp:
            tree = Path(tmp) / "tree"
            extract_package(base, tree)
            (tree / MANIFEST_NAME).unlink()

            manifest = base.manifest
            if variant.padding_bytes > 0:
                pad_rel = Path(_PAD_DIR) / variant.label / _PAD_FILE
                pad_path = tree / pad_rel
                pad_path.parent.mkdir(parents=True, exist_ok=True)
                pad_path.write_bytes(_padding_payload(variant.label, variant.padding_bytes))
                manifest = replace(
                    manifest,
                    dependencies=manifest.dependencies
                    + (
                        Dependency(
                            name=variant.label,
                            bytes_on_disk=variant.padding_bytes,
                            import_at_init=variant.import_at_init,
                        ),
                    ),
                )
            manifest = replace(manifest, id=f"{base.manifest.id}-{variant.label}")
            artifacts.append(build_package(tree, manifest, out_dir=out_dir))
    return artifacts


def _padding_payload(label: str, size: int) -> bytes:
    seed = zlib.crc32(label.encode("utf-8"))
    return random.Random(seed).randbytes(size)


def measure_tree(root: str | Path) -> int:
    """Independent size measurement: sum of file sizes under root."""
    return sum(p.stat().st_size for p in Path(root).rglob("*") if p.is_file())
