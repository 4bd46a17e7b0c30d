#!/usr/bin/env python3
"""Block-wise file writer, dd style.

Streams a seeded pseudo-random byte stream to one file in the scratch dir
and reports write throughput. The stream is reproducible from the seed, so
a verifier can regenerate it and compare digests without reading the file
back over the wire.
"""

import hashlib
import json
import os
import random
import sys
import tempfile
import time
from pathlib import Path

SENTINEL = ".first-run-sentinel"
MIB = 1024 * 1024


def scratch_dir() -> Path:
    return Path(os.environ.get("SLSBENCH_SCRATCH_DIR") or tempfile.gettempdir())


def probe_first_run() -> bool:
    marker = scratch_dir() / SENTINEL
    if marker.exists():
        return False
    marker.touch()
    return True


def fail(message: str):
    print(message, file=sys.stderr)
    raise SystemExit(1)


def disk_quota_mb() -> float:
    raw = os.environ.get("SLSBENCH_DISK_QUOTA_MB")
    return float(raw) if raw else float("inf")


def run(params: dict) -> tuple:
    total = int(params.get("bytes", 16 * MIB))
    block = int(params.get("block", MIB))
    seed = int(params.get("seed", 7))
    if total < 0:
        fail(f"bytes must be >= 0, got {total}")
    if block < 1:
        fail(f"block must be >= 1, got {block}")
    quota = disk_quota_mb()
    if total > quota * MIB:
        fail(f"{total} bytes requested but the scratch quota is {quota:g} MB")

    rng = random.Random(seed)
    digest = hashlib.sha256()
    path = scratch_dir() / "dd.out"
    blocks = 0
    t0 = time.perf_counter()
    with open(path, "wb") as fh:
        remaining = total
        while remaining > 0:
            chunk = rng.randbytes(min(block, remaining))
            fh.write(chunk)
            digest.update(chunk)
            remaining -= len(chunk)
            blocks += 1
        fh.flush()
        os.fsync(fh.fileno())
    elapsed = time.perf_counter() - t0

    mb_s = (total / 1e6) / elapsed if total > 0 and elapsed > 0 else 0.0
    result = {
        "bytes_written": total,
        "blocks": blocks,
        "block": block,
        "sha256": digest.hexdigest(),
    }
    return result, {"write_mb_s": mb_s}


def main():
    raw = sys.stdin.read()
    params = json.loads(raw) if raw.strip() else {}
    first = probe_first_run()
    t0 = time.perf_counter()
    result, metrics = run(params)
    exec_ms = (time.perf_counter() - t0) * 1000.0
    json.dump({"result": result, "exec_ms": exec_ms, "first_run": first, "metrics": metrics}, sys.stdout)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
