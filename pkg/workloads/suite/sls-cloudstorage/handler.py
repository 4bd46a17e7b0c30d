#!/usr/bin/env python3
"""Object storage round trip: download from input, upload to output.

The storage endpoint is directory-backed (two buckets, input/ and
output/), handed over via SLSBENCH_STORAGE. If the named object is absent
and a byte count was given, a seeded object of that size is created first;
that lets the round trip run against a fresh stub with no separate put
step. With no byte count, a missing object is an error.
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


def storage_root() -> Path:
    root = os.environ.get("SLSBENCH_STORAGE")
    if not root or not Path(root).is_dir():
        fail(f"storage endpoint unreachable: {root!r}")
    return Path(root)


def mb_per_s(nbytes: int, elapsed: float) -> float:
    # zero-duration guard: a 0-byte object reads in no measurable time
    if nbytes <= 0 or elapsed <= 0:
        return 0.0
    return (nbytes / 1e6) / elapsed


def run(params: dict) -> tuple:
    key = params.get("object_key", "payload.bin")
    nbytes = params.get("bytes", 1024 * 1024)
    seed = int(params.get("seed", 5))

    src = storage_root() / "input" / key
    if not src.is_file():
        if nbytes is None:
            fail(f"object {key!r} not found in the input bucket")
        src.parent.mkdir(parents=True, exist_ok=True)
        src.write_bytes(random.Random(seed).randbytes(int(nbytes)))

    local = scratch_dir() / Path(key).name
    t0 = time.perf_counter()
    data = src.read_bytes()
    local.write_bytes(data)
    down_s = time.perf_counter() - t0

    dst = storage_root() / "output" / key
    dst.parent.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    dst.write_bytes(local.read_bytes())
    up_s = time.perf_counter() - t0

    size = len(data)
    result = {
        "object_key": key,
        "output_key": key,
        "bytes": size,
        "sha256": hashlib.sha256(data).hexdigest(),
    }
    return result, {"down_mb_s": mb_per_s(size, down_s), "up_mb_s": mb_per_s(size, up_s)}


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
