#!/usr/bin/env python3
"""Random-access file IO against the instance scratch dir.

Same shape as the sequential sibling, but the block visit order is a
seeded shuffle, so every op pays a seek. op="write" scatters a seeded
buffer across a pre-sized file; because each block lands at its own
offset, the finished file is byte-identical to a sequential write of the
same seed. op="read" pre-creates the file, then reads blocks in shuffled
order; the digest covers bytes in visit order and is still deterministic.
"""

import hashlib
import json
import math
import os
import random
import sys
import tempfile
import time
from pathlib import Path

SENTINEL = ".first-run-sentinel"
MIB = 1024 * 1024
FILENAME = "workfile.dat"


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


def block_offsets(nblocks: int, seed: int) -> list:
    order = list(range(nblocks))
    random.Random(seed ^ 0x5EEDF00D).shuffle(order)  # decouple order from content
    return order


def percentile_95(latencies: list) -> float:
    ordered = sorted(latencies)
    rank = min(len(ordered), math.ceil(0.95 * len(ordered)))
    return ordered[rank - 1]


def run(params: dict) -> tuple:
    file_mb = float(params.get("file_mb", 16))
    op = params.get("op", "read")
    block_kb = int(params.get("block_kb", 64))
    seed = int(params.get("seed", 11))
    if file_mb <= 0:
        fail(f"file_mb must be > 0, got {file_mb}")
    if block_kb < 1:
        fail(f"block_kb must be >= 1, got {block_kb}")
    if op not in ("read", "write"):
        fail(f"unknown op {op!r}; expected read or write")
    quota = disk_quota_mb()
    if file_mb > quota:
        fail(f"file_mb={file_mb:g} exceeds the scratch quota of {quota:g} MB")

    size = int(file_mb * MIB)
    block = block_kb * 1024
    nblocks = math.ceil(size / block)
    buffer = random.Random(seed).randbytes(size)
    path = scratch_dir() / FILENAME
    offsets = block_offsets(nblocks, seed)

    latencies = []
    digest = hashlib.sha256()

    if op == "write":
        t0 = time.perf_counter()
        with open(path, "wb") as fh:
            fh.truncate(size)
            for i in offsets:
                chunk = buffer[i * block : i * block + block]
                t1 = time.perf_counter()
                fh.seek(i * block)
                fh.write(chunk)
                latencies.append((time.perf_counter() - t1) * 1000.0)
                digest.update(chunk)
            fh.flush()
            os.fsync(fh.fileno())
        elapsed = time.perf_counter() - t0
    else:
        path.write_bytes(buffer)  # pre-create; not part of the measurement
        t0 = time.perf_counter()
        with open(path, "rb") as fh:
            for i in offsets:
                t1 = time.perf_counter()
                fh.seek(i * block)
                chunk = fh.read(block)
                latencies.append((time.perf_counter() - t1) * 1000.0)
                digest.update(chunk)
        elapsed = time.perf_counter() - t0

    mb_s = (size / 1e6) / elapsed if elapsed > 0 else 0.0
    result = {
        "op": op,
        "file_mb": file_mb,
        "block_kb": block_kb,
        "ops": len(latencies),
        "avg_ms": sum(latencies) / len(latencies),
        "p95_ms": percentile_95(latencies),
        "max_ms": max(latencies),
        "sha256": digest.hexdigest(),
    }
    return result, {f"{op}_mb_s": mb_s}


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
