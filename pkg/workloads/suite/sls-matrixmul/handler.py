#!/usr/bin/env python3
"""Dense square-matrix multiplication in plain Python.

Small integer entries keep the checksum exact, so the same seed and n give
the same answer on any machine. No numpy here on purpose: the interpreter
doing the arithmetic is the thing being measured.
"""

import json
import os
import random
import sys
import tempfile
import time
from pathlib import Path

SENTINEL = ".first-run-sentinel"


def probe_first_run() -> bool:
    scratch = Path(os.environ.get("SLSBENCH_SCRATCH_DIR") or tempfile.gettempdir())
    marker = scratch / SENTINEL
    if marker.exists():
        return False
    marker.touch()
    return True


def fail(message: str):
    print(message, file=sys.stderr)
    raise SystemExit(1)


def gen_matrix(n: int, rng: random.Random) -> list:
    return [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]


def matmul(a: list, b: list) -> list:
    cols = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in cols] for row in a]


def checksum(m: list) -> int:
    return sum(sum(row) for row in m)


def run(params: dict) -> dict:
    n = int(params.get("n", 64))
    seed = int(params.get("seed", 1234))
    if n < 1:
        fail(f"n must be >= 1, got {n}")
    rng = random.Random(seed)
    a = gen_matrix(n, rng)
    b = gen_matrix(n, rng)
    c = matmul(a, b)
    return {"n": n, "seed": seed, "checksum": checksum(c)}


def main():
    raw = sys.stdin.read()
    params = json.loads(raw) if raw.strip() else {}
    first = probe_first_run()
    t0 = time.perf_counter()
    result = run(params)
    exec_ms = (time.perf_counter() - t0) * 1000.0
    json.dump({"result": result, "exec_ms": exec_ms, "first_run": first, "metrics": {}}, sys.stdout)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
