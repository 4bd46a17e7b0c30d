#!/usr/bin/env python3
"""Naive recursive Fibonacci.

The exponential call tree is deliberate. An iterative loop would finish in
microseconds and tell you nothing; the recursion stresses the interpreter's
call machinery and stack, which is what makes it a useful CPU probe.
"""

import json
import os
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


def fib(k: int) -> int:
    """F(1) = F(2) = 1, computed the slow way on purpose."""
    if k <= 2:
        return 1
    return fib(k - 1) + fib(k - 2)


def run(params: dict) -> dict:
    k = int(params.get("k", 25))
    cap = int(params.get("cap", 35))
    if k < 1:
        fail(f"k must be >= 1, got {k}")
    if k > cap:
        # runtime guard: the call tree doubles per step, so a stray large k
        # would burn the whole timeout
        fail(f"k={k} exceeds the cap of {cap}; pass a larger 'cap' if you mean it")
    return {"k": k, "value": fib(k)}


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
