#!/usr/bin/env python3
"""Word count over text objects in storage, map/reduce style.

Default is single-function mode: map and reduce run in one invocation.
phase="map" instead uploads per-shard count documents and phase="reduce"
merges such documents, so the two halves can also run as separate
functions chained through storage.

Token partitioning uses crc32, not hash(): the builtin is salted per
process and would break reproducibility.
"""

import json
import os
import re
import sys
import tempfile
import time
import zlib
from collections import Counter
from pathlib import Path

SENTINEL = ".first-run-sentinel"
TOKEN = re.compile(r"[a-z0-9']+")


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


def storage_root() -> Path:
    root = os.environ.get("SLSBENCH_STORAGE")
    if not root or not Path(root).is_dir():
        fail(f"storage endpoint unreachable: {root!r}")
    return Path(root)


def fetch(key: str) -> bytes:
    # reduce-phase inputs are usually a previous map run's uploads, so the
    # output bucket is checked after input
    root = storage_root()
    for bucket in ("input", "output"):
        path = root / bucket / key
        if path.is_file():
            return path.read_bytes()
    fail(f"object {key!r} not found in storage")


def put(key: str, data: bytes) -> str:
    path = storage_root() / "output" / key
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    return key


def tokenize(text: str) -> list:
    return TOKEN.findall(text.lower())


def map_shard(text: str) -> dict:
    """Sorted token counts for one shard."""
    counts = Counter(tokenize(text))
    return {tok: counts[tok] for tok in sorted(counts)}


def partition(counts: dict, reducers: int) -> list:
    parts = [Counter() for _ in range(reducers)]
    for tok, n in counts.items():
        parts[zlib.crc32(tok.encode("utf-8")) % reducers][tok] += n
    return parts


def merge(partitions: list) -> Counter:
    total = Counter()
    for part in partitions:
        total.update(part)
    return total


def ranking(total: Counter, top_k: int) -> list:
    ordered = sorted(total.items(), key=lambda kv: (-kv[1], kv[0]))
    return [[tok, n] for tok, n in ordered[:top_k]]


def run(params: dict) -> tuple:
    keys = params.get("input_keys", ["shard-0.txt", "shard-1.txt"])
    reducers = int(params.get("reducers", 4))
    top_k = int(params.get("top_k", 10))
    phase = params.get("phase", "all")
    if not keys:
        fail("no input objects given; input_keys must name at least one shard")
    if reducers < 1:
        fail(f"reducers must be >= 1, got {reducers}")
    if phase not in ("all", "map", "reduce"):
        fail(f"unknown phase {phase!r}; expected all, map or reduce")

    result = {"phase": phase, "shards": len(keys), "top": [], "outputs": []}
    items = 0

    if phase == "reduce":
        shard_counts = []
        for key in keys:
            try:
                doc = json.loads(fetch(key))
            except json.JSONDecodeError as exc:
                fail(f"object {key!r} is not a count document: {exc}")
            if not isinstance(doc, dict) or not isinstance(doc.get("counts"), dict):
                fail(f"object {key!r} is not a count document: missing 'counts'")
            shard_counts.append(Counter(doc["counts"]))
    else:
        shard_counts = [Counter(map_shard(fetch(key).decode("utf-8"))) for key in keys]

    items = sum(sum(c.values()) for c in shard_counts)

    if phase == "map":
        for key, counts in zip(keys, shard_counts):
            stem = Path(key).stem or key
            doc = json.dumps({"shard": key, "counts": {t: counts[t] for t in sorted(counts)}})
            result["outputs"].append(put(f"mapreduce/{stem}-counts.json", doc.encode("utf-8")))
    else:
        total = merge(p for counts in shard_counts for p in partition(counts, reducers))
        result["top"] = ranking(total, top_k)
        result["total_words"] = items
        result["unique_words"] = len(total)

    return result, {"items_processed": items}


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
