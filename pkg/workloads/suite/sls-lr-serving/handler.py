#!/usr/bin/env python3
"""Score a piece of text with a trained sentiment model.

Loads the JSON model written by sls-lr-training. The input bucket is
checked first so a staged model wins, falling back to the output bucket
where a training run on the same storage leaves it. The score is a
sigmoid, so it always lands in [0, 1]; label is the 0.5 threshold.
"""

import json
import math
import os
import re
import sys
import tempfile
import time
from pathlib import Path

SENTINEL = ".first-run-sentinel"
TOKEN = re.compile(r"[a-z']+")  # keep in sync with sls-lr-training


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


def load_model(key: str) -> dict:
    root = storage_root()
    for bucket in ("input", "output"):
        path = root / bucket / key
        if path.is_file():
            try:
                doc = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                fail(f"model {key!r} is not valid JSON: {exc}")
            vocab = doc.get("vocab")
            weights = doc.get("weights")
            if not isinstance(vocab, list) or not isinstance(weights, list):
                fail(f"model {key!r} is missing its vocab or weights")
            if len(vocab) != len(weights):
                fail(
                    f"model dimension mismatch: {len(weights)} weights "
                    f"for {len(vocab)} vocabulary entries"
                )
            return doc
    fail(f"model {key!r} not found in storage")


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def score(model: dict, text: str) -> tuple:
    index = {tok: i for i, tok in enumerate(model["vocab"])}
    weights = model["weights"]
    z = float(model.get("bias", 0.0))
    known = 0
    for tok in TOKEN.findall(text.lower()):
        i = index.get(tok)
        if i is not None:
            z += weights[i]
            known += 1
    return sigmoid(z), known


def run(params: dict) -> dict:
    model_key = params.get("model_key", "sentiment-model.json")
    text = params.get("text", "a delightful surprise, fresh and wonderful")
    model = load_model(model_key)
    s, known = score(model, text)
    return {"score": s, "label": int(s >= 0.5), "tokens_known": known}


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
