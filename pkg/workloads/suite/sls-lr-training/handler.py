#!/usr/bin/env python3
"""Train a bag-of-words logistic regression on labeled review text.

The dataset is tab-separated "label<TAB>text" lines with labels 0 or 1. It
is looked up in the storage input bucket first, then next to this file, so
the bundled reviews.tsv works without any staging. The fitted model goes to
the output bucket as JSON for sls-lr-serving to load.

Training is plain per-example gradient descent in file order with no
shuffling, which keeps the weights bit-identical across runs.
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
TOKEN = re.compile(r"[a-z']+")


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


def load_dataset(key: str) -> str:
    staged = storage_root() / "input" / key
    if staged.is_file():
        return staged.read_text(encoding="utf-8")
    bundled = Path(__file__).parent / key
    if bundled.is_file():
        return bundled.read_text(encoding="utf-8")
    fail(f"dataset {key!r} not found in the input bucket or bundled with the workload")


def tokenize(text: str) -> list:
    # keep in sync with sls-lr-serving
    return TOKEN.findall(text.lower())


def parse_dataset(text: str) -> list:
    examples = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        label, sep, body = line.partition("\t")
        if not sep or label.strip() not in ("0", "1"):
            fail(f"dataset line {lineno}: expected 'label<TAB>text' with label 0 or 1")
        examples.append((int(label), tokenize(body)))
    if not examples:
        fail("dataset has no examples")
    return examples


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def features(tokens: list, vocab: dict) -> dict:
    counts = {}
    for tok in tokens:
        idx = vocab.get(tok)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    return counts


def fit(examples: list, epochs: int, learn_rate: float):
    vocab = {tok: i for i, tok in enumerate(sorted({t for _, toks in examples for t in toks}))}
    weights = [0.0] * len(vocab)
    bias = 0.0
    rows = [(label, features(toks, vocab)) for label, toks in examples]
    for _ in range(epochs):
        for label, feats in rows:
            z = bias + sum(weights[i] * c for i, c in feats.items())
            grad = sigmoid(z) - label
            bias -= learn_rate * grad
            for i, c in feats.items():
                weights[i] -= learn_rate * grad * c
    return vocab, weights, bias


def accuracy(rows_labels, vocab, weights, bias) -> float:
    hits = 0
    for label, toks in rows_labels:
        z = bias + sum(weights[i] * c for i, c in features(toks, vocab).items())
        hits += int((sigmoid(z) >= 0.5) == bool(label))
    return hits / len(rows_labels)


def run(params: dict) -> tuple:
    dataset_key = params.get("dataset_key", "reviews.tsv")
    model_key = params.get("model_key", "sentiment-model.json")
    epochs = int(params.get("epochs", 40))
    learn_rate = float(params.get("learn_rate", 0.5))
    if epochs < 1:
        fail(f"epochs must be >= 1, got {epochs}")

    examples = parse_dataset(load_dataset(dataset_key))
    vocab, weights, bias = fit(examples, epochs, learn_rate)
    acc = accuracy(examples, vocab, weights, bias)

    model = {
        "vocab": sorted(vocab, key=vocab.get),
        "weights": weights,
        "bias": bias,
        "trained_on": dataset_key,
        "examples": len(examples),
    }
    out = storage_root() / "output" / model_key
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(model), encoding="utf-8")

    result = {
        "accuracy": acc,
        "examples": len(examples),
        "vocab_size": len(vocab),
        "epochs": epochs,
        "model_key": model_key,
    }
    return result, {"items_processed": len(examples) * epochs}


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
