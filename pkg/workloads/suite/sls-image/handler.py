#!/usr/bin/env python3
"""Apply ten image effects to one stored image.

Downloads the object from the input bucket, runs each effect, and uploads
every output, so a single invocation produces exactly ten objects. The
rotations and flips are pure pixel shuffles (no resampling), which keeps
rotate-180 an exact involution.
"""

import json
import os
import sys
import tempfile
import time
from pathlib import Path

from PIL import Image, ImageFilter, UnidentifiedImageError

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


def crop_center_half(im):
    w, h = im.size
    cw, ch = max(1, w // 2), max(1, h // 2)
    left, top = (w - cw) // 2, (h - ch) // 2
    return im.crop((left, top, left + cw, top + ch))


def resize_half(im):
    w, h = im.size
    return im.resize((max(1, w // 2), max(1, h // 2)))


def thumbnail_64(im):
    t = im.copy()
    t.thumbnail((64, 64))
    return t


EFFECTS = [
    ("copy", lambda im: im.copy()),
    ("rotate-90", lambda im: im.transpose(Image.Transpose.ROTATE_90)),
    ("rotate-180", lambda im: im.transpose(Image.Transpose.ROTATE_180)),
    ("flip-h", lambda im: im.transpose(Image.Transpose.FLIP_LEFT_RIGHT)),
    ("flip-v", lambda im: im.transpose(Image.Transpose.FLIP_TOP_BOTTOM)),
    ("crop-center-50", crop_center_half),
    ("resize-half", resize_half),
    ("grayscale", lambda im: im.convert("L")),
    ("blur-3", lambda im: im.filter(ImageFilter.GaussianBlur(3))),
    ("thumbnail-64", thumbnail_64),
]


def run(params: dict) -> tuple:
    key = params.get("object_key", "sample.png")
    src = storage_root() / "input" / key
    if not src.is_file():
        fail(f"object {key!r} not found in the input bucket")
    try:
        with Image.open(src) as im:
            im.load()
            original = im
    except UnidentifiedImageError as exc:
        fail(f"cannot decode {key!r} as an image: {exc}")

    stem = Path(key).stem or "image"
    suffix = Path(key).suffix or ".png"
    out_dir = storage_root() / "output"
    outputs = []
    for name, effect in EFFECTS:
        out_key = f"{stem}-{name}{suffix}"
        out_path = out_dir / out_key
        out_path.parent.mkdir(parents=True, exist_ok=True)
        effect(original).save(out_path)
        outputs.append(out_key)

    result = {
        "object_key": key,
        "outputs": outputs,
        "effects": [name for name, _ in EFFECTS],
        "width": original.width,
        "height": original.height,
    }
    return result, {"items_processed": len(outputs)}


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
