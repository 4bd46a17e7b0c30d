#!/usr/bin/env python3
"""Convert a stored video to grayscale, frame by frame.

Downloads the clip to scratch, runs every frame through a BGR->gray->BGR
round trip, and uploads the converted clip. Output frames keep three
channels with all of them equal, so a grayscale check on the result is a
plain per-pixel channel comparison. Encoding is FFV1 in an AVI container,
which is lossless; the check survives a decode round trip exactly.
"""

import json
import os
import shutil
import sys
import tempfile
import time
from pathlib import Path

import cv2

SENTINEL = ".first-run-sentinel"
FOURCC = "FFV1"


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


def run(params: dict) -> tuple:
    key = params.get("object_key", "clip.avi")
    src = storage_root() / "input" / key
    if not src.is_file():
        fail(f"object {key!r} not found in the input bucket")

    local = scratch_dir() / Path(key).name
    shutil.copyfile(src, local)

    cap = cv2.VideoCapture(str(local))
    if not cap.isOpened():
        fail(f"cannot decode {key!r} as video")
    fps = cap.get(cv2.CAP_PROP_FPS) or 25.0

    out_local = scratch_dir() / f"gray-{Path(key).stem}.avi"
    writer = None
    frames = 0
    width = height = 0
    while True:
        ok, frame = cap.read()
        if not ok:
            break
        gray = cv2.cvtColor(frame, cv2.COLOR_BGR2GRAY)
        back = cv2.cvtColor(gray, cv2.COLOR_GRAY2BGR)
        if writer is None:
            height, width = back.shape[:2]
            writer = cv2.VideoWriter(
                str(out_local), cv2.VideoWriter_fourcc(*FOURCC), fps, (width, height)
            )
            if not writer.isOpened():
                fail(f"video encoder {FOURCC!r} unavailable in this runtime")
        writer.write(back)
        frames += 1
    cap.release()

    if frames == 0:
        fail(f"{key!r} contains no decodable frames")
    writer.release()

    out_key = f"{Path(key).stem}-grayscale.avi"
    dst = storage_root() / "output" / out_key
    dst.parent.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(out_local, dst)

    result = {
        "object_key": key,
        "output_key": out_key,
        "frames": frames,
        "width": width,
        "height": height,
        "fps": fps,
    }
    return result, {"items_processed": frames}


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
