"""Append-only run journal: every finished trial is persisted immediately.

One JSON document per line. A point counts as complete only once its marker
line is written, so trials of an interrupted point are ignored on reload and
a crash loses at most the trial that was in flight.
"""

from __future__ import annotations

import json
import time
from pathlib import Path
from typing import Any

JOURNAL_NAME = "journal.jsonl"


class Journal:
    def __init__(self, run_dir: str | Path):
        self.run_dir = Path(run_dir)
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.path = self.run_dir / JOURNAL_NAME

    def append_plan(self, plan_doc: dict[str, Any], seed: int | None) -> None:
        self._append({"type": "plan", "plan": plan_doc, "seed": seed, "wall": time.time()})

    def append_trial(self, trial_doc: dict[str, Any]) -> None:
        self._append({"type": "trial", "trial": trial_doc})

    def append_point_done(self, point_key: str, trials: int) -> None:
        self._append({"type": "point-done", "point_key": point_key, "trials": trials})

    def _append(self, doc: dict[str, Any]) -> None:
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, sort_keys=True) + "\n")
            fh.flush()

    def load(self) -> tuple[dict[str, Any] | None, dict[str, list[dict[str, Any]]]]:
        """Replay the journal: (plan header, completed point -> its trial docs).

        Only points with a completion marker are returned; the marker snapshots
        the last `trials` entries appended for that point, so stale partial
        trials from an interrupted attempt never leak in.
        """
        if not self.path.is_file():
            return None, {}
        plan_doc = None
        buffers: dict[str, list[dict[str, Any]]] = {}
        completed: dict[str, list[dict[str, Any]]] = {}
        with self.path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                doc = json.loads(line)
                kind = doc.get("type")
                if kind == "plan" and plan_doc is None:
                    plan_doc = doc.get("plan")
                elif kind == "trial":
                    trial = doc["trial"]
                    buffers.setdefault(trial["point_key"], []).append(trial)
                elif kind == "point-done":
                    key = doc["point_key"]
                    n = doc["trials"]
                    have = buffers.get(key, [])
                    completed[key] = list(have[-n:]) if n else []
        return plan_doc, completed
