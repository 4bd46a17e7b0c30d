"""Median-centric summaries, CSV reports, and declarative figure documents.

Percentiles use the nearest-rank rule: the p-th percentile of n sorted values
is the ceil(p*n)-th order statistic. No interpolation, so results are exactly
reproducible from the definition and stable for small samples. Statistics are
computed over valid trials only; invalid trials are counted, never averaged.

Figures are data, not images: each one is a document naming the chart kind,
the x categories, and the summaries behind every point, so any plotting tool
can render it.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from slsbench.engine import TrialResult, point_key
from slsbench.errors import EmptyGroupError, SchemaError
from slsbench.journal import Journal

CSV_COLUMNS = (
    "plan", "point", "metric", "unit",
    "count", "valid_count",
    "min", "p25", "median", "p75", "p95", "max", "mean", "stddev",
)

METRIC_UNITS = {
    "coldstart_est_ms": "ms",
    "exec_ms": "ms",
    "response_ms": "ms",
    "req_per_s": "req/s",
    "mflops": "MFLOPS",
    "read_mb_s": "MB/s",
    "write_mb_s": "MB/s",
}

# workload-reported metrics, most specific first
_PASS_THROUGH = ("mflops", "read_mb_s", "write_mb_s")


@dataclass(frozen=True)
class CoreStats:
    min: float
    p25: float
    median: float
    p75: float
    p95: float
    max: float
    mean: float
    stddev: float


def nearest_rank(sorted_values: list[float], p: float) -> float:
    """The ceil(p*n)-th order statistic of an already sorted list."""
    n = len(sorted_values)
    rank = max(1, math.ceil(p * n))
    return sorted_values[min(rank, n) - 1]


def summarize(values: list[float]) -> CoreStats:
    if not values:
        raise EmptyGroupError("cannot summarize an empty group")
    ordered = sorted(values)
    return CoreStats(
        min=ordered[0],
        p25=nearest_rank(ordered, 0.25),
        median=nearest_rank(ordered, 0.50),
        p75=nearest_rank(ordered, 0.75),
        p95=nearest_rank(ordered, 0.95),
        max=ordered[-1],
        mean=statistics.fmean(ordered),
        stddev=statistics.pstdev(ordered),
    )


def derive_metric(trial: TrialResult, metric: str | None = None) -> tuple[str, float, str]:
    """Pick the metric a trial contributes and its value and unit.

    Cold-start trials contribute their estimate; throughput sessions their
    request rate; otherwise workload-reported figures (MFLOPS, IO rates) pass
    through, falling back to self-reported execution time, then to response
    time. Asking for a specific absent metric is a schema error.
    """
    if metric is not None:
        if metric in trial.derived:
            return metric, float(trial.derived[metric]), METRIC_UNITS.get(metric, "")
        for record in trial.records:
            if metric in record.result:
                return metric, float(record.result[metric]), METRIC_UNITS.get(metric, "")
        raise SchemaError(metric)

    if "coldstart_est_ms" in trial.derived:
        return "coldstart_est_ms", float(trial.derived["coldstart_est_ms"]), "ms"
    if "req_per_s" in trial.derived:
        return "req_per_s", float(trial.derived["req_per_s"]), "req/s"
    for name in _PASS_THROUGH:
        for record in trial.records:
            if name in record.result:
                return name, float(record.result[name]), METRIC_UNITS[name]
    if "exec_ms" in trial.derived:
        return "exec_ms", float(trial.derived["exec_ms"]), "ms"
    if trial.records:
        return "response_ms", trial.records[0].response_ms, "ms"
    raise SchemaError("response_ms")


@dataclass(frozen=True)
class MetricsSummary:
    plan_id: str
    point: dict[str, Any]
    metric: str
    unit: str
    count: int
    valid_count: int
    stats: CoreStats | None  # None when no trial in the group was valid

    @property
    def key(self) -> str:
        return point_key(self.point)

    def to_row(self) -> list[str]:
        row = [self.plan_id, self.key, self.metric, self.unit, str(self.count), str(self.valid_count)]
        if self.stats is None:
            row.extend([""] * 8)
        else:
            row.extend(
                repr(v)
                for v in (
                    self.stats.min, self.stats.p25, self.stats.median, self.stats.p75,
                    self.stats.p95, self.stats.max, self.stats.mean, self.stats.stddev,
                )
            )
        return row

    @classmethod
    def from_row(cls, row: list[str]) -> "MetricsSummary":
        point: dict[str, Any] = {}
        if row[1]:
            for pair in row[1].split(","):
                k, _, v = pair.partition("=")
                point[k] = v
        stats = None
        if row[6] != "":
            stats = CoreStats(*(float(v) for v in row[6:14]))
        return cls(
            plan_id=row[0],
            point=point,
            metric=row[2],
            unit=row[3],
            count=int(row[4]),
            valid_count=int(row[5]),
            stats=stats,
        )


def summaries(results: Iterable[TrialResult]) -> list[MetricsSummary]:
    """One summary per (plan, point), over that group's auto-chosen metric."""
    groups: dict[tuple[str, str], list[TrialResult]] = {}
    for trial in results:
        groups.setdefault((trial.plan_id, point_key(trial.point)), []).append(trial)

    out: list[MetricsSummary] = []
    for (plan_id, _), trials in groups.items():
        valid = [t for t in trials if t.valid]
        if not valid:
            out.append(
                MetricsSummary(
                    plan_id=plan_id,
                    point=dict(trials[0].point),
                    metric="",
                    unit="",
                    count=len(trials),
                    valid_count=0,
                    stats=None,
                )
            )
            continue
        metric, first_value, unit = derive_metric(valid[0])
        values = [first_value]
        values.extend(derive_metric(t, metric)[1] for t in valid[1:])
        out.append(
            MetricsSummary(
                plan_id=plan_id,
                point=dict(valid[0].point),
                metric=metric,
                unit=unit,
                count=len(trials),
                valid_count=len(valid),
                stats=summarize(values),
            )
        )
    return out


def write_csv(rows: list[MetricsSummary], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.to_row())
    return path


def read_csv(path: str | Path) -> list[MetricsSummary]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is not None and tuple(header) != CSV_COLUMNS:
            raise SchemaError(f"unexpected report header: {header}")
        return [MetricsSummary.from_row(row) for row in reader]


@dataclass(frozen=True)
class FigureSpec:
    plan_id: str
    metric: str
    kind: str  # box | bar | line
    title: str
    unit: str
    x_label: str
    x_categories: tuple[str, ...]
    series: tuple[dict[str, Any], ...]  # label + per-category summary refs

    def to_dict(self) -> dict[str, Any]:
        return {
            "plan": self.plan_id,
            "metric": self.metric,
            "kind": self.kind,
            "title": self.title,
            "unit": self.unit,
            "x": {"label": self.x_label, "categories": list(self.x_categories)},
            "series": [dict(s) for s in self.series],
        }


def figures(rows: list[MetricsSummary]) -> list[FigureSpec]:
    """One figure per (plan, metric): x is the first axis, one series per
    combination of the remaining axes. Numeric categories sort ascending."""
    by_plan: dict[tuple[str, str], list[MetricsSummary]] = {}
    for row in rows:
        if row.metric:
            by_plan.setdefault((row.plan_id, row.metric), []).append(row)

    specs: list[FigureSpec] = []
    for (plan_id, metric), group in by_plan.items():
        axis_names = list(group[0].point.keys())
        x_name = axis_names[0] if axis_names else "point"
        categories = _ordered_categories(group, x_name)
        series_map: dict[str, list[dict[str, Any]]] = {}
        for row in group:
            rest = {k: v for k, v in row.point.items() if k != x_name}
            label = ",".join(f"{k}={rest[k]}" for k in sorted(rest)) or "all"
            entry = {
                "category": str(row.point.get(x_name, "")),
                "ref": {"plan": plan_id, "point": row.key, "metric": metric},
                "median": row.stats.median if row.stats else None,
                "valid_count": row.valid_count,
            }
            series_map.setdefault(label, []).append(entry)
        specs.append(
            FigureSpec(
                plan_id=plan_id,
                metric=metric,
                kind="box",
                title=f"{plan_id}: {metric} by {x_name}",
                unit=group[0].unit,
                x_label=x_name,
                x_categories=tuple(categories),
                series=tuple(
                    {"label": label, "points": points} for label, points in series_map.items()
                ),
            )
        )
    return specs


def _ordered_categories(group: list[MetricsSummary], x_name: str) -> list[str]:
    seen: list[str] = []
    for row in group:
        value = str(row.point.get(x_name, ""))
        if value not in seen:
            seen.append(value)
    if all(_is_number(v) for v in seen):
        seen.sort(key=float)
    return seen


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def write_figures(specs: list[FigureSpec], out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for spec in specs:
        path = out_dir / f"{spec.plan_id}_{spec.metric}.figure"
        path.write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        paths.append(path)
    return paths


def load_results(run_dir: str | Path) -> list[TrialResult]:
    """Trials of all completed points in a run directory, in journal order."""
    _, completed = Journal(run_dir).load()
    results: list[TrialResult] = []
    for docs in completed.values():
        results.extend(TrialResult.from_dict(doc) for doc in docs)
    return results


def report(
    results: list[TrialResult],
    out_dir: str | Path,
    formats: tuple[str, ...] = ("csv", "figures"),
) -> list[Path]:
    """Write the CSV table and figure documents; byte-stable given equal inputs."""
    out_dir = Path(out_dir)
    rows = summaries(results)
    written: list[Path] = []
    if "csv" in formats:
        written.append(write_csv(rows, out_dir / "report.csv"))
    if "figures" in formats:
        written.extend(write_figures(figures(rows), out_dir / "figures"))
    return written
