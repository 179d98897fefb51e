"""Aggregate score sheets into per-model, per-metric benchmark reports.

Means are exact rationals until display; std is the sample standard
deviation of the binary scores. Markdown output tags cells strictly above
0.90 as high and strictly below 0.30 as low, and totals are the sums of
the per-metric means. Models whose names match previously published
benchmark entries get a footnote when the recomputed total disagrees with
the published one.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import EmptyInput
from .evaluation import METRIC_LABELS, METRIC_ORDER, MetricId, ScoreSheet

HIGH_THRESHOLD = 0.90  # strictly above
LOW_THRESHOLD = 0.30  # strictly below

#: Previously published benchmark totals for known model ids. When a
#: recomputed total (sum of per-metric means) differs from the published
#: figure at 2 decimals, the rendered report says so.
PUBLISHED_TOTALS = {
    "gpt-4o": "6.29",
    "gemini-1.5-flash": "5.28",
    "janus-4o": "3.64",
}


@dataclass(frozen=True)
class MetricStats:
    mean: Fraction
    std: float
    n: int

    @property
    def mean_float(self) -> float:
        return float(self.mean)


@dataclass(frozen=True)
class ModelReport:
    model_id: str
    per_metric: Mapping[MetricId, MetricStats]
    total: Fraction

    @property
    def total_float(self) -> float:
        return float(self.total)


@dataclass(frozen=True)
class BenchmarkReport:
    models: tuple[ModelReport, ...]
    thresholds: tuple[float, float] = (HIGH_THRESHOLD, LOW_THRESHOLD)

    def model(self, model_id: str) -> ModelReport:
        for entry in self.models:
            if entry.model_id == model_id:
                return entry
        raise KeyError(model_id)


def _sample_std(ones: int, n: int) -> float:
    if n < 2:
        return 0.0
    p = ones / n
    return math.sqrt(p * (1.0 - p) * n / (n - 1))


def aggregate(sheets: Iterable[ScoreSheet]) -> BenchmarkReport:
    """Group sheets by model and compute per-metric mean/std/n plus totals.

    Ordering is deterministic: metrics in rubric order, models alphabetical.
    """
    sheets = list(sheets)
    if not sheets:
        raise EmptyInput("no score sheets to aggregate")
    by_model: dict[str, list[ScoreSheet]] = {}
    for sheet in sheets:
        by_model.setdefault(sheet.model_id, []).append(sheet)

    models: list[ModelReport] = []
    for model_id in sorted(by_model):
        group = by_model[model_id]
        n = len(group)
        per_metric: dict[MetricId, MetricStats] = {}
        total = Fraction(0)
        for metric in METRIC_ORDER:
            ones = sum(sheet.scores[metric] for sheet in group)
            mean = Fraction(ones, n)
            per_metric[metric] = MetricStats(mean=mean, std=_sample_std(ones, n), n=n)
            total += mean
        models.append(ModelReport(model_id=model_id, per_metric=per_metric, total=total))
    return BenchmarkReport(models=tuple(models))


def _fmt2(value: Fraction | float) -> str:
    return f"{float(value):.2f}"


def _cell(stats: MetricStats) -> str:
    text = _fmt2(stats.mean)
    mean = float(stats.mean)
    if mean > HIGH_THRESHOLD:
        return f"{text} [high]"
    if mean < LOW_THRESHOLD:
        return f"{text} [low]"
    return text


def _total_footnotes(report: BenchmarkReport) -> list[str]:
    notes = []
    for entry in report.models:
        published = PUBLISHED_TOTALS.get(entry.model_id.lower())
        if published is not None and _fmt2(entry.total) != published:
            notes.append(
                f"{entry.model_id}: computed total {_fmt2(entry.total)} "
                f"(sum of per-metric means) differs from the previously published "
                f"total {published}."
            )
    return notes


def render_markdown(report: BenchmarkReport) -> str:
    header = ["Metric"] + [entry.model_id for entry in report.models]
    rows = [header, ["---"] * len(header)]
    for metric in METRIC_ORDER:
        rows.append(
            [METRIC_LABELS[metric]]
            + [_cell(entry.per_metric[metric]) for entry in report.models]
        )
    rows.append(
        ["Total Score (out of 10)"] + [_fmt2(entry.total) for entry in report.models]
    )
    table = "\n".join("| " + " | ".join(row) + " |" for row in rows)
    notes = _total_footnotes(report)
    if notes:
        table += "\n\n" + "\n".join(f"*Note: {note}*" for note in notes)
    return table + "\n"


def render_csv(report: BenchmarkReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["metric", "model", "mean", "std", "n"])
    for entry in report.models:
        for metric in METRIC_ORDER:
            stats = entry.per_metric[metric]
            writer.writerow(
                [METRIC_LABELS[metric], entry.model_id, _fmt2(stats.mean), _fmt2(stats.std), stats.n]
            )
    for entry in report.models:
        n = next(iter(entry.per_metric.values())).n
        writer.writerow(["Total", entry.model_id, _fmt2(entry.total), "", n])
    for note in _total_footnotes(report):
        writer.writerow(["# " + note, "", "", "", ""])
    return buffer.getvalue()


def report_to_dict(report: BenchmarkReport) -> dict:
    return {
        "thresholds": {"high": HIGH_THRESHOLD, "low": LOW_THRESHOLD},
        "models": [
            {
                "model_id": entry.model_id,
                "total": float(entry.total),
                "total_display": _fmt2(entry.total),
                "per_metric": {
                    metric.column: {
                        "label": METRIC_LABELS[metric],
                        "mean": float(stats.mean),
                        "mean_display": _fmt2(stats.mean),
                        "std": stats.std,
                        "n": stats.n,
                    }
                    for metric, stats in (
                        (m, entry.per_metric[m]) for m in METRIC_ORDER
                    )
                },
            }
            for entry in report.models
        ],
        "notes": _total_footnotes(report),
    }


def render_report(report: BenchmarkReport, format: str = "markdown") -> bytes:
    """Render a report as markdown or CSV bytes."""
    if format == "markdown":
        return render_markdown(report).encode("utf-8")
    if format == "csv":
        return render_csv(report).encode("utf-8")
    raise ValueError(f"unknown report format: {format!r}")
