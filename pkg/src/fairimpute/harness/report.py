"""Aggregated benchmark reports and their CSV / Markdown renderings."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FAILED = ":failed"
CSV_HEADER = "mechanism,method,metric,mean,sd,repeats"


@dataclass(frozen=True)
class ReportRow:
    mechanism: str
    method: str
    metric: str
    mean: float
    sd: float
    repeats: int

    @property
    def failed(self) -> bool:
        return self.metric.endswith(FAILED)

    @property
    def base_metric(self) -> str:
        return self.metric[: -len(FAILED)] if self.failed else self.metric


@dataclass
class Report:
    title: str
    rows: list

    @property
    def has_failures(self) -> bool:
        return any(r.failed for r in self.rows)

    def lookup(self, mechanism: str, method: str, metric: str) -> ReportRow:
        for row in self.rows:
            if (row.mechanism, row.method, row.base_metric) == (mechanism, method, metric):
                return row
        raise KeyError((mechanism, method, metric))


def aggregate(cells: dict, repeats: int) -> list:
    """Collapse per-repeat values into report rows.

    ``cells`` maps ``(mechanism, method, metric)`` to a list with one entry per
    repeat in repeat order, ``None`` marking a failed repeat. A cell with any
    failure becomes a ``metric:failed`` row whose statistics cover only the
    successful repeats.
    """
    rows = []
    for (mech, method, metric), values in cells.items():
        ok = [v for v in values if v is not None]
        arr = np.array(ok, dtype=float)
        mean = float(arr.mean()) if arr.size else math.nan
        if arr.size > 1:
            sd = float(arr.std(ddof=1))
        else:
            sd = 0.0 if arr.size else math.nan
        failed = len(ok) < len(values) or len(values) < repeats
        rows.append(ReportRow(mech, method, metric + FAILED if failed else metric, mean, sd, len(ok)))
    return rows


def sorted_rows(report: Report) -> list:
    return sorted(report.rows, key=lambda r: (r.mechanism, r.method, r.metric))


def _sig6(x: float) -> str:
    return "nan" if math.isnan(x) else "%#.6g" % x


def render_csv(report: Report) -> str:
    lines = [CSV_HEADER]
    for r in sorted_rows(report):
        lines.append(f"{r.mechanism},{r.method},{r.metric},{_sig6(r.mean)},{_sig6(r.sd)},{r.repeats}")
    return "\n".join(lines) + "\n"


def render_markdown(report: Report) -> str:
    """One table per metric: mechanisms as rows, methods as columns, 2 decimals."""
    rows = sorted_rows(report)
    out = [f"# {report.title}", ""]
    for metric in sorted({r.base_metric for r in rows}):
        subset = [r for r in rows if r.base_metric == metric]
        mechs = sorted({r.mechanism for r in subset})
        methods = sorted({r.method for r in subset})
        cell = {(r.mechanism, r.method): r for r in subset}
        out.append(f"## {metric}")
        out.append("")
        out.append("| mechanism | " + " | ".join(methods) + " |")
        out.append("|---|" + "---|" * len(methods))
        for m in mechs:
            vals = []
            for method in methods:
                r = cell.get((m, method))
                if r is None:
                    vals.append("")
                elif r.failed:
                    vals.append("fail")
                else:
                    vals.append(f"{r.mean:.2f}")
            out.append(f"| {m} | " + " | ".join(vals) + " |")
        out.append("")
    return "\n".join(out)


def emit_report(report: Report, fmt: str, path) -> Path:
    """Write ``report`` as ``csv`` or ``md`` (Markdown) to ``path``."""
    if not report.rows:
        raise ValueError("cannot emit an empty report")
    if fmt == "csv":
        text = render_csv(report)
    elif fmt in ("md", "markdown"):
        text = render_markdown(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path
