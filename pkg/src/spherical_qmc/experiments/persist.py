"""CSV persistence and per-cell summaries of replica records."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

COLUMNS = ("kind", "n", "stream_id", "metric", "s", "value", "tail_bound", "seconds")
QUANTILES = (0.5, 0.9, 0.99)


@dataclass(frozen=True)
class Row:
    """One CSV row. ``s`` is the metric parameter (``t`` for gt), or None."""

    kind: str
    n: int
    stream_id: int
    metric: str
    s: float | None
    value: float
    tail_bound: float
    seconds: float

    def cells(self) -> list[str]:
        return [self.kind, str(self.n), str(self.stream_id), self.metric,
                "" if self.s is None else repr(float(self.s)), repr(float(self.value)),
                repr(float(self.tail_bound)), repr(float(self.seconds))]


def rows_from_record(rec) -> list[Row]:
    return [Row(rec.kind, rec.n, rec.stream_id, metric, param, mv.value, mv.tail_bound, mv.seconds)
            for (metric, param), mv in rec.values.items()]


def header_line() -> str:
    return ",".join(COLUMNS) + "\n"


def format_rows(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def persist(rows, path) -> None:
    """Write rows with the fixed column schema (overwrites)."""
    Path(path).write_text(header_line() + format_rows(rows))


def _parse(cells: list[str], lineno: int, source) -> Row:
    if len(cells) != len(COLUMNS):
        raise ValueError(f"{source}:{lineno}: expected {len(COLUMNS)} fields, got {len(cells)}")
    kind, n, sid, metric, s, value, tail, secs = cells
    try:
        return Row(kind, int(n), int(sid), metric, None if s == "" else float(s),
                   float(value), float(tail), float(secs))
    except ValueError as exc:
        raise ValueError(f"{source}:{lineno}: {exc}") from None


def load(path) -> list[Row]:
    """Inverse of :func:`persist`; malformed rows are reported with line numbers."""
    text = Path(path).read_text()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError(f"{path}: empty file") from None
    if tuple(header) != COLUMNS:
        raise ValueError(f"{path}:1: header {header} does not match {list(COLUMNS)}")
    return [_parse(cells, i, path) for i, cells in enumerate(reader, start=2) if cells]


@dataclass(frozen=True)
class CellSummary:
    kind: str
    n: int
    metric: str
    s: float | None
    count: int
    mean: float
    se: float
    quantiles: dict
    failures: int

    @property
    def median(self) -> float:
        return self.quantiles[0.5]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "metric": self.metric, "s": self.s,
                "count": self.count, "mean": self.mean, "se": self.se, "failures": self.failures,
                "quantiles": {str(q): v for q, v in self.quantiles.items()}}


def quantile(values, q: float) -> float:
    """Order-statistic quantile: the ``ceil(q m)``-th smallest of ``m`` values."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return math.nan
    k = max(1, math.ceil(q * v.size - 1e-12))
    return float(v[k - 1])


def summarize(rows) -> list[CellSummary]:
    """Mean, SE and quantiles per (kind, n, metric, s); NaN values count as failures."""
    cells: dict = {}
    for r in rows:
        cells.setdefault((r.kind, r.n, r.metric, r.s), []).append(r.value)
    out = []
    for (kind, n, metric, s), vals in sorted(cells.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2], kv[0][3] or 0.0)):
        a = np.asarray(vals, dtype=float)
        ok = a[~np.isnan(a)]
        m = ok.size
        mean = float(ok.mean()) if m else math.nan
        se = float(ok.std(ddof=1) / math.sqrt(m)) if m > 1 else (0.0 if m == 1 else math.nan)
        qs = {q: quantile(ok, q) for q in QUANTILES}
        out.append(CellSummary(kind, n, metric, s, m, mean, se, qs, int(a.size - m)))
    return out
