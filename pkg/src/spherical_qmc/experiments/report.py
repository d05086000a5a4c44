"""Plain-text tables and plot-ready TSV from persisted rows."""

from __future__ import annotations

import math

from ..spectral import DomainError, explicit_confidence
from .persist import summarize

DEFAULT_ETA = 3.0


def bound_curve(n: int, eta: float = DEFAULT_ETA) -> float:
    """``e sqrt((1+eta)/(8 pi)) sqrt(log N) / N``, the explicit s = 2 confidence curve."""
    if n < 2:
        return math.nan
    return math.e * math.sqrt((1 + eta) / (8 * math.pi)) * math.sqrt(math.log(n)) / n


def bound_admissible(n: int, eta: float = DEFAULT_ETA) -> bool:
    """Whether the explicit statement's preconditions hold at ``(n, eta)``."""
    try:
        explicit_confidence(n, eta)
    except DomainError:
        return False
    return True


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return "nan" if math.isnan(x) else f"{x:.6g}"
    return str(x)


def text_table(rows) -> str:
    cols = ("kind", "n", "metric", "s", "count", "mean", "se", "median", "q90", "q99", "failed")
    table = [cols]
    for c in summarize(rows):
        table.append((c.kind, c.n, c.metric, c.s, c.count, c.mean, c.se, c.quantiles[0.5],
                      c.quantiles[0.9], c.quantiles[0.99], c.failures))
    cells = [[_fmt(v) for v in r] for r in table]
    widths = [max(len(r[i]) for r in cells) for i in range(len(cols))]
    return "\n".join("  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells) + "\n"


def tsv(rows, metric: str = "wce", s: float = 2.0, eta: float = DEFAULT_ETA) -> str:
    """``kind, n, median, q90, bound, admissible`` per cell of ``metric`` at parameter ``s``.

    ``bound`` is :func:`bound_curve`; ``admissible`` is 1 where the explicit
    statement's preconditions (``R^2 >= 1/log N``, ``eta > 2/log N``) hold.
    """
    out = ["kind\tn\tmedian\tq90\tbound\tadmissible"]
    for c in summarize(rows):
        if c.metric != metric or c.s != s:
            continue
        out.append(f"{c.kind}\t{c.n}\t{c.median!r}\t{c.quantiles[0.9]!r}\t{bound_curve(c.n, eta)!r}\t{int(bound_admissible(c.n, eta))}")
    return "\n".join(out) + "\n"
