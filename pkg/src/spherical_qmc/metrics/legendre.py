"""Sobolev worst-case error by Legendre expansion of the pair kernel.

    wce^2 = 1/(4 pi N^2) sum_{i,j} sum_{l>=1} (2l+1) P_l(<x_i, x_j>) / (l(l+1))^s

The ``1/(4 pi)`` comes from pairing against the unnormalized area measure
(total mass ``4 pi``); it lives in :data:`VOLUME` so a different convention
is a one-line change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from ..sphere import Configuration, pairwise_cosines
from ..spectral import spectral_weights, zeta, zeta_tail

VOLUME = 4.0 * math.pi
DEFAULT_L_CAP = 400_000
COINCIDENT = 1.0 - 1e-15


class TruncationError(ValueError):
    """Requested tolerance needs more Legendre terms than the cap allows."""

    def __init__(self, msg: str, achievable: float):
        super().__init__(msg)
        self.achievable = achievable


@dataclass(frozen=True)
class WceResult:
    value: float
    s: float
    truncation_l: int
    tail_bound: float
    route: str
    wce2: float
    params: dict | None = None

    def to_dict(self) -> dict:
        d = {"value": self.value, "s": self.s, "truncation_l": self.truncation_l,
             "tail_bound": self.tail_bound, "route": self.route, "wce2": self.wce2}
        if self.params:
            d["params"] = self.params
        return d


def check_smoothness(s: float) -> float:
    s = float(s)
    if not s > 1:
        raise ValueError(f"smoothness s must exceed 1 (wce is infinite for s <= 1), got {s}")
    return s


BLOCK = 256


@njit(parallel=True, cache=True)
def _pair_sums(t, w):
    # per pair: sum_{l=1}^{L} w[l-1] P_l(t); also P_L and P_{L+1} for tail bounds.
    # Pairs are processed in fixed blocks with the degree loop outside, so the
    # inner loop vectorizes; every output depends only on its own pair.
    npairs = t.shape[0]
    L = w.shape[0]
    ca = np.empty(L + 2)
    cb = np.empty(L + 2)
    for l in range(1, L + 2):
        ca[l] = (2.0 * l - 1.0) / l
        cb[l] = (l - 1.0) / l
    acc = np.empty(npairs)
    pl = np.empty(npairs)
    pl1 = np.empty(npairs)
    nblocks = (npairs + BLOCK - 1) // BLOCK
    for b in prange(nblocks):
        lo = b * BLOCK
        hi = min(npairs, lo + BLOCK)
        m = hi - lo
        x = t[lo:hi].copy()
        p0 = np.ones(m)
        p1 = x.copy()
        a = w[0] * x
        for l in range(2, L + 1):
            al = ca[l]
            bl = cb[l]
            wl = w[l - 1]
            for k in range(m):
                p2 = al * x[k] * p1[k] - bl * p0[k]
                a[k] += wl * p2
                p0[k] = p1[k]
                p1[k] = p2
        for k in range(m):
            acc[lo + k] = a[k]
            pl[lo + k] = p1[k]
            pl1[lo + k] = ca[L + 1] * x[k] * p1[k] - cb[L + 1] * p0[k]
    return acc, pl, pl1


def legendre_pair_sums(t, s: float, L: int):
    """``sum_{l=1}^{L} (2l+1) P_l(t) / (l(l+1))^s`` for each entry of ``t``."""
    t = np.ascontiguousarray(t, dtype=float)
    return _pair_sums(t, spectral_weights(s, L))


def _uniform_L(s: float, budget: float, cap: int) -> int:
    # smallest L with zeta_tail(s, L) <= budget
    if zeta_tail(s, 1) <= budget:
        return 1
    lo, hi = 1, 2
    while zeta_tail(s, hi) > budget:
        lo, hi = hi, hi * 2
        if hi > cap:
            raise TruncationError(
                f"tolerance needs L > cap={cap}", achievable=zeta_tail(s, cap))
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if zeta_tail(s, mid) <= budget:
            hi = mid
        else:
            lo = mid
    return hi


def _abel_sums(s: float, L: int) -> tuple[float, float]:
    """``sum_{l>L} (l+1) l^{-1/2} (v_l - v_{l+1})`` and ``sum_{l>L} (l+1)(v_l - v_{l+1})``.

    ``v_l = (l(l+1))^{-s}``; summed explicitly to ``200 L`` plus an analytic
    remainder from ``v_l - v_{l+1} <= 3 s l^{-2s-1}``.
    """
    Lp = 200 * L + 1000
    l = np.arange(L + 1, Lp + 1, dtype=float)
    v = np.exp(-s * np.log(l * (l + 1)))
    vn = np.exp(-s * np.log((l + 1) * (l + 2)))
    dv = v - vn
    half = math.fsum((l + 1) / np.sqrt(l) * dv) + 6 * s * Lp ** (0.5 - 2 * s) / (2 * s - 0.5)
    one = math.fsum((l + 1) * dv) + 6 * s * Lp ** (1 - 2 * s) / (2 * s - 1)
    return half, one


def _bernstein_bounds(t, pl, pl1, s: float, L: int) -> np.ndarray:
    """Per-pair bound on ``|sum_{l>L} (2l+1) P_l(t) v_l|`` for ``-1 <= t < 1``.

    Summation by parts with the Christoffel-Darboux partial sums
    ``S_n = sum_{l<=n} (2l+1) P_l = (n+1)(P_n - P_{n+1})/(1-t)`` and
    Bernstein's inequality ``|P_l(cos th)| < sqrt(2/(pi l sin th))``.
    """
    half, one = _abel_sums(s, L)
    v_next = ((L + 1.0) * (L + 2.0)) ** -s
    one_minus = 1.0 - t
    boundary = (L + 1) * np.abs(pl - pl1) / one_minus * v_next
    sin_th = np.sqrt(np.maximum(0.0, 1.0 - t * t))
    with np.errstate(divide="ignore"):
        bern = np.where(sin_th > 0, np.sqrt(2.0 / (math.pi * sin_th)) * half, np.inf)
    body = 2.0 / one_minus * np.minimum(bern, one)
    return np.minimum(boundary + body, zeta_tail(s, L))


def wce_legendre(
    c: Configuration,
    s: float = 2.0,
    tol: float = 1e-8,
    *,
    tail: str = "uniform",
    L: int | None = None,
    l_cap: int = DEFAULT_L_CAP,
) -> WceResult:
    """Worst-case error via the Legendre expansion with a certified tail.

    Diagonal and coincident pairs contribute the exact zeta value. The
    remaining pairs are truncated at degree ``L``; ``tail="uniform"`` bounds
    each truncated pair by ``zeta_tail(s, L)`` (from ``|P_l| <= 1``), while
    ``tail="bernstein"`` uses a summation-by-parts bound that decays like
    ``L^{1/2 - 2s}``, far smaller for ``s`` close to 1. ``L`` is chosen so
    that ``tail_bound <= tol`` (absolute, on ``wce^2``) unless given.
    """
    s = check_smoothness(s)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if tail not in ("uniform", "bernstein"):
        raise ValueError(f"unknown tail mode {tail!r}")
    n = c.n
    g = pairwise_cosines(c)
    iu = np.triu_indices(n, 1)
    t = g[iu]
    coincident = t >= COINCIDENT
    t_off = np.ascontiguousarray(t[~coincident])
    n_diag = n + 2 * int(coincident.sum())  # ordered pairs carrying the exact zeta value
    z_full = zeta(s).value
    norm = 1.0 / (VOLUME * n * n)

    if t_off.size == 0:
        L = L or 1
        wce2 = norm * n_diag * z_full
        return WceResult(math.sqrt(wce2), s, L, 0.0, "legendre", wce2, {"tail": tail})

    n_ordered = 2 * t_off.size
    budget = tol / (norm * n_ordered)
    if L is None:
        try:
            L = _uniform_L(s, budget, l_cap)
        except TruncationError as exc:
            if tail == "uniform":
                raise TruncationError(
                    f"tol={tol:g} needs L beyond cap {l_cap}; achievable tolerance "
                    f"{norm * n_ordered * exc.achievable:.3e}",
                    norm * n_ordered * exc.achievable) from None
            L = l_cap
        if tail == "bernstein":
            L = min(L, 256)
            while True:
                acc, pl, pl1 = legendre_pair_sums(t_off, s, L)
                bound = norm * 2.0 * math.fsum(_bernstein_bounds(t_off, pl, pl1, s, L))
                if bound <= tol:
                    break
                if L >= l_cap:
                    raise TruncationError(
                        f"tol={tol:g} not reached at L cap {l_cap}; achievable {bound:.3e}", bound)
                grow = (bound / tol) ** (1.0 / (2 * s - 0.5))
                L = min(l_cap, int(math.ceil(L * min(max(1.5, 1.1 * grow), 16.0))))
        else:
            acc, pl, pl1 = legendre_pair_sums(t_off, s, L)
            bound = norm * n_ordered * zeta_tail(s, L)
    else:
        acc, pl, pl1 = legendre_pair_sums(t_off, s, L)
        if tail == "bernstein":
            bound = norm * 2.0 * math.fsum(_bernstein_bounds(t_off, pl, pl1, s, L))
        else:
            bound = norm * n_ordered * zeta_tail(s, L)

    off = 2.0 * math.fsum(acc)
    wce2 = norm * (n_diag * z_full + off)
    value = math.sqrt(max(wce2, 0.0))
    return WceResult(value, s, int(L), float(bound), "legendre", wce2, {"tail": tail})
