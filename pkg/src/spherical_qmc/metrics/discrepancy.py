"""Cap discrepancies, distance sums and the logarithmic energy.

Caps are closed sets ``C(w, h) = {x : <x, w> >= h}`` with area fraction
``sigma(C) = (1 - h) / 2``. The complement of a closed cap is an open cap, so

    sup_C |sigma(C) - emp(C)| = max over closed caps of (emp(C) - sigma(C)),

and the exact L-infinity search only has to shrink closed caps onto the
points they contain: the optimum is the minimal enclosing cap of its own
point set, whose boundary runs through one, two or three of the points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit, prange

from ..sphere import Configuration, RngStream, pairwise_cosines, pairwise_distances, uniform_points
from ..spectral import zeta
from .legendre import COINCIDENT, VOLUME, WceResult

EXACT_LINF_MAX_N = 300
BOUNDARY_TOL = 1e-12


# --- s = 3/2 through the distance sum --------------------------------------------

@lru_cache(maxsize=1)
def distance_calibration() -> float:
    """``kappa`` with ``kappa * 4/3 = wce(single point; 3/2)^2 = Z(3/2) / (4 pi)``."""
    return 3.0 * zeta(1.5).value / (4.0 * VOLUME)


def distance_functional(c: Configuration) -> float:
    """``4/3 - (1/N^2) sum_{i,j} |x_i - x_j|``, nonnegative for every configuration."""
    d = pairwise_distances(c)
    return 4.0 / 3.0 - math.fsum(d.ravel()) / c.n**2


def wce_distance_s32(c: Configuration) -> WceResult:
    """Distance-sum surrogate for ``wce(c; 3/2)``.

    ``kappa * (4/3 - mean distance)``. The distance kernel has Legendre
    coefficients ``4 / ((2l-1)(2l+1)(2l+3))`` against ``(l(l+1))^{-3/2} / (4 pi)``
    for the Sobolev kernel; the ratio is not constant in ``l``, so the two
    agree exactly only for ``N = 1`` (where ``kappa`` is fixed) and are
    otherwise comparable within the extreme coefficient ratios, see
    :func:`distance_comparability`.
    """
    kappa = distance_calibration()
    func = max(distance_functional(c), 0.0)
    wce2 = kappa * func
    return WceResult(math.sqrt(wce2), 1.5, 0, 0.0, "distance-s32", wce2,
                     {"kappa": kappa, "functional": func,
                      "calibration": "kappa*4/3 = Z(3/2)/(4 pi), the single-point Legendre value"})


def distance_comparability(l_max: int = 100_000) -> tuple[float, float]:
    """Bounds ``(a, b)`` with ``a <= wce_distance^2 / wce_legendre(3/2)^2 <= b``.

    Both are nonnegative combinations of the same Legendre moments, so the
    ratio of their squares lies between the extreme coefficient ratios.
    """
    l = np.arange(1, l_max + 1, dtype=float)
    dist = 4.0 / ((2 * l - 1) * (2 * l + 1) * (2 * l + 3))
    sob = (l * (l + 1)) ** -1.5 / VOLUME
    ratio = distance_calibration() * dist / sob
    # the ratio tends to kappa * 4 pi / 2 monotonically; include the limit
    lim = distance_calibration() * VOLUME / 2.0
    return float(min(ratio.min(), lim)), float(max(ratio.max(), lim))


# --- L2 cap discrepancy -------------------------------------------------------------

@dataclass(frozen=True)
class CapL2Result:
    value: float
    se: float
    mc_caps: int

    def to_dict(self) -> dict:
        return {"value": self.value, "se": self.se, "mc_caps": self.mc_caps}


def random_caps(m: int, gen: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Centers uniform on the sphere and heights uniform on ``[-1, 1]``."""
    return uniform_points(m, gen), gen.uniform(-1.0, 1.0, m)


def cap_discrepancy_l2(c: Configuration, mc_caps: int = 10_000, rng=None, chunk: int = 4096) -> CapL2Result:
    """Monte Carlo mean of ``(sigma(C) - emp(C))^2`` over random caps.

    Returns the estimate of the mean square and its standard error. By the
    Stolarsky identity the exact value is :func:`stolarsky_l2`.
    """
    if mc_caps < 1:
        raise ValueError("mc_caps must be >= 1")
    gen = rng.generator() if isinstance(rng, RngStream) else (rng or np.random.default_rng(0))
    x = c.points
    sq = np.empty(mc_caps)
    for lo in range(0, mc_caps, chunk):
        m = min(chunk, mc_caps - lo)
        w, h = random_caps(m, gen)
        emp = np.mean(x @ w.T >= h[None, :], axis=0)
        sq[lo:lo + m] = ((1.0 - h) / 2.0 - emp) ** 2
    se = float(sq.std(ddof=1) / math.sqrt(mc_caps)) if mc_caps > 1 else math.inf
    return CapL2Result(float(sq.mean()), se, mc_caps)


def stolarsky_l2(c: Configuration) -> float:
    """Exact mean-square cap discrepancy ``(4/3 - mean distance) / 8`` (height uniform on ``[-1, 1]``)."""
    return max(distance_functional(c), 0.0) / 8.0


# --- L-infinity cap discrepancy -------------------------------------------------------

@njit(cache=True)
def _count_sides(x, w, h):
    # points in {<x,w> >= h} and in {<x,w> <= h}, boundary inclusive
    inside = 0
    outside = 0
    for k in range(x.shape[0]):
        d = x[k, 0] * w[0] + x[k, 1] * w[1] + x[k, 2] * w[2]
        if d >= h - BOUNDARY_TOL:
            inside += 1
        if d <= h + BOUNDARY_TOL:
            outside += 1
    return inside, outside


@njit(cache=True)
def _pair_cap(x, i, j):
    # smallest cap through x_i and x_j: center at the normalized midpoint
    w = x[i] + x[j]
    nw = math.sqrt(w[0] ** 2 + w[1] ** 2 + w[2] ** 2)
    if nw < 1e-12:
        return w, 2.0, False
    w = w / nw
    return w, x[i, 0] * w[0] + x[i, 1] * w[1] + x[i, 2] * w[2], True


@njit(cache=True)
def _triple_cap(x, i, j, k):
    a = x[j] - x[i]
    b = x[k] - x[i]
    w = np.empty(3)
    w[0] = a[1] * b[2] - a[2] * b[1]
    w[1] = a[2] * b[0] - a[0] * b[2]
    w[2] = a[0] * b[1] - a[1] * b[0]
    nw = math.sqrt(w[0] ** 2 + w[1] ** 2 + w[2] ** 2)
    if nw < 1e-14:
        return w, 2.0, False
    w = w / nw
    return w, x[i, 0] * w[0] + x[i, 1] * w[1] + x[i, 2] * w[2], True


@njit(parallel=True, cache=True)
def _linf_exact(x):
    n = x.shape[0]
    # every point is a degenerate cap of area zero
    best_single = 0.0
    for i in range(n):
        w = x[i].copy()
        inside, _ = _count_sides(x, w, 1.0)
        best_single = max(best_single, inside / n)
    best_pair = np.zeros(n)
    for i in prange(n):
        b = 0.0
        for j in range(i + 1, n):
            w, h, ok = _pair_cap(x, i, j)
            if not ok:
                # antipodal pair: any hemisphere bounded by a great circle through both
                continue
            inside, outside = _count_sides(x, w, h)
            b = max(b, inside / n - (1.0 - h) / 2.0, outside / n - (1.0 + h) / 2.0)
        best_pair[i] = b
    best_triple = np.zeros(n)
    for i in prange(n):
        b = 0.0
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                w, h, ok = _triple_cap(x, i, j, k)
                if not ok:
                    continue
                inside, outside = _count_sides(x, w, h)
                b = max(b, inside / n - (1.0 - h) / 2.0, outside / n - (1.0 + h) / 2.0)
        best_triple[i] = b
    return max(best_single, best_pair.max(), best_triple.max())


def _antipodal_hemispheres(x: np.ndarray) -> float:
    # N = 2 style degeneracy: two antipodal points and nothing to pin a third
    g = x @ x.T
    n = len(x)
    best = 0.0
    for i, j in zip(*np.nonzero(np.triu(g <= -COINCIDENT, 1))):
        axis = x[i]
        perp = np.cross(axis, [1.0, 0.0, 0.0])
        if np.linalg.norm(perp) < 0.5:
            perp = np.cross(axis, [0.0, 1.0, 0.0])
        perp /= np.linalg.norm(perp)
        d = x @ perp
        best = max(best, np.sum(d >= -BOUNDARY_TOL) / n - 0.5, np.sum(d <= BOUNDARY_TOL) / n - 0.5)
    return best


def _linf_randomized(x: np.ndarray, gen: np.random.Generator, starts: int, steps: int, k_near: int) -> float:
    n = len(x)
    xc = np.ascontiguousarray(x)

    def value(idx):
        if len(idx) == 1:
            return _count_sides(xc, xc[idx[0]].copy(), 1.0)[0] / n
        if len(idx) == 2:
            w, h, ok = _pair_cap(xc, idx[0], idx[1])
        else:
            w, h, ok = _triple_cap(xc, idx[0], idx[1], idx[2])
        if not ok:
            return 0.0
        inside, outside = _count_sides(xc, w, h)
        return max(inside / n - (1 - h) / 2, outside / n - (1 + h) / 2)

    g = xc @ xc.T
    near = np.argsort(-g, axis=1)[:, 1:k_near + 1]
    best = max(value([i]) for i in range(n))
    if n < 2:
        return best
    size = 3 if n >= 3 else 2
    for _ in range(starts):
        idx = list(gen.choice(n, size=size, replace=False))
        cur = value(idx)
        for _ in range(steps):
            slot = int(gen.integers(size))
            anchor = idx[int(gen.integers(size))]
            cand = int(near[anchor, int(gen.integers(near.shape[1]))]) if near.shape[1] else int(gen.integers(n))
            if cand in idx:
                continue
            trial = idx.copy()
            trial[slot] = cand
            v = value(trial)
            if v > cur:
                idx, cur = trial, v
        best = max(best, cur)
    return best


def cap_discrepancy_linf(
    c: Configuration,
    mode: str = "exact-smallN",
    rng=None,
    starts: int = 200,
    steps: int = 200,
) -> float:
    """``sup_C |sigma(C) - emp(C)|`` over spherical caps.

    ``mode="exact-smallN"`` enumerates every cap whose boundary passes through
    one, two or three points, in both orientations (``O(N^4)``, N <= 300).
    ``mode="randomized"`` runs a multi-start local search over point triples;
    every candidate is a genuine cap, so the result is a LOWER bound on the
    supremum.
    """
    x = np.ascontiguousarray(c.points)
    if mode == "exact-smallN":
        if c.n > EXACT_LINF_MAX_N:
            raise ValueError(
                f"exact mode supports N <= {EXACT_LINF_MAX_N} (got {c.n}); use mode='randomized'")
        return float(max(_linf_exact(x), _antipodal_hemispheres(x)))
    if mode == "randomized":
        gen = rng.generator() if isinstance(rng, RngStream) else (rng or np.random.default_rng(0))
        return float(max(_linf_randomized(x, gen, starts, steps, k_near=min(12, c.n - 1)),
                         _antipodal_hemispheres(x)))
    raise ValueError(f"unknown mode {mode!r}")


# --- distance sums and energy -------------------------------------------------------

def generalized_sum(c: Configuration, s: float) -> float:
    """``sum_{i != j} |x_i - x_j|^{2s - 2}`` for ``1 < s < 2``."""
    s = float(s)
    if not 1 < s < 2:
        raise ValueError(f"generalized sum needs 1 < s < 2, got {s}")
    d = pairwise_distances(c)
    np.fill_diagonal(d, 0.0)  # 0^(2s-2) = 0, so the diagonal drops out
    return math.fsum((d ** (2 * s - 2)).ravel())


def log_energy(c: Configuration) -> float:
    """``-(1/2) sum_{i != j} log |x_i - x_j|``; ``inf`` when two points coincide."""
    if c.n < 2:
        return 0.0
    g = pairwise_cosines(c)
    iu = np.triu_indices(c.n, 1)
    cos = g[iu]
    if np.any(cos >= COINCIDENT):
        return math.inf
    # |x - y|^2 = 2 (1 - cos), computed from the points to keep precision for close pairs
    d = np.linalg.norm(c.points[iu[0]] - c.points[iu[1]], axis=1)
    if np.any(d == 0.0):
        return math.inf
    return -math.fsum(np.log(d))
