"""Monte Carlo checks of the ensemble's distributional claims.

Every report carries its sample size, standard error and test level.
Linear statistics use ``y = sum_i z_i`` (``f = z``, mean zero under sigma).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, stats

from ..samplers import SamplerSpec, sample
from ..scoring import MetricSpec
from ..spectral import (
    BoundParams,
    C0,
    DomainError,
    concentration_tail,
    explicit_confidence,
    fredholm_determinant,
    moment_bound_rhs,
)
from ..sphere import RngStream
from ..metrics import wce_legendre
from ..metrics.legendre import VOLUME
from .persist import quantile
from .plan import ExperimentPlan, stream_id
from .runner import run_batch

ENSEMBLE_KINDS = ("spherical-eig", "spherical-dpp")
HEADLINE_THRESHOLD = 2.86e-3


@dataclass
class StatReport:
    name: str
    status: str  # PASS, WARN or FAIL
    sample_size: int
    level: str
    statistic: float
    se: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status != "FAIL"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def configurations(kind: str, n: int, replicas: int, seed: int = 0):
    """Replica configurations with the same stream ids as :func:`run_batch`."""
    for r in range(replicas):
        yield sample(SamplerSpec(kind, n, RngStream(seed, stream_id(n, r))))


def z_sums(kind: str, n: int, replicas: int, seed: int = 0) -> np.ndarray:
    return np.array([c.points[:, 2].sum() for c in configurations(kind, n, replicas, seed)])


# --- CLT -------------------------------------------------------------------------

def kernel_square(n: int, t):
    """``|K_N(x, y)|^2 = (N / 4 pi)^2 ((1 + t) / 2)^{N-1}`` at ``t = <x, y>``."""
    return (n / VOLUME) ** 2 * ((1.0 + np.asarray(t, dtype=float)) / 2.0) ** (n - 1)


def projection_identity(n: int) -> float:
    """``int |K_N(x, y)|^2 dV(y)`` by quadrature; equals ``N / 4 pi`` for a rank-N projection."""
    val, _ = integrate.quad(lambda t: kernel_square(n, t), -1.0, 1.0, epsabs=0, epsrel=1e-13, limit=200)
    return 2 * math.pi * val


def clt_oracle_variance(n: int) -> float:
    """Exact ``Var(sum z_i)`` for the N-point spherical ensemble, by quadrature.

    ``N int z^2 dsigma - int int z(x) z(y) |K|^2 dV dV``; the double integral
    collapses to ``(4 pi / 3) 2 pi int t |K|^2(t) dt`` (Funk-Hecke, degree 1).
    """
    inner, _ = integrate.quad(lambda t: t * kernel_square(n, t), -1.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)
    return n / 3.0 - (VOLUME / 3.0) * 2 * math.pi * inner


def variance_se(y: np.ndarray) -> float:
    """Standard error of the sample variance, ``sqrt((m4 - s^4) / m)``."""
    d = y - y.mean()
    m4 = np.mean(d**4)
    v = np.mean(d**2)
    return math.sqrt(max(m4 - v * v, 0.0) / y.size)


def clt_variance_test(n: int, replicas: int = 10_000, kind: str = "spherical-eig", seed: int = 0,
                      k_se: float = 3.0) -> StatReport:
    """Sample variance of ``sum z_i`` against its exact finite-N value."""
    if replicas < 1000:
        raise ValueError("clt_variance_test needs replicas >= 1000")
    if kind in ENSEMBLE_KINDS:
        oracle = clt_oracle_variance(n)
    elif kind == "iid-uniform":
        oracle = n / 3.0
    else:
        raise ValueError(f"no variance oracle for sampler {kind!r}")
    y = z_sums(kind, n, replicas, seed)
    v = float(y.var(ddof=1))
    se = variance_se(y)
    ok = abs(v - oracle) <= k_se * se
    proj = projection_identity(n)
    return StatReport(
        "clt_variance", "PASS" if ok else "FAIL", replicas, f"|diff| <= {k_se:g} SE", v, se,
        {"kind": kind, "n": n, "oracle": oracle, "z_score": (v - oracle) / se if se else math.inf,
         "closed_form": 2 * n / (3 * (n + 1)) if kind in ENSEMBLE_KINDS else n / 3.0,
         "projection_identity": proj, "projection_error": abs(proj - n / VOLUME)})


# --- MGF ---------------------------------------------------------------------------

def mgf_test(n: int, c_values=(0.5, 1.0, 2.0), replicas: int = 10_000, kind: str = "spherical-eig",
             seed: int = 0, confidence: float = 0.99) -> list[StatReport]:
    """``E exp(c y)`` against ``exp(c^2 / 3)``, one report per ``c``.

    PASS iff the one-sided upper confidence limit (normal approximation) is
    at most the bound.
    """
    if replicas < 10_000:
        raise ValueError("mgf_test needs replicas >= 10^4")
    y = z_sums(kind, n, replicas, seed)
    zq = stats.norm.ppf(confidence)
    out = []
    for c in c_values:
        e = np.exp(c * y)
        mean = float(e.mean())
        se = float(e.std(ddof=1) / math.sqrt(replicas))
        ucl = mean + zq * se
        bound = math.exp(c * c / 3.0)
        out.append(StatReport(
            "mgf", "PASS" if ucl <= bound else "FAIL", replicas, f"one-sided {confidence:g}", mean, se,
            {"kind": kind, "n": n, "c": c, "ucl": ucl, "bound": bound, "margin": bound - ucl}))
    return out


# --- concentration and moment bounds ------------------------------------------------

def admissible_delta(n: int, eps: float, c0: float = C0) -> float:
    """Smallest delta with ``8 pi R^2 > 1 + C0 eps`` (boundary excluded)."""
    return math.sqrt((1 + c0 * eps) / (8 * math.pi)) / (n * math.sqrt(eps))


def concentration_test(n: int = 16, eps: float = 1.0, deltas=None, replicas: int = 10_000,
                       kind: str = "spherical-eig", seed: int = 0, tol: float = 1e-10,
                       k_se: float = 3.0) -> StatReport:
    """Empirical tail of ``||delta_N - sigma||_{H^-(2+eps)} = wce(.; 2+eps)`` vs the bound."""
    norms = np.array([wce_legendre(c, 2.0 + eps, tol).value
                      for c in configurations(kind, n, replicas, seed)])
    if deltas is None:
        d0 = admissible_delta(n, eps)
        deltas = d0 * np.geomspace(1.05, 4.0, 12)
    rows = []
    worst = -math.inf
    for d in deltas:
        bound = concentration_tail(BoundParams(n=n, eps=eps, delta=float(d)))
        p = float(np.mean(norms > d))
        se = math.sqrt(p * (1 - p) / replicas)
        slack = bound + k_se * se - p
        worst = max(worst, -slack)
        rows.append({"delta": float(d), "empirical": p, "se": se, "bound": bound, "ok": slack >= 0})
    ok = all(r["ok"] for r in rows)
    return StatReport("concentration", "PASS" if ok else "FAIL", replicas,
                      f"empirical <= bound + {k_se:g} SE", worst, 0.0,
                      {"kind": kind, "n": n, "eps": eps, "grid": rows,
                       "norm_median": float(np.median(norms))})


def moment_bound_test(n: int, alpha: float, eps: float = 1.0, replicas: int = 2000,
                      kind: str = "spherical-eig", seed: int = 0, tol: float = 1e-10,
                      confidence: float = 0.99) -> StatReport:
    """``E exp(alpha N^2 wce(2+eps)^2)`` against the Fredholm-determinant bound."""
    w2 = np.array([wce_legendre(c, 2.0 + eps, tol).wce2 for c in configurations(kind, n, replicas, seed)])
    e = np.exp(alpha * n * n * w2)
    mean = float(e.mean())
    se = float(e.std(ddof=1) / math.sqrt(replicas))
    ucl = mean + stats.norm.ppf(confidence) * se
    bound = moment_bound_rhs(alpha, eps)
    # the Gaussian comparison with unit-variance coordinates doubles the determinant argument
    lam2 = 2 * alpha / (4 * math.pi)
    gauss = fredholm_determinant(lam2, 1.0 + eps).value ** -0.5 if lam2 < 2.0 ** (1 + eps) else math.inf
    return StatReport("moment_bound", "PASS" if ucl <= bound else "FAIL", replicas,
                      f"one-sided {confidence:g}", mean, se,
                      {"kind": kind, "n": n, "alpha": alpha, "eps": eps, "ucl": ucl, "bound": bound,
                       "unit_variance_gaussian_bound": gauss,
                       "holds_unit_variance": bool(ucl <= gauss)})


# --- headline and scaling -------------------------------------------------------------

def _wce_values(kind, n_values, replicas, s, seed, tol, threads, progress=None):
    plan = ExperimentPlan(kind, tuple(n_values), replicas, (MetricSpec("wce", s, tol),), seed)
    recs = run_batch(plan, threads=threads, progress=progress)
    out = {n: [] for n in n_values}
    bounds = {n: [] for n in n_values}
    for r in recs:
        mv = r.values[("wce", float(s))]
        out[r.n].append(mv.value)
        bounds[r.n].append(mv.tail_bound)
    return {n: np.array(v) for n, v in out.items()}, {n: np.array(v) for n, v in bounds.items()}


def headline_check(n: int = 1000, eta: float = 3.0, replicas: int = 200, kind: str = "spherical-eig",
                   seed: int = 0, tol: float = 1e-8, threshold: float = HEADLINE_THRESHOLD,
                   iid_replicas: int = 0, threads: int = 1, progress=None) -> StatReport:
    """Count replicas with ``wce(.; 2)`` above the explicit bound.

    Hard requirement: median below ``threshold``. Exceedances: 0 PASS,
    1 WARN, 2 or more FAIL (the bound holds with probability >= 0.999 per
    replica, so one exceedance in a few hundred is not evidence against it).
    """
    if tol > 1e-8:
        raise ValueError("headline_check needs tol <= 1e-8 on wce^2")
    vals, tails = _wce_values(kind, [n], replicas, 2.0, seed, tol, threads, progress)
    v, tb = vals[n], tails[n]
    finite = v[np.isfinite(v)]
    median = quantile(finite, 0.5)
    exceed = int(np.sum(finite > threshold))
    try:
        wce_bound, fail_prob = explicit_confidence(n, eta)
    except DomainError:
        wce_bound, fail_prob = math.nan, math.nan
    if not median < threshold or finite.size < v.size:
        status = "FAIL"
    else:
        status = "PASS" if exceed == 0 else ("WARN" if exceed == 1 else "FAIL")
    details = {"kind": kind, "n": n, "eta": eta, "threshold": threshold,
               "computed_wce_bound": wce_bound, "failure_prob": fail_prob,
               "exceedances": exceed, "exceedances_computed_bound": int(np.sum(finite > wce_bound)),
               "median": median, "max": float(finite.max()) if finite.size else math.nan,
               "max_tail_bound": float(np.nanmax(tb)), "failed_replicas": int(v.size - finite.size),
               "ecdf": sorted(float(x) for x in finite)}
    if iid_replicas:
        iv, _ = _wce_values("iid-uniform", [n], iid_replicas, 2.0, seed, tol, threads)
        details["iid_median"] = quantile(iv[n], 0.5)
        details["iid_ratio"] = details["iid_median"] / median
    return StatReport("headline", status, replicas, "0 PASS / 1 WARN / >=2 FAIL exceedances",
                      median, 0.0, details)


def scaling_study(n_values, replicas: int = 100, s: float = 2.0, kind: str = "spherical-eig",
                  seed: int = 0, tol: float = 1e-8, n_boot: int = 2000, confidence: float = 0.95,
                  expected=None, threads: int = 1) -> StatReport:
    """Least-squares slope of ``log median wce(.; s)`` against ``log N``, with a bootstrap CI."""
    ns = sorted(set(int(n) for n in n_values))
    if len(ns) < 3:
        raise ValueError("scaling_study needs at least 3 distinct values of N")
    vals, _ = _wce_values(kind, ns, replicas, s, seed, tol, threads)
    meds = np.array([np.median(vals[n]) for n in ns])
    if np.any(~np.isfinite(meds)) or np.any(meds <= 0):
        raise ValueError("degenerate fit: non-positive or missing medians")
    x = np.log(ns)
    slope = float(np.polyfit(x, np.log(meds), 1)[0])
    gen = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2**32 - 1,)))
    boot = np.empty(n_boot)
    for b in range(n_boot):
        m = [np.median(gen.choice(vals[n], size=vals[n].size, replace=True)) for n in ns]
        boot[b] = np.polyfit(x, np.log(m), 1)[0]
    lo, hi = np.quantile(boot, [(1 - confidence) / 2, (1 + confidence) / 2])
    se = float(boot.std(ddof=1))
    status = "PASS"
    if expected is not None:
        status = "PASS" if expected[0] <= slope <= expected[1] else "FAIL"
    return StatReport("scaling", status, replicas * len(ns),
                      f"bootstrap {confidence:g} CI", slope, se,
                      {"kind": kind, "s": s, "n_values": ns, "medians": meds.tolist(),
                       "ci": [float(lo), float(hi)], "expected": list(expected) if expected else None})
