"""Spectral quantities of the round two-sphere and the derived probability bounds.

The nonzero Laplace eigenvalues are ``l(l+1)``, ``l >= 1``, with multiplicity
``2l+1``. Everything here is deterministic and closed form up to certified
series truncation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import zeta as hurwitz_zeta

C0 = 2.0  # Tr(Delta^{-(1+eps)}) <= 1/eps + C0
C1 = 1.0  # Tr(Delta^{-2})


class DomainError(ValueError):
    pass


def eigenvalue(l):
    return np.asarray(l) * (np.asarray(l) + 1)


def multiplicity(l):
    return 2 * np.asarray(l) + 1


def spectral_weights(p: float, L: int) -> np.ndarray:
    """``(2l+1) / (l(l+1))^p`` for ``l = 1..L`` (index 0 holds ``l = 1``)."""
    l = np.arange(1, L + 1, dtype=float)
    return (2.0 * l + 1.0) * np.exp(-p * np.log(l * (l + 1.0)))


def zeta_tail(p: float, L: int) -> float:
    """``sum_{l > L} (2l+1)/(l(l+1))^p`` to full double precision.

    With ``m = l + 1/2`` one has ``l(l+1) = m^2 (1 - 1/(4m^2))``, so each term
    expands as ``2 sum_k (p)_k / (k! 4^k) m^{1-2p-2k}`` and the tail is a
    rapidly convergent series of Hurwitz zeta values at ``q = L + 3/2``. All
    terms are positive; the loop stops once the geometric remainder is below
    1e-17 relative.
    """
    if p <= 1:
        raise DomainError(f"spectral zeta diverges for p <= 1 (got p={p})")
    if p == 2.0:
        return 1.0 / (L + 1) ** 2
    q = L + 1.5
    total = 0.0
    coef = 1.0
    k = 0
    while True:
        term = 2.0 * coef * hurwitz_zeta(2 * p + 2 * k - 1, q)
        total += term
        ratio_next = (p + k) / (4.0 * (k + 1)) / (q * q)
        if ratio_next < 0.5 and term * ratio_next / (1 - ratio_next) <= 1e-17 * total:
            return total
        coef *= (p + k) / (4.0 * (k + 1))
        k += 1
        if k > 10_000:
            raise RuntimeError("zeta tail series failed to converge")


def zeta_tail_bounds(p: float, L: int) -> tuple[float, float]:
    """Elementary integral bounds on :func:`zeta_tail`.

    ``(2x+1)(x(x+1))^{-p}`` is the derivative of ``-(x(x+1))^{1-p}/(p-1)``
    and decreasing, so the tail lies between the integrals from ``L+1`` and
    from ``L``.
    """
    lo = ((L + 1.0) * (L + 2.0)) ** (1 - p) / (p - 1)
    hi = (L * (L + 1.0)) ** (1 - p) / (p - 1) if L >= 1 else math.inf
    return lo, hi


@dataclass(frozen=True)
class SeriesValue:
    value: float
    error: float
    terms: int


def zeta(p: float, tol: float = 1e-12) -> SeriesValue:
    """Spectral zeta ``Tr(Delta^{-p}) = sum_{l>=1} (2l+1)/(l(l+1))^p``."""
    if p <= 1:
        raise DomainError(f"spectral zeta diverges for p <= 1 (got p={p})")
    L = 16
    partial = math.fsum(spectral_weights(p, L))
    tail = zeta_tail(p, L)
    value = partial + tail
    err = 4 * np.finfo(float).eps * value
    if err > tol:
        raise ValueError(f"requested tol {tol:g} is below double-precision resolution {err:.2e}")
    return SeriesValue(value, err, L)


def fredholm_determinant(lam: float, p: float, tol: float = 1e-12) -> SeriesValue:
    """``D(lam, p) = prod_l (1 - lam / (l(l+1))^p)^(2l+1)``.

    Truncated product; the remainder of ``-log D`` lies between
    ``lam * zeta_tail`` and ``lam * zeta_tail / (1 - x_{L+1})`` where
    ``x_{L+1}`` is the first omitted ratio. The midpoint is used.
    """
    if p <= 1:
        raise DomainError("p must exceed 1")
    if lam < 0 or lam >= 2.0**p:
        raise DomainError(f"lambda must lie in [0, 2^p) = [0, {2.0**p:g}), got {lam}")
    if lam == 0:
        return SeriesValue(1.0, 0.0, 0)
    L = 8
    while True:
        x_next = lam / ((L + 1.0) * (L + 2.0)) ** p
        tail = lam * zeta_tail(p, L)
        spread = tail * x_next / (1.0 - x_next)
        if spread <= tol or L > 1 << 22:
            break
        L *= 2
    l = np.arange(1, L + 1, dtype=float)
    x = lam / (l * (l + 1.0)) ** p
    log_d = math.fsum((2 * l + 1) * np.log1p(-x)) - (tail + spread / 2)
    value = math.exp(log_d)
    return SeriesValue(value, value * (spread / 2 + 1e-15 * abs(log_d)), L)


def neg_log_fredholm_series(lam: float, p: float, tol: float = 1e-13) -> SeriesValue:
    """``sum_m zeta(m p) lam^m / m``, the Taylor form of ``-log D(lam, p)``."""
    if lam < 0 or lam >= 2.0**p:
        raise DomainError("lambda outside [0, 2^p)")
    total = 0.0
    m = 1
    r = lam / 2.0**p
    while True:
        z = zeta(m * p).value
        term = z * lam**m / m
        total += term
        # zeta(mp) 2^{mp} decreases in m, so later terms shrink at least geometrically by r
        if r == 0 or term * r / (1 - r) <= tol:
            return SeriesValue(total, term * r / (1 - r) if r else 0.0, m)
        m += 1


def comparison_constant(s_prime: float, s: float) -> float:
    """``c(s', s)`` with ``wce(s') <= c(s', s) wce(s)^{s'/s}`` when ``wce(s) <= 1``."""
    if not (1 < s_prime < s):
        raise DomainError(f"need 1 < s' < s, got s'={s_prime}, s={s}")
    gs, gp = math.gamma(s), math.gamma(s_prime)
    return math.sqrt(gs / gp + (s**s * math.exp(-s) + 1.0) / (gp * (s_prime - 1.0)))


def comparison_holds(wce_sp: float, wce_s: float, s_prime: float, s: float, slack: float = 0.0) -> bool:
    """Check the comparison inequality; vacuous (True) when ``wce_s > 1``."""
    if wce_s > 1:
        return True
    return wce_sp <= comparison_constant(s_prime, s) * wce_s ** (s_prime / s) + slack


def f_lambda(lam: float, eps: float, c0: float = C0) -> float:
    """``lam (1/eps + c0 - 1) - log(1 - lam)`` on ``0 < lam < 1``."""
    if not (0 < lam < 1):
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")
    if eps <= 0:
        raise DomainError("eps must be positive")
    return lam * (1.0 / eps + c0 - 1.0) - math.log1p(-lam)


def f_lambda_prime(lam: float, eps: float, c0: float = C0) -> float:
    return 1.0 / eps + c0 - 1.0 + 1.0 / (1.0 - lam)


@dataclass(frozen=True)
class BoundParams:
    """Concentration-bound inputs.

    Give ``n, eps`` and one of ``delta`` or ``r``; they are tied by
    ``delta^2 = r^2 / (eps n^2)``.
    """

    n: int
    eps: float
    delta: float | None = None
    r: float | None = None
    c0: float = C0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if self.eps <= 0:
            raise DomainError("eps must be positive")
        if (self.delta is None) == (self.r is None):
            raise DomainError("give exactly one of delta or r")
        if self.delta is not None:
            if self.delta <= 0:
                raise DomainError("delta must be positive")
            object.__setattr__(self, "r", self.delta * self.n * math.sqrt(self.eps))
        else:
            if self.r <= 0:
                raise DomainError("r must be positive")
            object.__setattr__(self, "delta", self.r / (self.n * math.sqrt(self.eps)))

    @property
    def eta(self) -> float:
        return 8 * math.pi * self.r**2 - 1.0

    @property
    def target(self) -> float:
        """``8 pi delta^2 N^2``, the slope ``f'`` must match at the optimum."""
        return 8 * math.pi * self.delta**2 * self.n**2


def optimal_lambda(params: BoundParams) -> float:
    """Minimizer ``1 - eps / (8 pi R^2 - 1 - (C0 - 1) eps)`` of the tail exponent."""
    p = params
    denom = 8 * math.pi * p.r**2 - 1.0 - (p.c0 - 1.0) * p.eps
    if denom <= p.eps:
        raise DomainError(
            f"inadmissible: need 8 pi R^2 > 1 + C0 eps for lambda* in (0,1) "
            f"(8 pi R^2 = {8 * math.pi * p.r**2:.6g}, 1 + C0 eps = {1 + p.c0 * p.eps:.6g})"
        )
    lam = 1.0 - p.eps / denom
    resid = f_lambda_prime(lam, p.eps, p.c0) - p.target
    if abs(resid) > 1e-10 * max(1.0, p.target):
        raise ArithmeticError(f"stationarity check failed: f'(lambda*) - target = {resid:.3e}")
    return lam


def concentration_tail(params: BoundParams) -> float:
    """Upper bound on ``P(||delta_N - sigma||_{H^-(2+eps)} > delta)``.

    ``exp(-4 pi delta^2 N^2 lam + f(lam)/2)`` at the optimal ``lam``, clipped
    to [0, 1].
    """
    lam = optimal_lambda(params)
    expo = -4 * math.pi * params.delta**2 * params.n**2 * lam + 0.5 * f_lambda(lam, params.eps, params.c0)
    return min(1.0, math.exp(expo))


def moment_bound_rhs(alpha: float, eps: float, tol: float = 1e-12) -> float:
    """``det(I - (alpha/4pi) Delta^{-(1+eps)})^{-1/2}``, bounding ``E exp(alpha N^2 wce(2+eps)^2)``."""
    if not (0 < alpha < 4 * math.pi):
        raise DomainError(f"alpha must lie in (0, 4 pi), got {alpha}")
    if eps <= 0:
        raise DomainError("eps must be positive")
    d = fredholm_determinant(alpha / (4 * math.pi), 1.0 + eps, tol)
    return d.value ** -0.5


@dataclass
class BoundReport:
    n: int
    eta: float | None = None
    eps: float | None = None
    delta: float | None = None
    r: float | None = None
    lam_star: float | None = None
    f_lam_star: float | None = None
    wce_bound: float | None = None
    failure_prob: float | None = None
    failure_prob_alt: float | None = None
    tail_bound: float | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None and v != []}


def explicit_confidence(n: int, eta: float, denominator: float = 2.0) -> tuple[float, float]:
    """Explicit s=2 confidence statement for the spherical ensemble.

    Returns ``(wce_bound, failure_prob)`` with
    ``wce_bound = e sqrt((1+eta)/(8 pi)) sqrt(log N) / N`` and
    ``failure_prob = sqrt(log N) N^{-eta/2} (eta e^{(1+eta)/(eta - d/log N) + 1})^{1/2}``,
    ``d = 2`` by default (the conservative variant).
    """
    if n < 3:
        raise DomainError("need N >= 3")
    if eta <= 0:
        raise DomainError("eta must be positive")
    logn = math.log(n)
    gap = eta - denominator / logn
    if gap <= 0:
        raise DomainError(f"need eta > {denominator:g}/log N = {denominator / logn:.6g}")
    r2 = (1.0 + eta) / (8 * math.pi)
    if r2 < 1.0 / logn:
        raise DomainError(f"need R^2 = (1+eta)/(8 pi) >= 1/log N ({r2:.6g} < {1 / logn:.6g})")
    wce_bound = math.e * math.sqrt(r2) * math.sqrt(logn) / n
    log_fail = 0.5 * math.log(logn) - 0.5 * eta * logn + 0.5 * (math.log(eta) + (1 + eta) / gap + 1.0)
    return wce_bound, math.exp(log_fail)


def confidence_report(n: int, eta: float) -> BoundReport:
    wce_bound, fail = explicit_confidence(n, eta)
    try:
        _, fail_intro = explicit_confidence(n, eta, denominator=1.0)
    except DomainError:
        fail_intro = None
    logn = math.log(n)
    eps = 1.0 / logn
    params = BoundParams(n=n, eps=eps, r=math.sqrt((1 + eta) / (8 * math.pi)))
    rep = BoundReport(n=n, eta=eta, eps=eps, r=params.r, delta=params.delta,
                      wce_bound=wce_bound, failure_prob=fail,
                      failure_prob_alt=fail_intro)
    try:
        lam = optimal_lambda(params)
        rep.lam_star = lam
        rep.f_lam_star = f_lambda(lam, eps)
        rep.tail_bound = concentration_tail(params)
    except DomainError as exc:
        rep.notes.append(str(exc))
    rep.notes.append("failure_prob uses eta - 2/log N; failure_prob_alt uses eta - 1/log N")
    return rep


def concentration_report(n: int, eps: float, delta: float, c0: float = C0) -> BoundReport:
    params = BoundParams(n=n, eps=eps, delta=delta, c0=c0)
    lam = optimal_lambda(params)
    return BoundReport(n=n, eps=eps, delta=delta, r=params.r, eta=params.eta,
                       lam_star=lam, f_lam_star=f_lambda(lam, eps, c0),
                       tail_bound=concentration_tail(params))
