"""Point-set generators: the spherical ensemble and baseline designs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .linalg import SingularMatrixError, eigenvalues, gaussian_matrix, solve
from .sphere import Configuration, RngStream, inverse_stereographic, uniform_points

KINDS = ("spherical-eig", "spherical-dpp", "iid-uniform", "equal-area-jitter", "fibonacci")

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
MAX_REDRAWS = 8
DPP_PROPOSAL_CAP = 2000  # proposals per accepted point before giving up


class SamplerStall(RuntimeError):
    pass


@dataclass(frozen=True)
class SamplerSpec:
    kind: str
    n: int
    rng: RngStream = RngStream(0, 0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sampler kind {self.kind!r}; choose from {KINDS}")
        if self.n < 1:
            raise ValueError("n must be >= 1")


def sample(spec: SamplerSpec) -> Configuration:
    if spec.kind == "spherical-eig":
        return sample_spherical_eig(spec.n, spec.rng)
    if spec.kind == "spherical-dpp":
        return sample_spherical_dpp(spec.n, spec.rng)
    if spec.kind == "iid-uniform":
        return sample_iid_uniform(spec.n, spec.rng)
    if spec.kind == "equal-area-jitter":
        return sample_equal_area_jitter(spec.n, spec.rng)
    return sample_fibonacci(spec.n)


def _gen(rng) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngStream) else rng


def spherical_ensemble_eigenvalues(
    n: int, rng, variance: float = 0.5, method: str = "lapack"
) -> np.ndarray:
    """Eigenvalues of ``B^{-1} A`` for independent complex Gaussian ``A, B``."""
    gen = _gen(rng)
    for _ in range(MAX_REDRAWS):
        a = gaussian_matrix(n, gen, variance)
        b = gaussian_matrix(n, gen, variance)
        try:
            m = solve(b, a)
        except SingularMatrixError:
            continue
        return eigenvalues(m, method=method)
    raise SingularMatrixError(f"B singular in {MAX_REDRAWS} consecutive draws (n={n})")


def sample_spherical_eig(
    n: int, rng, variance: float = 0.5, method: str = "lapack"
) -> Configuration:
    """Spherical ensemble via the matrix quotient.

    The spectrum of ``B^{-1} A`` is projected with the inverse stereographic
    map without any sqrt(n) rescaling: the unscaled spectrum has planar
    intensity proportional to ``n (1 + |z|^2)^-2``, which is the pushforward
    of the uniform measure, so the projected process is rotation invariant.
    """
    z = spherical_ensemble_eigenvalues(n, rng, variance, method)
    return Configuration(inverse_stereographic(z))


def _dpp_features(x: np.ndarray, n: int, log_norms: np.ndarray) -> np.ndarray:
    # psi_k(x) = sqrt(n C(n-1, k)) e^{ik phi} a^k b^(n-1-k), orthonormal in L2(sigma)
    a2 = np.clip((1.0 + x[2]) / 2.0, 0.0, 1.0)
    b2 = np.clip((1.0 - x[2]) / 2.0, 0.0, 1.0)
    k = np.arange(n)
    with np.errstate(divide="ignore"):
        la, lb = np.log(a2), np.log(b2)
    logmag = log_norms + 0.5 * (k * la + (n - 1 - k) * lb)
    # 0 * log(0) must vanish at the poles
    logmag = np.where((k == 0) & (a2 == 0.0), log_norms + 0.5 * (n - 1) * lb, logmag)
    logmag = np.where((k == n - 1) & (b2 == 0.0), log_norms + 0.5 * (n - 1) * la, logmag)
    phi = math.atan2(x[1], x[0])
    return np.exp(logmag) * np.exp(1j * k * phi)


def sample_spherical_dpp(n: int, rng) -> Configuration:
    """Spherical ensemble by sequential sampling of the projection DPP.

    The kernel is spanned by the functions ``z^k (1 + |z|^2)^{-(n+1)/2}``,
    ``k < n``, transported to the sphere, where they become
    ``e^{ik phi} a^k b^{n-1-k}`` with ``a^2 = (1+z)/2`` and ``b^2 = (1-z)/2``.
    The diagonal of the kernel is constant (= n) against the uniform measure,
    so each conditional density is sampled by rejection from uniform
    proposals.
    """
    gen = _gen(rng)
    k = np.arange(n)
    log_norms = 0.5 * (math.log(n) + gammaln(n) - gammaln(k + 1) - gammaln(n - k))
    basis = np.eye(n, dtype=complex)
    out = np.empty((n, 3))
    for step in range(n):
        m = n - step
        for _ in range(DPP_PROPOSAL_CAP * n):
            x = uniform_points(1, gen)[0]
            v = np.conj(_dpp_features(x, n, log_norms))
            y = basis.conj().T @ v
            if gen.uniform() * n <= np.vdot(y, y).real:
                break
        else:
            raise SamplerStall(
                f"rejection sampler stalled at point {step + 1}/{n} "
                f"after {DPP_PROPOSAL_CAP * n} proposals"
            )
        out[step] = x
        if m > 1:
            # drop the direction of y from span(basis) with a Householder reflection
            ny = np.linalg.norm(y)
            phase = y[0] / abs(y[0]) if abs(y[0]) > 0 else 1.0
            u = y.copy()
            u[0] += phase * ny
            u /= np.linalg.norm(u)
            basis = basis - 2.0 * np.outer(basis @ u, u.conj())
            basis = basis[:, 1:]
    return Configuration(out)


def sample_iid_uniform(n: int, rng) -> Configuration:
    if n < 1:
        raise ValueError("n must be >= 1")
    return Configuration(uniform_points(n, _gen(rng)))


def equal_area_cells(n: int) -> np.ndarray:
    """Zonal equal-area partition of the sphere into ``n`` cells.

    Two polar caps plus latitude collars split evenly in azimuth. Returns an
    ``(n, 4)`` array of ``(z_lo, z_hi, phi_lo, phi_hi)``; since area is
    ``dz dphi``, every cell has area ``4 pi / n`` by construction.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    two_pi = 2.0 * math.pi
    if n == 1:
        return np.array([[-1.0, 1.0, 0.0, two_pi]])
    if n == 2:
        return np.array([[0.0, 1.0, 0.0, two_pi], [-1.0, 0.0, 0.0, two_pi]])
    cap_colat = math.acos(1.0 - 2.0 / n)
    ideal_angle = math.sqrt(4.0 * math.pi / n)
    n_collars = max(1, round((math.pi - 2.0 * cap_colat) / ideal_angle))
    width = (math.pi - 2.0 * cap_colat) / n_collars
    counts = []
    carry = 0.0
    for i in range(n_collars):
        t1 = cap_colat + i * width
        t2 = t1 + width
        ideal = n * (math.cos(t1) - math.cos(t2)) / 2.0
        m = max(1, round(ideal + carry))
        carry += ideal - m
        counts.append(m)
    counts[-1] += (n - 2) - sum(counts)
    if counts[-1] < 1:
        raise AssertionError("collar rounding produced an empty collar")
    cells = [(1.0 - 2.0 / n, 1.0, 0.0, two_pi)]
    done = 1
    for m in counts:
        z_hi = 1.0 - 2.0 * done / n
        z_lo = 1.0 - 2.0 * (done + m) / n
        edges = np.linspace(0.0, two_pi, m + 1)
        cells.extend((z_lo, z_hi, edges[j], edges[j + 1]) for j in range(m))
        done += m
    cells.append((-1.0, -1.0 + 2.0 / n, 0.0, two_pi))
    return np.array(cells)


def sample_equal_area_jitter(n: int, rng) -> Configuration:
    """One uniform point in each cell of :func:`equal_area_cells`."""
    gen = _gen(rng)
    cells = equal_area_cells(n)
    z = gen.uniform(cells[:, 0], cells[:, 1])
    phi = gen.uniform(cells[:, 2], cells[:, 3])
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return Configuration(np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z]))


def sample_fibonacci(n: int) -> Configuration:
    """Fibonacci spiral: equal-area latitudes, golden-angle azimuths."""
    if n < 1:
        raise ValueError("n must be >= 1")
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    phi = (i * GOLDEN_ANGLE) % (2.0 * math.pi)
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return Configuration(np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z]))
