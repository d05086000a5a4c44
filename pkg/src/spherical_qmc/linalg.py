"""Dense complex linear algebra for the random-matrix sampler.

Gaussian matrix generation, LU-based solves with a singularity signal, and a
general (non-Hermitian) eigenvalue solver: balancing, Householder reduction
to upper Hessenberg form, then single-shift implicit QR with Wilkinson shifts
and deflation. Only eigenvalues are computed.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg
from numba import njit

from .sphere import RngStream

EPS = np.finfo(float).eps


class SingularMatrixError(np.linalg.LinAlgError):
    """Pivot below threshold during LU; the caller should draw a fresh matrix."""


class ConvergenceError(RuntimeError):
    """QR iteration exceeded its sweep budget."""


def gaussian_matrix(n: int, rng: RngStream | np.random.Generator, variance: float = 0.5) -> np.ndarray:
    """``n x n`` matrix of i.i.d. complex Gaussians.

    Real and imaginary parts are independent, mean zero, each with the given
    ``variance`` (default 1/2, the standard complex Gaussian).
    """
    if n < 1:
        raise ValueError("matrix dimension must be >= 1")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    scale = np.sqrt(variance)
    re = gen.standard_normal((n, n))
    im = gen.standard_normal((n, n))
    return scale * (re + 1j * im)


def _lu(b: np.ndarray):
    b = np.asarray(b, dtype=complex)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(b)):
        raise ValueError("matrix has non-finite entries")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)  # reported below as SingularMatrixError
        lu, piv = scipy.linalg.lu_factor(b, check_finite=False)
    scale = np.max(np.abs(b)) if b.size else 0.0
    pivots = np.abs(np.diag(lu))
    if scale == 0.0 or pivots.min() <= b.shape[0] * EPS * scale:
        raise SingularMatrixError(
            f"pivot {pivots.min():.3e} below threshold {b.shape[0] * EPS * scale:.3e}"
        )
    return lu, piv


def solve(b_mat, a_mat) -> np.ndarray:
    """Return ``M`` with ``b_mat @ M = a_mat`` (LU with partial pivoting).

    Raises :class:`SingularMatrixError` when ``b_mat`` is singular to working
    precision.
    """
    lu, piv = _lu(b_mat)
    return scipy.linalg.lu_solve((lu, piv), np.asarray(a_mat, dtype=complex), check_finite=False)


def determinant(m) -> complex:
    """Determinant from the LU factorization (zero for singular input)."""
    m = np.asarray(m, dtype=complex)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    sign = (-1) ** int(np.sum(piv != np.arange(len(piv))))
    return complex(sign * np.prod(np.diag(lu)))


# --- eigenvalues ---------------------------------------------------------------

@njit(cache=True)
def _balance(a):
    # Parlett-Reinsch: scale by powers of two until row and column norms are comparable
    n = a.shape[0]
    radix = 2.0
    converged = False
    while not converged:
        converged = True
        for i in range(n):
            c = 0.0
            r = 0.0
            for j in range(n):
                if j != i:
                    c += abs(a[j, i].real) + abs(a[j, i].imag)
                    r += abs(a[i, j].real) + abs(a[i, j].imag)
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g:
                f *= radix
                c *= radix * radix
            g = r * radix
            while c > g:
                f /= radix
                c /= radix * radix
            if (c + r) / f < 0.95 * s:
                converged = False
                for j in range(n):
                    a[i, j] /= f
                for j in range(n):
                    a[j, i] *= f


@njit(cache=True)
def _hessenberg(a):
    n = a.shape[0]
    for k in range(n - 2):
        m = n - k - 1
        v = np.empty(m, dtype=np.complex128)
        norm2 = 0.0
        for i in range(m):
            v[i] = a[k + 1 + i, k]
            norm2 += v[i].real ** 2 + v[i].imag ** 2
        xnorm = np.sqrt(norm2)
        if xnorm == 0.0:
            continue
        x0 = v[0]
        ax0 = abs(x0)
        phase = x0 / ax0 if ax0 > 0.0 else 1.0 + 0.0j
        alpha = -phase * xnorm
        v[0] -= alpha
        vn2 = 0.0
        for i in range(m):
            vn2 += v[i].real ** 2 + v[i].imag ** 2
        if vn2 == 0.0:
            continue
        # left: A[k+1:, k:] -= (2/vn2) v (v^H A)
        for j in range(k, n):
            dot = 0.0 + 0.0j
            for i in range(m):
                dot += v[i].conjugate() * a[k + 1 + i, j]
            dot *= 2.0 / vn2
            for i in range(m):
                a[k + 1 + i, j] -= v[i] * dot
        # right: A[:, k+1:] -= (2/vn2) (A v) v^H
        for i in range(n):
            dot = 0.0 + 0.0j
            for jj in range(m):
                dot += a[i, k + 1 + jj] * v[jj]
            dot *= 2.0 / vn2
            for jj in range(m):
                a[i, k + 1 + jj] -= dot * v[jj].conjugate()
        for i in range(k + 2, n):
            a[i, k] = 0.0


@njit(cache=True)
def _hqr(h, max_sweeps):
    """Eigenvalues of upper Hessenberg ``h`` (modified in place).

    Returns (eigenvalues, sweeps_used, ok).
    """
    n = h.shape[0]
    eig = np.empty(n, dtype=np.complex128)
    hnorm = 0.0
    for i in range(n):
        for j in range(n):
            hnorm = max(hnorm, abs(h[i, j]))
    hi = n - 1
    its = 0
    total = 0
    while hi >= 0:
        if hi == 0:
            eig[0] = h[0, 0]
            break
        # look for a negligible subdiagonal entry
        l = hi
        while l > 0:
            scale = abs(h[l - 1, l - 1]) + abs(h[l, l])
            if scale == 0.0:
                scale = hnorm
            if abs(h[l, l - 1]) <= EPS * scale:
                h[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            eig[hi] = h[hi, hi]
            hi -= 1
            its = 0
            continue
        if total >= max_sweeps:
            return eig, total, False
        its += 1
        total += 1
        a = h[hi - 1, hi - 1]
        b = h[hi - 1, hi]
        c = h[hi, hi - 1]
        d = h[hi, hi]
        if its % 11 == 10:
            # exceptional shift to break cycles
            mu = d + 0.75 * abs(c) * (1.0 + 1.0j)
        else:
            half = 0.5 * (a - d)
            disc = np.sqrt(half * half + b * c)
            m = 0.5 * (a + d)
            mu1 = m + disc
            mu2 = m - disc
            mu = mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2
        x = h[l, l] - mu
        y = h[l + 1, l]
        for k in range(l, hi):
            if k > l:
                x = h[k, k - 1]
                y = h[k + 1, k - 1]
            ax = abs(x)
            r = np.sqrt(ax * ax + abs(y) ** 2)
            if r == 0.0:
                continue
            if ax == 0.0:
                cr = 0.0
                s = 1.0 + 0.0j
            else:
                cr = ax / r
                s = (x / ax) * y.conjugate() / r
            # rows k, k+1 <- G rows
            jstart = l if k == l else k - 1
            for j in range(jstart, hi + 1):
                t1 = h[k, j]
                t2 = h[k + 1, j]
                h[k, j] = cr * t1 + s * t2
                h[k + 1, j] = -s.conjugate() * t1 + cr * t2
            if k > l:
                h[k + 1, k - 1] = 0.0
            # columns k, k+1 <- columns G^H
            iend = min(k + 2, hi)
            for i in range(l, iend + 1):
                t1 = h[i, k]
                t2 = h[i, k + 1]
                h[i, k] = cr * t1 + s.conjugate() * t2
                h[i, k + 1] = -s * t1 + cr * t2
    return eig, total, True


def hessenberg(m, balance: bool = True) -> np.ndarray:
    """Upper Hessenberg matrix similar to ``m`` (after optional balancing)."""
    a = np.array(m, dtype=np.complex128, copy=True)
    if balance:
        _balance(a)
    _hessenberg(a)
    return a


def eigenvalues(m, method: str = "hqr") -> np.ndarray:
    """All eigenvalues of a square complex matrix, with multiplicity, unordered.

    ``method="hqr"`` runs the built-in balancing + Hessenberg + shifted QR
    solver; ``method="lapack"`` delegates to :func:`numpy.linalg.eigvals`
    (same contract, used by default in the samplers for speed).
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    n = a.shape[0]
    if method == "lapack":
        return np.linalg.eigvals(a)
    if method != "hqr":
        raise ValueError(f"unknown eigenvalue method {method!r}")
    if n == 0:
        return np.empty(0, dtype=complex)
    h = hessenberg(a)
    max_sweeps = 30 * n
    eig, used, ok = _hqr(h, max_sweeps)
    if not ok:
        raise ConvergenceError(
            f"QR iteration did not converge within {max_sweeps} sweeps (n={n}); "
            f"Frobenius norm {np.linalg.norm(a):.3e}"
        )
    return eig
