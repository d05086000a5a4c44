import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment
from scipy.stats import unitary_group

from spherical_qmc.linalg import (
    ConvergenceError,
    SingularMatrixError,
    determinant,
    eigenvalues,
    gaussian_matrix,
    hessenberg,
    solve,
)
from spherical_qmc.sphere import RngStream


def match_error(a, b):
    """Max distance after optimal matching of two multisets."""
    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c].max()


def test_gaussian_matrix_moments():
    gen = np.random.default_rng(1)
    x = np.array([gaussian_matrix(1, gen)[0, 0] for _ in range(100_000)])
    se = np.sqrt(0.5 / x.size)
    assert abs(x.real.mean()) <= 3 * se and abs(x.imag.mean()) <= 3 * se
    assert 0.97 <= x.real.var() / x.imag.var() <= 1.03
    assert abs(x.real.var() - 0.5) <= 0.01


def test_gaussian_matrix_reproducible():
    a = gaussian_matrix(2, RngStream(5, 1))
    b = gaussian_matrix(2, RngStream(5, 1))
    assert a.tobytes() == b.tobytes()
    with pytest.raises(ValueError):
        gaussian_matrix(0, RngStream(5, 1))


def test_solve_examples(rng):
    a = gaussian_matrix(6, rng)
    np.testing.assert_array_equal(solve(np.eye(6), a), a)
    np.testing.assert_allclose(solve(2 * np.eye(6), a), a / 2, rtol=0, atol=0)


def test_solve_residual(rng):
    b = gaussian_matrix(50, rng) + 10 * np.eye(50)
    a = gaussian_matrix(50, rng)
    m = solve(b, a)
    assert np.max(np.abs(b @ m - a)) <= 1e-9 * np.max(np.abs(a))


def test_solve_singular():
    b = np.ones((3, 3), dtype=complex)
    with pytest.raises(SingularMatrixError):
        solve(b, np.eye(3))
    with pytest.raises(SingularMatrixError):
        solve(np.zeros((2, 2)), np.eye(2))


def test_eigen_examples():
    ev = eigenvalues(np.diag([1, 2 + 1j, -3]))
    assert match_error(ev, [1, 2 + 1j, -3]) <= 1e-14
    ev = eigenvalues(np.array([[0, 1], [-1, 0]]))
    assert match_error(ev, [1j, -1j]) <= 1e-14
    assert match_error(eigenvalues(np.array([[4.0]])), [4.0]) == 0


def test_eigen_conjugated_diagonal():
    gen = np.random.default_rng(3)
    u = unitary_group.rvs(100, random_state=4)
    d = gen.standard_normal(100) + 1j * gen.standard_normal(100)
    m = u @ np.diag(d) @ u.conj().T
    assert match_error(eigenvalues(m), d) <= 1e-8 * np.linalg.norm(m, 2)


def test_hessenberg_form_and_similarity(rng):
    a = gaussian_matrix(12, rng)
    h = hessenberg(a, balance=False)
    assert np.all(np.tril(h, -2) == 0)
    assert abs(np.trace(h) - np.trace(a)) <= 1e-12 * np.linalg.norm(a)
    np.testing.assert_allclose(np.linalg.norm(h), np.linalg.norm(a), rtol=1e-12)


def test_balancing_badly_scaled():
    d = np.diag([1e-6, 1.0, 1e6])
    a = d @ np.array([[1, 2, 3], [4, 5, 6], [7, 8, 10]], dtype=complex) @ np.linalg.inv(d)
    assert match_error(eigenvalues(a), np.linalg.eigvals(a)) <= 1e-8


@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_eigen_trace_det_scaling(n, seed):
    gen = np.random.default_rng(seed)
    m = gaussian_matrix(n, gen)
    ev = eigenvalues(m)
    norm = np.linalg.norm(m, 2)
    assert len(ev) == n
    assert abs(ev.sum() - np.trace(m)) <= 1e-8 * n * norm
    det = determinant(m)
    assert abs(np.prod(ev) - det) <= 1e-6 * abs(det)
    c = 2.5 - 1.5j
    assert match_error(eigenvalues(c * m), c * ev) <= 1e-8 * abs(c) * norm


def test_eigen_agrees_with_lapack(rng):
    m = gaussian_matrix(80, rng)
    assert match_error(eigenvalues(m, "hqr"), eigenvalues(m, "lapack")) <= 1e-10


def test_eigen_rejects():
    with pytest.raises(ValueError):
        eigenvalues(np.ones((2, 3)))
    with pytest.raises(ValueError):
        eigenvalues(np.array([[np.inf]]))
    with pytest.raises(ValueError):
        eigenvalues(np.eye(2), method="nope")


def test_convergence_error_type():
    assert issubclass(ConvergenceError, RuntimeError)
    assert issubclass(SingularMatrixError, np.linalg.LinAlgError)
