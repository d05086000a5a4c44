import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_legendre

from spherical_qmc.metrics import wce_legendre
from spherical_qmc.metrics.legendre import VOLUME, TruncationError, legendre_pair_sums
from spherical_qmc.sphere import Configuration, apply_rotation, pairwise_cosines, random_rotation, uniform_points

ONE_POINT = 1 / math.sqrt(4 * math.pi)


def antipodal():
    return Configuration(np.array([[0.0, 0, 1], [0, 0, -1]]))


def direct(c, s, L):
    # independent evaluation of the truncated double sum with scipy Legendre values
    t = pairwise_cosines(c).ravel()
    l = np.arange(1, L + 1)
    w = (2 * l + 1) / (l * (l + 1.0)) ** s
    return math.fsum(w @ eval_legendre(l[:, None], t[None, :])) / (VOLUME * c.n**2)


def test_single_point():
    r = wce_legendre(Configuration(np.array([[0.0, 0, 1]])), 2.0)
    assert abs(r.value - ONE_POINT) <= 1e-12
    assert abs(r.value - 0.282095) < 1e-6
    assert r.tail_bound == 0.0


def test_antipodal_pair():
    # even-l sum; with w_l = 1/l^2 - 1/(l+1)^2 the tail after L lies in [0, 1/(L+1)^2]
    L = 100_000
    l = np.arange(2, L + 1, 2, dtype=float)
    head = math.fsum((2 * l + 1) / (l * (l + 1)) ** 2)
    want = head / VOLUME
    r = wce_legendre(antipodal(), 2.0, 1e-12)
    assert want - 1e-12 <= r.wce2 <= want + 1 / (L + 1) ** 2 / VOLUME + 1e-12


@pytest.mark.parametrize("s", [1.5, 2.0, 3.0])
def test_against_direct_sum(s, rng):
    c = Configuration(uniform_points(12, rng))
    L = 400
    r = wce_legendre(c, s, L=L)
    n = c.n
    # the engine uses the exact zeta value on the diagonal, the direct sum truncates it too
    from spherical_qmc.spectral import zeta_tail
    diag_tail = n * zeta_tail(s, L) / (VOLUME * n * n)
    assert abs(r.wce2 - (direct(c, s, L) + diag_tail)) <= 1e-12


def test_certified_tail_doubling(rng):
    c = Configuration(uniform_points(20, rng))
    for s in (1.5, 2.0):
        for tail in ("uniform", "bernstein"):
            for L in (50, 200, 800):
                a = wce_legendre(c, s, L=L, tail=tail)
                b = wce_legendre(c, s, L=64 * L, tail=tail)
                assert abs(a.wce2 - b.wce2) <= a.tail_bound + b.tail_bound + 1e-14


def test_tolerance_respected(rng):
    c = Configuration(uniform_points(30, rng))
    for tol in (1e-6, 1e-8, 1e-10):
        r = wce_legendre(c, 2.0, tol)
        assert r.tail_bound <= tol
        ref = wce_legendre(c, 2.0, 1e-13, tail="bernstein")
        assert abs(r.wce2 - ref.wce2) <= tol + ref.tail_bound


def test_bernstein_matches_uniform(rng):
    c = Configuration(uniform_points(25, rng))
    a = wce_legendre(c, 1.5, 1e-7, tail="bernstein")
    b = wce_legendre(c, 1.5, 1e-6, tail="uniform")
    assert a.tail_bound <= 1e-7
    assert abs(a.wce2 - b.wce2) <= a.tail_bound + b.tail_bound
    assert a.truncation_l < b.truncation_l


def test_truncation_error_reports_achievable(rng):
    c = Configuration(uniform_points(10, rng))
    with pytest.raises(TruncationError) as info:
        wce_legendre(c, 1.2, 1e-12, l_cap=1000)
    assert info.value.achievable > 1e-12
    assert "achievable" in str(info.value)


def test_invalid_inputs(rng):
    c = Configuration(uniform_points(3, rng))
    with pytest.raises(ValueError):
        wce_legendre(c, 1.0)
    with pytest.raises(ValueError):
        wce_legendre(c, 2.0, tol=0)
    with pytest.raises(ValueError):
        wce_legendre(c, 2.0, tail="nope")


def test_coincident_points_exact():
    c = Configuration(np.array([[1.0, 0, 0], [1.0, 0, 0]]))
    r = wce_legendre(c, 2.0)
    assert abs(r.value - ONE_POINT) <= 1e-12


def test_pair_sums_direct():
    t = np.array([-1.0, -0.3, 0.0, 0.5, 0.999])
    acc, pl, pl1 = legendre_pair_sums(t, 2.0, 300)
    l = np.arange(1, 301)
    w = (2 * l + 1) / (l * (l + 1.0)) ** 2
    want = w @ eval_legendre(l[:, None], t[None, :])
    assert np.allclose(acc, want, rtol=0, atol=1e-13)
    assert np.allclose(pl, eval_legendre(300, t), atol=1e-13)
    assert np.allclose(pl1, eval_legendre(301, t), atol=1e-13)


@settings(max_examples=20)
@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_rotation_invariance(n, seed):
    gen = np.random.default_rng(seed)
    c = Configuration(uniform_points(n, gen))
    rc = apply_rotation(c, random_rotation(gen))
    a, b = wce_legendre(c, 2.0, 1e-10), wce_legendre(rc, 2.0, 1e-10)
    assert abs(a.value - b.value) <= 1e-10


@settings(max_examples=20)
@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_nonincreasing_in_s(n, seed):
    c = Configuration(uniform_points(n, np.random.default_rng(seed)))
    vals = [wce_legendre(c, s, 1e-10, tail="bernstein") for s in (1.3, 1.5, 2.0, 2.5, 3.0)]
    for a, b in zip(vals, vals[1:]):
        assert b.wce2 <= a.wce2 + a.tail_bound + b.tail_bound


def test_iid_mean_square():
    # E wce^2 = Z(s) / (4 pi N) for independent uniform points
    gen = np.random.default_rng(3)
    n, m = 20, 2000
    w2 = np.array([wce_legendre(Configuration(uniform_points(n, gen)), 2.0, 1e-10).wce2 for _ in range(m)])
    assert abs(w2.mean() - 1 / (VOLUME * n)) <= 3 * w2.std(ddof=1) / math.sqrt(m)


def test_result_dict():
    d = wce_legendre(antipodal(), 2.0).to_dict()
    assert d["route"] == "legendre"
    assert set(d) >= {"value", "s", "truncation_l", "tail_bound", "wce2"}
