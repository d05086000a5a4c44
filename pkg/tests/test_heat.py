import math

import numpy as np
import pytest

from spherical_qmc.metrics import g_of_t, wce_heat_kernel, wce_legendre
from spherical_qmc.metrics.heat import TRACE_REMAINDER, PairSpectrum, QuadratureError
from spherical_qmc.sphere import Configuration, uniform_points

ONE = Configuration(np.array([[0.0, 0, 1]]))


def test_single_point():
    r = wce_heat_kernel(ONE, 2.0)
    assert abs(r.value - 1 / math.sqrt(4 * math.pi)) <= 1e-6
    assert r.route == "heat-kernel"


@pytest.mark.parametrize("s", [1.3, 1.5, 2.0, 3.0])
def test_single_point_all_s(s):
    from spherical_qmc.spectral import zeta
    r = wce_heat_kernel(ONE, s)
    assert abs(r.wce2 - zeta(s).value / (4 * math.pi)) <= max(r.tail_bound, 1e-10)


def test_agrees_with_legendre_n16(rng):
    c = Configuration(uniform_points(16, rng))
    a, b = wce_heat_kernel(c, 2.0), wce_legendre(c, 2.0, 1e-10)
    assert abs(a.value - b.value) <= 1e-6
    assert abs(a.wce2 - b.wce2) <= a.tail_bound + b.tail_bound


def test_agrees_with_legendre_s15(rng):
    c = Configuration(uniform_points(8, rng))
    a, b = wce_heat_kernel(c, 1.5), wce_legendre(c, 1.5, 1e-9, tail="bernstein")
    assert abs(a.value - b.value) <= 1e-5
    assert abs(a.wce2 - b.wce2) <= a.tail_bound + b.tail_bound


def test_g_large_t_one_term():
    t = 3.0
    g = g_of_t(ONE, t).value
    lead = 3 / (4 * math.pi) * math.exp(-2 * t)
    # next term is 5 e^{-6t} / (4 pi), so the relative error is about (5/3) e^{-4t}
    assert abs(g - lead) / lead <= 2 * math.exp(-4 * t)
    assert abs(g - lead) / lead >= math.exp(-4 * t)


def test_g_nonnegative_and_decreasing(rng):
    c = Configuration(uniform_points(10, rng))
    ts = np.geomspace(1e-3, 10, 30)
    vals = [g_of_t(c, t) for t in ts]
    assert all(v.value >= -v.tail_bound for v in vals)
    assert all(b.value <= a.value + a.tail_bound + b.tail_bound for a, b in zip(vals, vals[1:]))


def test_g_validation():
    with pytest.raises(ValueError):
        g_of_t(ONE, 0.0)
    with pytest.raises(ValueError):
        g_of_t(ONE, 1.0, tol=0.0)


def test_trace_expansion_remainder():
    ps = PairSpectrum(ONE, 4000)
    for t in np.geomspace(0.002, 0.05, 20):
        exp = 1 / t - 2 / 3 + t / 15 + 4 * t**2 / 315 + t**3 / 315
        tail = math.exp(-t * 4000 * 4001) / t
        assert abs(ps.trace(t)[0] - exp) <= TRACE_REMAINDER * t**4 + tail + 1e-12 / t


def test_near_coincident_pair_raises():
    c = Configuration(np.array([[0.0, 0, 1], [1e-6, 0, 1]]))
    with pytest.raises(QuadratureError):
        wce_heat_kernel(c, 2.0)
