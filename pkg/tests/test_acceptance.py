"""One test per acceptance criterion; each prints a PASS/FAIL/WARN line."""

import math

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment
from scipy.stats import unitary_group

from conftest import ACCEPTANCE_LINES
from spherical_qmc.experiments.stats import (
    clt_variance_test,
    concentration_test,
    headline_check,
    mgf_test,
    scaling_study,
)
from spherical_qmc.linalg import determinant, eigenvalues
from spherical_qmc.metrics import wce_heat_kernel, wce_legendre
from spherical_qmc.metrics.legendre import VOLUME
from spherical_qmc.samplers import sample_iid_uniform
from spherical_qmc.spectral import comparison_constant, explicit_confidence, zeta
from spherical_qmc.sphere import Configuration, RngStream, apply_rotation, random_rotation, uniform_points


def verdict(k, ok, detail, status=None):
    status = status or ("PASS" if ok else "FAIL")
    line = f"{status} criterion {k}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert status != "FAIL", line


def random_configs(m, seed, n_max=24):
    gen = np.random.default_rng(seed)
    return [Configuration(uniform_points(int(gen.integers(1, n_max + 1)), gen)) for _ in range(m)]


def test_criterion_01_spectral_fixed_point():
    z2 = zeta(2).value
    eps = np.linspace(0.01, 1.0, 100)
    worst = max(zeta(1 + e).value - (1 / e + 2) for e in eps)
    ok = abs(z2 - 1) <= 1e-12 and worst <= 0
    verdict(1, ok, f"|zeta(2) - 1| = {abs(z2 - 1):.1e} (<= 1e-12); "
                   f"max zeta(1+eps) - (1/eps + 2) over 100 eps in [0.01, 1] = {worst:.4f} (<= 0)")


def test_criterion_02_comparison_constant():
    grid = np.linspace(0.0015, 0.15, 100)
    worst = max(comparison_constant(2.0, 2.0 + e) for e in grid)
    c215 = comparison_constant(2.0, 2.15)
    ok_a = worst <= math.exp(0.5)
    ok_b = c215 <= 1.634
    verdict(2, ok_a and ok_b, f"max c(2, 2+eps) on 100-point grid = {worst:.5f} (<= e^1/2 = 1.64872: "
                              f"{'ok' if ok_a else 'violated'}); c(2, 2.15) = {c215:.5f} (<= 1.634: "
                              f"{'ok' if ok_b else 'violated'})")


def test_criterion_03_explicit_confidence():
    wce_bound, fail = explicit_confidence(1000, 3.0)
    numerator = wce_bound * 1000
    ok = wce_bound < 3e-3 and numerator < 2.86 and fail < 1e-3
    verdict(3, ok, f"wce_bound = {wce_bound:.6e} (< 3e-3), numerator = {numerator:.5f} (< 2.86), "
                   f"failure_prob = {fail:.3e} (< 1e-3)")


def test_criterion_04_route_agreement():
    worst_gap, worst_tol, bad = 0.0, 0.0, 0
    for c in random_configs(100, 4):
        for s in (1.3, 1.5, 2.0, 2.5):
            a = wce_legendre(c, s, 1e-8, tail="bernstein")
            b = wce_heat_kernel(c, s)
            tol = a.tail_bound + b.tail_bound
            gap = abs(a.wce2 - b.wce2)
            worst_gap, worst_tol = max(worst_gap, gap), max(worst_tol, tol)
            bad += not (gap <= tol and tol <= 1e-6)
    one = Configuration(np.array([[0.0, 0, 1]]))
    target = 1 / math.sqrt(VOLUME)
    d1 = abs(wce_legendre(one, 2.0).value - target)
    d2 = abs(wce_heat_kernel(one, 2.0).value - target)
    ok = bad == 0 and d1 <= 1e-12 and d2 <= 1e-6
    verdict(4, ok, f"400 (config, s) cells, {bad} outside tolerance; max |wce2 gap| = {worst_gap:.2e}, "
                   f"max combined tolerance = {worst_tol:.2e} (<= 1e-6); single point errors "
                   f"{d1:.1e} (legendre), {d2:.1e} (heat)")


def test_criterion_05_iid_calibration():
    n, m = 64, 2000
    w2 = np.array([wce_legendre(sample_iid_uniform(n, RngStream(5, r)), 2.0, 1e-10).wce2 for r in range(m)])
    oracle = 1 / (VOLUME * n)
    se = w2.std(ddof=1) / math.sqrt(m)
    z = (w2.mean() - oracle) / se
    verdict(5, abs(z) <= 3, f"mean wce^2 = {w2.mean():.6e}, oracle 1/(4 pi 64) = {oracle:.6e}, "
                            f"SE = {se:.2e}, z = {z:+.2f} (|z| <= 3), replicas = {m}")


@pytest.fixture(scope="module")
def headline():
    return headline_check(n=1000, eta=3.0, replicas=200, iid_replicas=20)


@pytest.mark.slow
def test_criterion_06_headline(headline):
    d = headline.details
    verdict(6, headline.passed,
            f"N=1000, 200 replicas: median wce = {d['median']:.4e} (< 2.86e-3), max = {d['max']:.4e}, "
            f"exceedances = {d['exceedances']} (0 PASS / 1 WARN / >=2 FAIL), max tail_bound = "
            f"{d['max_tail_bound']:.1e}, iid median (20 replicas) = {d['iid_median']:.3e}",
            status=headline.status)


@pytest.mark.slow
def test_headline_beats_iid_tenfold(headline):
    assert headline.details["iid_ratio"] >= 10


@pytest.mark.slow
def test_criterion_07_rate_fit():
    ns = [50, 100, 200, 400]
    ens = scaling_study(ns, replicas=100, kind="spherical-eig", expected=(-1.15, -0.85))
    iid = scaling_study(ns, replicas=100, kind="iid-uniform", expected=(-0.65, -0.35), seed=1)
    verdict(7, ens.passed and iid.passed,
            f"ensemble slope = {ens.statistic:.3f} (in [-1.15, -0.85], bootstrap 95% CI "
            f"[{ens.details['ci'][0]:.3f}, {ens.details['ci'][1]:.3f}]); iid slope = {iid.statistic:.3f} "
            f"(in [-0.65, -0.35], CI [{iid.details['ci'][0]:.3f}, {iid.details['ci'][1]:.3f}])")


def test_criterion_08_monotonicity_and_rotation():
    gen = np.random.default_rng(8)
    mono_bad, rot_worst = 0, 0.0
    for c in random_configs(100, 8, n_max=40):
        vals = [wce_legendre(c, s, 1e-8, tail="bernstein") for s in (1.3, 1.5, 2.0, 2.5, 3.0)]
        for a, b in zip(vals, vals[1:]):
            mono_bad += b.wce2 > a.wce2 + a.tail_bound + b.tail_bound
        rc = apply_rotation(c, random_rotation(gen))
        # same tolerance and pair count give the same truncation degree
        r0, r1 = wce_legendre(c, 2.0, 1e-10), wce_legendre(rc, 2.0, 1e-10)
        rot_worst = max(rot_worst, abs(r0.value - r1.value))
    verdict(8, mono_bad == 0 and rot_worst <= 1e-10,
            f"100 configs: {mono_bad} monotonicity violations beyond certified tails; "
            f"max rotation change in wce(.;2) = {rot_worst:.1e} (<= 1e-10)")


def test_criterion_09_mgf():
    reps = mgf_test(2, (0.5, 1.0, 2.0)) + mgf_test(8, (0.5, 1.0, 2.0))
    cells = ", ".join(f"N={r.details['n']} c={r.details['c']:g}: ucl {r.details['ucl']:.4f} <= "
                      f"{r.details['bound']:.4f}" for r in reps)
    verdict(9, all(r.passed for r in reps), f"10^4 replicas, one-sided 0.99: {cells}")


def test_criterion_10_clt_variance():
    rep = clt_variance_test(64, 10_000)
    d = rep.details
    ok = rep.passed and d["projection_error"] <= 1e-10
    verdict(10, ok, f"N=64, 10^4 replicas: Var = {rep.statistic:.5f} +/- {rep.se:.5f}, oracle = "
                    f"{d['oracle']:.5f}, z = {d['z_score']:+.2f}; projection identity error = "
                    f"{d['projection_error']:.1e} (<= 1e-10)")


def test_criterion_11_concentration():
    rep = concentration_test(16, 1.0, replicas=10_000)
    grid = rep.details["grid"]
    first = grid[0]
    bad = sum(not g["ok"] for g in grid)
    verdict(11, rep.passed, f"N=16, eps=1, 10^4 replicas, {len(grid)} deltas, {bad} with empirical tail > "
                            f"bound + 3 SE; smallest delta = {first['delta']:.4f}: empirical "
                            f"{first['empirical']:.4f} vs bound {first['bound']:.4f}; median norm "
                            f"{rep.details['norm_median']:.4f}")


def _match_error(a, b):
    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c].max()


def test_criterion_12_eigensolver():
    gen = np.random.default_rng(12)
    d = gen.standard_normal(100) + 1j * gen.standard_normal(100)
    q = unitary_group.rvs(100, random_state=12)
    err = _match_error(eigenvalues(q @ np.diag(d) @ q.conj().T, method="hqr"), d)
    tr_worst = det_worst = 0.0
    for _ in range(100):
        n = int(gen.integers(2, 41))
        m = (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / math.sqrt(2)
        ev = eigenvalues(m, method="hqr")
        tr_worst = max(tr_worst, abs(ev.sum() - np.trace(m)) / (1 + abs(np.trace(m))))
        det = determinant(m)
        det_worst = max(det_worst, abs(np.prod(ev) - det) / abs(det))
    ok = err <= 1e-8 and tr_worst <= 1e-10 and det_worst <= 1e-8
    verdict(12, ok, f"conjugated-diagonal n=100 recovery error = {err:.1e} (<= 1e-8); 100 random matrices: "
                    f"max relative trace error {tr_worst:.1e}, max relative determinant error {det_worst:.1e}")
