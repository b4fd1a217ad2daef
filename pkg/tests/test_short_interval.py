import math

import numpy as np
import pytest
from scipy.integrate import quad

from zetamellin import short_interval as si
from zetamellin.moment_engine import moment_integral
from zetamellin.zeta_core import eval_zeta_half_line


def test_spacing_validation():
    with pytest.raises(si.SpacingError):
        si.WellSpacedSet(100.0, 5.0, [110.0, 112.0])
    s = si.WellSpacedSet(1000.0, 10.0, [1010.0, 1020.0, 1500.0])
    assert s.R == 3 and s.check_range()
    assert not si.WellSpacedSet(1000.0, 600.0, [1100.0]).check_range()


def test_interval_moment_matches_cumulative():
    v = si.interval_moment(1000.0, 5.0, 1)
    assert v == pytest.approx(moment_integral(1, 1005.0) - moment_integral(1, 995.0), rel=1e-10)
    assert v == pytest.approx(36.325173, abs=1e-5)
    assert si.interval_moments(np.array([1000.0]), 5.0, 1)[0] == pytest.approx(v, rel=1e-10)
    assert si.interval_moment(50.0, 0.0, 2) == 0.0
    with pytest.raises(ValueError):
        si.interval_moment(3.0, 5.0, 1)


def test_measure_extremes():
    full = si.measure_large_values(2000.0, 10.0, 1, 0.0)
    assert full.measure == pytest.approx(2000.0) and full.crossings == 0
    assert si.measure_large_values(2000.0, 10.0, 1, 1e6).measure == 0.0
    with pytest.raises(ValueError):
        si.measure_large_values(2000.0, 10.0, 1, 1.0, mesh=5.0)


def test_measure_against_fine_mesh():
    coarse = si.measure_large_values(500.0, 4.0, 1, 8.0)
    fine = si.measure_large_values(500.0, 4.0, 1, 8.0, mesh=0.05)
    assert abs(coarse.measure - fine.measure) <= coarse.uncertainty + fine.uncertainty


def test_five_split_random(rng):
    for _ in range(200):
        G = rng.uniform(0.5, 10)
        R = int(rng.integers(0, 80))
        pts = si.random_spaced_set(rng, max(500.0, 2 * R * G), G, R) if R else si.WellSpacedSet(500.0, G, [])
        classes = si.five_split(pts)
        assert len(classes) <= 5
        assert sorted(np.concatenate(classes).tolist() if classes else []) == pts.points.tolist()
        for c in classes:
            assert np.all(np.diff(c) >= 5 * G * (1 - 1e-12))
            assert si.supports_disjoint(c, G)


def test_supports_disjoint():
    assert si.supports_disjoint(np.array([0.0, 4.0]), 1.0)
    assert not si.supports_disjoint(np.array([0.0, 3.9]), 1.0)


def test_dyadic_levels_partition(rng):
    L = rng.lognormal(2.0, 1.0, 500)
    levels = si.dyadic_levels(L)
    assert sum(l.count for l in levels) == 500
    assert math.fsum(l.total for l in levels) == pytest.approx(L.sum())
    for l in levels:
        sel = L[(L > l.lower) & (L <= 2 * l.lower)]
        assert sel.size == l.count
    with pytest.raises(ValueError):
        si.dyadic_levels(np.array([0.0, 1.0]))


def test_dyadic_sum_bound_example():
    rng = np.random.default_rng(3)
    pts = si.random_spaced_set(rng, 2000.0, 5.0, 50)
    rep = si.dyadic_sum_bound(pts, 1, 2)
    assert rep.ratio <= 10
    assert rep.U0 == pytest.approx((2000 / 250) ** 0.5)
    assert rep.level_total() == pytest.approx(rep.actual)
    assert rep.as_dict()["C"] == rep.ratio
    synthetic = si.dyadic_sum_bound(pts, 1, 2, L=np.ones(50))
    assert synthetic.actual == 50.0


def test_corollary_exponent():
    assert si.corollary_exponent(1, 0.3) == 1.0
    assert si.corollary_exponent(3, 0.25) == 1.5


def test_large_value_points():
    sel = si.large_value_points(50.0, 0.0)
    assert sel.S == 50
    assert np.all(np.diff(sel.points) >= 1 - 1e-12)
    big = si.large_value_points(500.0, 3.0)
    assert np.all(big.abs_zeta >= 3.0)
    assert np.allclose(big.abs_zeta, np.abs(eval_zeta_half_line(big.points)), rtol=1e-10)
    with pytest.raises(ValueError):
        si.large_value_points(50.0, -1.0)


def test_smooth_step_shape():
    u = np.linspace(-0.5, 1.5, 201)
    S = si.smooth_step(u)
    assert np.all(np.diff(S) >= 0)
    assert np.all(S[u <= 0] == 0) and np.all(S[u >= 1] == 1)
    v = np.linspace(0, 1, 51)
    assert np.allclose(si.smooth_step(v) + si.smooth_step(1 - v), 1.0, atol=1e-14)
    assert isinstance(si.smooth_step(0.3), float)


def test_smooth_step_slope_finite_difference():
    u = np.linspace(0.05, 0.95, 19)
    h = 1e-5
    fd = (si.smooth_step(u + h) - si.smooth_step(u - h)) / (2 * h)
    assert np.allclose(si.smooth_step_slope(u), fd, rtol=1e-6, atol=1e-9)


def test_step_derivative_constants():
    u = np.linspace(0, 1, 20001)
    assert si.step_derivative_constant(1) == pytest.approx(si.smooth_step_slope(u).max(), rel=1e-6)
    assert si.step_derivative_constant(1) == pytest.approx(1.657, abs=1e-3)
    assert si.step_derivative_constant(0) == 1.0


def test_mollifier_values():
    phi = si.Mollifier(100.0, 5.0)
    assert phi(np.array([95.0, 100.0, 105.0])).tolist() == [1.0, 1.0, 1.0]
    assert phi(np.array([89.9, 110.1])).tolist() == [0.0, 0.0]
    assert phi.support == (90.0, 110.0)
    with pytest.raises(ValueError):
        phi.derivative_constant(7)


def test_mollifier_integral_vs_quad():
    phi = si.Mollifier(60.0, 3.0)
    s = 0.75 + 20j
    f = lambda x, part: getattr(float(phi(np.array([x]))[0]) * x ** (s - 1), part)
    ref = complex(quad(f, 54, 66, args=("real",), limit=400, epsabs=1e-13)[0],
                  quad(f, 54, 66, args=("imag",), limit=400, epsabs=1e-13)[0])
    assert si.mollifier_integral(phi, s) == pytest.approx(ref, rel=1e-9)


def test_mollifier_decay_documented_point():
    phi = si.Mollifier(1500.0, 10.0)
    for m in (2, 3, 4):
        d = si.mollifier_decay_check(phi, 0.75 + 300j, m)
        assert d.ratio <= 100
    zero = si.mollifier_decay_check(phi, 0.75 + 0j, 0)
    assert abs(zero.exact) <= 6 * phi.G * 1500 ** -0.25 * 1.1


def test_mollifier_decay_with_height():
    phi = si.Mollifier(1500.0, 10.0)
    a = abs(si.mollifier_integral(phi, 0.75 + 600j))
    b = abs(si.mollifier_integral(phi, 0.75 + 1200j))
    assert a / b >= 2 ** 2 * 0.9
