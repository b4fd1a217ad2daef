import math

import numpy as np
import pytest
from scipy.integrate import quad, simpson, trapezoid

from zetamellin import mellin_lab as ml
from zetamellin.smoothed_mellin import smoothed_moment
from zetamellin.zeta_core import eval_zeta_half_line


def _simpson_oracle(s, k, pieces):
    total = 0.0
    for a, b, h in pieces:
        x = np.linspace(a, b, int(round((b - a) / h)) + 1)
        f = np.abs(eval_zeta_half_line(x)) ** (2 * k) * x ** (-s)
        total += simpson(f, x=x)
    return total


def test_abscissa_and_strip():
    assert ml.abscissa(1) == ml.abscissa(2) == 1.0
    assert ml.abscissa(4) == 1.5
    assert ml.continuation_strip(1) == 0.25 and ml.continuation_strip(2) == 0.5
    with pytest.raises(ValueError):
        ml.continuation_strip(3)


def test_direct_against_simpson_oracle():
    ref = _simpson_oracle(3.0, 1, [(1, 100, 0.005), (100, 1e4, 0.02)])
    v = ml.mellin_direct(1, 3.0, X=1e4)
    assert v.value.real == pytest.approx(ref, rel=1e-6)
    assert v.value.real == pytest.approx(0.2159985, abs=1e-6)
    assert abs(v.value.imag) <= 1e-10


def test_direct_conjugate_symmetry():
    a = ml.mellin_direct(1, 2 + 7j, X=1e3).value
    b = ml.mellin_direct(1, 2 - 7j, X=1e3).value
    assert abs(a - b.conjugate()) <= 1e-12 * abs(a)
    assert ml.mellin_direct(1, complex(2, 0.0), X=1e3).value == ml.mellin_direct(1, complex(2, -0.0), X=1e3).value


def test_direct_domain():
    with pytest.raises(ml.DomainError):
        ml.mellin_direct(1, 0.9 + 1j)
    with pytest.raises(ml.DomainError):
        ml.mellin_direct(3, 1.2 + 0j)


def test_principal_part_is_tail_from_one(poly2):
    s = 1.3 + 2j
    assert ml.main_term_tail(poly2, s, 1.0) == pytest.approx(ml.principal_part(poly2, s), rel=1e-12)


def test_main_term_tail_against_quad(poly2):
    s, X = 1.7 + 0.5j, 300.0
    # u = log x: int_{log X}^oo Q(u) e^{-(s-1) u} du
    f = lambda u, part: getattr(poly2.q(u) * np.exp(-(s - 1) * u), part)
    ref = complex(quad(f, math.log(X), 200, args=("real",), limit=200)[0],
                  quad(f, math.log(X), 200, args=("imag",), limit=200)[0])
    assert complex(ml.main_term_tail(poly2, s, X)) == pytest.approx(ref, rel=1e-9)


def test_pole_expansion_order(poly1, poly2):
    assert ml.PoleExpansion.from_polynomial(poly1).order == 2
    pe = ml.PoleExpansion.from_polynomial(poly2)
    assert pe.order == 5
    assert pe.coefficients[-1] == pytest.approx(poly2.coeffs[-1] * 24)


def test_continued_matches_direct_k1(poly1):
    s = 1.5 + 10j
    d = ml.mellin_direct(1, s, X=1e5, poly=poly1).value
    c = ml.mellin_continued(1, s, poly1, X=1e5)
    assert abs(c.value - d) <= 1e-3 * abs(d)
    cc = ml.mellin_continued(1, s.conjugate(), poly1, X=1e5).value
    assert abs(cc - c.value.conjugate()) <= 1e-12 * abs(d)
    assert c.tail_bound > 0


def test_continued_domain(poly1, poly2):
    with pytest.raises(ml.PoleProximityError):
        ml.mellin_continued(1, 1.01 + 0j, poly1)
    with pytest.raises(ml.DomainError):
        ml.mellin_continued(2, 0.45 + 3j, poly2)
    v = ml.mellin_value(1, 1.01, poly1)
    assert v.method == "principal"


def test_sweep_against_brute_force(rng):
    logx = np.log(rng.uniform(1, 1e4, 300))
    coef = rng.normal(size=300) + 1j * rng.normal(size=300)
    t = 3.0 + 0.37 * np.arange(150)
    brute = np.exp(-1j * np.outer(t, logx)) @ coef
    assert np.allclose(ml.sweep(logx, coef, 3.0, 0.37, 150), brute, rtol=1e-12, atol=1e-10)
    w = rng.uniform(size=(2, 300))
    two = ml.sweep(logx, coef, 3.0, 0.37, 150, w)
    assert np.allclose(two[1], np.exp(-1j * np.outer(t, logx)) @ (coef * w[1]), atol=1e-10)


def test_values_on_line_matches_pointwise(poly2):
    d = ml.continuation_for(2, poly2, 1e4)
    t = 10 + 0.5 * np.arange(40)
    assert np.allclose(d.values_on_line(0.75, 10.0, 0.5, 40), d.values(0.75 + 1j * t), rtol=1e-11)


def test_continuation_independent_of_cut_in_overlap(poly2):
    lo = ml.continuation_for(2, poly2, 1e4)
    a = lo.values(1.6 + 20j)[0]
    b = ml.continuation_for(2, poly2, 3e4).values(1.6 + 20j)[0]
    assert abs(a - b) <= 3e-3 * abs(a)
    assert abs(a - b) <= lo.tail_bound(1.6 + 20j)[0]


def test_simpson_weights():
    w = ml.simpson_weights(9, 0.25)
    x = 0.25 * np.arange(9)
    assert np.dot(w, x ** 3) == pytest.approx(2.0 ** 4 / 4)
    with pytest.raises(ValueError):
        ml.simpson_weights(4, 0.1)


def test_inversion_trivial_contour(poly2):
    r = ml.mellin_invert_fourth(1.01, 0.75, 0.0, poly2)
    assert r.value[0] == pytest.approx(poly2.q(math.log(1.01)))
    with pytest.raises(ml.MissingContinuationData):
        ml.mellin_invert_fourth(10.0, 0.75, 10.0, None)


def test_inversion_smoothed_against_J2(poly2):
    G = 5.0
    u = np.linspace(-30, 30, 1201)
    r = ml.mellin_invert_fourth(50 + u, 0.75, 200.0, poly2)
    w = ml.simpson_weights(u.size, u[1] - u[0])
    got = ml.gaussian_smooth(r.value, u, w, G)
    J = smoothed_moment(50.0, G, 2).value
    assert abs(got - J) <= 0.1 * J


def test_c_exponent_bound():
    assert ml.c_exponent_bound(0.75, 0.5) == 1.0
    assert ml.c_exponent_bound(0.6, 2 / 3) == pytest.approx(2.4)
    with pytest.raises(ValueError):
        ml.c_exponent_bound(0.75, 0.8)


def test_mean_square_scan_small(poly2, tmp_path):
    empty = ml.mean_square_scan(2, 0.75, 1.0, poly2)
    assert empty.integral == 0.0
    r = ml.mean_square_scan(2, 0.9, 20.0, poly2)
    # trapezoid cross-check on the returned samples
    assert r.integral == pytest.approx(trapezoid(np.abs(r.z) ** 2, x=r.t), rel=1e-3)
    assert r.bounds["unconditional (10-8s)/3"] == pytest.approx((10 - 7.2) / 3)
    path = tmp_path / "scan.csv"
    r.write_csv(path)
    assert path.read_text().splitlines()[0] == "t,re,im,abs2"
    with pytest.raises(ml.DomainError):
        ml.mean_square_scan(2, 0.4, 10.0, poly2)


def test_lemma1_closed_form_and_zero():
    x = np.linspace(2.0, 3.0, 2001)
    left, right = ml.lemma1_check(x, np.ones_like(x), 1.0, 10.0)
    assert right == pytest.approx(2 * math.pi * math.log(1.5), abs=1e-8)
    assert left <= right
    assert ml.lemma1_check(x, np.zeros_like(x), 1.0, 10.0) == (0.0, 0.0)


def test_lemma1_power_case():
    x = np.linspace(2.0, 100.0, 40001)
    left, right = ml.lemma1_check(x, x ** -2.0, 0.75, 50.0)
    assert left <= right
    # right side in closed form: 2 pi int x^(-4) x^(-1/2)
    assert right == pytest.approx(2 * math.pi * (2 ** -3.5 - 100 ** -3.5) / 3.5, rel=1e-8)


def test_lemma1_left_by_brute_force():
    # left side via scipy quad in x for a handful of t, trapezoid in t
    x = np.linspace(2.0, 4.0, 801)
    g = np.sin(3 * x)
    left, _ = ml.lemma1_check(x, g, 0.8, 4.0)
    t = np.linspace(0, 4.0, 401)
    F = [abs(complex(quad(lambda v: math.sin(3 * v) * v ** -0.8 * math.cos(tt * math.log(v)), 2, 4)[0],
                     -quad(lambda v: math.sin(3 * v) * v ** -0.8 * math.sin(tt * math.log(v)), 2, 4)[0])) ** 2
         for tt in t]
    assert left == pytest.approx(simpson(F, x=t), rel=1e-6)
