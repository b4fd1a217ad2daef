import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from zetamellin import moment_engine as me

from conftest import gl_integrate, mp_abs2


def test_classical_k1_coefficients(poly1):
    assert poly1.coeffs[1] == 1.0
    assert poly1.coeffs[0] == pytest.approx(2 * 0.5772156649015329 - 1 - math.log(2 * math.pi))
    assert poly1.coeffs[0] == pytest.approx(-1.6834, abs=1e-4)


def test_density_is_derivative_of_main_term(poly2):
    # d/dx [x P(log x)] by central differences
    for x in (50.0, 800.0, 5e4):
        h = 1e-4 * x
        fd = (poly2.main_term(x + h) - poly2.main_term(x - h)) / (2 * h)
        assert poly2.density(x) == pytest.approx(fd, rel=1e-7)


def test_polynomial_validation():
    with pytest.raises(ValueError):
        me.MomentPolynomial(2, np.ones(3))
    with pytest.raises(ValueError):
        me.MomentPolynomial(1, np.array([1.0, 0.0]))
    assert me.MomentPolynomial.classical_k1().main_term(0.5) == 0.0


def test_moment_integral_small_T_against_mpmath():
    ref = gl_integrate(np.vectorize(mp_abs2), 0.0, 30.0, panels=60, n=16)
    v, err = me.moment_integral_with_error(1, 30.0)
    assert v == pytest.approx(ref, rel=1e-9)
    assert err <= 1e-8 * v


def test_fourth_moment_small_T_against_mpmath():
    f = np.vectorize(lambda t: mp_abs2(t) ** 2)
    ref = gl_integrate(f, 0.0, 20.0, panels=40, n=16)
    assert me.moment_integral(2, 20.0) == pytest.approx(ref, rel=1e-9)


def test_moment_integral_errors():
    with pytest.raises(ValueError):
        me.moment_integral(1, 2e6)
    with pytest.raises(ValueError):
        me.moment_integral(1, 10.0, tol=1e-12)
    with pytest.raises(ValueError):
        me.moment_integral(7, 10.0)
    assert me.moment_integral(1, 0.0) == 0.0


def test_error_term_consistent(poly1):
    r = me.error_term(1, 1000.0, poly1)
    assert r.error == pytest.approx(r.integral - r.main_term)
    assert np.allclose(me.error_terms(1, np.array([1000.0]), poly1), r.error, rtol=1e-9, atol=1e-6)


def test_divisor_function_by_enumeration():
    # d_k(p^j) counts k-tuples of exponents summing to j
    for k in range(1, 5):
        for j in range(0, 6):
            brute = sum(1 for e in itertools.product(range(j + 1), repeat=k) if sum(e) == j)
            assert me.divisor_prime_power(k, j) == brute


def test_primes():
    assert me.primes_up_to(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_g_factors_exact():
    assert me.g_factor(1) == 1
    assert me.g_factor(2) == 2
    assert me.g_factor(3) == Fraction(42)
    assert me.g_factor(4) == Fraction(24024)


def test_rmt_constants():
    c1 = me.rmt_constants(1)
    assert abs(c1.c_k - 1) <= 1e-12
    c2 = me.rmt_constants(2, 10_000)
    assert abs(c2.a_k - 6 / math.pi ** 2) <= c2.a_k * 1e-4
    assert abs(c2.c_k - 1 / (2 * math.pi ** 2)) <= 1e-4
    assert abs(c2.c_k - 1 / (2 * math.pi ** 2)) <= 2 * c2.tail_bound
    with pytest.raises(ValueError):
        me.rmt_constants(2, 50)


def test_fit_recovers_synthetic_polynomial():
    T = np.geomspace(1e3, 1e5, 60)
    true = np.array([-1.7, 1.6, -0.76, 0.12, 0.05])
    vals = T * np.polynomial.polynomial.polyval(np.log(T), true)
    p = me.fit_polynomial_to(2, T, vals)
    assert np.allclose(p.coeffs, true, rtol=1e-6, atol=1e-6)
    q = me.fit_polynomial_to(2, T, vals, fixed_leading=0.05)
    assert q.coeffs[-1] == 0.05 and np.allclose(q.coeffs, true, atol=1e-8)


def test_fit_rejects_short_span():
    with pytest.raises(me.IllConditionedFit):
        me.fit_moment_polynomial(1, np.linspace(1000, 2000, 20))
    with pytest.raises(me.IllConditionedFit):
        me.fit_moment_polynomial(1, np.geomspace(1e3, 1e4, 4))


def test_k1_fit_near_theory():
    p = me.fit_moment_polynomial(1, np.geomspace(1e3, 1e4, 30))
    assert p.coeffs[1] == pytest.approx(1.0, abs=0.05)
    assert p.coeffs[0] == pytest.approx(me.MomentPolynomial.classical_k1().coeffs[0], abs=0.1)


def test_standard_k2_leading(poly2):
    assert poly2.coeffs[-1] == pytest.approx(1 / (2 * math.pi ** 2))
    I = me.moment_integrals(2, np.array([2e4]))[0]
    assert poly2.main_term(2e4) == pytest.approx(I, rel=2e-3)


def test_loglog_slope_exact_power_law():
    T = np.geomspace(10, 1e4, 20)
    fit = me.loglog_slope(T, 3 * T ** 1.5)
    assert fit.slope == pytest.approx(1.5) and fit.intercept == pytest.approx(math.log(3))
    bad = me.loglog_slope(T, np.zeros_like(T))
    assert bad.degenerate and math.isnan(bad.slope)


def test_mean_square_of_closed_form():
    T = np.array([10.0, 37.3, 100.0])
    got = me.mean_square_of(lambda x: x, T)
    assert np.allclose(got, (T ** 3 - 1) / 3, rtol=1e-13)


def test_error_exponent_synthetic():
    fit = me.error_mean_square_exponent(1, np.geomspace(100, 1e4, 10), error_fn=lambda x: x ** 0.25)
    assert fit.slope == pytest.approx(1.5, abs=0.01)
    zero = me.error_mean_square_exponent(1, np.geomspace(100, 1e4, 10), error_fn=np.zeros_like)
    assert zero.degenerate


def test_write_moment_csv(tmp_path, poly1):
    path = tmp_path / "m.csv"
    me.write_moment_csv([me.error_term(1, 100.0, poly1)], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "T,I,main,E" and len(lines) == 2
