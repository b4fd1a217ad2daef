import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from conftest import gl_integrate, mp_abs2
from zetamellin.mellin_lab import DomainError
from zetamellin.smoothed_mellin import (
    _gauss_log_moments,
    dyadic_pieces,
    gaussian_derivative_term,
    log_polynomial_transform,
    smoothed_decomposition_check,
    smoothed_field,
    smoothed_moment,
    smoothed_moments,
    theorem3_scan,
    z_xi,
    z_xi_continued,
)


@pytest.mark.parametrize("x,G", [(50.0, 2.0), (2000.0, 40.0), (3.0, 5.0)])
def test_weight_normalized(x, G):
    r = smoothed_moment(x, G, 1, func=np.ones_like)
    assert abs(r.value - 1) < 1e-12


@pytest.mark.parametrize("k", [1, 2])
def test_against_mpmath_quadrature(k):
    x, G = 40.0, 3.0
    U = smoothed_moment(x, G, k).truncation_u

    def f(y):
        return np.array([mp_abs2(v) ** k for v in y]) * np.exp(-((y - x) / G) ** 2)

    ref = gl_integrate(f, x - U, x + U, panels=40) / (math.sqrt(math.pi) * G)
    got = smoothed_moment(x, G, k).value
    assert abs(got - ref) < 1e-9 * ref


def test_small_G_refines_step():
    # G = 0.2 forces a finer grid than the cached one
    x, G = 30.0, 0.2
    ref = gl_integrate(lambda y: np.array([mp_abs2(v) for v in y]) * np.exp(-((y - x) / G) ** 2),
                       x - 1.3, x + 1.3, panels=20) / (math.sqrt(math.pi) * G)
    assert smoothed_moment(x, G, 1).value == pytest.approx(ref, rel=1e-9)


def test_reflection_rules():
    r = smoothed_moment(2.0, 4.0, 1)
    assert r.reflected
    with pytest.raises(DomainError):
        smoothed_moment(2.0, 4.0, 1, reflect=False)
    with pytest.raises(ValueError):
        smoothed_moment(10.0, 0.0, 1)


def test_vector_form_matches_scalar():
    xs = np.array([100.0, 250.0])
    v = smoothed_moments(xs, 0.5, 2)
    for x, got in zip(xs, v):
        assert got == smoothed_moment(x, x ** 0.5, 2).value


def test_derivative_term_linear_error():
    # E(y) = y gives exactly 1 for any x, G
    for x, G in [(100.0, 10.0), (5000.0, 300.0)]:
        assert gaussian_derivative_term(x, G, lambda y: y) == pytest.approx(1.0, abs=1e-12)


def test_derivative_term_odd_error_vanishes():
    # even part around x carries no weight
    got = gaussian_derivative_term(500.0, 20.0, lambda y: (y - 500.0) ** 2)
    assert abs(got) < 1e-10


def test_decomposition_small_residual(poly2):
    chk = smoothed_decomposition_check(2000.0, 0.5, poly2)
    assert chk.relative <= 1e-3
    assert chk.G == pytest.approx(2000 ** 0.5)


def test_decomposition_preconditions(poly2):
    with pytest.raises(ValueError):
        smoothed_decomposition_check(50.0, 0.5, poly2)
    with pytest.raises(ValueError):
        smoothed_decomposition_check(500.0, 0.2, poly2)


def test_field_interpolates_exact_values():
    fld = smoothed_field(0.5, 1000.0)
    for x in [17.3, 333.3, 901.0]:
        assert fld(x) == pytest.approx(smoothed_moment(x, x ** 0.5, 2).value, rel=1e-8)
    with pytest.raises(ValueError):
        fld(1200.0)


def test_z_xi_reference_value():
    v = z_xi(3.0, 0.5, 1e3)
    assert abs(v.value - 0.33974) < 1e-4
    assert v.tail_bound < 1e-3


def test_z_xi_conjugate_symmetry():
    a = z_xi(2.0 + 7j, 0.5, 1e3).value
    b = z_xi(2.0 - 7j, 0.5, 1e3).value
    assert abs(a - b.conjugate()) < 1e-12


def test_z_xi_needs_half_plane():
    with pytest.raises(DomainError):
        z_xi(1.0 + 2j, 0.5)


def test_continued_agrees_with_direct():
    s = np.array([2.0 + 5j, 1.5 + 20j])
    cont = z_xi_continued(s, 0.5).value
    for si, c in zip(s, cont):
        d = z_xi(si, 0.5, 2.0 ** 14)
        assert abs(c - d.value) <= 1e-6 + 2 * d.tail_bound


def test_continued_domain():
    with pytest.raises(DomainError):
        z_xi_continued(0.5 + 3j, 0.5)
    with pytest.raises(DomainError):
        z_xi_continued(1.01, 0.5)


def test_dyadic_partition_of_unity():
    x = np.geomspace(1, 2 ** 7, 500)
    psi = dyadic_pieces(x, 6)
    np.testing.assert_allclose(psi.sum(axis=0)[x <= 2 ** 6], 1.0, atol=1e-14)
    far = dyadic_pieces(np.array([2 ** 7 + 1.0, 1000.0]), 6)
    assert np.all(far.sum(axis=0) == 0)
    assert np.all(psi >= -1e-15)


def test_log_polynomial_transform_vs_quad():
    m = np.array([1.0, -2.0, 0.5])
    s = 2.5
    f = lambda x: np.polynomial.polynomial.polyval(math.log(x), m) * x ** -s
    ref = integrate.quad(f, 1, np.inf, limit=200)[0]
    assert log_polynomial_transform(m, s).real == pytest.approx(ref, rel=1e-9)


def test_gauss_log_moments():
    mu = _gauss_log_moments(3)
    assert mu[0] == pytest.approx(1.0, abs=1e-14)
    for n in (1, 2, 3):
        f = lambda v: math.log(abs(1 + v)) ** n * math.exp(-v * v)
        ref = sum(integrate.quad(f, a, b, limit=200)[0]
                  for a, b in [(-np.inf, -2), (-2, -1), (-1, 0), (0, np.inf)]) / math.sqrt(math.pi)
        assert mu[n] == pytest.approx(ref, rel=1e-8)


def test_theorem3_scan_sigma_one():
    res = theorem3_scan(1.0, 1 / 3, t_list=np.geomspace(50, 400, 6))
    assert res.bound == pytest.approx(0.3)
    assert res.passed
    with pytest.raises(DomainError):
        theorem3_scan(0.5, 0.5)
