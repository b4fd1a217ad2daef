import math

import mpmath
import numpy as np
import pytest

from zetamellin.moment_engine import MomentPolynomial, standard_polynomial


@pytest.fixture
def rng():
    return np.random.default_rng(20241)


@pytest.fixture(scope="session")
def poly1():
    return MomentPolynomial.classical_k1()


@pytest.fixture(scope="session")
def poly2():
    return standard_polynomial(2)


def mp_abs2(t):
    """|zeta(1/2+it)|^2 straight from mpmath (independent of the package)."""
    return float(abs(mpmath.zeta(mpmath.mpc(0.5, t))) ** 2)


def gl_integrate(f, a, b, panels=200, n=20):
    """Plain composite Gauss-Legendre, used as a quadrature oracle."""
    x, w = np.polynomial.legendre.leggauss(n)
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs = 0.5 * (hi - lo) * (x + 1) + lo
        total += 0.5 * (hi - lo) * np.dot(w, f(xs))
    return total
