"""Gaussian-smoothed moments and their Mellin transform.

J_k(x; G) = (1/(sqrt(pi) G)) int |zeta(1/2+ix+iu)|^(2k) exp(-(u/G)^2) du
Z_xi(s)   = int_1^oo J_2(x; x^xi) x^(-s) dx

The smoothing integral is done with the trapezoidal rule on a uniform grid.
For a Gaussian-weighted integrand whose frequencies stay far below pi/step
this rule is spectrally accurate; |zeta|^(2k) at heights t carries
frequencies up to about 2k log sqrt(t/2pi), so a step of 1/16 leaves a
wide margin at every height this package reaches.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .mellin_lab import DomainError, MellinValue
from .moment_engine import MomentPolynomial, error_terms, loglog_slope, standard_polynomial
from .quadrature import PanelTable, gauss_legendre, oscillation_nodes, shared_table
from .short_interval import smooth_step
from .zeta_core import eval_abs_power

#: Gaussian weight below 1e-16 is dropped
TRUNCATION = math.sqrt(math.log(1e16))
BASE_STEP = 1.0 / 16.0


def truncation_u(G: float) -> float:
    return G * TRUNCATION


class UniformSamples:
    """|zeta(1/2+i n d)|^(2k) for n = 0, 1, ... on a growing grid of step d."""

    def __init__(self, step: float = BASE_STEP):
        self.step = step
        self._abs2 = np.empty(0)

    def ensure(self, n: int):
        have = self._abs2.size
        if n <= have:
            return
        n = max(n, int(1.25 * have))
        t = self.step * np.arange(have, n)
        self._abs2 = np.concatenate([self._abs2, eval_abs_power(t, 1)])

    def abs_power(self, lo: int, hi: int, k: int) -> np.ndarray:
        """Values at |n| for n in [lo, hi] (negative indices reflect)."""
        self.ensure(max(abs(lo), abs(hi)) + 1)
        idx = np.abs(np.arange(lo, hi + 1))
        return self._abs2[idx] ** k


_SAMPLES: dict = {}


def uniform_samples(step: float = BASE_STEP) -> UniformSamples:
    if step not in _SAMPLES:
        _SAMPLES[step] = UniformSamples(step)
    return _SAMPLES[step]


def _step_for(G: float) -> float:
    step = BASE_STEP
    while step > G / 8:
        step /= 2
    return step


@dataclass
class SmoothedMoment:
    x: float
    G: float
    k: int
    value: float
    truncation_u: float
    error: float = 0.0
    reflected: bool = False


def smoothed_moment(x: float, G: float, k: int, func=None, reflect: bool = True) -> SmoothedMoment:
    """J_k(x; G).  ``func`` replaces |zeta|^(2k) by a synthetic integrand.

    Windows reaching below 0 use |zeta(1/2-iy)| = |zeta(1/2+iy)| unless
    ``reflect`` is False, in which case they are rejected.
    """
    if G <= 0:
        raise ValueError("G must be positive")
    U = truncation_u(G)
    crosses = x - U < 0
    if crosses and not reflect:
        raise DomainError(f"window [x-{U:.3g}, x+{U:.3g}] crosses 0")
    step = _step_for(G)
    lo = int(math.ceil((x - U) / step))
    hi = int(math.floor((x + U) / step))
    y = step * np.arange(lo, hi + 1)
    if func is None:
        if step == BASE_STEP:
            f = uniform_samples(step).abs_power(lo, hi, k)
        else:
            f = eval_abs_power(np.abs(y), k)
    else:
        f = np.asarray(func(np.abs(y) if crosses else y), dtype=float) * np.ones_like(y)
    w = np.exp(-((y - x) / G) ** 2)
    value = step * float(np.dot(f, w)) / (math.sqrt(math.pi) * G)
    # dropped Gaussian mass times the largest sample near the edges
    edge = float(np.max(np.abs(f))) if f.size else 0.0
    err = math.erfc(TRUNCATION) * edge
    return SmoothedMoment(float(x), float(G), k, value, U, err, bool(crosses))


def smoothed_moments(x, xi: float, k: int = 2) -> np.ndarray:
    """J_k(x; x^xi) for every x (a fresh G per point)."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    flat = out.reshape(-1)
    for i, xv in enumerate(x.reshape(-1)):
        flat[i] = smoothed_moment(xv, xv ** xi, k).value
    return out


def window_range(x: float, G: float, k: int) -> tuple[float, float]:
    """(min, max) of the integrand over the truncated window."""
    U = truncation_u(G)
    step = _step_for(G)
    lo = int(math.ceil((x - U) / step))
    hi = int(math.floor((x + U) / step))
    if step == BASE_STEP:
        f = uniform_samples(step).abs_power(lo, hi, k)
    else:
        f = eval_abs_power(np.abs(step * np.arange(lo, hi + 1)), k)
    return float(f.min()), float(f.max())


# ---------------------------------------------------------------------------
# the Gaussian-weighted error-term identity
# ---------------------------------------------------------------------------

def gaussian_derivative_term(x: float, G: float, error_fn, n: int = 80) -> float:
    """(2/(sqrt(pi) G^3)) int u E(x+u) exp(-(u/G)^2) du by Gauss-Legendre panels."""
    U = truncation_u(G)
    gx, gw = gauss_legendre(20)
    edges = np.linspace(-U, U, n + 1)
    a, h = edges[:-1], np.diff(edges)
    u = (a[:, None] + 0.5 * h[:, None] * (gx + 1)).ravel()
    w = (0.5 * h[:, None] * gw).ravel()
    E = np.asarray(error_fn(x + u), dtype=float)
    return float(2.0 / (math.sqrt(math.pi) * G ** 3) * np.sum(w * u * E * np.exp(-(u / G) ** 2)))


@dataclass
class DecompositionCheck:
    x: float
    xi: float
    G: float
    J: float
    lhs: float          # J - Q_4(log x)
    rhs: float          # Gaussian-weighted E_2 term
    residual: float     # lhs - rhs
    relative: float     # |residual| / J


def smoothed_decomposition_check(x: float, xi: float, poly: MomentPolynomial | None = None,
                                 error_fn=None, table: PanelTable | None = None) -> DecompositionCheck:
    """Compare J_2(x; x^xi) - Q_4(log x) with the Gaussian-weighted E_2 term.

    Their difference is the smoothing defect of Q_4, of size G^2 log^3 x / x^2.
    """
    if x < 100:
        raise ValueError("x must be >= 100")
    if not 1 / 3 - 1e-12 <= xi <= 1 + 1e-12:
        raise ValueError("xi must lie in [1/3, 1]")
    table = table or shared_table()
    poly = poly or standard_polynomial(2, table)
    G = x ** xi
    if error_fn is None:
        def error_fn(y):
            return error_terms(2, np.abs(y), poly, table) * np.sign(y)
    J = smoothed_moment(x, G, 2).value
    lhs = J - float(poly.q(math.log(x)))
    rhs = gaussian_derivative_term(x, G, error_fn)
    return DecompositionCheck(x, xi, G, J, lhs, rhs, lhs - rhs, abs(lhs - rhs) / J)


# ---------------------------------------------------------------------------
# J_2(x; x^xi) as a piecewise polynomial in x
# ---------------------------------------------------------------------------

_NJ = 12
_JX, _JW = gauss_legendre(_NJ)
_J_TO_LEG = np.linalg.inv(np.polynomial.legendre.legvander(_JX, _NJ - 1))


class SmoothedField:
    """J_k(x; x^xi) on [1, X]: exact values at Gauss nodes of panels of width
    min(G/2, 64), Legendre interpolation in between.  J is smooth on the
    scale G, so the interpolant is accurate well below the 1e-8 level."""

    def __init__(self, xi: float, X: float, k: int = 2):
        if not 0 < xi <= 1:
            raise ValueError("xi must lie in (0, 1]")
        self.xi, self.X, self.k = xi, float(X), k
        edges = [1.0]
        while edges[-1] < X:
            a = edges[-1]
            edges.append(min(X, a + min(0.5 * a ** xi, 64.0)))
        self.edges = np.asarray(edges)
        a, b = self.edges[:-1], self.edges[1:]
        nodes = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * _JX
        vals = smoothed_moments(nodes, xi, k)
        self.coeffs = vals @ _J_TO_LEG.T

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any((x < 1) | (x > self.X)):
            raise ValueError("x outside the field range")
        i = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, len(self.edges) - 2)
        a, b = self.edges[i], self.edges[i + 1]
        z = (2 * x - a - b) / (b - a)
        # Clenshaw-free evaluation: Legendre basis by recurrence
        p_prev, p = np.ones_like(z), z
        out = self.coeffs[i, 0] + self.coeffs[i, 1] * z
        for n in range(1, _NJ - 1):
            p_prev, p = p, ((2 * n + 1) * z * p - n * p_prev) / (n + 1)
            out = out + self.coeffs[i, n + 1] * p
        return out


_FIELDS: dict = {}


def smoothed_field(xi: float, X: float, k: int = 2) -> SmoothedField:
    key = (float(xi), float(X), k)
    if key not in _FIELDS:
        _FIELDS[key] = SmoothedField(xi, X, k)
    return _FIELDS[key]


def _mellin_nodes(X: float, t_max: float, field_: SmoothedField):
    x, w = oscillation_nodes(1.0, X, t_max, h=1.0, n_gauss=12)
    return x, w, field_(x)


def _log_power_tail(j: int, w: float, L: float) -> float:
    """int_L^oo u^j e^{-w u} du for w > 0."""
    return math.exp(-w * L) * sum(math.perm(j, m) * L ** (j - m) / w ** (m + 1) for m in range(j + 1))


def z_xi(s: complex, xi: float, X: float = 1e3, k: int = 2) -> MellinValue:
    """int_1^X J_2(x; x^xi) x^(-s) dx with a bound on the part beyond X (Re s > 1)."""
    s = complex(s)
    if s.real <= 1:
        raise DomainError("direct evaluation of Z_xi needs Re s > 1")
    fld = smoothed_field(xi, X, k)
    x, w, J = _mellin_nodes(X, abs(s.imag), fld)
    value = complex(np.sum(w * J * np.exp(-s * np.log(x))))
    # J(x) <= C log^4 x on [X/10, X] (C doubled), integrated to infinity
    xs = np.geomspace(max(X / 10, 3.0), X, 64)
    C = 2 * float(np.max(fld(xs) / np.log(xs) ** (k * k)))
    tail = C * abs(s) / s.real * _log_power_tail(k * k, s.real - 1, math.log(X))
    return MellinValue(s, value, "direct", float(X), tail, extra={"xi": xi})


# ---------------------------------------------------------------------------
# continuation left of Re s = 1 and the growth scan
# ---------------------------------------------------------------------------

def _gauss_log_moments(n_max: int) -> np.ndarray:
    """mu_n = (1/sqrt(pi)) int log^n |1+v| exp(-v^2) dv."""
    out = []
    with mpmath.workdps(30):
        for n in range(n_max + 1):
            f = lambda v: mpmath.log(abs(1 + v)) ** n * mpmath.exp(-v * v)
            out.append(float(mpmath.quad(f, [-mpmath.inf, -2, -1, 0, mpmath.inf]) / mpmath.sqrt(mpmath.pi)))
    return np.asarray(out)


def smoothed_main_coefficients(poly: MomentPolynomial, xi: float) -> np.ndarray:
    """Coefficients (in log x) of the part of J_2 treated in closed form.

    For xi = 1 the smoothed Q_4 is itself a polynomial in log x:
    Q_4(log x + log|1+v|) averaged against exp(-v^2).  For xi < 1 the
    smoothing defect decays like x^(2 xi - 2) and Q_4 is used unchanged.
    """
    q = poly.q_coeffs
    if abs(xi - 1) > 1e-12:
        return q.copy()
    mu = _gauss_log_moments(len(q) - 1)
    m = np.zeros_like(q)
    for j, qj in enumerate(q):
        for i in range(j + 1):
            m[j - i] += qj * math.comb(j, i) * mu[i]
    return m


def log_polynomial_transform(m: np.ndarray, s) -> np.ndarray:
    """int_1^oo sum_j m_j log^j x x^(-s) dx = sum_j m_j j!/(s-1)^(j+1), continued."""
    w = np.asarray(s, dtype=complex) - 1
    return sum(mj * math.factorial(j) / w ** (j + 1) for j, mj in enumerate(m))


def dyadic_pieces(x: np.ndarray, levels: int) -> np.ndarray:
    """Partition of unity psi_0..psi_levels on [1, 2^levels], zero beyond 2^(levels+1).

    psi_j = Theta_(j-1) - Theta_j with Theta_j(x) = S(log2 x - j), Theta_(-1) = 1.
    """
    lx = np.log2(x)
    theta = [np.ones_like(x)] + [smooth_step(lx - j) for j in range(levels + 1)]
    return np.array([theta[j] - theta[j + 1] for j in range(levels + 1)])


@dataclass
class ContinuedZxi:
    s: np.ndarray
    value: np.ndarray
    main: np.ndarray
    pieces: np.ndarray      # (levels+1, len(s))
    X_cut: float


def z_xi_continued(s, xi: float, poly: MomentPolynomial | None = None, levels: int = 13,
                   table: PanelTable | None = None) -> ContinuedZxi:
    """Closed-form transform of the main part plus the smoothly truncated
    transform of J_2 minus that main part, split over dyadic blocks.

    The cutoff sits at 2^levels (weight 1 up to there, 0 beyond twice that).
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(s.real <= 0.5):
        raise DomainError("only Re s > 1/2 is handled")
    if np.any(np.abs(s - 1) < 0.05):
        raise DomainError("too close to the pole at s = 1")
    table = table or shared_table()
    poly = poly or standard_polynomial(2, table)
    X = 2.0 ** (levels + 1)
    fld = smoothed_field(xi, X, 2)
    x, w, J = _mellin_nodes(X, float(np.max(np.abs(s.imag))), fld)
    m = smoothed_main_coefficients(poly, xi)
    D = J - np.polynomial.polynomial.polyval(np.log(x), m)
    psi = dyadic_pieces(x, levels)
    kern = np.exp(-np.outer(np.log(x), s))           # (nodes, len(s))
    pieces = (psi * (w * D)) @ kern
    main = log_polynomial_transform(m, s)
    return ContinuedZxi(s, main + pieces.sum(axis=0), main, pieces, 2.0 ** levels)


@dataclass
class Theorem3Scan:
    sigma: float
    xi: float
    t: np.ndarray
    abs_z: np.ndarray
    slope: float
    bound: float
    passed: bool
    extra: dict = field(default_factory=dict)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["t", "abs_zxi"])
            for t, a in zip(self.t, self.abs_z):
                wr.writerow([f"{t:.17g}", f"{a:.17g}"])


def theorem3_scan(sigma: float, xi: float, t_list=None, poly: MomentPolynomial | None = None,
                  levels: int = 13, slack: float = 0.3) -> Theorem3Scan:
    """Empirical exponent of |Z_xi(sigma+it)| in t against 1 - sigma + slack."""
    if not 0.5 < sigma <= 1:
        raise DomainError("need 1/2 < sigma <= 1")
    if not 1 / 3 - 1e-12 <= xi <= 1 + 1e-12:
        raise ValueError("xi must lie in [1/3, 1]")
    t = np.asarray(np.geomspace(50, 400, 12) if t_list is None else t_list, dtype=float)
    res = z_xi_continued(sigma + 1j * t, xi, poly, levels)
    a = np.abs(res.value)
    fit = loglog_slope(t, a)
    bound = 1 - sigma + slack
    return Theorem3Scan(sigma, xi, t, a, fit.slope, bound, bool(fit.slope <= bound),
                        {"X_cut": res.X_cut, "piece_abs_max": np.abs(res.pieces).max(axis=1).tolist()})
