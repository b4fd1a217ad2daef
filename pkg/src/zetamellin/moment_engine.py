"""Moment integrals I_k(T), the decomposition I_k = T P(log T) + E_k(T),
mean-square growth of E_k, and the random-matrix moment constants."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .quadrature import (KRONROD_NODES, KRONROD_WEIGHTS, GAUSS7_WEIGHTS, BudgetExceeded,
                         PanelTable, compensated_sum, neumaier_cumsum, quadpack_error,
                         shared_table)
from .zeta_core import eval_abs_power

EULER_GAMMA = 0.57721566490153286061
NODE_BUDGET = 10_000_000


class IllConditionedFit(ValueError):
    """The T grid does not determine the polynomial reliably."""


@dataclass
class MomentPolynomial:
    """P(y) = sum_j coeffs[j] y^j of degree k^2, plus fit diagnostics."""

    k: int
    coeffs: np.ndarray
    condition_number: float = float("nan")
    residual_rms: float = float("nan")
    fixed_leading: float | None = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if len(self.coeffs) != self.k ** 2 + 1:
            raise ValueError(f"need {self.k ** 2 + 1} coefficients for k={self.k}")
        if self.coeffs[-1] == 0:
            raise ValueError("leading coefficient must be non-zero")

    @classmethod
    def classical_k1(cls) -> "MomentPolynomial":
        """Known mean-square main term: T log T + (2 gamma - 1 - log 2 pi) T."""
        return cls(1, np.array([2 * EULER_GAMMA - 1 - math.log(2 * math.pi), 1.0]))

    @property
    def degree(self) -> int:
        return self.k ** 2

    @property
    def q_coeffs(self) -> np.ndarray:
        """Coefficients of Q = P + P', q_j = a_j + (j+1) a_{j+1}."""
        a = self.coeffs
        q = a.copy()
        q[:-1] += np.arange(1, len(a)) * a[1:]
        return q

    def __call__(self, y):
        return np.polynomial.polynomial.polyval(y, self.coeffs)

    def q(self, y):
        return np.polynomial.polynomial.polyval(y, self.q_coeffs)

    def main_term(self, T):
        """T P(log T), defined as 0 for T < 1."""
        T = np.asarray(T, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = T * self(np.log(np.where(T >= 1, T, 1.0)))
        out = np.where(T >= 1, val, 0.0)
        return out if out.ndim else float(out)

    def density(self, x):
        """d/dx [x P(log x)] = Q(log x)."""
        x = np.asarray(x, dtype=float)
        return self.q(np.log(x))


@dataclass
class MomentResult:
    k: int
    T: float
    integral: float
    main_term: float
    error: float
    quadrature_error_bound: float = 0.0


@dataclass
class RmtConstants:
    k: int
    a_k: float
    g_k: Fraction
    c_k: float
    euler_cutoff: int
    tail_bound: float


# ---------------------------------------------------------------------------
# moment integrals
# ---------------------------------------------------------------------------

def _check_k(k: int, kmax: int = 6):
    if not (isinstance(k, (int, np.integer)) and 1 <= k <= kmax):
        raise ValueError(f"k must be an integer in 1..{kmax}")


def _refined_panel(table: PanelTable, k: int, i: int, depth: int):
    """Kronrod integral of panel i split into 2**depth sub-panels."""
    pieces = 2 ** depth
    h = table.h / pieces
    a = i * table.h + h * np.arange(pieces)[:, None]
    x = a + 0.5 * h * (KRONROD_NODES[None, :] + 1.0)
    f = eval_abs_power(x.ravel(), k, table.policy).reshape(x.shape)
    resk = 0.5 * h * f @ KRONROD_WEIGHTS
    resg = 0.5 * h * f @ GAUSS7_WEIGHTS
    resasc = 0.5 * h * np.abs(f - (resk / h)[:, None]) @ KRONROD_WEIGHTS
    return resk.sum(), quadpack_error(resk, resg, resasc).sum(), x.size


def moment_integral_with_error(k: int, T: float, tol: float = 1e-8,
                               table: PanelTable | None = None, lower: float = 0.0):
    """(int_lower^T |zeta(1/2+it)|^(2k) dt, error estimate)."""
    _check_k(k)
    if not (0 <= T <= 1e6):
        raise ValueError("need 0 <= T <= 1e6")
    if tol < 1e-8:
        raise ValueError("tol must be >= 1e-8")
    if T <= lower:
        return 0.0, 0.0
    table = table or shared_table()
    value, err = table.integral_range(lower, T, k)
    target = tol * max(1.0, abs(value))
    if err <= target:
        return value, err
    # refine the worst panels until the estimate fits the budget
    resk, perr = table.panel_integrals(k)
    i0, i1 = int(lower / table.h), min(int(math.ceil(T / table.h)), table.n_panels)
    order = i0 + np.argsort(perr[i0:i1])[::-1]
    used = 0
    for i in order:
        if err <= target:
            break
        for depth in range(1, 8):
            new_val, new_err, n = _refined_panel(table, k, int(i), depth)
            used += n
            if used > NODE_BUDGET:
                raise BudgetExceeded(f"node budget {NODE_BUDGET} exhausted at T={T}")
            if new_err < 0.1 * perr[i] or new_err < target / max(1, i1 - i0):
                break
        value += new_val - resk[i]
        err += new_err - perr[i]
    if err > target:
        raise BudgetExceeded(f"could not reach tol={tol} for k={k}, T={T}")
    return value, err


def moment_integral(k: int, T: float, tol: float = 1e-8, table: PanelTable | None = None) -> float:
    """I_k(T) = int_0^T |zeta(1/2+it)|^(2k) dt."""
    return moment_integral_with_error(k, T, tol, table)[0]


def moment_integrals(k: int, T_grid: Sequence[float], table: PanelTable | None = None) -> np.ndarray:
    """Vectorised I_k at many heights (no refinement beyond the panel table)."""
    _check_k(k)
    table = table or shared_table()
    T = np.asarray(T_grid, dtype=float)
    return table.integral_to(T, k)


# ---------------------------------------------------------------------------
# arithmetic constants
# ---------------------------------------------------------------------------

def divisor_prime_power(k: int, j: int) -> int:
    """d_k(p^j): ordered factorisations of p^j into k factors."""
    if k < 1 or j < 0:
        raise ValueError("need k >= 1, j >= 0")
    return math.comb(j + k - 1, k - 1)


def primes_up_to(n: int) -> np.ndarray:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.flatnonzero(sieve)


def g_factor(k: int) -> Fraction:
    """g_k = (k^2)! prod_{j<k} j!/(j+k)!, exactly."""
    g = Fraction(math.factorial(k * k))
    for j in range(k):
        g *= Fraction(math.factorial(j), math.factorial(j + k))
    return g


def _local_factor_log(p: int, k: int) -> float:
    """log of (1-1/p)^{k^2} sum_j d_k(p^j)^2 p^{-j}."""
    terms = []
    j = 0
    x = 1.0 / p
    while True:
        term = divisor_prime_power(k, j) ** 2 * x ** j
        terms.append(term)
        if j > 2 and term < 1e-16 * terms[0]:
            break
        j += 1
    return k * k * math.log1p(-x) + math.log(math.fsum(terms))


def rmt_constants(k: int, euler_cutoff: int = 10_000) -> RmtConstants:
    """a_k, g_k and c_k = a_k g_k / Gamma(1 + k^2) with the product over p <= euler_cutoff.

    The local factor is 1 - k^2 (k-1)^2 / (4 p^2) + O(p^-3); the omitted
    primes are bounded by ``exp(k^2 (k-1)^2 / (2 P)) - 1`` relative, valid once
    P exceeds k^4.
    """
    _check_k(k)
    if euler_cutoff < 100:
        raise ValueError("euler_cutoff must be >= 100")
    logs = [_local_factor_log(int(p), k) for p in primes_up_to(euler_cutoff)]
    a_k = math.exp(math.fsum(logs))
    g_k = g_factor(k)
    c_k = a_k * float(g_k) / math.factorial(k * k)
    rel = math.expm1(k * k * (k - 1) ** 2 / (2.0 * euler_cutoff))
    return RmtConstants(k, a_k, g_k, c_k, euler_cutoff, abs(c_k) * rel)


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def _check_span(T_grid: np.ndarray):
    if T_grid.min() <= 1:
        raise IllConditionedFit("T grid must lie above 1")
    if T_grid.max() / T_grid.min() < 10 * (1 - 1e-12):
        raise IllConditionedFit(
            f"T grid spans {T_grid.max() / T_grid.min():.3g}x, need at least one decade")


def fit_polynomial_to(k: int, T: np.ndarray, values: np.ndarray,
                      fixed_leading: float | None = None) -> MomentPolynomial:
    """Least squares of values/T against a degree-k^2 polynomial in log T."""
    T = np.asarray(T, dtype=float)
    values = np.asarray(values, dtype=float)
    _check_span(T)
    deg = k * k
    y = np.log(T)
    rhs = values / T
    # centred, scaled variable keeps the normal equations well conditioned
    mid, half = 0.5 * (y.max() + y.min()), 0.5 * (y.max() - y.min())
    u = (y - mid) / half
    if fixed_leading is not None:
        rhs = rhs - fixed_leading * y ** deg
        free = deg  # a_0 .. a_{deg-1}
    else:
        free = deg + 1
    design = np.vander(u, free, increasing=True)
    sol, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    cond = float(np.linalg.cond(design))
    # back to monomials in y: u = (y - mid)/half
    poly_u = np.polynomial.Polynomial(sol)
    poly_y = poly_u(np.polynomial.Polynomial([-mid / half, 1.0 / half]))
    coeffs = np.zeros(deg + 1)
    coeffs[:len(poly_y.coef)] = poly_y.coef
    if fixed_leading is not None:
        coeffs[deg] = fixed_leading
    model = np.polynomial.polynomial.polyval(y, coeffs)
    rms = float(np.sqrt(np.mean((values / T - model) ** 2)))
    return MomentPolynomial(k, coeffs, cond, rms, fixed_leading)


def fit_moment_polynomial(k: int, T_grid: Sequence[float], fixed_leading: float | None = None,
                          table: PanelTable | None = None) -> MomentPolynomial:
    """Fit I_k(T) ~ T P_{k^2}(log T) on the given heights (k = 1 or 2)."""
    if k not in (1, 2):
        raise ValueError("moment polynomials are fitted for k = 1, 2 only")
    T = np.asarray(T_grid, dtype=float)
    if len(T) < 3 * (k * k + 1):
        raise IllConditionedFit(f"need at least {3 * (k * k + 1)} heights")
    _check_span(T)
    return fit_polynomial_to(k, T, moment_integrals(k, T, table), fixed_leading)


_STANDARD: dict = {}


def standard_polynomial(k: int, table: PanelTable | None = None) -> MomentPolynomial:
    """Reference P_{k^2}: the classical k = 1 polynomial, or for k = 2 a fit on a
    dense geometric grid over [10^3, 10^5] with a_4 = 1/(2 pi^2) held fixed."""
    if k == 1:
        return MomentPolynomial.classical_k1()
    if k != 2:
        raise ValueError("reference polynomials exist for k = 1, 2")
    table = table or shared_table()
    key = id(table)
    if key not in _STANDARD:
        _STANDARD[key] = fit_moment_polynomial(2, np.geomspace(1e3, 1e5, 5000),
                                               1.0 / (2 * math.pi ** 2), table)
    return _STANDARD[key]


def error_term(k: int, T: float, poly: MomentPolynomial, table: PanelTable | None = None,
               tol: float = 1e-8) -> MomentResult:
    """E_k(T) = I_k(T) - T P(log T)."""
    if poly.k != k:
        raise ValueError("polynomial belongs to a different k")
    value, err = moment_integral_with_error(k, T, tol, table)
    main = float(poly.main_term(T))
    return MomentResult(k, float(T), value, main, value - main, err)


def error_terms(k: int, x, poly: MomentPolynomial, table: PanelTable | None = None) -> np.ndarray:
    """Vectorised E_k at arbitrary points (x >= 0)."""
    table = table or shared_table()
    x = np.asarray(x, dtype=float)
    return table.integral_to(x, k) - poly.main_term(x)


def write_moment_csv(results: Sequence[MomentResult], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["T", "I", "main", "E"])
        for r in results:
            w.writerow([f"{r.T:.17g}", f"{r.integral:.17g}", f"{r.main_term:.17g}",
                        f"{r.error:.17g}"])


# ---------------------------------------------------------------------------
# mean-square growth of the error term
# ---------------------------------------------------------------------------

@dataclass
class ExponentFit:
    slope: float
    intercept: float
    T: np.ndarray
    values: np.ndarray
    degenerate: bool = False
    note: str = ""
    extra: dict = field(default_factory=dict)


def loglog_slope(T: np.ndarray, values: np.ndarray) -> ExponentFit:
    T = np.asarray(T, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        return ExponentFit(float("nan"), float("nan"), T, values, True,
                           "non-positive values: growth exponent undefined")
    slope, intercept = np.polyfit(np.log(T), np.log(values), 1)
    return ExponentFit(float(slope), float(intercept), T, values)


def mean_square_of(func: Callable[[np.ndarray], np.ndarray], T_grid, lower: float = 1.0,
                   h: float = 0.25) -> np.ndarray:
    """int_lower^T func(t)^2 dt for every T in T_grid (Kronrod panels of width h)."""
    T = np.sort(np.asarray(T_grid, dtype=float))
    top = T.max()
    n = int(math.ceil((top - lower) / h))
    a = lower + h * np.arange(n)
    x = a[:, None] + 0.5 * h * (KRONROD_NODES[None, :] + 1.0)
    vals = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape) ** 2
    cum = neumaier_cumsum(0.5 * h * vals @ KRONROD_WEIGHTS)
    out = np.empty(len(T))
    for i, t in enumerate(T):
        j = int((t - lower) / h)
        rem = t - (lower + j * h)
        if rem > 1e-12:
            xx = lower + j * h + 0.5 * rem * (KRONROD_NODES + 1.0)
            part = 0.5 * rem * np.asarray(func(xx), dtype=float) ** 2 @ KRONROD_WEIGHTS
        else:
            part = 0.0
        out[i] = cum[j] + part
    return out


def error_mean_square_exponent(k: int, T_grid: Sequence[float], poly: MomentPolynomial | None = None,
                               error_fn: Callable | None = None, lower: float = 1.0,
                               table: PanelTable | None = None) -> ExponentFit:
    """Slope of log int_lower^T E_k^2 against log T.

    ``error_fn`` replaces the computed E_k (synthetic checks of the fitter).
    """
    T = np.sort(np.asarray(T_grid, dtype=float))
    if T.max() / T.min() < 10 * (1 - 1e-12):
        raise IllConditionedFit("T grid must span at least one decade")
    if error_fn is None:
        if poly is None or poly.k != k or k not in (1, 2):
            raise ValueError("need the k = 1 or 2 moment polynomial")
        table = table or shared_table()

        def error_fn(x):
            return error_terms(k, x, poly, table)
    ms = mean_square_of(error_fn, T, lower)
    fit = loglog_slope(T, ms)
    if fit.degenerate:
        fit.note = "error term vanishes identically: " + fit.note
    return fit


def fit_log_power(k: int, T_grid: Sequence[float], table: PanelTable | None = None) -> float:
    """Empirical exponent of log T in I_k(T)/T (reported only)."""
    T = np.asarray(T_grid, dtype=float)
    I = moment_integrals(k, T, table)
    slope, _ = np.polyfit(np.log(np.log(T)), np.log(I / T), 1)
    return float(slope)


def compensated_total(values) -> float:
    """Order-independent sum (used for parallel reductions)."""
    return compensated_sum(values)
