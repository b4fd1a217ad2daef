"""Modified Mellin transforms Z_k(s) = int_1^oo |zeta(1/2+ix)|^(2k) x^(-s) dx.

Three routes are provided:

* :func:`mellin_direct` -- truncated quadrature on [1, X] (absolute
  convergence region only), optionally closing the tail with the main term;
* :func:`mellin_continued` -- analytic continuation through the error term
  E_k, valid left of the abscissa down to Re s > 1/4 (k=1) / 1/2 (k=2);
* :func:`mellin_invert_fourth` -- inversion on a shifted vertical line,
  recovering |zeta|^4 (compared only after Gaussian smoothing in x).
"""

from __future__ import annotations

import cmath
import csv
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from numba import njit, prange
from scipy.integrate import simpson

from .moment_engine import ExponentFit, MomentPolynomial, error_terms, loglog_slope, mean_square_of
from .quadrature import PanelTable, gauss_legendre, oscillation_nodes, shared_table
from .short_interval import smooth_step, smooth_step_slope

#: no continued value is served closer than this to s = 1
POLE_EXCLUSION = 0.05
#: exponent c with E_2(T) << T^(c + eps); admissible range [1/2, 2/3]
DEFAULT_C_EXPONENT = 2.0 / 3.0

_CHUNK = 400_000


class DomainError(ValueError):
    """s lies outside the region where the requested route converges."""


class PoleProximityError(DomainError):
    pass


class MissingContinuationData(ValueError):
    """Z_2 on the shifted line needs a k = 2 moment polynomial."""


def abscissa(k: int) -> float:
    """Abscissa of absolute convergence used for the direct route."""
    if not 1 <= k <= 6:
        raise ValueError("k must lie in 1..6")
    return 1.0 if k <= 2 else (k + 2) / 4.0


def continuation_strip(k: int) -> float:
    """Left edge of the strip reached by the E_k continuation."""
    if k == 1:
        return 0.25
    if k == 2:
        return 0.5
    raise ValueError("continuation is implemented for k = 1, 2")


@dataclass
class MellinValue:
    s: complex
    value: complex
    method: str
    truncation: float
    tail_bound: float
    quadrature_error: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def sigma(self) -> float:
        return self.s.real

    @property
    def t(self) -> float:
        return self.s.imag

    def to_json(self) -> str:
        d = asdict(self)
        d["s"] = [self.s.real, self.s.imag]
        d["value"] = [self.value.real, self.value.imag]
        return json.dumps(d, sort_keys=True)


@dataclass
class PoleExpansion:
    """Principal part of Z_k at s = 1: coefficients[m-1] multiplies (s-1)^(-m)."""

    k: int
    coefficients: np.ndarray

    @classmethod
    def from_polynomial(cls, poly: MomentPolynomial) -> "PoleExpansion":
        a = poly.coeffs
        deg = poly.degree
        c = np.empty(deg + 1)
        for j in range(deg):
            c[j] = a[j] * math.factorial(j) + a[j + 1] * math.factorial(j + 1)
        c[deg] = a[deg] * math.factorial(deg)
        return cls(poly.k, c)

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def __call__(self, s) -> complex:
        w = np.asarray(s, dtype=complex) - 1.0
        out = np.zeros(np.shape(w), dtype=complex)
        for m, c in enumerate(self.coefficients, start=1):
            out = out + c / w ** m
        return out if out.ndim else complex(out)


def principal_part(poly: MomentPolynomial, s) -> complex:
    return PoleExpansion.from_polynomial(poly)(s)


def main_term_tail(poly: MomentPolynomial, s, X: float):
    """int_X^oo Q(log x) x^(-s) dx in closed form (Re s > 1)."""
    s = np.asarray(s, dtype=complex)
    w = s - 1.0
    L = math.log(X)
    q = poly.q_coeffs
    total = np.zeros(s.shape, dtype=complex)
    for j, qj in enumerate(q):
        # int_L^oo u^j e^{-w u} du = e^{-wL} sum_m j!/(j-m)! L^{j-m} / w^{m+1}
        acc = np.zeros(s.shape, dtype=complex)
        for m in range(j + 1):
            acc = acc + math.perm(j, m) * L ** (j - m) / w ** (m + 1)
        total = total + qj * acc
    return total * np.exp(-w * L)


def _mellin_sum(x, w, g, s_values) -> np.ndarray:
    """sum_n w_n g_n x_n^(-s) for each s, chunked."""
    s_values = np.atleast_1d(np.asarray(s_values, dtype=complex))
    logx = np.log(x)
    wg = w * g
    out = np.zeros(s_values.shape, dtype=complex)
    for lo in range(0, x.size, _CHUNK):
        lx = logx[lo:lo + _CHUNK]
        out += np.exp(-np.outer(s_values, lx)) @ wg[lo:lo + _CHUNK]
    return out


@njit(parallel=True, cache=True)
def _sweep(logx, coef, weights, t0, dt, m):
    """out[p, j] = sum_n weights[p, n] coef[n] exp(-i (t0 + j dt) logx[n]), j < m.

    Blocks of 64 heights are re-seeded exactly, the steps in between use the
    rotation exp(-i dt logx) so only one complex product is spent per term.
    """
    block = 64
    nb = (m + block - 1) // block
    npw = weights.shape[0]
    out = np.zeros((npw, m), dtype=np.complex128)
    for b in prange(nb):
        j0 = b * block
        j1 = min(m, j0 + block)
        acc = np.zeros((npw, j1 - j0), dtype=np.complex128)
        for n in range(logx.size):
            lx = logx[n]
            z = coef[n] * np.exp(-1j * (t0 + j0 * dt) * lx)
            rot = np.exp(-1j * dt * lx)
            if npw == 1:
                for j in range(j1 - j0):
                    acc[0, j] += z
                    z *= rot
            else:
                skip = True
                for p in range(npw):
                    if weights[p, n] != 0.0:
                        skip = False
                if skip:
                    continue
                for j in range(j1 - j0):
                    for p in range(npw):
                        acc[p, j] += weights[p, n] * z
                    z *= rot
        out[:, j0:j1] = acc
    return out


def sweep(logx, coef, t0: float, dt: float, m: int, weights=None) -> np.ndarray:
    """Sums of coef x^(-i t) on the uniform grid t0 + j dt; one row per weight set."""
    coef = np.ascontiguousarray(coef, dtype=np.complex128)
    w = np.ones((1, coef.size)) if weights is None else np.ascontiguousarray(np.atleast_2d(weights), dtype=float)
    out = _sweep(np.ascontiguousarray(logx, dtype=float), coef, w, float(t0), float(dt), int(m))
    return out[0] if weights is None else out


def _moment_constant(table: PanelTable, k: int, X: float, a: float) -> float:
    """C with I_k(x) <= C x^a log^(k^2) x on [X/10, X], doubled for safety."""
    x = np.geomspace(max(X / 10, 3.0), X, 64)
    ratio = table.integral_to(x, k) / (x ** a * np.log(x) ** (k * k))
    return 2.0 * float(ratio.max())


def mellin_direct(k: int, s: complex, X: float = 1e4, tol: float = 1e-10,
                  poly: MomentPolynomial | None = None,
                  table: PanelTable | None = None) -> MellinValue:
    """int_1^X |zeta(1/2+ix)|^(2k) x^(-s) dx, plus the main-term tail when ``poly`` is given.

    Without ``poly`` the tail is only bounded: with I_k(x) <= C x^a log^(k^2) x
    (a the abscissa, C measured on [X/10, X]) one has
    ``|tail| <= C |s| X^(a-sigma) log^(k^2) X / (sigma - a)`` to leading order.
    With ``poly`` the closed-form tail of x P(log x) is added and the bound
    covers what E_k contributes beyond X.
    """
    s = complex(s)
    a = abscissa(k)
    if s.real < a + 0.1 - 1e-12:
        raise DomainError(f"direct route needs Re s >= {a + 0.1:g}, got {s.real:g}")
    if X < 10:
        raise ValueError("X must be >= 10")
    table = table or shared_table()
    table.ensure(X)
    x, w = oscillation_nodes(1.0, X, abs(s.imag), table.h)
    f = table.interpolate(x, k)
    value = complex(_mellin_sum(x, w, f, s)[0])
    # coarser rule for the quadrature error estimate
    xc, wc = oscillation_nodes(1.0, X, abs(s.imag), table.h, n_gauss=10)
    coarse = complex(_mellin_sum(xc, wc, table.interpolate(xc, k), s)[0])
    qerr = abs(value - coarse)
    sigma = s.real
    extra = {}
    if poly is not None:
        if poly.k != k:
            raise ValueError("polynomial belongs to a different k")
        tail = complex(main_term_tail(poly, s, X))
        value += tail
        extra["main_tail"] = [tail.real, tail.imag]
        cont = _continuation_tail_bound(k, poly, X, s, table)
        e_x = float(abs(error_terms(k, np.array([X]), poly, table)[0]))
        tail_bound = e_x * X ** -sigma + cont
    else:
        C = _moment_constant(table, k, X, a)
        L = math.log(X)
        tail_bound = C * abs(s) * X ** (a - sigma) * L ** (k * k) / (sigma - a)
    if qerr > tol * max(1.0, abs(value)):
        extra["tolerance_missed"] = True
    return MellinValue(s, value, "direct", X, tail_bound, qerr, extra)


# ---------------------------------------------------------------------------
# continuation through E_k
# ---------------------------------------------------------------------------

class ContinuationData:
    """E_k sampled on quadrature nodes in [1, X] for fast evaluation of the
    continued transform at many s.

    The E_k' integral is cut off smoothly by rho(x) = 1 - S(log2(2x/X)), so
    after integrating by parts

        Z_k(s) ~ PP(s) - E_k(1) + int_1^X E_k(x) (s rho(x) - x rho'(x)) x^(-s-1) dx.

    A hard cut at X leaves a boundary term E_k(X) X^(-s) that grows with |t|.
    """

    def __init__(self, k: int, poly: MomentPolynomial, X: float,
                 table: PanelTable | None = None, n_gauss: int = 8):
        if k not in (1, 2):
            raise ValueError("continuation is implemented for k = 1, 2")
        if poly.k != k:
            raise ValueError("polynomial belongs to a different k")
        self.k, self.poly, self.X = k, poly, float(X)
        self.table = table or shared_table()
        self.table.ensure(X)
        self.n_gauss = n_gauss
        self.e1 = float(error_terms(k, np.array([1.0]), poly, self.table)[0])
        self.pole = PoleExpansion.from_polynomial(poly)
        self._nodes: dict = {}
        self._ms_constant: float | None = None

    @property
    def growth_exponent(self) -> float:
        """beta with int_1^Y E_k^2 << Y^beta (3/2 for k = 1, 2 for k = 2)."""
        return 1.5 if self.k == 1 else 2.0

    @property
    def mean_square_constant(self) -> float:
        """A with int_1^Y E_k^2 <= A Y^beta on [X/10, X] (doubled for safety)."""
        if self._ms_constant is None:
            Y = np.geomspace(max(self.X / 10, 2.0), self.X, 12)
            ms = mean_square_of(lambda x: error_terms(self.k, x, self.poly, self.table), Y)
            self._ms_constant = 2.0 * float(np.max(ms / Y ** self.growth_exponent))
        return self._ms_constant

    def nodes(self, t_max: float):
        bucket = 2.0 ** math.ceil(math.log2(max(abs(t_max), 1.0)))
        if bucket not in self._nodes:
            x, w = oscillation_nodes(1.0, self.X, bucket, self.table.h, n_gauss=self.n_gauss)
            e = error_terms(self.k, x, self.poly, self.table)
            u = np.log2(2 * x / self.X)
            rho = 1.0 - smooth_step(u)
            drho = -smooth_step_slope(u) / math.log(2)   # x rho'(x)
            self._nodes[bucket] = (x, w, e / x, rho, drho)
        return self._nodes[bucket]

    def tail_bound(self, s) -> np.ndarray:
        """Cauchy-Schwarz bound on the part of the integral beyond X/2, where the
        taper starts, summed over dyadic blocks."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        sigma = s.real
        beta = self.growth_exponent
        A = self.mean_square_constant
        expo = beta / 2 - sigma - 0.5
        with np.errstate(divide="ignore", invalid="ignore"):
            first = np.sqrt(A * 2 ** beta / (2 * sigma + 1)) * (self.X / 2) ** expo
            bound = (np.abs(s) + 1.0) * first / (1 - 2.0 ** expo)
        return np.where(expo < 0, bound, np.inf)

    def values(self, s_values) -> np.ndarray:
        s_values = np.atleast_1d(np.asarray(s_values, dtype=complex))
        x, w, ex, rho, drho = self.nodes(float(np.max(np.abs(s_values.imag))) if s_values.size else 0.0)
        a = _mellin_sum(x, w, ex * rho, s_values)
        b = _mellin_sum(x, w, ex * drho, s_values)
        return self.pole(s_values) - self.e1 + s_values * a - b

    def values_on_line(self, sigma: float, t0: float, dt: float, m: int) -> np.ndarray:
        """Values at sigma + i(t0 + j dt), j < m, through the rotation sweep."""
        t = t0 + dt * np.arange(m)
        x, w, ex, rho, drho = self.nodes(float(np.max(np.abs(t))) if m else 0.0)
        logx = np.log(x)
        base = w * ex * np.exp(-sigma * logx)
        a, b = sweep(logx, base, t0, dt, m, np.vstack([rho, drho]))
        s = sigma + 1j * t
        return self.pole(s) - self.e1 + s * a - b


def _continuation_tail_bound(k, poly, X, s, table) -> float:
    if k not in (1, 2):
        return float("inf")
    return float(_continuation_data(k, tuple(poly.coeffs), X, id(table), table).tail_bound(s)[0])


_CONT_CACHE: dict = {}


def _continuation_data(k, coeffs, X, table_id, table) -> ContinuationData:
    key = (k, coeffs, float(X), table_id)
    if key not in _CONT_CACHE:
        if len(_CONT_CACHE) > 6:
            _CONT_CACHE.clear()
        _CONT_CACHE[key] = ContinuationData(k, MomentPolynomial(k, np.array(coeffs)), X, table)
    return _CONT_CACHE[key]


def continuation_for(k: int, poly: MomentPolynomial, X: float,
                     table: PanelTable | None = None) -> ContinuationData:
    table = table or shared_table()
    return _continuation_data(k, tuple(poly.coeffs), X, id(table), table)


def mellin_continued(k: int, s: complex, poly: MomentPolynomial, X: float = 1e5,
                     table: PanelTable | None = None) -> MellinValue:
    """Z_k(s) = principal part - E_k(1) + s int_1^X E_k x^(-s-1) dx (+ bounded tail)."""
    s = complex(s)
    if k not in (1, 2):
        raise ValueError("continuation is implemented for k = 1, 2")
    if s.real <= continuation_strip(k):
        raise DomainError(f"continuation for k={k} needs Re s > {continuation_strip(k)}")
    if abs(s - 1) < POLE_EXCLUSION:
        raise PoleProximityError(f"|s - 1| < {POLE_EXCLUSION}; use principal_part()")
    data = continuation_for(k, poly, X, table)
    value = complex(data.values(s)[0])
    return MellinValue(s, value, "continued", float(X), float(data.tail_bound(s)[0]),
                       extra={"E_k(1)": data.e1})


def mellin_value(k: int, s: complex, poly: MomentPolynomial, X: float = 1e5,
                 table: PanelTable | None = None) -> MellinValue:
    """Continued value, or the principal part alone inside the exclusion disc."""
    s = complex(s)
    if abs(s - 1) < POLE_EXCLUSION:
        return MellinValue(s, principal_part(poly, s), "principal", float(X), float("inf"))
    return mellin_continued(k, s, poly, X, table)


# ---------------------------------------------------------------------------
# inversion on a shifted line
# ---------------------------------------------------------------------------

@dataclass
class LineSamples:
    """Z_2 on the line Re s = sigma_line for t in [0, t_max] with quadrature weights."""

    sigma_line: float
    t: np.ndarray
    w: np.ndarray
    z: np.ndarray
    tail_bound: np.ndarray


def simpson_weights(m: int, dt: float) -> np.ndarray:
    """Composite Simpson weights on m (odd) equally spaced points."""
    if m < 3 or m % 2 == 0:
        raise ValueError("Simpson needs an odd number >= 3 of points")
    w = np.ones(m)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return w * dt / 3


def line_samples(poly: MomentPolynomial, sigma_line: float, t_max: float, X: float = 1e4,
                 table: PanelTable | None = None, dt: float = 0.05) -> LineSamples:
    """Z_2 on Re s = sigma_line, t in [0, t_max], on a Simpson grid.

    |Z_2| varies in t on the scale 1/log X, so dt = 0.05 resolves it for X
    up to about 1e8.
    """
    if poly is None or poly.k != 2:
        raise MissingContinuationData("Z_2 on the line needs the k = 2 moment polynomial")
    if not 0.5 < sigma_line < 1:
        raise DomainError("need 1/2 < sigma_line < 1")
    if t_max <= 0:
        return LineSamples(sigma_line, np.empty(0), np.empty(0), np.empty(0, complex), np.empty(0))
    n = max(1, int(math.ceil(t_max / dt / 2)))
    m = 2 * n + 1
    h = t_max / (m - 1)
    t = h * np.arange(m)
    w = simpson_weights(m, h)
    data = continuation_for(2, poly, X, table)
    z = data.values_on_line(sigma_line, 0.0, h, m)
    return LineSamples(sigma_line, t, w, z, data.tail_bound(sigma_line + 1j * t))


@dataclass
class InversionResult:
    x: np.ndarray
    value: np.ndarray
    residue: np.ndarray
    truncation_residual: np.ndarray


def mellin_invert_fourth(x, sigma_line: float, t_max: float, poly: MomentPolynomial,
                         X: float = 1e4, table: PanelTable | None = None,
                         samples: LineSamples | None = None) -> InversionResult:
    """Q_4(log x) + (1/2pi) int_{-t_max}^{t_max} Z_2(c+it) x^(c+it-1) dt.

    The circular detour around s = 1 is replaced by the straight line
    Re s = c plus the residue Q_4(log x).  The returned truncation residual
    bounds the omitted |t| > t_max part by the size of the last samples.
    """
    if poly is None or poly.k != 2:
        raise MissingContinuationData("inversion needs the k = 2 moment polynomial")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 1):
        raise DomainError("inversion formula holds for x > 1")
    residue = poly.q(np.log(x))
    if t_max <= 0:
        return InversionResult(x, residue.copy(), residue, np.zeros_like(x))
    if samples is None:
        samples = line_samples(poly, sigma_line, t_max, X, table)
    c = samples.sigma_line
    # conjugate symmetry folds [-t_max, t_max] onto [0, t_max]
    phase = np.exp(1j * np.outer(np.log(x), samples.t))
    integral = (phase * (samples.z * samples.w)[None, :]).sum(axis=1)
    value = residue + x ** (c - 1) * integral.real / math.pi
    last = np.abs(samples.z[-20:]).mean() if samples.z.size else 0.0
    resid = x ** (c - 1) * last / math.pi * np.ones_like(x)
    return InversionResult(x, value, residue, resid)


def gaussian_smooth(func_values: np.ndarray, u: np.ndarray, w: np.ndarray, G: float) -> float:
    weight = np.exp(-(u / G) ** 2) / (math.sqrt(math.pi) * G)
    return float(np.sum(func_values * weight * w))


# ---------------------------------------------------------------------------
# mean-square scans of Z_2
# ---------------------------------------------------------------------------

BOUND_EXPONENTS = {
    "unconditional (10-8s)/3": lambda s: (10 - 8 * s) / 3,
    "(15-12s)/5 for 5/6<=s<=5/4": lambda s: (15 - 12 * s) / 5 if 5 / 6 <= s <= 5 / 4 else float("nan"),
    "(7-6s)/2 for 1/2<s<=5/6": lambda s: (7 - 6 * s) / 2 if 0.5 < s <= 5 / 6 else float("nan"),
}


def c_exponent_bound(sigma: float, c: float = DEFAULT_C_EXPONENT) -> float:
    """Exponent max(1, (2-2 sigma)/(1-c)) of the conditional mean-square bound."""
    if not 0.5 <= c <= 2 / 3:
        raise ValueError("c must lie in [1/2, 2/3]")
    return max(1.0, (2 - 2 * sigma) / (1 - c))


@dataclass
class ScanResult:
    sigma: float
    T: float
    integral: float
    fit: ExponentFit
    bounds: dict
    t: np.ndarray
    z: np.ndarray

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["t", "re", "im", "abs2"])
            for t, z in zip(self.t, self.z):
                wr.writerow([f"{t:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}", f"{abs(z) ** 2:.17g}"])


def mean_square_scan(k: int, sigma: float, T: float, poly: MomentPolynomial, X: float = 1e4,
                     table: PanelTable | None = None, n_fit: int = 8,
                     c: float = DEFAULT_C_EXPONENT) -> ScanResult:
    """int_1^T |Z_2(sigma+it)|^2 dt and its empirical growth exponent."""
    if k != 2:
        raise ValueError("mean-square scans are defined for k = 2")
    if not 0.5 < sigma < 1:
        raise DomainError("need 1/2 < sigma < 1")
    if T > 1e3:
        raise ValueError("desk-scale scans stop at T = 1000")
    bounds = {name: f(sigma) for name, f in BOUND_EXPONENTS.items()}
    bounds["conditional (2-2s)/(1-c)"] = c_exponent_bound(sigma, c)
    if T <= 1:
        empty = ExponentFit(float("nan"), float("nan"), np.empty(0), np.empty(0), True, "T <= 1")
        return ScanResult(sigma, T, 0.0, empty, bounds, np.empty(0), np.empty(0, complex))
    data = continuation_for(2, poly, X, table)
    # Simpson in t on a grid fine against the 1/log X scale of Z_2
    n = int(math.ceil((T - 1) / 0.1))
    m = 2 * n + 1
    h = (T - 1) / (m - 1)
    t = 1 + h * np.arange(m)
    z = data.values_on_line(sigma, 1.0, h, m)
    a2 = np.abs(z) ** 2
    # cumulative Simpson over pairs of steps; odd points get the trapezoid share
    pair = h / 3 * (a2[:-2:2] + 4 * a2[1:-1:2] + a2[2::2])
    cum = np.concatenate([[0.0], np.cumsum(pair)])
    edges = t[::2]
    T_fit = np.geomspace(max(T / 10, 2.0), T, n_fit)
    ms = np.interp(T_fit, edges, cum)
    fit = loglog_slope(T_fit, ms)
    return ScanResult(sigma, T, float(cum[-1]), fit, bounds, t, z)


# ---------------------------------------------------------------------------
# mean-value inequality for Mellin transforms
# ---------------------------------------------------------------------------

def lemma1_check(x: np.ndarray, g: np.ndarray, sigma: float, T: float):
    """(int_0^T |int_a^b g x^(-s) dx|^2 dt, 2 pi int_a^b g^2 x^(1-2 sigma) dx).

    ``g`` is sampled on the uniform mesh ``x`` (Simpson's rule in x).
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(g, dtype=float)
    if x[0] < 2:
        raise ValueError("the interval must lie in [2, oo)")
    right = 2 * math.pi * simpson(g ** 2 * x ** (1 - 2 * sigma), x=x)
    if not np.any(g):
        return 0.0, float(right)
    # inner transform oscillates like x^(-it): panels of width 0.5 in t
    gx, gw = gauss_legendre(12)
    step = min(0.5, math.pi / (4 * math.log(x[-1])))
    n = max(1, int(math.ceil(T / step)))
    h = T / n
    a = h * np.arange(n)
    t = (a[:, None] + 0.5 * h * (gx[None, :] + 1)).ravel()
    w = np.tile(0.5 * h * gw, n)
    logx = np.log(x)
    left = 0.0
    for lo in range(0, t.size, 256):
        s = sigma + 1j * t[lo:lo + 256]
        kern = np.exp(-np.outer(s, logx)) * g[None, :]
        F = simpson(kern, x=x, axis=1)
        left += float(np.sum(np.abs(F) ** 2 * w[lo:lo + 256]))
    return left, float(right)


def conj_pair(value: complex) -> complex:
    return value.conjugate() if isinstance(value, complex) else cmath.rect(abs(value), -cmath.phase(value))
