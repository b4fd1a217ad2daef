"""Spectral pieces of the smoothed fourth moment.

Xi(ir; T, G) is the oscillatory integral

    Gamma(1/2+ir)^2 / Gamma(1+2ir) * int_0^oo (1+y)^(-1/2+iT) y^(-1/2+ir)
        exp(-G^2 log^2(1+y) / 4) F(1/2+ir, 1/2+ir; 1+2ir; -y) dy

and Lambda(r) = Re{(1 + i/sinh pi r) Xi(ir) + (1 - i/sinh pi r) Xi(-ir)} / 2.
For r = -kappa the phase of the integrand has a stationary point y0 with
1 + y0 = exp(2 asinh(kappa / 2x)); the saddle evaluation reproduces the
quadrature and gives the closed form I_xi(x, kappa).

Maass data (kappa_j, alpha_j H_j^3(1/2)) are read from CSV; nothing here
computes them.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import mpmath
import numpy as np
from scipy.special import loggamma

from .quadrature import gauss_legendre
from .short_interval import smooth_step

NODE_BUDGET = 5_000_000
R_MAX = 1e3
#: the Pfaff-transformed series is used up to this argument
W_MAX = 0.95
#: above this |r| the reciprocal sinh is taken from its exponential form
SINH_SWITCH = 10.0


class ConvergenceError(ArithmeticError):
    pass


class OscillationBudgetError(RuntimeError):
    pass


class SpectralDataError(ValueError):
    pass


class RangeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# hypergeometric factor
# ---------------------------------------------------------------------------

def _series(a: complex, c: complex, z: np.ndarray, max_terms: int = 4000):
    """sum_n (a)_n^2 / ((c)_n n!) z^n for |z| < 1; returns (sum, max |term|)."""
    total = np.ones(z.shape, dtype=complex)
    term = np.ones(z.shape, dtype=complex)
    peak = np.ones(z.shape)
    for n in range(max_terms):
        term = term * ((a + n) * (a + n) / ((c + n) * (n + 1))) * z
        total += term
        mag = np.abs(term)
        peak = np.maximum(peak, mag)
        if np.all(mag <= 1e-16 * np.abs(total)):
            return total, peak
    raise ConvergenceError("hypergeometric series did not converge")


def hyp2f1_critical(r: float, y) -> np.ndarray:
    """F(1/2+ir, 1/2+ir; 1+2ir; -y) for y >= 0.

    y <= 1/2: the Gauss series in -y.  y > 1/2: Pfaff's transformation
    F(a,b;c;z) = (1-z)^(-a) F(a, c-b; c; z/(z-1)), which keeps the same
    parameters here because c - b = a, with the series in w = y/(1+y).
    Where the series would cancel catastrophically (large |r| w) the value
    is taken from mpmath at raised precision.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("y must be non-negative")
    if abs(r) > R_MAX:
        raise ConvergenceError(f"|r| > {R_MAX:g} is outside the validated range")
    a = 0.5 + 1j * r
    c = 1.0 + 2j * r
    flat = y.reshape(-1)
    out = np.empty(flat.shape, dtype=complex)
    low = flat <= 0.5
    w = flat / (1 + flat)
    if np.any(w[~low] > W_MAX):
        raise ConvergenceError(f"y > {W_MAX / (1 - W_MAX):g} is outside the validated range")
    arg = np.where(low, -flat, w)
    # heuristic growth of the terms before they decay: exp(|r| |z| / 2)
    risky = abs(r) * np.abs(arg) / 2 > 18
    safe = ~risky
    if np.any(safe):
        vals, _ = _series(a, c, arg[safe])
        pf = np.where(low[safe], 1.0, (1 + flat[safe]) ** (-a))
        out[safe] = vals * pf
    for i in np.flatnonzero(risky):
        with mpmath.workdps(40 + int(abs(r * arg[i]) / 2 / 2.3)):
            out[i] = complex(mpmath.hyp2f1(a, a, c, -flat[i]))
    return out.reshape(y.shape)


def hyp2f1_saddle_form(r: float, y) -> np.ndarray:
    """(1+y)^(-1/4) ((1+sqrt(1+y))/2)^(-2ir): leading large-|r| form of the factor."""
    y = np.asarray(y, dtype=float)
    return (1 + y) ** -0.25 * np.exp(-2j * r * np.log((1 + np.sqrt(1 + y)) / 2))


# ---------------------------------------------------------------------------
# Xi and Lambda
# ---------------------------------------------------------------------------

def gamma_prefactor(r: float) -> complex:
    """Gamma(1/2+ir)^2 / Gamma(1+2ir) through log-Gamma."""
    return complex(np.exp(2 * loggamma(0.5 + 1j * r) - loggamma(1 + 2j * r)))


def gaussian_cutoff(G: float) -> float:
    """y beyond which exp(-G^2 log^2(1+y)/4) < 1e-16."""
    return math.expm1(2 * math.sqrt(math.log(1e16)) / G)


@dataclass
class XiValue:
    r: float
    T: float
    xi: float
    value: complex
    error: float
    nodes: int
    y_cut: float


def _u_panels(r: float, T: float, G: float, u_lo: float, u_hi: float):
    """Panel edges in u = -log(y)/2 with width ~ 3 / (local phase rate)."""
    edges = [u_lo]
    u = u_lo
    while u < u_hi:
        y = math.exp(-2 * u)
        lg = math.log1p(y)
        rate = 2 * abs(r) + 2 * T * y / (1 + y) + G * G * lg * y / (1 + y) + 1.0
        u = min(u_hi, u + min(0.25, 3.0 / rate))
        edges.append(u)
        if len(edges) > NODE_BUDGET // 20:
            raise OscillationBudgetError("node budget exceeded")
    return np.asarray(edges)


def _xi_sum(r, T, G, edges, n):
    gx, gw = gauss_legendre(n)
    a, h = edges[:-1], np.diff(edges)
    u = (a[:, None] + 0.5 * h[:, None] * (gx + 1)).ravel()
    w = (0.5 * h[:, None] * gw).ravel()
    y = np.exp(-2 * u)
    lg = np.log1p(y)
    # (1+y)^(-1/2+iT) y^(1/2+ir) * 2, with dy = -2 y du absorbed
    logmag = -0.5 * lg - u - 0.25 * G * G * lg * lg
    phase = T * lg - 2 * r * u
    f = 2 * np.exp(logmag + 1j * phase) * hyp2f1_critical(r, y)
    return complex(np.sum(w * f)), u.size


def xi_integral(r: float, T: float, xi: float, tol: float = 1e-8) -> XiValue:
    """Xi(ir; T, T^xi) by Gauss-Legendre panels in u = -log(y)/2.

    The substitution turns the y^(-1/2+ir) endpoint into a decaying
    exponential e^(-u(1+2ir)); r may have either sign.
    """
    if T < 100:
        raise ValueError("T must be >= 100")
    if not 1 / 3 - 1e-12 <= xi <= 1 + 1e-12:
        raise ValueError("xi must lie in [1/3, 1]")
    G = T ** xi
    y_cut = gaussian_cutoff(G)
    u_lo, u_hi = -0.5 * math.log(y_cut), 40.0
    edges = _u_panels(r, T, G, u_lo, u_hi)
    fine, n_nodes = _xi_sum(r, T, G, edges, 20)
    coarse, _ = _xi_sum(r, T, G, edges, 14)
    pre = gamma_prefactor(r)
    value = pre * fine
    err = abs(pre) * (abs(fine - coarse) + math.exp(-u_hi))
    return XiValue(r, T, xi, value, err, n_nodes, y_cut)


def reciprocal_sinh(r: float) -> float:
    """1/sinh(pi r), via 2e^(-pi r)/(1-e^(-2 pi r)) once |r| > 10."""
    if r == 0:
        raise ZeroDivisionError("sinh(pi r) vanishes at r = 0")
    if abs(r) > SINH_SWITCH:
        e = math.exp(-math.pi * abs(r))
        return math.copysign(2 * e / (1 - e * e), r)
    return 1.0 / math.sinh(math.pi * r)


@dataclass
class LambdaValue:
    r: float
    value: float
    imaginary_residual: float   # |Im| of the combination before Re, relative
    xi_plus: complex
    xi_minus: complex


def lambda_combination(r: float, T: float, xi: float, tol: float = 1e-8) -> LambdaValue:
    p = xi_integral(r, T, xi, tol).value
    m = xi_integral(-r, T, xi, tol).value
    q = 1j * reciprocal_sinh(r)
    combo = 0.5 * ((1 + q) * p + (1 - q) * m)
    value = combo.real
    # the returned number is Re(.) by construction; the dropped imaginary
    # part vanishes only when Xi(-ir) = conj Xi(ir)
    resid = abs(combo.imag) / max(abs(combo), 1e-300)
    return LambdaValue(r, value, resid, p, m)


def lambda_conjugate_form(r: float, T: float, xi: float) -> float:
    """Re{(1 + i/sinh pi r) Xi(ir)}, equal to Lambda only if Xi(-ir) = conj Xi(ir)."""
    p = xi_integral(r, T, xi).value
    return float(((1 + 1j * reciprocal_sinh(r)) * p).real)


# ---------------------------------------------------------------------------
# saddle point
# ---------------------------------------------------------------------------

@dataclass
class SaddleData:
    x: float
    kappa: float
    y0: float
    phase: float
    gauss_damp: float = float("nan")


def saddle_y0(x, kappa):
    """1 + y0 = exp(2 asinh(kappa / 2x))."""
    return np.expm1(2 * np.arcsinh(np.asarray(kappa, float) / (2 * np.asarray(x, float))))


def saddle_y0_direct(x, kappa):
    rho = np.asarray(kappa, float) / np.asarray(x, float)
    return rho * (np.sqrt(1 + rho * rho / 4) + rho / 2)


def phase_F(y, x, kappa):
    """kappa log y - 2 kappa log((1 + sqrt(1+y))/2) - x log(1+y)."""
    y = np.asarray(y, float)
    return kappa * np.log(y) - 2 * kappa * np.log((1 + np.sqrt(1 + y)) / 2) - x * np.log1p(y)


def phase_F_prime(y, x, kappa):
    y = np.asarray(y, float)
    s = np.sqrt(1 + y)
    return kappa / y - kappa / (s * (1 + s)) - x / (1 + y)


def phase_F_second(y, x, kappa):
    y = np.asarray(y, float)
    s = np.sqrt(1 + y)
    return -kappa / y ** 2 + kappa * (1 + 2 * s) / (2 * s ** 3 * (1 + s) ** 2) + x / (1 + y) ** 2


def saddle_point(x: float, kappa: float, G: float | None = None) -> SaddleData:
    if x <= 0 or kappa <= 0:
        raise ValueError("x and kappa must be positive")
    y0 = float(saddle_y0(x, kappa))
    damp = float("nan") if G is None else 0.25 * G * G * math.log1p(y0) ** 2
    return SaddleData(x, kappa, y0, float(phase_F(y0, x, kappa)), damp)


def _h_derivatives(y, T, kappa, G):
    """h = i psi - D with psi = -F and D = G^2 log^2(1+y)/4, for complex y."""
    s = np.sqrt(1 + y)
    L = np.log(1 + y)
    psi1 = T / (1 + y) - kappa / y + kappa / (s * (1 + s))
    psi2 = -T / (1 + y) ** 2 + kappa / y ** 2 - kappa * (1 + 2 * s) / (2 * s ** 3 * (1 + s) ** 2)
    D1 = 0.5 * G * G * L / (1 + y)
    D2 = 0.5 * G * G * (1 - L) / (1 + y) ** 2
    return 1j * psi1 - D1, 1j * psi2 - D2


def _h(y, T, kappa, G):
    psi = T * np.log(1 + y) - kappa * np.log(y) + 2 * kappa * np.log((1 + np.sqrt(1 + y)) / 2)
    return 1j * psi - 0.25 * G * G * np.log(1 + y) ** 2


def complex_saddle(kappa: float, T: float, G: float, steps: int = 20) -> complex:
    """Stationary point of h in the complex y plane, followed from the real
    saddle by switching the Gaussian factor on gradually."""
    y = complex(saddle_y0(T, kappa))
    for lam in np.linspace(0, 1, steps + 1)[1:]:
        g = G * math.sqrt(lam)
        for _ in range(50):
            h1, h2 = _h_derivatives(y, T, kappa, g)
            dy = h1 / h2
            y -= dy
            if abs(dy) < 1e-15 * abs(y):
                break
    return y


def saddle_xi(kappa: float, T: float, xi: float) -> complex:
    """Steepest-descent value of Xi(-i kappa; T, T^xi).

    The Gaussian factor is kept in the exponent h = i psi - D (psi = -F), and
    the expansion is made at the complex stationary point y* of h:
    value ~ Pre * g(y*) sqrt(2 pi / -h''(y*)) exp(h(y*)),
    g = (1+y)^(-3/4) y^(-1/2) from the large-kappa form of the hypergeometric
    factor.  With the Gaussian switched off y* is the real saddle y0.
    """
    G = T ** xi
    y = complex_saddle(kappa, T, G)
    _, h2 = _h_derivatives(y, T, kappa, G)
    g = (1 + y) ** -0.75 * y ** -0.5
    val = g * np.sqrt(2 * math.pi / -h2) * np.exp(_h(y, T, kappa, G))
    return complex(gamma_prefactor(-kappa) * val)


# ---------------------------------------------------------------------------
# asymptotic term
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def fitted_phase_constants(n_max: int = 5) -> tuple:
    """c_3..c_{n_max} in F(y0) - kappa log 4 = kappa log(kappa/(4ex)) + sum c_l kappa^l x^(1-l).

    With rho = kappa/x the left minus the log term equals x * phi(rho); the
    constants are the Taylor coefficients of phi, obtained here by least
    squares on a desk grid of rho (double-checked by mpmath evaluations).
    """
    if not 3 <= n_max <= 6:
        raise ValueError("n_max must lie in 3..6")
    rho = np.geomspace(1e-3, 0.2, 60)
    with mpmath.workdps(40):
        res = []
        for p in rho:
            p = mpmath.mpf(float(p))
            y0 = mpmath.expm1(2 * mpmath.asinh(p / 2))
            F = p * mpmath.log(y0) - 2 * p * mpmath.log((1 + mpmath.sqrt(1 + y0)) / 2) - mpmath.log1p(y0)
            res.append(float(F - p * mpmath.log(p / mpmath.e)))
    res = np.asarray(res)
    powers = np.arange(3, n_max + 1)
    design = rho[:, None] ** powers[None, :]
    coef, *_ = np.linalg.lstsq(design / rho[:, None] ** 3, res / rho ** 3, rcond=None)
    return tuple(float(c) for c in coef)


@dataclass
class AsymptoticTerm:
    x: float
    kappa: float
    xi: float
    exact_form: complex       # x^-1/2 k^-1/2 exp(-damp + i F(y0) - i k log 4)
    expanded_form: complex    # with the phase k log(k/(4ex)) + sum c_l k^l x^(1-l)
    phase_exact: float
    phase_expanded: float
    magnitude: float


def asymptotic_xi_term(x: float, kappa: float, xi: float, N: int = 3,
                       fitted_c=None, check_range: bool = True) -> AsymptoticTerm:
    if N > 6 or N < 2:
        raise ValueError("N must lie in 2..6")
    if check_range and kappa > x ** (1 - xi) * math.log(x):
        raise RangeError("kappa exceeds x^(1-xi) log x")
    c = fitted_phase_constants(max(N, 3)) if fitted_c is None else tuple(fitted_c)
    G = x ** xi
    sd = saddle_point(x, kappa, G)
    ph_exact = sd.phase - kappa * math.log(4)
    ph_exp = kappa * math.log(kappa / (4 * math.e * x))
    for ell in range(3, N + 1):
        ph_exp += c[ell - 3] * kappa ** ell * x ** (1 - ell)
    mag = x ** -0.5 * kappa ** -0.5 * math.exp(-sd.gauss_damp)
    return AsymptoticTerm(x, kappa, xi, mag * complex(math.cos(ph_exact), math.sin(ph_exact)),
                          mag * complex(math.cos(ph_exp), math.sin(ph_exp)), ph_exact, ph_exp, mag)


# ---------------------------------------------------------------------------
# Maass data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralDatum:
    kappa: float
    weight: float


@dataclass
class SpectralData:
    entries: list
    notes: list = field(default_factory=list)
    source: str = ""

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def kappa(self) -> np.ndarray:
        return np.array([d.kappa for d in self.entries])

    @property
    def weight(self) -> np.ndarray:
        return np.array([d.weight for d in self.entries])


def _rows_digest(rows: list[str]) -> str:
    return hashlib.sha256("\n".join(rows).encode()).hexdigest()[:16]


def parse_spectral_csv(text: str, source: str = "<string>") -> SpectralData:
    """Comment lines start with '#'; an optional '# sha256: <hex16>' line is
    checked against the data rows.  Header must be exactly 'kappa,weight'."""
    lines = [ln.rstrip("\r") for ln in text.splitlines()]
    notes = [ln[1:].strip() for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if ln.strip() and not ln.startswith("#")]
    if not body or body[0].replace(" ", "") != "kappa,weight":
        raise SpectralDataError("header must be 'kappa,weight'")
    rows = body[1:]
    entries = []
    for rec in csv.reader(io.StringIO("\n".join(rows))):
        if len(rec) != 2:
            raise SpectralDataError(f"bad row {rec!r}")
        try:
            k, w = float(rec[0]), float(rec[1])
        except ValueError as exc:
            raise SpectralDataError(f"bad number in {rec!r}") from exc
        if not (math.isfinite(k) and math.isfinite(w)) or k <= 0:
            raise SpectralDataError(f"bad values in {rec!r}")
        entries.append(SpectralDatum(k, w))
    ks = [d.kappa for d in entries]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise SpectralDataError("kappa must be strictly increasing")
    for n in notes:
        if n.startswith("sha256:"):
            if n.split(":", 1)[1].strip() != _rows_digest(rows):
                raise SpectralDataError("checksum mismatch")
    return SpectralData(entries, notes, source)


def load_spectral_data(path=None) -> SpectralData:
    """Read a data file; without a path the bundled starter file is used."""
    if path is None:
        text = resources.files("zetamellin").joinpath("data/maass_level1.csv").read_text("utf-8")
        return parse_spectral_csv(text, "bundled:maass_level1.csv")
    return parse_spectral_csv(Path(path).read_text("utf-8"), str(path))


# ---------------------------------------------------------------------------
# sums over the spectrum
# ---------------------------------------------------------------------------

@dataclass
class SpectrumSum:
    value: float
    terms: list
    partial: list


def discrete_spectrum_sum(data, T: float, xi: float, kappa_max: float) -> SpectrumSum:
    entries = list(data)
    if not entries:
        return SpectrumSum(0.0, [], [])
    top = max(d.kappa for d in entries)
    if kappa_max > top:
        raise SpectralDataError(f"kappa_max {kappa_max} beyond the data range {top}")
    terms, partial, acc = [], [], []
    for d in entries:
        if d.kappa > kappa_max:
            break
        t = d.weight * lambda_combination(d.kappa, T, xi).value
        terms.append(t)
        acc.append(t)
        partial.append(math.fsum(acc))
    return SpectrumSum(partial[-1] if partial else 0.0, terms, partial)


@dataclass
class Lemma3Check:
    K: float
    G: float
    window_sum: float
    majorant: float
    ratio: float
    count: int


def lemma3_partial_check(data, K: float, G: float, eps: float = 0.1) -> Lemma3Check:
    """Sum of weights over K-G <= kappa <= K+G against G K^(1+eps).

    The data are taken to be complete below their largest kappa.
    """
    entries = list(data)
    top = max((d.kappa for d in entries), default=0.0)
    if K + G > top:
        raise SpectralDataError(f"data end at kappa = {top}, window needs {K + G}")
    sel = [d.weight for d in entries if K - G <= d.kappa <= K + G]
    total = math.fsum(sel)
    maj = G * K ** (1 + eps)
    return Lemma3Check(K, G, total, maj, total / maj, len(sel))


# ---------------------------------------------------------------------------
# the mollified piece
# ---------------------------------------------------------------------------

def cutoff_sigma(x, X: float):
    """Smooth: 0 outside [X/2, 5X/2], 1 on [X, 2X]; derivatives O(X^-m)."""
    x = np.asarray(x, dtype=float)
    up = smooth_step((x - X / 2) / (X / 2))
    down = smooth_step((5 * X / 2 - x) / (X / 2))
    return up * down


def L_xi(x, kappa: float, xi: float, N: int = 3, fitted_c=None):
    """exp{-G^2 log^2(1+y0)/4 + i kappa log(kappa/(4e)) + i sum_l c_l kappa^l x^(1-l)}."""
    x = np.asarray(x, dtype=float)
    c = fitted_phase_constants(max(N, 3)) if fitted_c is None else tuple(fitted_c)
    G = x ** xi
    y0 = saddle_y0(x, kappa)
    expo = -0.25 * G * G * np.log1p(y0) ** 2 + 1j * kappa * math.log(kappa / (4 * math.e))
    for ell in range(3, N + 1):
        expo = expo + 1j * c[ell - 3] * kappa ** ell * x ** (1 - ell)
    return np.exp(expo)


def spectral_piece_integral(a: float, b: float, kappa: float, s: complex, xi: float = 0.5,
                            X: float | None = None, frozen: bool = False,
                            n_panels: int | None = None) -> complex:
    """int_a^b x^(-1/2 - i kappa - s) w(x) dx with w = sigma(x) L_xi(x, kappa),
    or w = 1 when ``frozen``."""
    s = complex(s)
    gx, gw = gauss_legendre(20)
    if n_panels is None:
        phase = (abs(kappa + s.imag) + kappa ** 3 / a ** 2 + 1) * math.log(b / a)
        n_panels = max(64, int(math.ceil(phase / 0.5)))
    edges = np.geomspace(a, b, n_panels + 1)
    lo, h = edges[:-1], np.diff(edges)
    x = (lo[:, None] + 0.5 * h[:, None] * (gx + 1)).ravel()
    w = (0.5 * h[:, None] * gw).ravel()
    f = np.exp((-0.5 - 1j * kappa - s) * np.log(x))
    if not frozen:
        f = f * cutoff_sigma(x, X) * L_xi(x, kappa, xi)
    return complex(np.sum(w * f))


def closed_form_piece(a: float, b: float, kappa: float, s: complex) -> complex:
    e = 0.5 - 1j * kappa - complex(s)
    return (np.exp(e * math.log(b)) - np.exp(e * math.log(a))) / e


@dataclass
class SpectralPiece:
    X: float
    xi: float
    s: complex
    value: complex
    terms: list


def mollified_spectral_piece(X: float, xi: float, s: complex, data) -> SpectralPiece:
    """sum_j w_j kappa_j^(-1/2) int_{X/2}^{5X/2} x^(-1/2-i kappa_j-s) sigma(x) L_xi(x, kappa_j) dx."""
    s = complex(s)
    if X < 100:
        raise ValueError("X must be >= 100")
    if not 0.5 < s.real <= 1:
        raise ValueError("need 1/2 < Re s <= 1")
    terms = []
    for d in data:
        integral = spectral_piece_integral(X / 2, 5 * X / 2, d.kappa, s, xi, X)
        terms.append(d.weight * d.kappa ** -0.5 * integral)
    return SpectralPiece(X, xi, s, complex(math.fsum(t.real for t in terms))
                         + 1j * math.fsum(t.imag for t in terms), terms)


# ---------------------------------------------------------------------------
# magnitude stubs for the remaining parts of the decomposition
# ---------------------------------------------------------------------------

def main_term_magnitude(T: float) -> dict:
    """Order of the explicit main term: log^4 T (not evaluated)."""
    return {"part": "main", "order": "log^4 T", "scale": math.log(T) ** 4, "evaluated": False}


def continuous_spectrum_magnitude(T: float, xi: float) -> dict:
    """The continuous-spectrum integral is not evaluated; only its class is reported."""
    return {"part": "continuous", "order": "small after integration by parts",
            "scale": math.log(T) ** 4, "evaluated": False}
