"""Short-interval moments over well-spaced points.

L_k(t, G) = int_{t-G}^{t+G} |zeta(1/2+iu)|^(2k) du, large-value measures,
the five-class split of a G-spaced set, the dyadic bookkeeping behind the
sum bound sum_r L_k(t_r, G) << (RG)^(1-1/m) T^(1/m+eps), and the smooth
cutoff functions used when integrating the inverse Mellin formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .quadrature import PanelTable, gauss_legendre, shared_table
from .zeta_core import eval_abs_power

DEFAULT_EPS = 0.1


class SpacingError(ValueError):
    """Consecutive points closer than the declared gap."""


@dataclass
class WellSpacedSet:
    T: float
    G: float
    points: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 1:
            raise ValueError("points must be one-dimensional")
        if self.points.size and np.any(np.diff(self.points) < self.G * (1 - 1e-12)):
            raise SpacingError(f"consecutive gaps must be >= G = {self.G}")

    def __len__(self):
        return int(self.points.size)

    @property
    def R(self) -> int:
        return len(self)

    def check_range(self, eps: float = DEFAULT_EPS) -> bool:
        """Points in (T, 2T) and T^eps <= G <= T^(1-eps)."""
        inside = bool(np.all((self.points > self.T) & (self.points < 2 * self.T)))
        return inside and self.T ** eps <= self.G <= self.T ** (1 - eps)


# ---------------------------------------------------------------------------
# interval moments and large-value measure
# ---------------------------------------------------------------------------

def interval_moments(t, G: float, k: int, table: PanelTable | None = None) -> np.ndarray:
    """Vectorised L_k(t, G) from the cumulative moment table."""
    t = np.asarray(t, dtype=float)
    if G < 0:
        raise ValueError("G must be non-negative")
    if np.any(t - G < 0):
        raise ValueError("need t - G >= 0")
    if G == 0:
        return np.zeros(t.shape)
    table = table or shared_table()
    lo = table.integral_to(t - G, k)
    hi = table.integral_to(t + G, k)
    return np.maximum(hi - lo, 0.0)


def interval_moment(t: float, G: float, k: int, table: PanelTable | None = None) -> float:
    if G == 0:
        return 0.0
    if t - G < 0:
        raise ValueError("need t - G >= 0")
    table = table or shared_table()
    value, _ = table.integral_range(t - G, t + G, k)
    return max(float(value), 0.0)


@dataclass
class MeasureEstimate:
    measure: float
    uncertainty: float
    crossings: int
    mesh: float


def measure_large_values(T: float, G: float, k: int, U: float, mesh: float | None = None,
                         window: float | None = None,
                         table: PanelTable | None = None) -> MeasureEstimate:
    """mu{t in [T, 2T] : L_k(t, window) >= G U}, by midpoint cells.

    ``window`` defaults to G; the counting argument uses window = 2G.
    Each sign change of L - GU between neighbouring cells can misplace at most
    two half-cells, hence the uncertainty 2 * mesh * crossings.
    """
    mesh = G / 8 if mesh is None else mesh
    if mesh <= 0 or mesh > G / 4 + 1e-15:
        raise ValueError("need 0 < mesh <= G/4")
    window = G if window is None else window
    n = int(math.ceil(T / mesh))
    cell = T / n
    mid = T + cell * (np.arange(n) + 0.5)
    L = interval_moments(mid, window, k, table)
    above = L >= G * U
    crossings = int(np.count_nonzero(above[1:] != above[:-1]))
    return MeasureEstimate(float(cell * np.count_nonzero(above)), 2 * cell * crossings, crossings, cell)


def count_large(points: WellSpacedSet, k: int, U: float, table: PanelTable | None = None) -> int:
    """#{r : L_k(t_r, G) > G U}."""
    if not len(points):
        return 0
    L = interval_moments(points.points, points.G, k, table)
    return int(np.count_nonzero(L > points.G * U))


# ---------------------------------------------------------------------------
# five-class split and dyadic bookkeeping
# ---------------------------------------------------------------------------

def five_split(points: WellSpacedSet) -> list[np.ndarray]:
    """Round-robin classes by index; inside a class the gaps are >= 5G."""
    p = points.points
    if p.size and np.any(np.diff(p) < points.G * (1 - 1e-12)):
        raise SpacingError("input is not G-spaced")
    classes = [p[i::5] for i in range(min(5, p.size))]
    return classes


def supports_disjoint(centers: np.ndarray, G: float) -> bool:
    """Supports [c-2G, c+2G] pairwise disjoint (up to touching endpoints)."""
    c = np.sort(np.asarray(centers, dtype=float))
    return bool(np.all(np.diff(c) >= 4 * G * (1 - 1e-12)))


@dataclass
class DyadicLevel:
    lower: float        # level holds L with lower < L <= 2 * lower
    count: int
    total: float


@dataclass
class DyadicReport:
    T: float
    G: float
    R: int
    k: int
    m: int
    eps: float
    L: np.ndarray
    actual: float
    U0: float
    piece_small: float       # G R U0
    piece_large: float       # T^(1+eps) U0^(1-m)
    theoretical: float       # (RG)^((m-1)/m) T^(1/m + eps)
    ratio: float             # actual / theoretical
    levels: list = field(default_factory=list)

    def level_total(self) -> float:
        return math.fsum(v for lvl in self.levels for v in [lvl.total])

    def as_dict(self) -> dict:
        return {
            "T": self.T, "G": self.G, "R": self.R, "k": self.k, "m": self.m, "eps": self.eps,
            "actual": self.actual, "U0": self.U0, "GRU0": self.piece_small,
            "T^(1+eps)U0^(1-m)": self.piece_large, "theoretical": self.theoretical,
            "C": self.ratio,
            "levels": [{"lower": l.lower, "count": l.count, "sum": l.total} for l in self.levels],
        }


def dyadic_levels(L: np.ndarray) -> list[DyadicLevel]:
    """Partition positive values into (b 2^j, b 2^(j+1)] with b = min(L)/2."""
    L = np.asarray(L, dtype=float)
    if not L.size:
        return []
    base = float(L.min()) / 2
    if base <= 0:
        raise ValueError("L values must be positive")
    j = np.ceil(np.log2(L / base)).astype(int) - 1
    # guard the boundaries against rounding in log2
    j = np.where(L <= base * 2.0 ** j, j - 1, j)
    j = np.where(L > base * 2.0 ** (j + 1), j + 1, j)
    levels = []
    for level in range(int(j.min()), int(j.max()) + 1):
        sel = L[j == level]
        if sel.size:
            levels.append(DyadicLevel(base * 2.0 ** level, int(sel.size), math.fsum(sel)))
    return levels


def dyadic_sum_bound(points: WellSpacedSet, k: int, m: int, eps: float = DEFAULT_EPS,
                     table: PanelTable | None = None, L=None) -> DyadicReport:
    """Compare sum_r L_k(t_r, G) with (RG)^(1-1/m) T^(1/m+eps).

    ``L`` overrides the computed interval moments (synthetic data).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    T, G, R = points.T, points.G, points.R
    if R == 0:
        return DyadicReport(T, G, 0, k, m, eps, np.empty(0), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, [])
    if L is None:
        L = interval_moments(points.points, G, k, table)
    L = np.asarray(L, dtype=float)
    actual = math.fsum(L)
    U0 = (T / (R * G)) ** (1.0 / m)
    small = G * R * U0
    large = T ** (1 + eps) * U0 ** (1 - m)
    theo = (R * G) ** ((m - 1) / m) * T ** (1.0 / m + eps)
    return DyadicReport(T, G, R, k, m, eps, L, actual, U0, small, large, theo,
                        actual / theo, dyadic_levels(L))


def random_spaced_set(rng: np.random.Generator, T: float, G: float, R: int) -> WellSpacedSet:
    """R points in (T, 2T) with gaps >= G (uniform slack distribution)."""
    room = T - (R - 1) * G
    if room <= 0:
        raise ValueError("too many points for the interval")
    offsets = np.sort(rng.uniform(0, room, R))
    pts = T + offsets + G * np.arange(R)
    pts = np.clip(pts, np.nextafter(T, 2 * T), np.nextafter(2 * T, T))
    return WellSpacedSet(T, G, pts)


def corollary_exponent(m: int, alpha: float) -> float:
    """Exponent 1 + (m-1) alpha of the 2km-th moment bound."""
    return 1 + (m - 1) * alpha


# ---------------------------------------------------------------------------
# large-value points
# ---------------------------------------------------------------------------

@dataclass
class LargeValueSelection:
    T: float
    V: float
    k: int
    points: np.ndarray
    abs_zeta: np.ndarray
    local: np.ndarray        # L_k(tau, 1/3)
    C: float                 # max V^(2k) / (log T * local)

    @property
    def S(self) -> int:
        return int(self.points.size)


def large_value_points(T: float, V: float, k: int = 1, per_unit: int = 64,
                       table: PanelTable | None = None) -> LargeValueSelection:
    """Greedy left-to-right choice of 1-spaced tau in [T, 2T) with |zeta| >= V."""
    if V < 0:
        raise ValueError("V must be non-negative")
    n = int(round(T * per_unit))
    t = T + np.arange(n) / per_unit
    absz = np.sqrt(eval_abs_power(t, 1))
    chosen = []
    last = -math.inf
    for i in np.flatnonzero(absz >= V):
        if t[i] - last >= 1 - 1e-12:
            chosen.append(i)
            last = t[i]
    idx = np.asarray(chosen, dtype=int)
    pts = t[idx]
    if not pts.size:
        return LargeValueSelection(T, V, k, pts, np.empty(0), np.empty(0), 0.0)
    local = interval_moments(pts, 1.0 / 3.0, k, table)
    C = float(np.max(V ** (2 * k) / (math.log(T) * local)))
    return LargeValueSelection(T, V, k, pts, absz[idx], local, C)


# ---------------------------------------------------------------------------
# smooth cutoff
# ---------------------------------------------------------------------------

_GL_X, _GL_W = gauss_legendre(60)


def _bump(v):
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    m = (v > 0) & (v < 1)
    z = 2 * v[m] - 1
    out[m] = np.exp(-1.0 / (1.0 - z * z))
    return out


def _bump_partial(u):
    """int_0^u bump(v) dv for 0 <= u <= 1/2."""
    u = np.asarray(u, dtype=float)
    nodes = 0.5 * u[..., None] * (_GL_X + 1.0)
    return 0.5 * u * (_bump(nodes) @ _GL_W)


_BUMP_HALF = float(_bump_partial(np.array(0.5)))


def smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    out = np.atleast_1d(u >= 0.5).astype(float)
    inner = (u > 0) & (u < 1)
    ui = np.atleast_1d(u)[inner]
    low = ui <= 0.5
    part = _bump_partial(np.where(low, ui, 1.0 - ui)) / (2 * _BUMP_HALF)
    out[inner] = np.where(low, part, 1.0 - part)
    return out.reshape(u.shape) if u.ndim else float(out[0])


def smooth_step_slope(u):
    """S'(u), the normalized bump."""
    return _bump(u) / (2 * _BUMP_HALF)


@lru_cache(maxsize=None)
def step_derivative_constant(m: int) -> float:
    """max |S^(m)| of the smooth step on [0, 1] (m >= 1)."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return 1.0
    with mpmath.workdps(30):
        norm = 2 * mpmath.quad(lambda v: mpmath.exp(-1 / (1 - (2 * v - 1) ** 2)), [0, 0.5])

        def b(v):
            return mpmath.exp(-1 / (1 - (2 * v - 1) ** 2))
        grid = [mpmath.mpf(i) / 400 for i in range(1, 400)]
        peak = max(abs(mpmath.diff(b, v, m - 1)) for v in grid)
        return float(peak / norm)


@dataclass
class Mollifier:
    """phi = 1 on [c-G, c+G], supported in [c-2G, c+2G]; |phi^(m)| <= C_m G^(-m)."""

    center: float
    G: float
    M: int = 6

    def __post_init__(self):
        if self.G <= 0:
            raise ValueError("G must be positive")

    @property
    def support(self):
        return self.center - 2 * self.G, self.center + 2 * self.G

    def derivative_constant(self, m: int) -> float:
        if m > self.M:
            raise ValueError(f"m exceeds the smoothness cap {self.M}")
        return step_derivative_constant(m)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        d = np.abs(x - self.center)
        return smooth_step((2 * self.G - d) / self.G)


@dataclass
class DecayCheck:
    exact: complex
    bound: float
    ratio: float
    negligible_height: float


def mollifier_integral(phi: Mollifier, s: complex, n_panels: int | None = None) -> complex:
    """int phi(x) x^(s-1) dx over the support (Gauss panels, phase-resolved)."""
    a, b = phi.support
    a = max(a, 1e-300)
    if n_panels is None:
        phase = abs(s.imag) * (b - a) / a
        n_panels = max(64, int(math.ceil(phase / 0.5)) * 4)
    gx, gw = gauss_legendre(20)
    edges = np.linspace(a, b, n_panels + 1)
    lo, h = edges[:-1], np.diff(edges)
    x = (lo[:, None] + 0.5 * h[:, None] * (gx + 1)).ravel()
    w = (0.5 * h[:, None] * gw).ravel()
    return complex(np.sum(w * phi(x) * np.exp((s - 1) * np.log(x))))


def mollifier_decay_check(phi: Mollifier, s: complex, m: int, T: float | None = None,
                          eps: float = DEFAULT_EPS) -> DecayCheck:
    """Exact transform of phi against T^(sigma+m-1) / (G^m (1+|t|)^m).

    T defaults to the centre of the cutoff (the scale of x on its support).
    """
    if m > phi.M:
        raise ValueError(f"m exceeds the smoothness cap {phi.M}")
    s = complex(s)
    T = phi.center if T is None else T
    exact = mollifier_integral(phi, s)
    bound = T ** (s.real + m - 1) / (phi.G ** m * (1 + abs(s.imag)) ** m)
    return DecayCheck(exact, bound, abs(exact) / bound, T ** (1 + eps) / phi.G)
