"""Gauss-Kronrod panel tables for integrals of |zeta(1/2+it)|^(2k).

The critical line is cut into panels ``[i*h, (i+1)*h]``; on every panel
zeta is sampled once at the 15 Kronrod nodes.  From those samples we get

* panel integrals (Kronrod 15) with a Gauss 7 error estimate,
* a degree-14 interpolant of ``|zeta|^(2k)`` per panel (Legendre basis), and
* the running integral ``I_k(x) = int_0^x |zeta|^(2k)`` at arbitrary x.

Everything above the panels (moments, Mellin transforms, smoothing) is
built from these samples, so zeta is evaluated once per node and height.
"""

from __future__ import annotations

import hashlib
import logging
import math
import os
import threading
from pathlib import Path

import numpy as np
from numpy.polynomial import legendre

from .zeta_core import DEFAULT_POLICY, PrecisionPolicy, default_cache_dir, eval_zeta_half_line

logger = logging.getLogger(__name__)

# QUADPACK qk15 abscissae / weights
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS7_WEIGHTS = np.zeros(15)
# Gauss nodes sit at odd positions of the symmetric Kronrod ordering
GAUSS7_WEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])

# Legendre coefficients of the interpolant from values at the Kronrod nodes
_VANDER = legendre.legvander(KRONROD_NODES, 14)
_TO_LEGENDRE = np.linalg.inv(_VANDER)


def _legendre_antiderivative_matrix(deg: int = 14) -> np.ndarray:
    """Matrix A with antiderivative coefficients (from -1) = A @ coefficients."""
    a = np.zeros((deg + 2, deg + 1))
    for j in range(deg + 1):
        e = np.zeros(deg + 1)
        e[j] = 1.0
        a[:, j] = legendre.legint(e, lbnd=-1)
    return a


_ANTIDERIV = _legendre_antiderivative_matrix()
_CHUNK = 200_000


def gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def neumaier_cumsum(values: np.ndarray) -> np.ndarray:
    """Running sums with extended-precision accumulation, prefixed by 0."""
    acc = np.cumsum(values.astype(np.longdouble))
    return np.concatenate([[0.0], acc.astype(float)])


def compensated_sum(values) -> float:
    return math.fsum(np.ravel(values).tolist())


def quadpack_error(resk: np.ndarray, resg: np.ndarray, resasc: np.ndarray) -> np.ndarray:
    """QUADPACK's scaled |K15 - G7| error estimate (per panel)."""
    diff = np.abs(resk - resg)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(resasc > 0, resasc * np.minimum(1.0, (200.0 * diff / resasc) ** 1.5), diff)
    return np.maximum(scaled, 50 * np.finfo(float).eps * np.abs(resk))


class BudgetExceeded(RuntimeError):
    """Adaptive refinement could not reach the tolerance within the node budget."""


class PanelTable:
    """Kronrod-node samples of |zeta(1/2+it)|^2 on panels of width ``h`` from 0.

    Tables grow on demand.  When ``cache_dir`` is given the samples are kept
    in a ``.npz`` file keyed by ``h`` and the precision policy.
    """

    def __init__(self, h: float = 0.25, policy: PrecisionPolicy = DEFAULT_POLICY,
                 cache_dir: str | os.PathLike | None = None):
        self.h = float(h)
        self.policy = policy
        self.cache_dir = Path(cache_dir) if cache_dir is not None else None
        self._abs2 = np.empty((0, 15))
        self._lock = threading.Lock()
        self._derived: dict = {}
        self.evaluations = 0
        if self.cache_dir is not None:
            self._load()

    # -- storage ---------------------------------------------------------
    @property
    def path(self) -> Path | None:
        if self.cache_dir is None:
            return None
        key = f"{self.h!r}|{self.policy.key()}".encode()
        return self.cache_dir / f"panels_{hashlib.blake2b(key, digest_size=8).hexdigest()}.npz"

    def _load(self):
        path = self.path
        if path is None or not path.exists():
            return
        try:
            with np.load(path) as data:
                if float(data["h"]) == self.h:
                    self._abs2 = data["abs2"]
        except (OSError, KeyError, ValueError) as exc:
            logger.warning("ignoring unreadable panel cache %s: %s", path, exc)

    def _save(self):
        path = self.path
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, h=self.h, abs2=self._abs2)
        os.replace(tmp, path)

    # -- growth ------------------------------------------------------------
    @property
    def n_panels(self) -> int:
        return self._abs2.shape[0]

    @property
    def t_max(self) -> float:
        return self.n_panels * self.h

    def nodes(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        stop = self.n_panels if stop is None else stop
        a = self.h * np.arange(start, stop)[:, None]
        return a + 0.5 * self.h * (KRONROD_NODES[None, :] + 1.0)

    def ensure(self, t: float):
        """Make sure panels cover [0, t]."""
        need = int(math.ceil(t / self.h - 1e-12))
        if need <= self.n_panels:
            return
        with self._lock:
            if need <= self.n_panels:
                return
            # grow geometrically so repeated small extensions stay cheap
            need = max(need, min(int(self.n_panels * 1.25), need + 40000))
            start = self.n_panels
            tt = self.nodes(start, need)
            z = eval_zeta_half_line(tt.ravel(), self.policy)
            self.evaluations += tt.size
            new = (z.real ** 2 + z.imag ** 2).reshape(tt.shape)
            self._abs2 = np.vstack([self._abs2, new])
            self._derived.clear()
            self._save()

    # -- derived quantities ---------------------------------------------
    def values(self, k: int) -> np.ndarray:
        """|zeta|^(2k) at the Kronrod nodes, shape (n_panels, 15)."""
        key = ("values", k)
        if key not in self._derived:
            self._derived[key] = self._abs2 ** k
        return self._derived[key]

    def panel_integrals(self, k: int):
        """(Kronrod integrals, error estimates) per panel."""
        key = ("pint", k)
        if key not in self._derived:
            f = self.values(k)
            half = 0.5 * self.h
            resk = half * f @ KRONROD_WEIGHTS
            resg = half * f @ GAUSS7_WEIGHTS
            mean = resk / self.h
            resasc = half * np.abs(f - mean[:, None]) @ KRONROD_WEIGHTS
            self._derived[key] = (resk, quadpack_error(resk, resg, resasc))
        return self._derived[key]

    def cumulative(self, k: int) -> np.ndarray:
        """I_k at panel boundaries 0, h, 2h, ... (length n_panels + 1)."""
        key = ("cum", k)
        if key not in self._derived:
            self._derived[key] = neumaier_cumsum(self.panel_integrals(k)[0])
        return self._derived[key]

    def legendre_coefficients(self, k: int) -> np.ndarray:
        key = ("leg", k)
        if key not in self._derived:
            self._derived[key] = self.values(k) @ _TO_LEGENDRE.T
        return self._derived[key]

    def _locate(self, x: np.ndarray):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise ValueError("panel tables live on t >= 0")
        self.ensure(float(np.max(x)) if x.size else 0.0)
        idx = np.minimum((x / self.h).astype(np.int64), self.n_panels - 1)
        u = 2.0 * (x - idx * self.h) / self.h - 1.0
        return idx, np.clip(u, -1.0, 1.0)

    def interpolate(self, x, k: int) -> np.ndarray:
        """Degree-14 panel interpolant of |zeta(1/2+ix)|^(2k)."""
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.shape)
        if flat.size:
            self.ensure(float(flat.max()))
        for lo in range(0, flat.size, _CHUNK):
            idx, u = self._locate(flat[lo:lo + _CHUNK])
            coef_all = self.legendre_coefficients(k)
            basis = legendre.legvander(u, 14)
            out[lo:lo + _CHUNK] = np.einsum("ij,ij->i", coef_all[idx], basis)
        return out.reshape(x.shape)

    def integral_to(self, x, k: int) -> np.ndarray:
        """I_k(x) = int_0^x |zeta(1/2+it)|^(2k) dt at arbitrary points."""
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.shape)
        if flat.size:
            self.ensure(float(flat.max()))
        for lo in range(0, flat.size, _CHUNK):
            idx, u = self._locate(flat[lo:lo + _CHUNK])
            cum = self.cumulative(k)
            coef = self.legendre_coefficients(k)[idx] @ _ANTIDERIV.T
            basis = legendre.legvander(u, 15)
            out[lo:lo + _CHUNK] = cum[idx] + 0.5 * self.h * np.einsum("ij,ij->i", coef, basis)
        return out.reshape(x.shape)

    def integral_range(self, a: float, b: float, k: int):
        """(int_a^b |zeta|^(2k), error estimate) for 0 <= a <= b."""
        if b < a:
            raise ValueError("need a <= b")
        val = self.integral_to(np.array([a, b]), k)
        i0 = int(a / self.h)
        i1 = min(int(math.ceil(b / self.h)), self.n_panels)
        err = compensated_sum(self.panel_integrals(k)[1][i0:i1]) if i1 > i0 else 0.0
        return float(val[1] - val[0]), err


_SHARED: dict = {}
_SHARED_LOCK = threading.Lock()


def shared_table(h: float = 0.25, policy: PrecisionPolicy = DEFAULT_POLICY,
                 cache_dir: str | os.PathLike | None = None) -> PanelTable:
    """Process-wide table per (h, policy, cache_dir).

    Without an explicit ``cache_dir`` the default cache directory is used
    (``$ZETAMELLIN_CACHE``; set it to an empty string to disable persistence).
    """
    if cache_dir is None:
        env = os.environ.get("ZETAMELLIN_CACHE")
        cache_dir = default_cache_dir() if env != "" else None
    key = (h, policy, str(cache_dir) if cache_dir is not None else None)
    with _SHARED_LOCK:
        if key not in _SHARED:
            _SHARED[key] = PanelTable(h, policy, cache_dir)
        return _SHARED[key]


def oscillation_nodes(x_lo: float, x_hi: float, t_max: float, h: float = 0.25,
                      max_phase: float = 1.5, n_gauss: int = 15):
    """Nodes/weights on [x_lo, x_hi] for integrands g(x) x^(-s), |Im s| <= t_max.

    Panels are aligned with the width-``h`` table panels; a panel is split
    further when the phase of ``x^(-it)`` would turn by more than
    ``max_phase`` across a sub-panel.  Returns ``(x, w)``.
    """
    if x_hi <= x_lo:
        return np.empty(0), np.empty(0)
    gx, gw = gauss_legendre(n_gauss)
    edges = [x_lo]
    k0 = int(math.floor(x_lo / h)) + 1
    k1 = int(math.ceil(x_hi / h)) - 1
    if k1 >= k0:
        edges.extend((h * np.arange(k0, k1 + 1)).tolist())
    edges.append(x_hi)
    edges = np.unique(np.asarray(edges))
    a, b = edges[:-1], edges[1:]
    width = b - a
    pieces = np.maximum(1, np.ceil(t_max * width / (a * max_phase))).astype(np.int64)
    lo = np.repeat(a, pieces)
    step = np.repeat(width / pieces, pieces)
    offsets = np.concatenate([np.arange(p) for p in pieces]) if len(pieces) else np.empty(0)
    sub_a = lo + offsets * step
    x = sub_a[:, None] + 0.5 * step[:, None] * (gx[None, :] + 1.0)
    w = 0.5 * step[:, None] * gw[None, :]
    return x.ravel(), w.ravel()
