"""Evaluation of zeta(1/2 + it) and the persistent sample cache.

Two evaluation paths are used:

* Euler-Maclaurin summation with an explicit remainder bound, for small
  ordinates (and as the fallback wherever Riemann-Siegel cannot meet the
  accuracy target);
* the Riemann-Siegel formula for Hardy's Z-function with up to five
  correction terms C_0..C_4, for large ordinates.

Negative ordinates are never stored; callers pass ``|t|`` and conjugate.
"""

from __future__ import annotations

import hashlib
import logging
import math
import os
import struct
import tempfile
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import mpmath
import numpy as np
from numba import njit
from scipy.special import bernoulli

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

#: absolute accuracy promised by :func:`eval_zeta_half_line` in double mode
TARGET_ACCURACY = 1e-8

#: beyond this height Euler-Maclaurin is considered too expensive
EM_MAX_T = 2.0e4

# Upper bounds for the Riemann-Siegel remainder after K+1 correction terms,
# |R_K| <= d_K * tau**(-(2K+3)/4), tau = t/(2 pi) (Gabcke, t >= 200).
_RS_REMAINDER = (0.127, 0.053, 0.011, 0.031, 0.017)


class PrecisionError(RuntimeError):
    """The requested accuracy cannot be delivered under the given policy."""


@dataclass(frozen=True)
class PrecisionPolicy:
    mode: str = "double"
    rs_correction_terms: int = 4
    em_cutoff: float = 30.0

    def __post_init__(self):
        if self.mode not in ("double", "extended"):
            raise ValueError(f"unknown precision mode {self.mode!r}")
        if not 0 <= self.rs_correction_terms <= 4:
            raise ValueError("rs_correction_terms must lie in 0..4")
        if self.em_cutoff < 10:
            raise ValueError("em_cutoff must be >= 10")

    @property
    def rs_threshold(self) -> float:
        """Smallest ordinate at which the Riemann-Siegel path is trusted."""
        return max(self.em_cutoff, rs_min_height(self.rs_correction_terms))

    def key(self) -> str:
        return f"{self.mode}:{self.rs_correction_terms}:{self.em_cutoff!r}"


DEFAULT_POLICY = PrecisionPolicy()


def rs_min_height(terms: int, target: float = TARGET_ACCURACY) -> float:
    """Height above which the Riemann-Siegel remainder bound is below ``target``."""
    d = _RS_REMAINDER[terms]
    expo = (2 * terms + 3) / 4.0
    tau = (d / target) ** (1.0 / expo)
    return max(200.0, TWO_PI * tau)


@dataclass(frozen=True)
class CriticalSample:
    t: float
    zeta_re: float
    zeta_im: float

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("samples are stored for t >= 0 only")

    @property
    def value(self) -> complex:
        return complex(self.zeta_re, self.zeta_im)

    @property
    def abs2(self) -> float:
        return self.zeta_re * self.zeta_re + self.zeta_im * self.zeta_im


@dataclass
class SampleGrid:
    t0: float
    t1: float
    dt: float
    t: np.ndarray
    values: np.ndarray  # complex zeta(1/2 + i t)
    path: Path | None = field(default=None, compare=False)
    checksum: int = 0

    def __len__(self):
        return len(self.t)

    @property
    def samples(self) -> list[CriticalSample]:
        return [CriticalSample(float(t), float(z.real), float(z.imag))
                for t, z in zip(self.t, self.values)]

    def abs_power(self, k: int) -> np.ndarray:
        a2 = self.values.real ** 2 + self.values.imag ** 2
        return a2 ** k


# --------------------------------------------------------------------------
# Riemann-Siegel correction coefficients
# --------------------------------------------------------------------------

_PSI_DEGREE = 120
_CHEB_DEGREE = 60

# C_k = sum_j sign * Psi^{(m_j)}(p) / (denom * pi^(2j+2)); entries (m, sign, denom)
_CK_TERMS = (
    ((0, 1, 0),),
    ((3, -1, 96),),
    ((2, 1, 64), (6, 1, 18432)),
    ((1, -1, 64), (5, -1, 3840), (9, -1, 5308416)),
    ((0, 1, 128), (4, 19, 24576), (8, 11, 5898240), (12, 1, 2038431744)),
)


def _psi_taylor(dps: int = 150) -> list:
    """Taylor coefficients of Psi(1/2 + z) = -cos(2 pi z^2 - 5 pi/8) / cos(2 pi z)."""
    with mpmath.workdps(dps):
        a = 2 * mpmath.pi
        c5, s5 = mpmath.cos(5 * mpmath.pi / 8), mpmath.sin(5 * mpmath.pi / 8)
        num = [mpmath.mpf(0)] * (_PSI_DEGREE + 1)
        for n in range(_PSI_DEGREE // 4 + 1):
            if 4 * n <= _PSI_DEGREE:
                num[4 * n] += c5 * (-1) ** n * a ** (2 * n) / mpmath.factorial(2 * n)
            if 4 * n + 2 <= _PSI_DEGREE:
                num[4 * n + 2] += s5 * (-1) ** n * a ** (2 * n + 1) / mpmath.factorial(2 * n + 1)
        den = [mpmath.mpf(0)] * (_PSI_DEGREE + 1)
        for n in range(_PSI_DEGREE // 2 + 1):
            den[2 * n] = -(-1) ** n * a ** (2 * n) / mpmath.factorial(2 * n)
        coef = []
        for n in range(_PSI_DEGREE + 1):
            acc = num[n] - mpmath.fsum(den[i] * coef[n - i] for i in range(1, n + 1))
            coef.append(acc / den[0])
        return coef


@lru_cache(maxsize=1)
def rs_chebyshev_tables() -> tuple[np.ndarray, ...]:
    """Chebyshev coefficients of C_0..C_4 in x = 2p - 1 on [-1, 1]."""
    psi = _psi_taylor()
    with mpmath.workdps(40):
        pi2 = mpmath.pi ** 2
        derivs = {}
        for terms in _CK_TERMS:
            for m, _, _ in terms:
                # Taylor coefficients of Psi^{(m)} about p = 1/2, highest first
                derivs[m] = [psi[n] * mpmath.ff(n, m) for n in range(_PSI_DEGREE, m - 1, -1)]
        nodes = [mpmath.cos(mpmath.pi * (j + mpmath.mpf(1) / 2) / (_CHEB_DEGREE + 1))
                 for j in range(_CHEB_DEGREE + 1)]
        x = np.array([float(v) for v in nodes])
        tables = []
        for k, terms in enumerate(_CK_TERMS):
            vals = []
            for node in nodes:
                z = node / 2
                total = mpmath.mpf(0)
                for j, (m, sign, denom) in enumerate(terms):
                    deriv = mpmath.polyval(derivs[m], z)
                    total += deriv if k == 0 else sign * deriv / (denom * pi2 ** (j + 1))
                vals.append(float(total))
            tables.append(np.polynomial.chebyshev.chebfit(x, np.array(vals), _CHEB_DEGREE))
        return tuple(tables)


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------

@njit(cache=True)
def _rs_main_sum(t, theta, logn, rsqrtn):
    out = np.empty(t.shape[0])
    for i in range(t.shape[0]):
        ti = t[i]
        n_terms = int(math.sqrt(ti / (2.0 * math.pi)))
        acc = 0.0
        th = theta[i]
        for n in range(n_terms):
            acc += rsqrtn[n] * math.cos(th - ti * logn[n])
        out[i] = 2.0 * acc
    return out


def riemann_siegel_theta(t):
    """Asymptotic theta(t) for t >= ~10, accurate to ~1e-14 there."""
    t = np.asarray(t, dtype=float)
    r = 1.0 / t
    r2 = r * r
    return (0.5 * t * np.log(t / TWO_PI) - 0.5 * t - math.pi / 8
            + r * (1 / 48 + r2 * (7 / 5760 + r2 * (31 / 80640 + r2 * 127 / 430080))))


@lru_cache(maxsize=4)
def _rs_tables(n_max: int):
    n = np.arange(1, n_max + 1, dtype=float)
    return np.log(n), 1.0 / np.sqrt(n)


def hardy_z_rs(t, terms: int = 4) -> np.ndarray:
    """Hardy's Z(t) by Riemann-Siegel with correction terms C_0..C_terms."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.size == 0:
        return np.empty(0)
    tau = t / TWO_PI
    root = np.sqrt(tau)
    n = np.floor(root)
    p = root - n
    n_max = int(n.max()) + 1
    n_max = 1 << max(6, (n_max - 1).bit_length())
    logn, rsqrtn = _rs_tables(n_max)
    theta = riemann_siegel_theta(t)
    main = _rs_main_sum(t, theta, logn, rsqrtn)
    tables = rs_chebyshev_tables()
    x = 2.0 * p - 1.0
    corr = np.zeros_like(t)
    scale = 1.0 / root  # tau^{-1/2}
    powk = np.ones_like(t)
    for k in range(terms + 1):
        corr += np.polynomial.chebyshev.chebval(x, tables[k]) * powk
        powk = powk * scale
    sign = np.where(n.astype(np.int64) % 2 == 1, 1.0, -1.0)  # (-1)^(N-1)
    return main + sign * tau ** -0.25 * corr


@lru_cache(maxsize=1)
def _bernoulli_ratios(m: int = 40) -> np.ndarray:
    b = bernoulli(2 * m)
    return np.array([b[2 * j] / math.factorial(2 * j) for j in range(1, m + 1)])


def zeta_em(s, n_terms: int | None = None, m_terms: int = 30):
    """Euler-Maclaurin zeta(s) for an array of complex s with a remainder bound.

    Returns ``(values, bounds)``. ``n_terms`` defaults to a per-chunk choice
    that keeps the Bernoulli series geometrically convergent.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    out = np.empty_like(s)
    bound = np.empty(s.shape, dtype=float)
    order = np.argsort(np.abs(s.imag))
    ratios = _bernoulli_ratios(m_terms + 1)
    chunk = 256
    for start in range(0, s.size, chunk):
        idx = order[start:start + chunk]
        ss = s[idx]
        big = float(np.max(np.abs(ss)))
        n = n_terms or int(max(10, math.ceil(big / math.pi) + 10))
        nn = np.arange(1, n, dtype=float)
        logs = np.log(nn)
        head = np.exp(-np.outer(ss, logs)).sum(axis=1)
        ln = math.log(n)
        nms = np.exp(-ss * ln)  # N^{-s}
        acc = head + n * nms / (ss - 1) + 0.5 * nms
        poch = ss.copy()  # s(s+1)...(s+2j-2)
        npow = nms / n  # N^{-s-1}
        term = np.zeros_like(ss)
        for j in range(1, m_terms + 1):
            term = ratios[j - 1] * poch * npow
            acc += term
            poch = poch * (ss + 2 * j - 1) * (ss + 2 * j)
            npow = npow / (n * n)
        nxt = ratios[m_terms] * poch * npow
        sig = ss.real
        out[idx] = acc
        bound[idx] = np.abs(nxt) * np.abs(ss + 2 * m_terms + 1) / (sig + 2 * m_terms + 1)
    return out, bound


# --------------------------------------------------------------------------
# public evaluation API
# --------------------------------------------------------------------------

def _zeta_extended(t: np.ndarray) -> np.ndarray:
    with mpmath.workdps(30):
        return np.array([complex(mpmath.zeta(mpmath.mpc(0.5, float(x)))) for x in t])


def eval_zeta_half_line(t, policy: PrecisionPolicy = DEFAULT_POLICY):
    """zeta(1/2 + i t) for scalar or array ``t >= 0``."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("eval_zeta_half_line needs finite t >= 0")
    if policy.mode == "extended":
        out = _zeta_extended(t)
        return out[0] if scalar else out
    out = np.empty(t.shape, dtype=complex)
    t_rs = policy.rs_threshold
    use_rs = t >= t_rs
    use_em = ~use_rs
    if np.any(use_em & (t > EM_MAX_T)):
        worst = float(t[use_em & (t > EM_MAX_T)].max())
        raise PrecisionError(
            f"t={worst:g} needs Euler-Maclaurin (Riemann-Siegel with "
            f"{policy.rs_correction_terms} corrections is only reliable above {t_rs:.4g})")
    if np.any(use_em):
        vals, _ = zeta_em(0.5 + 1j * t[use_em])
        out[use_em] = vals
    if np.any(use_rs):
        tt = t[use_rs]
        z = hardy_z_rs(tt, policy.rs_correction_terms)
        out[use_rs] = z * np.exp(-1j * riemann_siegel_theta(tt))
    return out[0] if scalar else out


def eval_abs_power(t, k: int, policy: PrecisionPolicy = DEFAULT_POLICY):
    """|zeta(1/2 + it)|^(2k) for 1 <= k <= 6."""
    if not 1 <= k <= 6:
        raise ValueError("k must lie in 1..6")
    z = eval_zeta_half_line(t, policy)
    return (z.real ** 2 + z.imag ** 2) ** k


def hardy_z(t, policy: PrecisionPolicy = DEFAULT_POLICY):
    """Hardy's Z(t) = exp(i theta(t)) zeta(1/2 + it), real for real t."""
    t = np.asarray(t, dtype=float)
    z = eval_zeta_half_line(np.abs(t), policy)
    theta = np.asarray(mp_theta(np.abs(t)))
    return (np.exp(1j * theta) * z).real


def mp_theta(t):
    """Riemann-Siegel theta valid for all t >= 0 (exact log-gamma below 30)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    small = t < 30
    if np.any(small):
        from scipy.special import loggamma
        ts = t[small]
        out[small] = np.imag(loggamma(0.25 + 0.5j * ts)) - 0.5 * ts * math.log(math.pi)
    if np.any(~small):
        out[~small] = riemann_siegel_theta(t[~small])
    return out


# --------------------------------------------------------------------------
# cache
# --------------------------------------------------------------------------

MAGIC = b"ZMC1"
_HEADER = struct.Struct("<dddq")
_RECORD = np.dtype([("t", "<f8"), ("re", "<f8"), ("im", "<f8")])
_write_locks: dict[str, threading.Lock] = {}
_locks_guard = threading.Lock()


class CacheError(ValueError):
    pass


def default_cache_dir() -> Path:
    return Path(os.environ.get("ZETAMELLIN_CACHE", Path.home() / ".cache" / "zetamellin"))


def payload_checksum(payload: bytes) -> int:
    """64-bit checksum (BLAKE2b, 8-byte digest, little-endian) of header + records."""
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def encode_grid(t0: float, t1: float, dt: float, t: np.ndarray, values: np.ndarray) -> bytes:
    rec = np.empty(len(t), dtype=_RECORD)
    rec["t"], rec["re"], rec["im"] = t, values.real, values.imag
    payload = _HEADER.pack(t0, t1, dt, len(t)) + rec.tobytes()
    return MAGIC + payload + struct.pack("<Q", payload_checksum(payload))


def decode_grid(blob: bytes):
    if len(blob) < 4 + _HEADER.size + 8 or blob[:4] != MAGIC:
        raise CacheError("bad magic")
    payload, tail = blob[4:-8], blob[-8:]
    if struct.unpack("<Q", tail)[0] != payload_checksum(payload):
        raise CacheError("checksum mismatch")
    t0, t1, dt, count = _HEADER.unpack_from(payload)
    rec = np.frombuffer(payload, dtype=_RECORD, offset=_HEADER.size)
    if len(rec) != count:
        raise CacheError("record count mismatch")
    values = rec["re"] + 1j * rec["im"]
    return t0, t1, dt, rec["t"].copy(), values, struct.unpack("<Q", tail)[0]


def grid_count(t0: float, t1: float, dt: float) -> int:
    span = (t1 - t0) / dt
    n = int(round(span))
    if abs(span - n) > 1e-9 * max(1.0, span):
        raise ValueError("t1 - t0 must be an integer multiple of dt")
    return n + 1


def _cache_path(cache_dir: Path, t0, t1, dt, policy: PrecisionPolicy) -> Path:
    key = f"{t0!r}|{t1!r}|{dt!r}|{policy.key()}".encode()
    return Path(cache_dir) / f"grid_{hashlib.blake2b(key, digest_size=10).hexdigest()}.zmc"


def _lock_for(path: Path) -> threading.Lock:
    with _locks_guard:
        return _write_locks.setdefault(str(path), threading.Lock())


def build_grid(t0: float, t1: float, dt: float,
               policy: PrecisionPolicy = DEFAULT_POLICY,
               cache_dir: str | os.PathLike | None = None) -> SampleGrid:
    """Uniform sample grid on [t0, t1], persisted in the ZMC1 binary format."""
    if not (0 <= t0 < t1):
        raise ValueError("need 0 <= t0 < t1")
    if not (0 < dt <= 0.25):
        raise ValueError("need 0 < dt <= 0.25")
    n = grid_count(t0, t1, dt)
    cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    path = _cache_path(cache_dir, t0, t1, dt, policy)
    if path.exists():
        try:
            g = decode_grid(path.read_bytes())
            if g[3].size == n and g[0] == t0 and g[2] == dt:
                return SampleGrid(t0, t1, dt, g[3], g[4], path=path, checksum=g[5])
            logger.warning("cache %s does not match request, recomputing", path)
        except CacheError as exc:
            logger.warning("corrupt cache %s (%s), recomputing", path, exc)
    t = t0 + dt * np.arange(n)
    t[-1] = t1
    values = eval_zeta_half_line(t, policy)
    blob = encode_grid(t0, t1, dt, t, values)
    cache_dir.mkdir(parents=True, exist_ok=True)
    with _lock_for(path):
        fd, tmp = tempfile.mkstemp(dir=cache_dir, prefix=".zmc-")
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    checksum = struct.unpack("<Q", blob[-8:])[0]
    return SampleGrid(t0, t1, dt, t, values, path=path, checksum=checksum)
