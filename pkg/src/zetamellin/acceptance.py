"""Acceptance suite: ten numbered checks, each returning a CriterionResult.

Every check runs at its stated tolerance.  A check that fails records the
measured numbers so the report can be read without rerunning anything.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from scipy.optimize import brentq

from . import mellin_lab as ml
from . import moment_engine as me
from . import short_interval as si
from . import smoothed_mellin as sm
from . import spectral as sp
from .zeta_core import eval_zeta_half_line, hardy_z

SLOW = {3, 4, 6, 8, 10}


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    checks: dict = field(default_factory=dict)
    elapsed: float = 0.0
    note: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d} {self.title} ({self.elapsed:.1f} s)"

    def as_dict(self) -> dict:
        return _plain(asdict(self))


def _plain(obj):
    """JSON-safe copy: numpy scalars/arrays become Python numbers/lists."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def _check(value, ok) -> dict:
    return {"value": value, "ok": bool(ok)}


def _finish(number, title, checks, t0, note="") -> CriterionResult:
    passed = all(c["ok"] for c in checks.values())
    return CriterionResult(number, title, passed, checks, time.perf_counter() - t0, note)


# ---------------------------------------------------------------------------

def criterion_1() -> CriterionResult:
    t0 = time.perf_counter()
    ours = abs(complex(eval_zeta_half_line(np.array([0.0]))[0]))
    oracle = abs(float(mpmath.zeta(0.5)))
    checks = {"abs_zeta_half": _check([ours, oracle], abs(ours - oracle) <= 1e-5)}
    for n, (a, b) in enumerate([(14.0, 14.5), (20.8, 21.2), (24.8, 25.2)], start=1):
        root = brentq(lambda t: float(hardy_z(np.array([t]))[0]), a, b, xtol=1e-12)
        ref = float(mpmath.zetazero(n).imag)
        checks[f"zero_{n}"] = _check([root, ref], abs(root - ref) <= 1e-5)
    elapsed = time.perf_counter() - t0
    checks["runtime_s"] = _check(elapsed, elapsed < 1.0)
    return _finish(1, "zeta oracle", checks, t0)


def criterion_2() -> CriterionResult:
    t0 = time.perf_counter()
    c1 = me.rmt_constants(1, 10_000)
    c2 = me.rmt_constants(2, 10_000)
    target = 1 / (2 * math.pi ** 2)
    # a_2 telescopes to prod (1 - p^-2) = 1/zeta(2)
    checks = {
        "c1": _check(c1.c_k, abs(c1.c_k - 1) <= 1e-4),
        "c2": _check(c2.c_k, abs(c2.c_k - target) <= 1e-4),
        "a2_vs_inv_zeta2": _check([c2.a_k, 6 / math.pi ** 2], abs(c2.a_k - 6 / math.pi ** 2) <= 1e-4),
        "g3": _check(str(me.g_factor(3)), me.g_factor(3) == Fraction(42)),
    }
    elapsed = time.perf_counter() - t0
    checks["runtime_s"] = _check(elapsed, elapsed < 5.0)
    return _finish(2, "RMT constants", checks, t0)


def criterion_3() -> CriterionResult:
    t0 = time.perf_counter()
    T = np.geomspace(1e3, 1e4, 40)
    poly = me.fit_moment_polynomial(1, T)
    a0_ref = 2 * me.EULER_GAMMA - 1 - math.log(2 * math.pi)
    a0, a1 = poly.coeffs[0], poly.coeffs[1]
    fit = me.error_mean_square_exponent(1, T, poly=me.MomentPolynomial.classical_k1())
    checks = {
        "a11": _check(a1, 0.95 <= a1 <= 1.05),
        "a01": _check([a0, a0_ref], abs(a0 - a0_ref) <= 0.1),
        "E1_mean_square_exponent": _check(fit.slope, 1.3 <= fit.slope <= 1.6),
    }
    return _finish(3, "moment main term", checks, t0)


def criterion_4(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    poly = me.MomentPolynomial.classical_k1()
    X = 1e5
    s = rng.uniform(1.2, 2.0, 20) + 1j * rng.uniform(-50, 50, 20)
    rel = []
    sym = []
    for z in s:
        d = ml.mellin_direct(1, z, X=X, poly=poly).value
        c = ml.mellin_continued(1, z, poly, X=X).value
        rel.append(abs(d - c) / abs(d))
        dc = ml.mellin_direct(1, z.conjugate(), X=X, poly=poly).value
        sym.append(abs(dc - d.conjugate()) / abs(d))
    # e^2 Z_1(1 + e) -> a_{1,1} 1! as e -> 0+, polynomial extrapolation in e
    fitted = me.fit_moment_polynomial(1, np.geomspace(1e3, 1e4, 40))
    e = np.array([0.4, 0.3, 0.2, 0.15, 0.1])
    v = np.array([e_ ** 2 * ml.mellin_direct(1, 1 + e_, X=X, poly=fitted).value.real for e_ in e])
    limit = float(np.polyfit(e, v, 2)[-1])
    target = float(fitted.coeffs[1])
    checks = {
        "direct_vs_continued_max_rel": _check(max(rel), max(rel) <= 1e-3),
        "conjugate_symmetry_max": _check(max(sym), max(sym) <= 1e-10),
        "pole_extrapolation": _check([limit, target], abs(limit - target) <= 0.05 * abs(target)),
    }
    return _finish(4, "Mellin consistency", checks, t0)


def criterion_5(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    violations = 0
    for _ in range(100):
        b = rng.uniform(2.5, 8.0)
        x = np.linspace(2.0, b, 1201)
        c = rng.normal(size=4)
        g = c[0] + c[1] * np.sin(rng.uniform(1, 6) * x) + c[2] * x ** rng.uniform(-2, 1) + c[3] * np.cos(x * x / b)
        sigma = rng.uniform(0.3, 1.5)
        T = rng.uniform(5, 40)
        left, right = ml.lemma1_check(x, g, sigma, T)
        worst = max(worst, left / right)
        violations += left > right
    x = np.linspace(2.0, 3.0, 2001)
    _, right = ml.lemma1_check(x, np.ones_like(x), 1.0, 10.0)
    ref = 2 * math.pi * math.log(1.5)
    elapsed = time.perf_counter() - t0
    checks = {
        "violations": _check([int(violations), worst], violations == 0),
        "closed_form": _check([right, ref], abs(right - ref) <= 1e-8),
        "runtime_s": _check(elapsed, elapsed < 30.0),
    }
    return _finish(5, "mean-value inequality", checks, t0)


def criterion_6(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(1000):
        G = rng.uniform(0.5, 20)
        R = int(rng.integers(1, 200))
        T = max(1000.0, 3 * R * G)
        pts = si.random_spaced_set(rng, T, G, R)
        classes = si.five_split(pts)
        ok = len(classes) <= 5 and all(np.all(np.diff(c) >= 5 * G * (1 - 1e-12)) for c in classes)
        ok = ok and sum(c.size for c in classes) == R
        bad += not ok
    checks = {"five_split_failures": _check(bad, bad == 0)}

    T, G, k = 2000.0, 10.0, 1
    grid = si.WellSpacedSet(T, G, T + G + G * np.arange(int((T - 2 * G) // G)))
    mean = float(np.mean(si.interval_moments(grid.points, G, k))) / G
    for j, U in enumerate(0.5 * mean * np.array([1.0, 2.0, 4.0])):
        count = si.count_large(grid, k, U)
        meas = si.measure_large_values(T, G, k, U, window=2 * G)
        checks[f"count_vs_measure_U{j}"] = _check(
            {"U": U, "G_count": G * count, "five_measure": 5 * meas.measure,
             "uncertainty": meas.uncertainty}, G * count <= 5 * meas.measure)

    pts = si.random_spaced_set(rng, 2000.0, 5.0, 50)
    rep = si.dyadic_sum_bound(pts, 1, 2)
    checks["dyadic_C"] = _check(rep.ratio, rep.ratio <= 10)
    return _finish(6, "spaced-set machinery", checks, t0)


def criterion_7() -> CriterionResult:
    t0 = time.perf_counter()
    phi = si.Mollifier(1500.0, 10.0)
    s = 0.75 + 300j
    checks = {}
    for m in (2, 3, 4):
        d = si.mollifier_decay_check(phi, s, m)
        checks[f"C_{m}"] = _check(d.ratio, d.ratio <= 100)
    elapsed = time.perf_counter() - t0
    checks["runtime_s"] = _check(elapsed, elapsed < 30.0)
    return _finish(7, "mollifier decay", checks, t0)


def criterion_8() -> CriterionResult:
    t0 = time.perf_counter()
    norm = [sm.smoothed_moment(x, G, 2, func=np.ones_like).value for x, G in
            ((50.0, 3.0), (1000.0, 0.1), (2000.0, 44.7))]
    err = max(abs(v - 1) for v in norm)
    dec = sm.smoothed_decomposition_check(2000.0, 0.5, me.standard_polynomial(2))
    checks = {
        "normalization": _check(err, err <= 1e-8),
        "decomposition": _check(dec.relative, dec.relative <= 1e-3),
    }
    return _finish(8, "Gaussian smoothing", checks, t0)


def criterion_9(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    x = np.exp(rng.uniform(math.log(100), math.log(1e5), 1000))
    kappa = rng.uniform(1, 200, 1000)
    y0 = sp.saddle_y0(x, kappa)
    stat = float(np.max(np.abs(sp.phase_F_prime(y0, x, kappa)) / kappa))
    closed = float(np.max(np.abs(y0 - sp.saddle_y0_direct(x, kappa)) / np.abs(y0)))
    dev = []
    for T in (500.0, 1000.0, 2000.0):
        for kap in (20.0, 50.0):
            for xi in (0.5, 2 / 3):
                q = sp.xi_integral(-kap, T, xi).value
                a = sp.saddle_xi(kap, T, xi)
                dev.append(abs(q - a) / abs(a))
    lam = sp.lambda_combination(3.0, 500.0, 0.5)
    checks = {
        "stationarity_max_over_kappa": _check(stat, stat <= 1e-8),
        "closed_form_y0": _check(closed, closed <= 1e-12),
        "grid_max_rel_dev": _check(max(dev), max(dev) <= 0.05),
        "lambda_imag_residual": _check(lam.imaginary_residual, lam.imaginary_residual <= 1e-10),
    }
    return _finish(9, "spectral saddle", checks, t0)


def criterion_10(T_ms: float = 1000.0) -> CriterionResult:
    t0 = time.perf_counter()
    checks = {}
    poly = me.standard_polynomial(2)
    for sigma in (0.75, 1.0):
        for xi in (1 / 3, 1.0):
            r = sm.theorem3_scan(sigma, xi, poly=poly)
            checks[f"zxi_sigma{sigma}_xi{xi:.3f}"] = _check([r.slope, r.bound], r.passed)
    scan = ml.mean_square_scan(2, 0.75, T_ms, poly)
    bound = (10 - 8 * 0.75) / 3 + 0.3
    checks["mean_square_sigma0.75"] = _check([scan.fit.slope, bound], scan.fit.slope <= bound)
    return _finish(10, "bound scans", checks, t0)


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}
SEEDED = {4, 5, 6, 9}


def run_suite(numbers=None, seed: int = 0, echo=None) -> list[CriterionResult]:
    out = []
    for n in numbers or sorted(CRITERIA):
        fn = CRITERIA[n]
        res = fn(seed) if n in SEEDED else fn()
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out
