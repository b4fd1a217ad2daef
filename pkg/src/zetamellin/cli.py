"""Command-line front end.

One subcommand per module plus ``accept``.  Every run writes its artifact
(CSV or JSON) and a ``manifest.json`` into ``--out``.  Artifacts depend only
on the configuration and the sample cache, so reruns are byte-identical;
only the manifest carries the wall time.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__

COMMANDS = ("zeta", "moment", "mellin", "shortint", "smooth", "spectral", "accept")


class ConfigError(ValueError):
    """A parameter violates the precondition of the module it is sent to."""


@dataclass
class ExperimentConfig:
    command: str
    parameters: dict = field(default_factory=dict)
    cache_dir: str | None = None
    output: str = "."
    format: str = "csv"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, float):
        return repr(v) if not math.isfinite(v) else f"{v:.17g}"
    return v


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    from .acceptance import _plain
    return json.dumps(_plain(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _slug(name: str) -> str:
    s = re.sub(r"[^A-Za-z0-9]+", "_", name).strip("_").lower()
    return s or "series"


def emit_plotdata(series: dict, output) -> list[Path]:
    """One ``<name>.csv`` (header x,y) per named series of (x, y) pairs."""
    if not series:
        raise ConfigError("series must be non-empty")
    out = Path(output)
    paths, seen = [], set()
    for name, pairs in series.items():
        slug = _slug(str(name))
        if slug in seen:
            raise ConfigError(f"series names collide after normalisation: {name!r}")
        seen.add(slug)
        rows = [(float(x), float(y)) for x, y in pairs]
        paths.append(_write(out / f"{slug}.csv", _csv_text(["x", "y"], rows)))
    return paths


def read_plotdata(path) -> list[tuple[float, float]]:
    with open(path, encoding="utf-8", newline="") as fh:
        r = csv.reader(fh)
        if next(r) != ["x", "y"]:
            raise ValueError("unexpected header")
        return [(float(a), float(b)) for a, b in r]


def _cache_checksums(cache_dir) -> dict:
    if cache_dir is None or not Path(cache_dir).is_dir():
        return {}
    out = {}
    for p in sorted(Path(cache_dir).iterdir()):
        if p.is_file() and not p.name.startswith("."):
            out[p.name] = hashlib.blake2b(p.read_bytes(), digest_size=16).hexdigest()
    return out


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def _need(cond, message):
    if not cond:
        raise ConfigError(message)


def _first(p, key, default=None):
    v = p.get(key)
    if v is None:
        return default
    return v[0] if isinstance(v, list) else v


def validate(config: ExperimentConfig) -> None:
    p, c = config.parameters, config.command
    k = p.get("k")
    if k is not None:
        _need(1 <= k <= 6, "k must lie in 1..6")
    for t in p.get("T") or []:
        _need(t > 0, "T must be positive")
    if p.get("G") is not None:
        _need(p["G"] > 0, "G must be positive")
    if p.get("xi") is not None:
        _need(1 / 3 - 1e-12 <= p["xi"] <= 1 + 1e-12, "xi must lie in [1/3, 1]")
    if p.get("tol") is not None:
        _need(p["tol"] >= 1e-8, "tol must be >= 1e-8")
    if c == "zeta":
        _need(p.get("t") or p.get("T"), "zeta needs --t or --T")
        _need(all(t >= 0 for t in p.get("t") or []), "t must be >= 0")
    elif c == "moment":
        _need(p.get("T"), "moment needs --T")
        _need(all(t <= 1e6 for t in p["T"]), "T must be <= 1e6")
    elif c == "mellin":
        from .mellin_lab import continuation_strip
        _need(k in (1, 2), "mellin needs --k 1 or 2")
        _need(p.get("sigma") is not None, "mellin needs --sigma")
        _need(p["sigma"] > continuation_strip(k),
              f"sigma must exceed {continuation_strip(k)} for k={k}")
    elif c == "shortint":
        _need(p.get("T") and p.get("G"), "shortint needs --T and --G")
        T, G, R = p["T"][0], p["G"], p.get("R", 50)
        _need(R >= 1 and (R - 1) * G < T, "R points with gaps G must fit in (T, 2T)")
        _need(p.get("m", 2) >= 1, "m must be >= 1")
    elif c == "smooth":
        _need(p.get("T"), "smooth needs --T (the point x)")
        _need((p.get("G") is None) != (p.get("xi") is None), "give exactly one of --G and --xi")
        if p.get("sigma") is not None:
            _need(0.5 < p["sigma"] <= 1, "sigma must lie in (1/2, 1]")
    elif c == "spectral":
        _need(p.get("r") is not None, "spectral needs --r")
        _need(p["r"] > 0, "r must be positive")
        _need(all(t >= 100 for t in p.get("T") or [1000.0]), "T must be >= 100")
    elif c == "accept":
        _need(p.get("suite", "primary") == "primary", "only the primary suite exists")


# ---------------------------------------------------------------------------
# commands; each returns (file stem, header, rows) or (file stem, dict)
# ---------------------------------------------------------------------------

def _cmd_zeta(p):
    import numpy as np
    from .zeta_core import eval_zeta_half_line
    if p.get("t"):
        t = np.asarray(p["t"], dtype=float)
    else:
        T = p["T"][0]
        t = np.linspace(0.0, T, int(math.ceil(T / 0.25)) + 1)
    z = eval_zeta_half_line(t)
    rows = [(float(a), float(b.real), float(b.imag), float(abs(b))) for a, b in zip(t, z)]
    return "zeta", ["t", "re", "im", "abs"], rows


def _cmd_moment(p):
    from .moment_engine import MomentResult, error_term, moment_integral_with_error, standard_polynomial
    k, tol = p.get("k") or 1, p.get("tol") or 1e-8
    rows = []
    for T in p["T"]:
        if k <= 2:
            r = error_term(k, T, standard_polynomial(k), tol=tol)
        else:
            v, err = moment_integral_with_error(k, T, tol)
            r = MomentResult(k, T, v, math.nan, math.nan, err)
        rows.append((r.k, r.T, r.integral, r.main_term, r.error, r.quadrature_error_bound))
    return "moment", ["k", "T", "I", "main", "E", "quad_err"], rows


def _cmd_mellin(p):
    from .mellin_lab import mellin_direct, mellin_value
    from .moment_engine import standard_polynomial
    k, sigma = p["k"], p["sigma"]
    X = _first(p, "T", 1e5)
    poly = standard_polynomial(k)
    rows = []
    for t in p.get("t") or [0.0]:
        s = complex(sigma, t)
        v = mellin_direct(k, s, X=X, poly=poly) if sigma > 1 else mellin_value(k, s, poly, X=X)
        rows.append((sigma, t, v.value.real, v.value.imag, v.method, v.tail_bound))
    return "mellin", ["sigma", "t", "re", "im", "method", "tail_bound"], rows


def _cmd_shortint(p):
    import numpy as np
    from .short_interval import dyadic_sum_bound, random_spaced_set
    rng = np.random.default_rng(p.get("seed", 0))
    pts = random_spaced_set(rng, p["T"][0], p["G"], p.get("R", 50))
    rep = dyadic_sum_bound(pts, p.get("k") or 1, p.get("m", 2))
    return "shortint", rep.as_dict()


def _cmd_smooth(p):
    from .smoothed_mellin import smoothed_moment, theorem3_scan
    k = p.get("k") or 2
    if p.get("sigma") is not None:
        r = theorem3_scan(p["sigma"], p["xi"] if p.get("xi") is not None else 0.5)
        rows = [(float(t), float(a)) for t, a in zip(r.t, r.abs_z)]
        return "smooth", ["t", "abs_zxi"], rows
    rows = []
    for x in p["T"]:
        G = p["G"] if p.get("G") is not None else x ** p["xi"]
        r = smoothed_moment(x, G, k)
        rows.append((r.x, r.G, r.k, r.value, r.error))
    return "smooth", ["x", "G", "k", "J", "error_bound"], rows


def _cmd_spectral(p):
    from .spectral import (asymptotic_xi_term, discrete_spectrum_sum, lambda_combination,
                           load_spectral_data, saddle_xi, xi_integral)
    r = p["r"]
    T = _first(p, "T", 1000.0)
    xi = p.get("xi") if p.get("xi") is not None else 0.5
    tol = p.get("tol") or 1e-8
    plus = xi_integral(r, T, xi, tol)
    minus = xi_integral(-r, T, xi, tol)
    lam = lambda_combination(r, T, xi, tol)
    out = {"r": r, "T": T, "xi": xi,
           "xi_plus": [plus.value.real, plus.value.imag], "xi_minus": [minus.value.real, minus.value.imag],
           "saddle_xi_minus": [saddle_xi(r, T, xi).real, saddle_xi(r, T, xi).imag],
           "lambda": lam.value, "lambda_imaginary_residual": lam.imaginary_residual}
    try:
        a = asymptotic_xi_term(T, r, xi)
        out["asymptotic_magnitude"] = a.magnitude
    except ValueError as exc:
        out["asymptotic_magnitude"] = repr(exc)
    if p.get("kappa_max") is not None:
        data = load_spectral_data(p.get("data"))
        s = discrete_spectrum_sum(data, T, xi, p["kappa_max"])
        out["discrete_sum"] = s.value
        out["discrete_partial"] = s.partial
    return "spectral", out


def _cmd_accept(p):
    from .acceptance import run_suite
    res = run_suite(p.get("only"), seed=p.get("seed", 0),
                    echo=lambda line: print(line, file=sys.stderr))
    return "accept", {"suite": "primary", "passed": all(r.passed for r in res),
                      "criteria": [r.as_dict() for r in res]}


DISPATCH = {"zeta": _cmd_zeta, "moment": _cmd_moment, "mellin": _cmd_mellin,
            "shortint": _cmd_shortint, "smooth": _cmd_smooth, "spectral": _cmd_spectral,
            "accept": _cmd_accept}


def run(config: ExperimentConfig) -> int:
    """Validate, dispatch, write artifact + manifest; returns the exit status."""
    start = time.perf_counter()
    try:
        validate(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if config.cache_dir is not None:
        os.environ["ZETAMELLIN_CACHE"] = str(config.cache_dir)
    threads = config.parameters.get("threads")
    if threads:
        import numba
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
    try:
        result = DISPATCH[config.command](config.parameters)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(config.output)
    stem = result[0]
    if len(result) == 3:
        header, rows = result[1], result[2]
        if config.format == "csv":
            artifact = _write(out / f"{stem}.csv", _csv_text(header, rows))
        else:
            artifact = _write(out / f"{stem}.json", _json_text([dict(zip(header, r)) for r in rows]))
    else:
        artifact = _write(out / f"{stem}.json", _json_text(result[1]))
    from .zeta_core import default_cache_dir
    cache = config.cache_dir if config.cache_dir is not None else default_cache_dir()
    manifest = {
        "config": asdict(config),
        "version": __version__,
        "artifact": artifact.name,
        "artifact_blake2b": hashlib.blake2b(artifact.read_bytes(), digest_size=16).hexdigest(),
        "cache_checksums": _cache_checksums(cache),
        "wall_time_s": time.perf_counter() - start,
    }
    _write(out / "manifest.json", _json_text(manifest))
    if config.command == "accept":
        return 0 if result[1]["passed"] else 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--T", type=float, action="append", help="height(s); repeatable")
    common.add_argument("--k", type=int)
    common.add_argument("--G", type=float)
    common.add_argument("--sigma", type=float)
    common.add_argument("--t", type=float, action="append", help="ordinate(s); repeatable")
    common.add_argument("--xi", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--cache-dir", default=os.environ.get("ZETAMELLIN_CACHE") or None)
    common.add_argument("--out", default=".")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=int)
    common.add_argument("--seed", type=int, default=0)
    parser = argparse.ArgumentParser(prog="zetamellin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("zeta", parents=[common], help="zeta(1/2+it) at points or on [0, T]")
    sub.add_parser("moment", parents=[common], help="I_k(T) with main and error term")
    sub.add_parser("mellin", parents=[common], help="Z_k(sigma+it); --T sets the truncation")
    s = sub.add_parser("shortint", parents=[common], help="dyadic sum report on a random spaced set")
    s.add_argument("--R", type=int, default=50)
    s.add_argument("--m", type=int, default=2)
    sub.add_parser("smooth", parents=[common], help="J_k(x; G), or a Z_xi scan with --sigma")
    s = sub.add_parser("spectral", parents=[common], help="Xi, Lambda and the saddle asymptotic")
    s.add_argument("--r", type=float)
    s.add_argument("--kappa-max", type=float)
    s.add_argument("--data", help="spectral CSV (default: bundled table)")
    s = sub.add_parser("accept", parents=[common], help="acceptance suite, JSON report")
    s.add_argument("--suite", default="primary")
    s.add_argument("--only", type=int, action="append", help="criterion number; repeatable")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    skip = {"command", "cache_dir", "out", "format"}
    params = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    return ExperimentConfig(args.command, params, args.cache_dir, args.out, args.format)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
