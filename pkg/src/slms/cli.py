"""``slms`` command-line front end.

Config files are JSON: a ``problem`` object in the problem-config format plus
command options at the top level.  JSON output is ``{config, results,
diagnostics}``; CSV carries the results table only.

Exit codes: 0 ok, 2 config/validation, 3 numerical, 4 I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .errors import NearEigenvaluePole, NumericalError, ValidationError
from .green import green_matrix
from .problem import Piece, problem_from_dict, problem_to_dict, validate
from .sampling import TransformSpec, g_preset, reconstruction_report
from .spectrum import ScanOptions, find_eigenvalues

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValidationError):
    """Malformed or missing command option."""


def _require(cfg, key, kind=None):
    if key not in cfg:
        raise ConfigError(f"config is missing {key!r}")
    val = cfg[key]
    if kind is int and (not isinstance(val, int) or isinstance(val, bool)):
        raise ConfigError(f"{key!r} must be an integer, got {val!r}")
    return val


def _positive_int(cfg, key, default=None):
    val = cfg.get(key, default) if default is not None else _require(cfg, key, int)
    if not isinstance(val, int) or isinstance(val, bool) or val < 1:
        raise ConfigError(f"{key!r} must be an integer >= 1, got {val!r}")
    return val


def _problem(cfg):
    raw = cfg.get("problem", cfg)
    return validate(problem_from_dict(raw))


def _scan_options(cfg):
    opts = {}
    if "floor" in cfg:
        opts["floor"] = float(cfg["floor"])
    if "root_tol" in cfg:
        if not cfg["root_tol"] > 0:
            raise ConfigError("'root_tol' must be > 0")
        opts["root_tol"] = float(cfg["root_tol"])
    return ScanOptions(**opts)


def _json_value(v):
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": _json_value(v.real), "im": _json_value(v.imag)}
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.ndarray):
        return [_json_value(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def _csv_value(v):
    if isinstance(v, (complex, np.complexfloating)):
        return repr(complex(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


# --------------------------------------------------------------------------
# Commands: each returns (columns, rows, extra_results, diagnostics)
# --------------------------------------------------------------------------


def cmd_spectrum(cfg):
    problem = _problem(cfg)
    count = _positive_int(cfg, "count", 20)
    spec = find_eigenvalues(problem, count, _scan_options(cfg))
    cols = ["n", "lambda_n", "sqrt_lambda_n", "omega_prime", "norm_sq", "k_n", "residual"]
    rows = [[r.n, r.lambda_n, r.sqrt_lambda, r.omega_prime, r.norm_sq, r.k_n, r.residual]
            for r in spec.records]
    diag = {"warnings": list(spec.warnings), "scan_range": list(spec.scan_range)}
    return cols, rows, {}, diag


def _sweep_one(args):
    raw, eps, count, scan = args
    try:
        problem = validate(problem_from_dict({**raw, "epsilon": eps}))
        spec = find_eigenvalues(problem, count, scan)
        return eps, spec.eigenvalues.tolist(), "ok"
    except (ValidationError, NumericalError) as exc:
        return eps, [math.nan] * count, f"error:{type(exc).__name__}"


def _epsilon_grid(cfg):
    er = _require(cfg, "epsilon")
    try:
        start, stop = float(er["start"]), float(er["stop"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("'epsilon' needs numeric 'start' and 'stop'") from exc
    steps = _positive_int(er, "steps")
    return np.linspace(start, stop, steps) if steps > 1 else np.array([start])


def cmd_sweep(cfg, jobs=1):
    problem = _problem(cfg)
    raw = problem_to_dict(problem)
    count = _positive_int(cfg, "count", 10)
    eps_grid = _epsilon_grid(cfg)
    half = (problem.b - problem.a) / 2
    bad = [e for e in eps_grid if not 0 < e < half]
    if bad:
        raise ConfigError(f"epsilon values {bad} outside (0, (b-a)/2) = (0, {half})")
    scan = _scan_options(cfg)
    tasks = [(raw, float(e), count, scan) for e in eps_grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_one, tasks))
    else:
        results = [_sweep_one(t) for t in tasks]
    results.sort(key=lambda r: r[0])
    cols = ["epsilon", "n", "lambda_n", "delta_prev", "status"]
    rows = []
    prev = None
    max_jump = [0.0] * count
    for eps, lams, status in results:
        for n, lam in enumerate(lams):
            d = abs(lam - prev[n]) if prev is not None else math.nan
            if math.isfinite(d):
                max_jump[n] = max(max_jump[n], d)
            rows.append([eps, n, lam, d, status])
        prev = lams
    variation = []
    for n in range(count):
        col = [lams[n] for _, lams, _ in results if math.isfinite(lams[n])]
        variation.append(max(col) - min(col) if col else math.nan)
    diag = {
        "max_adjacent_jump": max_jump,
        "max_variation": variation,
        "failed_epsilons": [e for e, _, s in results if s != "ok"],
    }
    return cols, rows, {}, diag


def _axis(problem, cfg, key):
    """Sample abscissae with interface points duplicated for both sides."""
    if key in cfg:
        xs = [float(v) for v in cfg[key]]
    else:
        n = cfg.get(f"n{key}", 0)
        if not isinstance(n, int) or n < 0:
            raise ConfigError(f"'n{key}' must be a non-negative integer")
        xs = np.linspace(problem.a, problem.b, n).tolist() if n else []
        if n and cfg.get("include_interfaces", True):
            xs = sorted(set(xs) | {problem.geometry.theta_minus, problem.geometry.theta_plus})
    geo = problem.geometry
    out = []
    for x in xs:
        if not geo.a <= x <= geo.b:
            raise ConfigError(f"grid point {x} outside [{geo.a}, {geo.b}]")
        if x in (geo.theta_minus, geo.theta_plus):
            out.extend([(x, -1), (x, 1)])
        else:
            out.append((x, 0))
    return out


def _nearest_eigenvalue(problem, lam):
    count = 4
    while True:
        lams = find_eigenvalues(problem, count, ScanOptions(with_vectors=False)).eigenvalues
        if lams[-1] > lam or count >= 4096:
            return float(lams[np.argmin(np.abs(lams - lam))])
        count *= 2


def cmd_green(cfg):
    problem = _problem(cfg)
    lam = cfg.get("lambda", 0.0)
    lam = complex(lam["re"], lam["im"]) if isinstance(lam, dict) else float(lam)
    xs = _axis(problem, cfg, "x")
    ys = _axis(problem, cfg, "y")
    cols = ["i", "j", "x", "x_side", "y", "y_side", "G"]
    if not xs or not ys:
        return cols, [], {"x": [], "y": [], "G": []}, {"lambda": lam}
    geo = problem.geometry
    side = lambda s: None if s == 0 else s
    px = [int(geo.piece_of(x, side(s))) for x, s in xs]
    py = [int(geo.piece_of(y, side(s))) for y, s in ys]
    try:
        G = green_matrix(problem, lam, [x for x, _ in xs], [y for y, _ in ys],
                         [side(s) for _, s in xs], [side(s) for _, s in ys])
    except NearEigenvaluePole as exc:
        near = _nearest_eigenvalue(problem, float(np.real(lam)))
        raise NearEigenvaluePole(f"{exc}; nearest eigenvalue lambda_n = {near!r}",
                                 eigenvalue=near) from exc
    rows = [[i, j, x, sx, y, sy, G[i, j]]
            for i, (x, sx) in enumerate(xs) for j, (y, sy) in enumerate(ys)]
    asym = float(np.max(np.abs(G - G.T))) if len(xs) == len(ys) and xs == ys else None
    extra = {
        "x": [x for x, _ in xs], "x_side": [s for _, s in xs], "x_piece": [Piece(p).name for p in px],
        "y": [y for y, _ in ys], "y_side": [s for _, s in ys], "y_piece": [Piece(p).name for p in py],
        "G": G,
    }
    diag = {"lambda": lam, "max_asymmetry": asym}
    return cols, rows, extra, diag


def _g_from_config(problem, cfg):
    g = cfg.get("g", "one")
    if isinstance(g, str):
        g = {"preset": g}
    name = g.get("preset")
    if name not in ("one", "zero", "bump_mid", "sin_k", "custom-table"):
        raise ConfigError(f"unknown g preset {name!r}")
    table = None
    if name == "custom-table":
        try:
            table = {k: (g["table"][k]["x"], g["table"][k]["g"]) for k in ("left", "mid", "right")}
        except (KeyError, TypeError) as exc:
            raise ConfigError("custom-table needs table.{left,mid,right}.{x,g}") from exc
    return g_preset(problem, name, k=float(g.get("k", 1.0)), table=table), g


def cmd_reconstruct(cfg):
    problem = _problem(cfg)
    kernel = cfg.get("kernel", "phi")
    N = _positive_int(cfg, "N", 60)
    g, g_cfg = _g_from_config(problem, cfg)
    y0 = float(cfg.get("y0", problem.geometry.theta)) if kernel == "green" else None
    try:
        spec = TransformSpec(kernel, g, y0=y0, y0_side=cfg.get("y0_side"),
                             product=cfg.get("product", "omega"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    spectrum = find_eigenvalues(problem, 2 * N, _scan_options(cfg))
    pts = cfg.get("eval_points")
    report = reconstruction_report(problem, spec, spectrum, N, eval_points=pts)
    convergence = []
    for M in sorted({max(1, N // 2), N, 2 * N}):
        r = report if M == N else reconstruction_report(problem, spec, spectrum, M,
                                                        eval_points=report.points,
                                                        with_canonical=False)
        convergence.append({"N": M, "max_rel_error": r.max_rel_error,
                            "max_abs_error": float(np.max(r.abs_error)) if len(r.abs_error) else 0.0})
    cols = ["lambda", "direct", "series", "abs_error", "rel_error", "tail"]
    rows = [list(r) for r in zip(report.points, report.direct, report.series,
                                 report.abs_error, report.rel_error, report.tail)]
    extra = {"report": report.to_dict(), "convergence": convergence, "g": g_cfg}
    diag = {**report.diagnostics, "warnings": list(spectrum.warnings)}
    return cols, rows, extra, diag


COMMANDS = {
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "green": cmd_green,
    "reconstruct": cmd_reconstruct,
}


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------


def render(fmt, command, cfg, cols, rows, extra, diag) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        w.writerows([[_csv_value(v) for v in row] for row in rows])
        return buf.getvalue()
    doc = {
        "config": {"command": command, "tool": "slms", "version": __version__, **cfg},
        "results": {"columns": cols, "rows": rows, **extra},
        "diagnostics": diag,
    }
    return json.dumps(_json_value(doc), indent=2, sort_keys=False) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slms", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"slms {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run config")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--jobs", type=int, default=1, help="worker processes (sweep only)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("slms: --jobs must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        print(f"slms: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"slms: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if not isinstance(cfg, dict):
        print("slms: config must be a JSON object", file=sys.stderr)
        return EXIT_VALIDATION

    fn = COMMANDS[args.command]
    try:
        out = fn(cfg, jobs=args.jobs) if args.command == "sweep" else fn(cfg)
    except ValidationError as exc:
        print(f"slms: invalid config: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"slms: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    text = render(args.format, args.command, cfg, *out)
    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"slms: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
