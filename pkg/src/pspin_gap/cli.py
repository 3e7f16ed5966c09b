"""Command-line interface: curve data for the phase diagram, alpha and gap scaling.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from . import __version__, gapalpha, oracle, phase, semiclassical, spectral
from .dicke import ModelParams, build_sector_hamiltonian
from .errors import NumericalError, ValidationError

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

_ALPHA_NOTE = ("alpha is the rate per spin in natural-log units, gap ~ exp(-alpha N); "
               "plot it on a logarithmic axis to see the collapse near the terminus")


# --- grids --------------------------------------------------------------------------

def _parse_n_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad --n-list {text!r}") from exc
    if not values:
        raise ValidationError("--n-list is empty")
    return values


def _linspace(lo, hi, steps, name):
    if steps is None or steps < 1:
        raise ValidationError(f"{name} grid is empty")
    if not (0.0 <= lo <= 1.0 and 0.0 <= hi <= 1.0):
        raise ValidationError(f"{name} grid must lie within [0, 1]")
    if steps == 1:
        return np.array([hi])
    if lo >= hi:
        raise ValidationError(f"{name} grid needs min < max")
    return np.linspace(lo, hi, steps)


def _lambda_grid(args, default=None):
    if args.lam is not None and args.lambda_steps is None:
        return _linspace(args.lam, args.lam, 1, "lambda")
    if args.lambda_steps is None and default is not None:
        return default
    return _linspace(args.lambda_min, args.lambda_max,
                     10 if args.lambda_steps is None else args.lambda_steps, "lambda")


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise ValidationError(f"--{name.replace('lam', 'lambda').replace('_', '-')} is required")


def _map(fn, items, threads):
    """Ordered map, optionally across worker processes."""
    items = list(items)
    if threads and threads > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# --- output -------------------------------------------------------------------------

def _fmt(v):
    if v is None:
        return "none"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def render(command, parameters, columns, rows, fmt, notes=()):
    """CSV with a header row, or a JSON document following the v1 schema."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])
        return buf.getvalue()
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "parameters": {k: _jsonable(v) for k, v in parameters.items()},
        "columns": list(columns),
        "rows": [{c: _jsonable(row.get(c)) for c in columns} for row in rows],
        "notes": list(notes),
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


# --- commands -----------------------------------------------------------------------

def cmd_critical_point(args):
    cp = semiclassical.critical_point(args.p)
    row = {"p": cp.p, "m_star": cp.m_star, "lambda_star": cp.lambda_star, "s_star": cp.s_star,
           "residual_d1": cp.residuals[0], "residual_d2": cp.residuals[1],
           "residual_d3": cp.residuals[2]}
    return {"p": args.p}, list(row), [row], ()


def _transition_row(line, tp):
    return {"line": line, "lambda": tp.lam, "s_c": tp.s_c, "m1": tp.m1, "m2": tp.m2,
            "e_c": tp.e_c}


def cmd_phase_diagram(args):
    explicit = args.lam is not None or args.lambda_steps is not None
    grid = None
    if explicit:
        grid = np.sort(_lambda_grid(args))[::-1]
        if grid[-1] <= 0:
            raise ValidationError("lambda grid must lie within (0, 1]")
    diagram = phase.trace_phase_diagram(args.p, grid)
    rows = [_transition_row("first", tp) for tp in diagram.first_order]
    rows += [{"line": "second", "lambda": lam, "s_c": s} for lam, s in diagram.second_order]
    if diagram.meeting_lambda is not None:
        lam = diagram.meeting_lambda
        rows.append({"line": "meeting", "lambda": lam, "s_c": semiclassical.second_order_line(lam)})
    if diagram.terminus is not None:
        rows.append({"line": "terminus", "lambda": diagram.terminus[0], "s_c": diagram.terminus[1]})
    cf = diagram.terminus_closed_form
    if cf is not None:
        rows.append({"line": "terminus_closed_form", "lambda": cf.lambda_star, "s_c": cf.s_star,
                     "m1": cf.m_star})
    columns = ["line", "lambda", "s_c", "m1", "m2", "e_c"]
    return {"p": args.p, "lambda_points": None if grid is None else len(grid)}, columns, rows, ()


def cmd_alpha_curve(args):
    grid = _lambda_grid(args)
    if np.any(grid <= 0):
        raise ValidationError("lambda grid must lie within (0, 1]")
    tol = gapalpha.QUAD_TOL if args.tol is None else args.tol
    results = _map(partial(gapalpha.alpha_or_none, args.p, tol=tol), grid, args.threads)
    rows = []
    for lam, res in zip(grid, results):
        if res is None:
            rows.append({"lambda": lam})
        else:
            rows.append({"lambda": lam, "s_c": res.s_c, "alpha": res.alpha,
                         "quad_error": res.quad_error, "m1": res.m1, "m2": res.m2, "e_c": res.e_c})
    columns = ["lambda", "s_c", "alpha", "quad_error", "m1", "m2", "e_c"]
    return {"p": args.p, "lambda_points": len(grid)}, columns, rows, (_ALPHA_NOTE,)


def _self_test_points(n_list):
    return [(n, math.exp(-0.3 * n)) for n in n_list]


def cmd_gap_scaling(args):
    columns = ["record", "n", "s_min", "gap_min", "slope", "intercept", "r_squared", "alpha",
               "ratio"]
    if args.self_test:
        n_list = _parse_n_list(args.n_list) if args.n_list else [10, 20, 30, 40, 50]
        fit = spectral.fit_gap_scaling(_self_test_points(n_list))
        rows = [{"record": "point", "n": n, "gap_min": g} for n, g in fit.points]
        rows.append({"record": "fit", "slope": fit.slope, "intercept": fit.intercept,
                     "r_squared": fit.r_squared, "alpha": 0.3, "ratio": -fit.slope / 0.3})
        return {"self_test": True}, columns, rows, ()

    _require(args, "p", "lam")
    n_list = _parse_n_list(args.n_list or ",".join(str(n) for n in range(200, 2001, 200)))
    if len(n_list) < 3:
        raise ValidationError("gap scaling needs at least 3 values in --n-list")
    res = gapalpha.alpha(args.p, args.lam)
    if args.s_min is not None or args.s_max is not None:
        _require(args, "s_min", "s_max")
        bracket = (args.s_min, args.s_max)
    else:
        bracket = (max(0.0, res.s_c - 0.05), min(1.0, res.s_c + 0.02))
    scan = spectral.scan_min_gaps(args.p, args.lam, n_list, bracket)
    fit = spectral.fit_gap_scaling([(n, mg.gap_min) for n, mg in scan])
    rows = [{"record": "point", "n": n, "s_min": mg.s_min, "gap_min": mg.gap_min}
            for n, mg in scan]
    rows.append({"record": "fit", "slope": fit.slope, "intercept": fit.intercept,
                 "r_squared": fit.r_squared, "alpha": res.alpha, "ratio": -fit.slope / res.alpha})
    params = {"p": args.p, "lambda": args.lam, "s_bracket_min": bracket[0],
              "s_bracket_max": bracket[1]}
    return params, columns, rows, (_ALPHA_NOTE,)


def _spectrum_row(p, lam, n, k, s):
    h = build_sector_hamiltonian(ModelParams(p, s, lam), n)
    return n * spectral.lowest_eigenvalues(h, k)


def cmd_spectrum(args):
    _require(args, "p", "lam", "n")
    k = 2 if args.k is None else args.k
    if not 2 <= k <= args.n + 1:
        raise ValidationError(f"--k must lie in [2, N+1] = [2, {args.n + 1}], got {k}")
    if args.s is not None:
        s_grid = _linspace(args.s, args.s, 1, "s")
    else:
        s_grid = _linspace(0.0 if args.s_min is None else args.s_min,
                           1.0 if args.s_max is None else args.s_max,
                           101 if args.s_steps is None else args.s_steps, "s")
    levels = _map(partial(_spectrum_row, args.p, args.lam, args.n, k), s_grid, args.threads)
    columns = ["s"] + [f"e{i}" for i in range(k)] + ["gap"]
    rows = []
    for s, w in zip(s_grid, levels):
        row = {"s": s, "gap": max(w[1] - w[0], 0.0)}
        row.update({f"e{i}": w[i] for i in range(k)})
        rows.append(row)
    params = {"p": args.p, "lambda": args.lam, "n": args.n, "k": k}
    return params, columns, rows, ("energies of the full Hamiltonian (N times per spin)",)


def cmd_validate(args):
    _require(args, "p", "lam", "n")
    s = 0.5 if args.s is None else args.s
    params = ModelParams(args.p, s, args.lam)
    full = oracle.full_hamiltonian_lowest(params, args.n, 2).lowest
    h = build_sector_hamiltonian(params, args.n)
    sector = args.n * spectral.lowest_eigenvalues(h, min(h.dim, 2 * args.n + 1))
    projected = oracle.project_to_dicke(params, args.n)
    proj_dev = float(np.max(np.abs(projected.to_dense() - h.to_dense())))
    rel = [abs(sector[i] - full[i]) / max(abs(full[i]), 1e-300) for i in range(2)]
    in_sector = float(np.min(np.abs(sector - full[1]))) / max(abs(full[1]), 1e-300)
    tol = 1e-10 if args.tol is None else args.tol
    row = {"p": args.p, "s": s, "lambda": args.lam, "n": args.n,
           "full_e0": full[0], "full_e1": full[1], "sector_e0": sector[0], "sector_e1": sector[1],
           "rel_dev_e0": rel[0], "rel_dev_e1": rel[1],
           "full_e1_in_sector": bool(in_sector <= tol),
           "projection_max_dev": proj_dev,
           "sector_gap": sector[1] - sector[0],
           "pass": bool(max(rel) <= tol and proj_dev <= 1e-12)}
    return {"p": args.p, "s": s, "lambda": args.lam, "n": args.n, "tol": tol}, list(row), [row], ()


COMMANDS = {
    "critical-point": (cmd_critical_point, "closed-form terminus of the first-order line"),
    "phase-diagram": (cmd_phase_diagram, "first- and second-order transition lines"),
    "alpha-curve": (cmd_alpha_curve, "alpha along the first-order line. " + _ALPHA_NOTE),
    "gap-scaling": (cmd_gap_scaling, "fit ln(minimum gap) against N and compare with alpha"),
    "spectrum": (cmd_spectrum, "lowest levels of the maximum-spin sector along s"),
    "validate": (cmd_validate, "compare the sector matrix with full 2^N diagonalization"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, help="exponent of the ferromagnetic term (odd, >= 3)")
    common.add_argument("--lambda", dest="lam", type=float, help="single lambda value")
    common.add_argument("--lambda-min", type=float, default=0.05)
    common.add_argument("--lambda-max", type=float, default=1.0)
    common.add_argument("--lambda-steps", type=int)
    common.add_argument("--n", type=int, help="number of spins N")
    common.add_argument("--n-list", help="comma-separated N values")
    common.add_argument("--s", type=float, help="single s value")
    common.add_argument("--s-min", type=float)
    common.add_argument("--s-max", type=float)
    common.add_argument("--s-steps", type=int)
    common.add_argument("--k", type=int, help="number of levels")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--tol", type=float, help="tolerance override")
    common.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="pspin-gap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        if name == "gap-scaling":
            sp.add_argument("--self-test", action="store_true",
                            help="fit synthetic gaps exp(-0.3 N) instead of computing spectra")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    fn = COMMANDS[args.command][0]
    try:
        if args.p is None and not (args.command == "gap-scaling" and args.self_test):
            raise ValidationError("--p is required")
        if args.threads is not None and args.threads < 1:
            raise ValidationError("--threads must be >= 1")
        params, columns, rows, notes = fn(args)
        text = render(args.command, params, columns, rows, args.format, notes)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
