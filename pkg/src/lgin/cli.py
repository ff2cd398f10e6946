"""Command-line front end: ``lgin analyze | simulate | basin | scan``.

Exit codes: 0 success, 1 input or usage error, 2 a theorem check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from .dynamics import RegimeError, basin_grid, iterate, separatrix
from .equilibria import SolverError, find_equilibria
from .model import (
    PARAM_NAMES,
    RAW_PARAM_NAMES,
    Box,
    DomainError,
    ModelParams,
    ParameterError,
    trapping_box,
)
from .report import analyze
from .sweep import SCAN_HEADER, draw_params, grid_params, parse_grid, scan

EXIT_OK, EXIT_INPUT, EXIT_CHECK = 0, 1, 2
FALLBACK_TOL = 1e-9


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def default_tol() -> float:
    raw = os.environ.get("LGIN_DEFAULT_TOL")
    if raw is None or raw.strip() == "":
        return FALLBACK_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise InputError(f"LGIN_DEFAULT_TOL={raw!r} is not a number") from None
    if not tol > 0:
        raise InputError("LGIN_DEFAULT_TOL must be > 0")
    return tol


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def _add_param_args(sp: argparse.ArgumentParser) -> None:
    g = sp.add_argument_group("parameters")
    g.add_argument("--params", metavar="JSON",
                   help="JSON object, or @file, with keys b1..h2 (or the raw keys)")
    g.add_argument("--raw", action="store_true", help="read the raw flags --c11 ... --H2")
    for name in sorted(set(PARAM_NAMES) | set(RAW_PARAM_NAMES)):
        g.add_argument(f"--{name}", type=float, default=None)


def params_from_args(ns: argparse.Namespace) -> ModelParams:
    if ns.params is not None:
        text = ns.params
        if text.startswith("@"):
            try:
                with open(text[1:], encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise InputError(f"cannot read {text[1:]}: {exc.strerror}") from None
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed parameter JSON: {exc}") from None
        if not isinstance(d, dict):
            raise InputError("parameter JSON must be an object")
        return ModelParams.from_dict(d)
    names = RAW_PARAM_NAMES if ns.raw else PARAM_NAMES
    values = {k: getattr(ns, k) for k in names}
    missing = [f"--{k}" for k, v in values.items() if v is None]
    if missing:
        raise InputError(f"missing parameter flag(s): {' '.join(missing)}")
    return ModelParams.from_dict(values)


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _write_text(path: Optional[str], text: str) -> None:
    fh, close = _open_out(path)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- subcommands ------------------------------------------------------------

def cmd_analyze(ns) -> int:
    p = params_from_args(ns)
    rep = analyze(p, tol=ns.tol)
    _write_text(ns.out, json.dumps(rep.to_dict(), indent=2) + "\n")
    return EXIT_OK if rep.all_passed else EXIT_CHECK


def cmd_simulate(ns) -> int:
    p = params_from_args(ns)
    if ns.steps < 1:
        raise InputError("--steps must be >= 1")
    traj = iterate(p, (ns.x0, ns.y0), max_n=ns.steps, tol=ns.tol, stop_when_converged=False)
    text = _csv_text(("n", "x", "y"), ((n, fmt(x), fmt(y)) for n, (x, y) in enumerate(traj.points)))
    if traj.limit is not None:
        text += f"# limit={fmt(traj.limit.x)},{fmt(traj.limit.y)}\n"
    if traj.monotone_onset is not None:
        text += f"# monotone_onset={traj.monotone_onset}\n"
    _write_text(ns.out, text)
    return EXIT_OK


def _parse_bounds(s: Optional[str], p: ModelParams) -> Box:
    if s is None:
        b = trapping_box(p)
        return Box(0.0, b.x_hi, 0.0, b.y_hi)
    try:
        vals = [float(v) for v in s.split(",")]
    except ValueError:
        raise InputError(f"--bounds {s!r} is not x_lo,x_hi,y_lo,y_hi") from None
    if len(vals) != 4:
        raise InputError("--bounds needs four numbers x_lo,x_hi,y_lo,y_hi")
    b = Box(*vals)
    if not (0 <= b.x_lo < b.x_hi and 0 <= b.y_lo < b.y_hi) or not np.all(np.isfinite(vals)):
        raise InputError("--bounds must satisfy 0 <= x_lo < x_hi and 0 <= y_lo < y_hi")
    return b


def cmd_basin(ns) -> int:
    p = params_from_args(ns)
    if ns.nx < 2 or ns.ny < 2:
        raise InputError("--nx and --ny must be >= 2")
    bounds = _parse_bounds(ns.bounds, p)
    eqs = find_equilibria(p)
    sep = None
    if ns.separatrix is not None:
        try:
            sep = separatrix(p, eqs, nx=ns.sep_nx, max_n=ns.max_steps)
        except RegimeError as exc:
            raise InputError(f"--separatrix needs the bistable regime: {exc}") from None
    grid = basin_grid(p, bounds, ns.nx, ns.ny, tol=ns.tol, max_n=ns.max_steps, eqs=eqs)
    rows = ((fmt(x), fmt(y), int(grid.labels[j, i]))
            for j, y in enumerate(grid.ys) for i, x in enumerate(grid.xs))
    _write_text(ns.out, _csv_text(("x", "y", "label"), rows))
    if sep is not None:
        text = _csv_text(("x", "ystar"), ((fmt(x), fmt(y)) for x, y in sep.samples))
        text += f"# bracket_width={fmt(sep.bracket_width)}\n"
        for x in sep.absent:
            text += f"# absent x={fmt(x)}\n"
        _write_text(ns.separatrix, text)
    return EXIT_OK


def cmd_scan(ns) -> int:
    if (ns.draws is None) == (ns.grid is None):
        raise InputError("give exactly one of --draws N or --grid SPEC")
    if ns.jobs < 1:
        raise InputError("--jobs must be >= 1")
    if ns.draws is not None:
        if ns.draws < 1:
            raise InputError("--draws must be >= 1")
        params = draw_params(np.random.default_rng(ns.seed), ns.draws)
    else:
        try:
            axes = parse_grid(ns.grid)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        params = grid_params(_grid_base(ns, axes), axes)
    records = scan(params, jobs=ns.jobs, tol=ns.tol)
    rows = []
    for r in records:
        rows.append([*(fmt(v) for v in r.params.as_dict().values()), r.count, ";".join(r.labels),
                     str(r.condA).lower(), str(r.condB).lower(), str(r.gas).lower()])
    text = _csv_text(SCAN_HEADER, rows)
    for i, r in enumerate(records):
        if r.error:
            text += f"# row {i}: {r.error}\n"
    _write_text(ns.out, text)
    return EXIT_OK


def _grid_base(ns, axes) -> ModelParams:
    """Fixed parameters from --params or flags; grid axes fill in the rest."""
    if ns.params is not None or ns.raw:
        return params_from_args(ns)
    values = {k: (float(axes[k][0]) if k in axes else getattr(ns, k)) for k in PARAM_NAMES}
    missing = [f"--{k}" for k, v in values.items() if v is None]
    if missing:
        raise InputError(f"parameter(s) neither fixed nor on the grid: {' '.join(missing)}")
    return ModelParams(**values)


def build_parser(tol: float) -> argparse.ArgumentParser:
    ap = _Parser(prog="lgin", description="Equilibria, stability and basins of the LGIN map.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="equilibria, classification and theorem checks as JSON")
    _add_param_args(a)
    a.add_argument("--tol", type=float, default=tol)
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="orbit as CSV")
    _add_param_args(s)
    s.add_argument("--x0", type=float, required=True)
    s.add_argument("--y0", type=float, required=True)
    s.add_argument("--steps", type=int, default=100)
    s.add_argument("--tol", type=float, default=tol)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("basin", help="basin labels on a grid, optionally the separatrix")
    _add_param_args(b)
    b.add_argument("--bounds", help="x_lo,x_hi,y_lo,y_hi (default: [0, box] in each axis)")
    b.add_argument("--nx", type=int, default=50)
    b.add_argument("--ny", type=int, default=50)
    b.add_argument("--tol", type=float, default=tol)
    b.add_argument("--max-steps", type=int, default=100_000)
    b.add_argument("--separatrix", nargs="?", const="separatrix.csv", metavar="PATH")
    b.add_argument("--sep-nx", type=int, default=101)
    b.add_argument("--out")
    b.set_defaults(func=cmd_basin)

    c = sub.add_parser("scan", help="random or grid parameter scan as CSV")
    _add_param_args(c)
    c.add_argument("--draws", type=int)
    c.add_argument("--grid", action="append", metavar="SPEC",
                   help="name=lo:hi:n, repeatable or ';'-separated; other parameters from --params or flags")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--tol", type=float, default=tol)
    c.add_argument("--out")
    c.set_defaults(func=cmd_scan)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        tol = default_tol()
    except InputError as exc:
        print(f"lgin: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    ns = build_parser(tol).parse_args(argv)
    if not ns.tol > 0:
        print("lgin: error: --tol must be > 0", file=sys.stderr)
        return EXIT_INPUT
    try:
        return ns.func(ns)
    except (InputError, ParameterError, DomainError) as exc:
        print(f"lgin: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"lgin: solver failure: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
