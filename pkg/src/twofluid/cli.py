"""Command-line front end.

    twofluid run CASE [--out DIR] [--n-cells N]
    twofluid compare CASE_A CASE_B [--exclude-cells K] [--n-cells N]
    twofluid convergence CASE --levels L [--n-cells N]
    twofluid gen-coeffs --p P

Exit status: 0 on success, 1 on invalid input, 2 on a numerical abort.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .driver import FIELDS, compare_runs, convergence_study, detect_peaks, run_case
from .errors import NumericalAbort, ValidationError
from .io import parse_case, snapshot_filename, write_plot_script, write_report, write_snapshot_csv
from .scheme_p3 import gen_centered_coeffs, gen_upwind_coeffs

log = logging.getLogger("twofluid")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_ABORT = 2


def _load(path, n_cells):
    case = parse_case(path)
    if n_cells is not None:
        if n_cells < 2:
            raise ValidationError("--n-cells must be >= 2")
        case = case.with_cells(n_cells)
    return case


def cmd_run(args):
    case = _load(args.case, args.n_cells)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    snaps, report = run_case(case, check_boundaries=not args.no_boundary_check)
    paths = []
    for snap in snaps:
        p = write_snapshot_csv(snap, out / snapshot_filename(case.output.prefix, snap.t))
        paths.append(p)
        print(f"wrote {p}")
    if paths:
        write_plot_script(paths, out / f"{case.output.prefix}_plot.gp", title=case.name)
    peaks = {}
    if snaps:
        for name in ("v1", "v2"):
            peaks[name] = [vars(pk) for pk in detect_peaks(snaps[-1][name], name=name)]
    write_report(report, out / f"{case.output.prefix}_report.json",
                 extra={"case": case.name, "n_cells": case.grid.n_cells, "peaks": peaks})
    print(f"{report.steps_taken} steps, t = {report.t_final:.6g} s, "
          f"mass drift {report.mass_drift[0]:.3e} / {report.mass_drift[1]:.3e}, "
          f"max cfl {report.max_cfl_seen:.4f}, {report.wall_time:.2f} s")
    return EXIT_OK


def cmd_compare(args):
    a = _load(args.case_a, args.n_cells)
    b = _load(args.case_b, args.n_cells)
    if a.grid.n_cells != b.grid.n_cells:
        raise ValidationError(f"grid mismatch: {a.grid.n_cells} vs {b.grid.n_cells} cells")
    sa, _ = run_case(a)
    sb, _ = run_case(b)
    res = compare_runs(sa[-1], sb[-1], exclude_cells=args.exclude_cells)
    print(f"{'field':8s} {'linf':>12s} {'l1':>12s} {'plateau_linf':>14s} {'plateau_l1':>12s}")
    for name in FIELDS:
        r = res[name]
        print(f"{name:8s} {r['linf']:12.4e} {r['l1']:12.4e} {r['plateau_linf']:14.4e} "
              f"{r['plateau_l1']:12.4e}")
    print(f"plateau cells: {res['_plateau_cells']}")
    if args.json:
        Path(args.json).write_text(json.dumps(res, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_convergence(args):
    if args.levels < 2:
        raise ValidationError("--levels must be >= 2")
    case = _load(args.case, args.n_cells)
    results = convergence_study(case, args.levels, exclude_cells=args.exclude_cells)
    for row in results:
        line = f"n={row['n_cells']:7d} steps={row['steps']:7d} time={row['wall_time']:8.2f}s"
        if "vs_next" in row:
            worst = max(row["vs_next"][f]["plateau_linf"] for f in FIELDS)
            l1 = max(row["vs_next"][f]["l1"] for f in FIELDS)
            line += f"  vs 2n: plateau_linf={worst:.3e} l1={l1:.3e}"
        print(line)
    return EXIT_OK


def cmd_gen_coeffs(args):
    if args.p < 1:
        raise ValidationError("--p must be >= 1")
    up = gen_upwind_coeffs(args.p)
    print(f"upwind offsets {-args.p}..0:")
    for k, c in zip(range(-args.p, 1), up):
        print(f"  {k:3d}  {c: .17g}  ({Fraction(c).limit_denominator(10**6)})")
    ce = gen_centered_coeffs(args.p)
    print("centered (maximal order), weight of w[i+k] - w[i-k]:")
    for k, c in enumerate(ce, start=1):
        print(f"  {k:3d}  {c: .17g}  ({Fraction(c).limit_denominator(10**6)})")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage problems count as invalid input; 2 is reserved for numerical aborts
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser():
    ap = _Parser(prog="twofluid",
                 description="1-D two-fluid one-pressure shock-tube solver")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("run", help="run a case and write CSV snapshots")
    p.add_argument("case")
    p.add_argument("--out", default=".", help="output directory (default: .)")
    p.add_argument("--n-cells", type=int, help="override the grid resolution")
    p.add_argument("--no-boundary-check", action="store_true",
                   help="skip the check that waves stayed away from the tube ends")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run two cases and report field differences")
    p.add_argument("case_a")
    p.add_argument("case_b")
    p.add_argument("--exclude-cells", type=int, default=10,
                   help="cells excluded around each transition (default: 10)")
    p.add_argument("--n-cells", type=int)
    p.add_argument("--json", help="also write the metrics to this file")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("convergence", help="grid-doubling study")
    p.add_argument("case")
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--exclude-cells", type=int, default=10)
    p.add_argument("--n-cells", type=int, help="coarsest resolution")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("gen-coeffs", help="print stencil coefficients")
    p.add_argument("--p", type=int, required=True)
    p.set_defaults(func=cmd_gen_coeffs)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
