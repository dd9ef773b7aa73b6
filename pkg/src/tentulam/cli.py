"""Command-line entry point.

Exit codes: 0 success, 1 invalid input or unwritable output, 2 solver
non-convergence, 3 a checked property was violated.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import analysis, io
from .bv import build_suite, ly_check
from .checks import operator_checks
from .maps import TAU, MapError, check_tent_param, load_map, tent_family
from .ulam import ConvergenceError, PartitionError, build_partition, stationary_density, transfer_matrix

log = logging.getLogger("tentulam")

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_VIOLATION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _grid(value: str) -> int:
    n = int(value)
    if n < 2 or n % 2:
        raise argparse.ArgumentTypeError(f"grid must be even and >= 2, got {n}")
    return n


def _t(value: str) -> float:
    try:
        return check_tent_param(float(value))
    except MapError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tentulam", description="Invariant densities and entropies of the 2D tent family.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(sp, t=True, grid=True):
        if t:
            sp.add_argument("--t", type=_t, default=1.0, help=f"parameter in [tau, 1], tau = {TAU:.6f}")
        if grid:
            sp.add_argument("--grid", type=_grid, default=128, help="grid columns (even)")
        sp.add_argument("--out", required=True, help="output file")

    def sweep_flags(sp):
        sp.add_argument("--t-min", type=_t, default=TAU)
        sp.add_argument("--t-max", type=_t, default=1.0)
        sp.add_argument("--steps", type=int, default=17)

    sp = sub.add_parser("density", help="stationary density as CSV")
    common(sp)
    sp.add_argument("--map", help="JSON map definition used instead of the tent family")
    sp.add_argument("--svg", help="also write a heatmap")
    sp.add_argument("--matrix-out", help="also write the transfer matrix as JSON")

    sp = sub.add_parser("sweep", help="densities, entropies and pairwise distances over a t grid")
    common(sp, t=False)
    sweep_flags(sp)

    sp = sub.add_parser("holder", help="fit distance ~ C gap^eta")
    common(sp, t=False)
    sp.add_argument("--pairs", help="pairs CSV from `sweep`; runs a sweep when omitted")
    sp.add_argument("--min-distance", type=float, default=analysis.NOISE_FLOOR)
    sweep_flags(sp)

    sp = sub.add_parser("entropy", help="entropy by both integral formulas and by orbit averages")
    common(sp)
    sp.add_argument("--orbits", type=int, default=10)
    sp.add_argument("--length", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=42)

    sp = sub.add_parser("verify-bounds", help="perturbation estimates (a)-(e)")
    common(sp, t=False, grid=False)
    sp.add_argument("--t", type=_t, help="single pair with --s; otherwise all sweep pairs")
    sp.add_argument("--s", type=_t)
    sweep_flags(sp)

    sp = sub.add_parser("check-ly", help="fit the Lasota-Yorke inequality")
    common(sp, t=False)
    sp.add_argument("--t", type=_t, help="single parameter; otherwise the sweep grid")
    sp.add_argument("--ell", type=int, default=6)
    sp.add_argument("--seed", type=int, default=42)
    sweep_flags(sp)

    sp = sub.add_parser("check-ops", help="transfer-operator and BV property suites")
    common(sp)
    sp.set_defaults(t=0.95)
    sp.add_argument("--seed", type=int, default=42)
    return p


def _cmd_density(args) -> int:
    if args.map:
        m = load_map(args.map)
        part = build_partition(args.grid, m.omega)
    else:
        m = tent_family(args.t)
        part = build_partition(args.grid)
    P = transfer_matrix(m, part)
    rho = stationary_density(P, part)
    io.write_density_csv(args.out, rho, part)
    if args.svg:
        io.render_svg_heatmap(rho, part, args.svg)
    if args.matrix_out:
        io.write_json(args.matrix_out, P.to_json())
    log.info("density: %d cells, %d iterations, residual %.3e", len(part), rho.iterations, rho.residual)
    return EXIT_OK


def _sweep_grid(args) -> list[float]:
    return analysis.tent_grid(args.steps, args.t_min, args.t_max)


def _cmd_sweep(args) -> int:
    res = analysis.sweep(_sweep_grid(args), args.grid)
    out = Path(args.out)
    stem = out.with_suffix("")
    names = []
    for k, rho in enumerate(res.densities):
        path = stem.parent / f"{stem.name}_rho_{k:03d}.csv"
        io.write_density_csv(path, rho, res.partition)
        names.append(path.name)
    io.write_pairs_csv(stem.parent / f"{stem.name}_pairs.csv", res.pairwise)
    io.write_sweep_csv(out, res.t_values, res.entropies_lebesgue, res.entropies_measure, names)
    return EXIT_OK


def _cmd_holder(args) -> int:
    if args.pairs:
        pairs = io.read_pairs_csv(args.pairs)
    else:
        pairs = analysis.sweep(_sweep_grid(args), args.grid).pair_gaps()
    fit = analysis.holder_fit(pairs, args.min_distance)
    io.write_json(args.out, fit.to_json())
    return EXIT_OK


def _cmd_entropy(args) -> int:
    part = build_partition(args.grid)
    rho = stationary_density(transfer_matrix(tent_family(args.t), part), part)
    leb, meas = analysis.entropy(args.t, rho, part)
    birk = analysis.birkhoff_entropy(args.t, args.orbits, args.length, args.seed)
    io.write_json(
        args.out,
        {
            "t": args.t,
            "entropy_lebesgue": leb,
            "entropy_measure": meas,
            "entropy_birkhoff": birk,
            "closed_form": math.log(2 * args.t * args.t),
        },
    )
    return EXIT_OK


def _cmd_verify_bounds(args) -> int:
    if (args.t is None) != (args.s is None):
        raise UsageError("--t and --s go together")
    if args.t is not None:
        reports = [analysis.verify_bounds(args.t, args.s)]
    else:
        grid = _sweep_grid(args)
        reports = [analysis.verify_bounds(t, s) for a, t in enumerate(grid) for s in grid[:a]]
    io.write_json(args.out, {"reports": [r.to_json() for r in reports], "all_satisfied": all(r.all_satisfied for r in reports)})
    return EXIT_OK if all(r.all_satisfied for r in reports) else EXIT_VIOLATION


def _cmd_check_ly(args) -> int:
    part = build_partition(args.grid)
    suite = build_suite(part, args.seed)
    ts = [args.t] if args.t is not None else _sweep_grid(args)
    reports = [ly_check(t, part, suite, args.ell) for t in ts]
    ok = all(r.theta_hat < 1.0 for r in reports)
    io.write_json(args.out, {"reports": [r.to_json() for r in reports], "all_theta_below_one": ok})
    return EXIT_OK if ok else EXIT_VIOLATION


def _cmd_check_ops(args) -> int:
    checks = operator_checks(args.t, args.grid, args.seed)
    ok = all(c.passed for c in checks)
    io.write_json(args.out, {"t": args.t, "grid": args.grid, "checks": [c.to_json() for c in checks], "passed": ok})
    for c in checks:
        log.info("%s %s: %.3e (limit %.1e)", "PASS" if c.passed else "FAIL", c.name, c.value, c.limit)
    return EXIT_OK if ok else EXIT_VIOLATION


COMMANDS = {
    "density": _cmd_density,
    "sweep": _cmd_sweep,
    "holder": _cmd_holder,
    "entropy": _cmd_entropy,
    "verify-bounds": _cmd_verify_bounds,
    "check-ly": _cmd_check_ly,
    "check-ops": _cmd_check_ops,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"tentulam: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    out_dir = Path(args.out).parent
    if not out_dir.is_dir():
        print(f"tentulam: error: output directory {str(out_dir)!r} does not exist", file=sys.stderr)
        return EXIT_INVALID
    try:
        return COMMANDS[args.subcommand](args)
    except (ConvergenceError, analysis.SweepError) as exc:
        print(f"tentulam: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (UsageError, MapError, PartitionError, analysis.FitError, ValueError, OSError) as exc:
        print(f"tentulam: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
