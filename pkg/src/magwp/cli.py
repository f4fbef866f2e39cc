"""Command-line interface.

Subcommands: ``run``, ``convergence``, ``compare``, ``list-builtins``.
Set MAGWP_OUTPUT_DIR to redirect all output files into one directory.
Exit codes: 0 success, 2 configuration error, 3 step-size guard violation.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .config import fixture_names, load_config
from .driver import compare, convergence, run
from .errors import ConfigError, GridMismatch, MagwpError, StepTooLarge
from .fields import DEFAULT_QUAD_N, builtin_ids, builtin_param_names

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STEP = 3


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="magwp",
        description="Structure-preserving Gaussian wave packet integrators "
        "for magnetic Schroedinger dynamics.",
    )
    ap.add_argument("--version", action="version", version=f"magwp {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one configured experiment")
    p_run.add_argument("config", help="path to a run configuration file")
    p_run.add_argument("--out", help="override the configured output CSV path")

    p_conv = sub.add_parser("convergence", help="step-size sweep against a reference run")
    p_conv.add_argument("config", help="path to a run configuration file")
    p_conv.add_argument(
        "--taus", required=True, help="comma-separated step sizes, descending"
    )
    p_conv.add_argument("--tau-ref", type=float, default=None)
    p_conv.add_argument("--out", help="output CSV path for the convergence table")

    p_cmp = sub.add_parser("compare", help="run two configs on the same grid and join")
    p_cmp.add_argument("config_a")
    p_cmp.add_argument("config_b")
    p_cmp.add_argument("--out", help="output CSV path for the joined table")

    sub.add_parser("list-builtins", help="list builtin fields and their parameters")
    return ap


def _cmd_run(args) -> int:
    config = load_config(args.config)
    result = run(config, out_path=args.out)
    s = result.summary
    print(f"wrote {result.csv_path} ({len(result.rows)} rows, {s['n_steps']} steps)")
    print(f"max symplecticity residual : {s['max_sympl_residual']:.3e}")
    if s["max_boris_mod_residual"] == s["max_boris_mod_residual"]:  # not nan
        print(f"max modified Boris residual: {s['max_boris_mod_residual']:.3e}")
    print(f"max relative energy error  : {s['max_energy_rel_err']:.3e}")
    print(f"final relative energy error: {s['final_energy_rel_err']:.3e}")
    return EXIT_OK


def _cmd_convergence(args) -> int:
    config = load_config(args.config)
    taus = [float(tok) for tok in args.taus.split(",") if tok.strip()]
    out = args.out if args.out else f"{config.experiment_id}_convergence.csv"
    rows = convergence(config, taus, tau_ref=args.tau_ref, out_path=out)
    print(f"{'tau':>12} {'|dE|/|E0|':>14} {'state err':>14} {'p(E)':>7} {'p(z)':>7}")
    for tau, e, serr, oe, os_ in rows:
        print(f"{tau:12.6g} {e:14.4e} {serr:14.4e} {oe:7.2f} {os_:7.2f}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    ca = load_config(args.config_a)
    cb = load_config(args.config_b)
    out = args.out if args.out else f"{ca.experiment_id}_compare.csv"
    header, rows = compare(ca, cb, out_path=out)
    print(f"wrote {out} ({len(rows)} aligned rows, {len(header)} columns)")
    return EXIT_OK


def _cmd_list_builtins() -> int:
    print("builtin fields (experiment.id values):")
    for bid in builtin_ids():
        params = sorted(builtin_param_names(bid))
        extra = f" params: {', '.join(params)}" if params else ""
        print(f"  {bid:16s} default quad.N = {DEFAULT_QUAD_N[bid]:2d}{extra}")
    print("\npackaged fixture configs:", ", ".join(fixture_names()))
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "convergence":
            return _cmd_convergence(args)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "list-builtins":
            return _cmd_list_builtins()
        return EXIT_CONFIG
    except StepTooLarge as exc:
        print(f"error: step size too large: {exc}", file=sys.stderr)
        return EXIT_STEP
    except (ConfigError, GridMismatch, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MagwpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
