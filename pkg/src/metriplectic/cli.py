"""Command-line entry point: ``metriplectic {run,check,rhs-compare,derivative-audit}``.

Exit codes: 0 pass, 1 identity or tolerance failure, 2 config error,
3 numerical abort.
"""

import argparse
import logging
import math
import os
import sys

from .config import ConfigError, load_config

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3

log = logging.getLogger("metriplectic")


def _out_dir(cfg, args):
    d = args.out or cfg.output.directory
    os.makedirs(d, exist_ok=True)
    return d


def _report(rows, out, filename):
    from .checks import format_table, rows_to_csv

    print(format_table(rows))
    if out:
        with open(os.path.join(out, filename), "w") as fh:
            fh.write(rows_to_csv(rows))
    failed = [r.name for r in rows if not r.passed]
    if failed:
        print("FAILED: " + "; ".join(failed))
        return EXIT_FAIL
    print("all checks passed")
    return EXIT_OK


def cmd_run(cfg, args):
    from .dynamics import DIAGNOSTIC_COLUMNS, initial_state, run, stable_dt
    from .snapshots import DiagnosticsWriter, write_snapshot

    out = _out_dir(cfg, args)
    grid = cfg.build_grid()
    model = cfg.build_model()
    ic = cfg.initial_condition
    seed = cfg.seed if ic.seed is None else ic.seed
    state = initial_state(grid, model.eos, ic.preset, ic.amplitude, seed)
    t_end = cfg.integrator.t_end
    if cfg.integrator.dt == "auto":
        dt_max = stable_dt(state, model.eos, model.transport, cfg.integrator.cfl, cfg.integrator.dfl)
        dt = t_end / math.ceil(t_end / dt_max)
    else:
        dt = float(cfg.integrator.dt)
    digest = cfg.digest()
    log.info("grid %s, dt %.6g, %d steps, config %s", grid.dims, dt, round(t_end / dt), digest[:12])

    def on_snapshot(st, step, t):
        write_snapshot(out, st, step, t, digest)

    with DiagnosticsWriter(os.path.join(out, "diagnostics.csv"), DIAGNOSTIC_COLUMNS) as writer:

        def on_record(rec):
            writer.write(rec)
            log.debug("t=%.6f H_drift=%.3e S_f=%.12g", rec["t"], rec["H_drift_rel"], rec["S_f"])

        traj = run(
            state,
            model,
            dt,
            t_end,
            output_every=cfg.integrator.output_every,
            on_record=on_record,
            snapshot_every=cfg.output.snapshot_every,
            on_snapshot=on_snapshot,
        )
    first, last = traj.records[0], traj.records[-1]
    print(
        f"t={last['t']:.6g} H_drift_rel={last['H_drift_rel']:.3e} "
        f"entropy_produced={last['S_f'] - first['S_f']:.6e} steps={traj.steps}"
    )
    return EXIT_OK


def cmd_check(cfg, args):
    from .checks import check_suite

    return _report(check_suite(cfg, log=log.info), args.out, "check.csv")


def cmd_rhs_compare(cfg, args):
    from .checks import rhs_compare_suite

    return _report(rhs_compare_suite(cfg), args.out, "rhs_compare.csv")


def cmd_derivative_audit(cfg, args):
    from .checks import derivative_audit_suite

    return _report(derivative_audit_suite(cfg), args.out, "derivative_audit.csv")


COMMANDS = {
    "run": cmd_run,
    "check": cmd_check,
    "rhs-compare": cmd_rhs_compare,
    "derivative-audit": cmd_derivative_audit,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="YAML run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides output.directory)")
    common.add_argument("--verbose", action="store_true", help="log progress to stderr")
    parser = argparse.ArgumentParser(prog="metriplectic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="integrate a configuration and write diagnostics")
    sub.add_parser("check", parents=[common], help="run the invariant suite")
    sub.add_parser("rhs-compare", parents=[common], help="compare bracket and direct right-hand sides")
    sub.add_parser("derivative-audit", parents=[common], help="finite-difference audit of functional derivatives")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    from .dynamics import NumericalAbort
    from .state import StateError

    try:
        cfg.build_model()
    except ValueError as exc:
        # the schema accepted the values but the physical model rejects them
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg, args)
    except NumericalAbort as exc:
        where = f" at t={exc.t:.6g}" if exc.t is not None else ""
        print(f"numerical abort{where}: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except StateError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
