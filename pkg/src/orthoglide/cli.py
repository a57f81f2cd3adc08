"""Command-line front end.

    orthoglide simulate [--config F] [--seed N] [--out log.csv]
    orthoglide grid [--config F] [--jobs N] [--out grid.csv]
    orthoglide sensor-characterize [--config F] [--out table.csv]
    orthoglide verify [--suite NAME ...]
    orthoglide config dump

Exit codes: 0 success, 1 runtime failure, 2 configuration error.  Errors
are reported on stderr as one JSON object.
"""
import argparse
import json
import os
import sys

from . import config as C
from . import experiments as E
from . import verify as V
from .errors import ConfigError, OrthoglideError
from .simulator import compute_metrics, run_simulation
from .trajectory import make_path

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def _overrides(pairs):
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not section.key=value")
        out[key.strip()] = value.strip()
    return out


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        d = os.path.dirname(os.path.abspath(out))
        os.makedirs(d, exist_ok=True)
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _load(args):
    ov = _overrides(args.set)
    if getattr(args, "seed", None) is not None:
        ov["simulator.seed"] = str(args.seed)
        ov.setdefault("grid.base_seed", str(args.seed))
    return C.load(args.config, ov)


def cmd_simulate(args):
    cp = _load(args)
    cfg = C.sim_config(cp)
    path = make_path(C.path_spec(cp), cfg.true_params.geom)
    log = run_simulation(cfg, path)
    _emit(log.to_csv(), args.out)
    m = compute_metrics(log)
    summary = {"controller": cfg.controller.value, "seed": cfg.seed, "rows": len(log),
               "static_um": E.um(m.static_accuracy), "dynamic_um": E.um(m.dynamic_accuracy),
               "max_um": E.um(m.max_error), "faults": int((log.flags & 1).sum())}
    print(json.dumps(summary), file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return EXIT_OK


def cmd_grid(args):
    cp = _load(args)
    records, summaries = E.run_grid(cp, jobs=args.jobs)
    _emit(E.grid_csv(summaries), args.out)
    if args.out not in (None, "-"):
        stem, ext = os.path.splitext(args.out)
        _emit(E.runs_csv(records), f"{stem}_runs{ext or '.csv'}")
    failed = sum(r.status != "ok" for r in records)
    print(json.dumps({"cells": len(summaries), "runs": len(records), "failed_runs": failed}),
          file=sys.stderr)
    return EXIT_OK


def cmd_characterize(args):
    cp = _load(args)
    rows, vision = E.sensor_characterization(cp)
    _emit(E.characterization_csv(rows, vision), args.out)
    return EXIT_OK


def cmd_verify(args):
    suites = args.suite or list(V.SUITES)
    for s in suites:
        if s not in V.SUITES:
            raise ConfigError(f"unknown suite {s!r}; choose from {', '.join(V.SUITES)}")
    p = C.machine_params(_load(args))
    checks = V.run(suites, p, seed=args.seed or 0, faults=V.Faults(args.corrupt_d4))
    print(V.format_table(checks))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_RUNTIME


def cmd_config(args):
    if args.action != "dump":
        raise ConfigError(f"unknown config action {args.action!r}")
    if args.config is None and not args.set:
        _emit(C.dump_defaults(), args.out)
    else:
        _emit(C.as_text(_load(args)), args.out)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file; see `config dump` for every key")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override one config value (repeatable)")
    common.add_argument("--seed", type=int, help="base seed")
    common.add_argument("--out", help="output file (default stdout)")

    ap = argparse.ArgumentParser(prog="orthoglide", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", parents=[common], help="one closed-loop run, log as CSV")
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("grid", parents=[common], help="controller comparison grid")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_grid)
    p = sub.add_parser("sensor-characterize", parents=[common],
                       help="vision error vs acceleration on a linear move")
    p.set_defaults(func=cmd_characterize)
    p = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    p.add_argument("--suite", action="append", help=f"one of {', '.join(V.SUITES)} (repeatable)")
    p.add_argument("--corrupt-d4", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("config", parents=[common], help="configuration utilities")
    p.add_argument("action", choices=["dump"])
    p.set_defaults(func=cmd_config)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": "ConfigError", "message": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    except (OrthoglideError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
