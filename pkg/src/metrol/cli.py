"""Command-line entry point: ``metrol run | validate | units``."""

import argparse
import json
import logging
import sys

from .config import SCENARIO_HELP, Scenario, load_config
from .errors import ConfigError, MetrolError
from .experiments import EXIT_CONFIG, convert_units, run


def _scenario_help():
    return "; ".join(f"{s.value}: {SCENARIO_HELP[s]}" for s in Scenario)


def build_parser():
    ap = argparse.ArgumentParser(prog="metrol", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario and write its datasets")
    r.add_argument("--config", required=True, help="YAML experiment file")
    r.add_argument("--scenario", choices=[s.value for s in Scenario], help=_scenario_help())
    r.add_argument("--out", help="output directory (output.directory)")
    r.add_argument("--workers", type=int, help="worker processes (numerics.parallel_workers); "
                                               "default from METROL_WORKERS")
    r.add_argument("--set", action="append", default=[], metavar="PATH=VALUE",
                   help="override any config field, e.g. --set numerics.h=5e-4")

    v = sub.add_parser("validate", help="check a config file without running it")
    v.add_argument("--config", required=True)
    v.add_argument("--set", action="append", default=[], metavar="PATH=VALUE")

    u = sub.add_parser("units", help="convert lab frequencies to gamma0 units")
    u.add_argument("--omega-c-ghz", type=float, required=True)
    u.add_argument("--gamma0-mhz", type=float, required=True)
    u.add_argument("--omega0-ghz", type=float, required=True)
    return ap


def _overrides(args):
    out = list(args.set)
    if getattr(args, "scenario", None):
        out.append(f"scenario={args.scenario}")
    if getattr(args, "out", None):
        out.append(f"output.directory={json.dumps(args.out)}")
    if getattr(args, "workers", None) is not None:
        out.append(f"numerics.parallel_workers={args.workers}")
    return out


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)

    if args.command == "units":
        try:
            atom, model = convert_units(args.omega_c_ghz, args.gamma0_mhz, args.omega0_ghz)
        except MetrolError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"omega_c = {model.omega_c:.10g} gamma0")
        print(f"omega0  = {atom.omega0:.10g} gamma0")
        print(f"delta   = {atom.detuning(model):.10g} gamma0")
        print(f"beta    = {model.beta:.10g} gamma0")
        return 0

    try:
        cfg = load_config(args.config, _overrides(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(f"ok: scenario {cfg.scenario}")
        return 0

    try:
        report = run(cfg)
    except MetrolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for f in report.files:
        print(f"wrote {f}")
    for fail in report.failures:
        print(f"point {fail['index']} ({fail['point']}) failed: {fail['error']}", file=sys.stderr)
    print(f"manifest {report.manifest} ({report.wall_time:.1f} s)")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
