"""Shared plumbing for the scenario scripts."""

import argparse
import csv
import os
import sys

from metrol.config import load_config
from metrol.experiments import run

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def run_scenario(config_name, description):
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--config", default=os.path.join(ROOT, "configs", config_name))
    ap.add_argument("--out", help="override output.directory")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--set", action="append", default=[], metavar="PATH=VALUE")
    args = ap.parse_args()
    overrides = list(args.set)
    if args.out:
        overrides.append(f"output.directory={args.out}")
    if args.workers:
        overrides.append(f"numerics.parallel_workers={args.workers}")
    cfg = load_config(args.config, overrides)
    report = run(cfg)
    for f in report.failures:
        print(f"point {f['index']} failed: {f['error']}", file=sys.stderr)
    print(f"{len(report.files)} file(s) in {cfg.output.directory} ({report.wall_time:.1f} s)")
    return cfg, report


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def num(text):
    return float(text) if text else float("nan")
