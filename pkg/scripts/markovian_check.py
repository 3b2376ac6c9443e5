"""Numerical Markovian optimum against the closed form."""

import os

from _common import num, read_rows, run_scenario

cfg, report = run_scenario("markovian_check.yaml", __doc__)
for r in read_rows(os.path.join(cfg.output.directory, "markovian_check.csv")):
    closed = num(r["closed_form"])
    print(f"gamma {num(r['gamma_tilde']):4.1f} n {int(r['n']):2d}: "
          f"uncorrelated {num(r['min_uncorrelated']) / closed - 1:+.1e} at t={num(r['t_opt_uncorrelated']):.4f}, "
          f"ghz {num(r['min_ghz']) / closed - 1:+.1e} at t={num(r['t_opt_ghz']):.4f}")
