"""Large-detuning plateau and decay rate against Z and a fitted slope."""

import os

from _common import num, read_rows, run_scenario

cfg, report = run_scenario("asymptote_check.yaml", __doc__)
for r in read_rows(os.path.join(cfg.output.directory, "asymptote.csv")):
    delta = num(r["delta"])
    if delta < 0:
        print(f"delta {delta:+g}: plateau {num(r['plateau_asymptote']):.6f} vs Z {num(r['Z']):.6f}")
    else:
        print(f"delta {delta:+g}: rate {num(r['rate_asymptote']):.6f} vs fitted {num(r['fitted_rate']):.6f}")
