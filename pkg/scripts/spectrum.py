"""Bound-state energy and residue as omega0 crosses the band edge."""

import os

from _common import num, read_rows, run_scenario

cfg, report = run_scenario("spectrum.yaml", __doc__)
rows = read_rows(os.path.join(cfg.output.directory, "spectrum.csv"))
for r in rows[:: max(1, len(rows) // 12)]:
    gap = cfg.physical.omega_c - num(r["E0"])
    print(f"omega0 {num(r['omega0']):7.2f}  E0 {num(r['E0']):10.5f}  omega_c - E0 {gap:9.5f}  Z {num(r['Z']):.5f}")
