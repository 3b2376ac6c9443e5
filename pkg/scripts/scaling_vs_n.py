"""Minimal precision against atom number, with HL and bound-state references."""

import os

from metrol.experiments import label

from _common import num, read_rows, run_scenario

cfg, report = run_scenario("scaling_vs_n.yaml", __doc__)
for delta in cfg.physical.delta_grid:
    path = os.path.join(cfg.output.directory, f"scaling_delta_{label(delta)}.csv")
    if not os.path.exists(path):
        continue
    print(f"delta {delta:+g}")
    for r in read_rows(path):
        best, bound, hl = num(r["min_delta_omega"]), num(r["bound_long_time"]), num(r["hl_reference"])
        print(f"  n={int(r['n']):2d}  min {best:.5f}  bound {bound:.5f}  HL {hl:.5f}  min/HL {best / hl:.3f}")
