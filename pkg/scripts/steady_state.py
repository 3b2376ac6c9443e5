"""Long-time |c| against bound-state residue across detuning."""

import os

from _common import num, read_rows, run_scenario

cfg, report = run_scenario("steady_state.yaml", __doc__)
rows = read_rows(os.path.join(cfg.output.directory, "steady_state.csv"))
print(f"{'delta':>7} {'Z':>9} {'<|c|> volterra':>15} {'<|c|> analytic':>15}")
for r in rows:
    print(f"{num(r['delta']):7.1f} {num(r['Z']):9.5f} {num(r['abs_c_volterra']):15.5f} {num(r['abs_c_analytic']):15.5f}")
