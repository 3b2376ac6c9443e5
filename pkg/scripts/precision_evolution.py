"""GHZ precision and its local-minimum envelope against encoding time."""

import os

from metrol.experiments import label

from _common import num, read_rows, run_scenario

cfg, report = run_scenario("precision_evolution.yaml", __doc__)
for delta in cfg.physical.delta_grid:
    path = os.path.join(cfg.output.directory, f"precision_delta_{label(delta)}.csv")
    if not os.path.exists(path):
        continue
    env = [(num(r["t"]), num(r["delta_omega"])) for r in read_rows(path) if r["is_envelope_min"] == "1"]
    if not env:
        print(f"delta {delta:+6.1f}: no envelope minima")
        continue
    t_best, v_best = min(env, key=lambda p: p[1])
    print(f"delta {delta:+6.1f}: best {v_best:.5g} at t={t_best:.3f}, last minimum {env[-1][1]:.5g} at t={env[-1][0]:.3f}")
