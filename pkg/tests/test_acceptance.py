"""Acceptance criteria, one test each; every test emits a PASS/FAIL line."""

import itertools
import math
import os

import numpy as np
import pytest

from metrol.amplitude import (
    analytic_pbg,
    convergence_ratio,
    kraus_channel,
    large_detuning_asymptote,
    markovian_c,
    solve_volterra,
)
from metrol.bound_state import find_bound_state
from metrol.config import load_config
from metrol.experiments import run
from metrol.metrology import (
    InputState,
    ProbeConfig,
    amplitude_for,
    hl_reference,
    ideal_precision,
    markovian_limit,
    markovian_optimum,
    min_precision_vs_n,
    precision,
    precision_curve,
    scaling_bound,
    sql_reference,
    validity_limit,
)
from metrol.spectral import AtomParams, FlatMarkovian, PhotonicBandGap, pbg_system

T_MAX = 10.0
H = 1e-3


def test_criterion_1_ideal_limits(verdict):
    worst = 0.0
    for n, T, t in itertools.product([1, 4, 12], [0.5, 1.0, 2.0], [0.3, 1.7, 6.1]):
        grid = np.array([0.0, t])
        traj = markovian_c(AtomParams(10.0), FlatMarkovian(0.0), grid)
        for state in InputState:
            cfg = ProbeConfig(n, T, state)
            got = precision(traj, cfg, t=t)
            worst = max(worst, abs(got / ideal_precision(cfg, t) - 1))
    verdict(1, worst <= 1e-10, f"coupling-free precision vs ideal, max rel err {worst:.2e} (tol 1e-10)")


def test_criterion_2_markovian_optimum(verdict):
    worst_val = worst_t = 0.0
    for gamma, n in itertools.product([0.5, 1.0, 2.0], [2, 5, 10]):
        closed = markovian_limit(gamma, n)
        for state, t_expect in ((InputState.UNCORRELATED, 1 / gamma), (InputState.GHZ, 1 / (n * gamma))):
            value, t_opt, _ = markovian_optimum(gamma, n, 1.0, state)
            worst_val = max(worst_val, abs(value / closed - 1))
            worst_t = max(worst_t, abs(t_opt / t_expect - 1))
    ok = worst_val <= 0.01 and worst_t <= 0.02
    verdict(2, ok, f"Markovian optimum rel err {worst_val:.1e} (tol 1e-2), t_opt rel err {worst_t:.1e} (tol 2e-2)")


def test_criterion_3_solver_formula_equivalence(verdict):
    worst = 0.0
    for delta in (-30.0, -20.0, -10.0, 10.0, 20.0):
        model, atom = pbg_system(delta)
        vol = solve_volterra(model, atom, T_MAX, H)
        ana = analytic_pbg(atom, model, vol.t_grid)
        worst = max(worst, float(np.max(np.abs(vol.c_values - ana.c_values))))
    verdict(3, worst <= 1e-3, f"Volterra vs closed form, L_inf {worst:.2e} (tol 1e-3)")


def test_criterion_4_steady_state_vs_residue(verdict):
    gap_err, above = 0.0, []
    for delta in np.arange(-80.0, 30.0 + 1e-9, 5.0):
        model, atom = pbg_system(float(delta))
        traj = solve_volterra(model, atom, T_MAX, H)
        long_time = float(np.mean(traj.abs_c[traj.t_grid >= 8.0 - 1e-12]))
        if delta <= -5:
            gap_err = max(gap_err, abs(long_time - find_bound_state(model, atom).Z))
        elif delta >= 10:
            above.append((float(delta), long_time))
    worst_above = max(above, key=lambda p: p[1])
    ok = gap_err <= 0.02 and worst_above[1] < 0.1
    detail = (f"|<|c|> - Z| max {gap_err:.1e} for delta<=-5 (tol 0.02); "
              f"max <|c|> above edge {worst_above[1]:.3f} at delta={worst_above[0]:+g} (need < 0.1)")
    verdict(4, ok, detail)


def test_criterion_5_envelope_asymptote(verdict):
    model, atom = pbg_system(-20.0)
    cfg = ProbeConfig(10, 1.0)
    traj = amplitude_for(model, atom, T_MAX, H)
    curve = precision_curve(traj, cfg)
    sel = curve.envelope_t >= 8.0
    bs = find_bound_state(model, atom)
    ratio = curve.envelope_values[sel] / scaling_bound(bs, cfg, curve.envelope_t[sel])
    worst = float(np.max(np.abs(ratio - 1)))
    verdict(5, sel.sum() > 0 and worst <= 0.1,
            f"{sel.sum()} envelope minima in [8,10] vs bound-state law, max rel dev {worst:.3f} (tol 0.1)")


def test_criterion_6_scaling_trend(verdict):
    n_grid = list(range(2, 15))
    table, problems = {}, []
    for delta in (-10.0, -20.0, -40.0):
        model, atom = pbg_system(delta)
        rows = min_precision_vs_n(model, atom, T_MAX, n_grid)
        Z = find_bound_state(model, atom).Z
        small_n = validity_limit(Z) // 2
        table[delta] = {n: best for n, best, _, _ in rows}
        for n, best, bound, hl in rows:
            sql = float(sql_reference(ProbeConfig(n), T_MAX))
            if not hl <= best <= sql:
                problems.append(f"delta={delta:+g} n={n} outside [HL, SQL] ({best:.4g} vs SQL {sql:.4g})")
            if n <= small_n and abs(best / bound - 1) > 0.1:
                problems.append(f"delta={delta:+g} n={n} off bound-state law by {best / bound - 1:+.3f}")
    for n in n_grid:
        seq = [table[d][n] for d in (-10.0, -20.0, -40.0)]
        if not all(b < a for a, b in zip(seq, seq[1:])):
            problems.append(f"n={n} not monotone toward HL in delta")
    head = "; ".join(problems[:3]) + (f" (+{len(problems) - 3} more)" if len(problems) > 3 else "")
    verdict(6, not problems, "min precision vs n trend holds" if not problems else head)


def test_criterion_7_large_detuning(verdict):
    model, atom = pbg_system(-500.0, omega_c=600.0)
    plateau = float(large_detuning_asymptote(atom, model, 0.0))
    Z = find_bound_state(model, atom).Z
    plateau_err = abs(plateau / Z - 1)

    model, atom = pbg_system(500.0)
    t = np.linspace(2.0, T_MAX, 801)
    fitted = -np.polyfit(t, np.log(analytic_pbg(atom, model, t).abs_c), 1)[0]
    rate = math.sqrt(model.beta ** 3 / 500.0)
    rate_err = abs(fitted / rate - 1)
    verdict(7, plateau_err <= 0.01 and rate_err <= 0.05,
            f"plateau vs Z rel err {plateau_err:.1e} (tol 1e-2); decay rate rel err {rate_err:.1e} (tol 5e-2)")


def test_criterion_8_property_suites(verdict, rng, tmp_path):
    checks = {}

    worst = 0.0
    for _ in range(100):
        c = math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())
        worst = max(worst, float(np.max(np.abs(kraus_channel(c).completeness() - np.eye(2)))))
    checks["kraus"] = worst <= 1e-12

    peak = 0.0
    t = np.linspace(0.0, T_MAX, 2001)
    for delta in np.arange(-80.0, 30.0 + 1e-9, 10.0):
        model, atom = pbg_system(float(delta))
        peak = max(peak, analytic_pbg(atom, model, t).abs_c.max(),
                   solve_volterra(model, atom, 2.0, H).abs_c.max())
        if delta > 0:
            peak = max(peak, markovian_c(atom, model, t).abs_c.max())
    checks["|c|<=1"] = peak <= 1 + 1e-9

    res = brk = dz = 0.0
    for delta in (-40.0, -20.0, -5.0, 10.0):
        model, atom = pbg_system(delta)
        bs = find_bound_state(model, atom)
        res = max(res, bs.residual)
        brk = max(brk, abs(find_bound_state(model, atom, lower=bs.E0 - 500.0).E0 - bs.E0))
        hw = 1e-5
        up = find_bound_state(model, AtomParams(atom.omega0 + hw)).E0
        dn = find_bound_state(model, AtomParams(atom.omega0 - hw)).E0
        dz = max(dz, abs((up - dn) / (2 * hw) - bs.Z))
    checks["residual"] = res <= 1e-10
    checks["bracket"] = brk <= 1e-9
    checks["dE0=Z"] = dz <= 1e-6

    model, atom = pbg_system(-20.0)
    ratio = convergence_ratio(model, atom, 5.0, H)
    checks["halving"] = ratio >= 2.5

    blobs = []
    for workers in (1, 8):
        out = tmp_path / f"w{workers}"
        cfg = load_config(data={"scenario": "steady-state",
                                "physical": {"delta_grid": [-40.0, -20.0, -5.0, 5.0, 20.0]},
                                "numerics": {"t_max": 2.0, "parallel_workers": workers},
                                "output": {"directory": str(out)}})
        run(cfg)
        blobs.append({f: (out / f).read_bytes() for f in sorted(os.listdir(out)) if f != "manifest.json"})
    checks["parallel"] = blobs[0] == blobs[1]

    detail = (f"kraus {worst:.0e}, max|c| {peak:.12f}, residual {res:.0e}, bracket {brk:.0e}, "
              f"dE0/dw0-Z {dz:.0e}, halving ratio {ratio:.2f}, parallel identical {checks['parallel']}")
    failed = [k for k, v in checks.items() if not v]
    verdict(8, not failed, detail + (f"; failed: {failed}" if failed else ""))
