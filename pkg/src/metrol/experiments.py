"""Scenario runners that turn a config into datasets and a manifest.

Each scenario is a list of independent points.  Points run in a bounded
process pool, are gathered by grid index, and written in grid order so
serial and parallel runs produce identical files.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import csv
import json
import math
import os
import platform
import time
import traceback

import numpy as np

from . import __version__
from .amplitude import analytic_pbg, large_detuning_asymptote, solve_volterra, uniform_grid
from .bound_state import find_bound_state
from .config import Scenario
from .errors import DomainError, MetrolError
from .metrology import (
    InputState,
    ProbeConfig,
    amplitude_for,
    markovian_limit,
    markovian_optimum,
    min_precision_vs_n,
    omega0_derivative,
    precision_curve,
)
from .spectral import AtomParams, PhotonicBandGap, pbg_beta

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


def convert_units(omega_c_ghz, gamma0_mhz, omega0_ghz):
    """Lab frequencies to gamma0 units: returns ``(atom, model)``.

    The band-gap model uses the photonic-crystal beta for this omega0.
    """
    for name, v in (("omega_c_ghz", omega_c_ghz), ("gamma0_mhz", gamma0_mhz), ("omega0_ghz", omega0_ghz)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")
    gamma0_ghz = gamma0_mhz / 1000.0
    omega_c = omega_c_ghz / gamma0_ghz
    omega0 = omega0_ghz / gamma0_ghz
    model = PhotonicBandGap(omega_c=omega_c, beta=pbg_beta(omega0, omega_c))
    return AtomParams(omega0=omega0), model


def system_for(cfg, delta):
    omega_c = cfg["physical"]["omega_c"]
    omega0 = omega_c + delta
    beta = cfg["physical"]["beta"]
    if beta is None:
        beta = pbg_beta(omega0, omega_c)
    elif not omega0 > 0:
        raise DomainError(f"omega0 = {omega0} is not positive")
    return PhotonicBandGap(omega_c=omega_c, beta=beta), AtomParams(omega0=omega0)


def fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, bool):
        return "1" if x else "0"
    return f"{float(x):.17g}"


def label(delta):
    return f"{float(delta):+g}".replace("+", "p").replace("-", "m")


@dataclass
class Dataset:
    name: str
    columns: list
    rows: list


@dataclass
class PointResult:
    index: int
    datasets: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    error: str | None = None


# --------------------------------------------------------------------------
# per-point work; module-level so the pool can pickle it

def _steady_state(cfg, delta):
    nu = cfg["numerics"]
    model, atom = system_for(cfg, delta)
    bs = find_bound_state(model, atom)
    traj = solve_volterra(model, atom, nu["t_max"], nu["h"])
    t = traj.t_grid
    tail = t >= (1 - nu["tail_fraction"]) * nu["t_max"] - 1e-12
    ana = analytic_pbg(atom, model, t)
    row = [delta, atom.omega0, model.beta, bs.E0, bs.Z,
           float(np.mean(traj.abs_c[tail])), float(np.mean(ana.abs_c[tail]))]
    out = [Dataset("steady_state", None, [row])]
    if any(math.isclose(delta, d) for d in nu["inset_deltas"]):
        rows = [[tt, c.real, c.imag, abs(c)] for tt, c in zip(t, traj.c_values)]
        out.append(Dataset(f"trajectory_delta_{label(delta)}", ["t", "re_c", "im_c", "abs_c"], rows))
    meta = {"delta": delta, "branches": list(ana.metadata["branches"]), "form": ana.metadata["form"],
            "max_abs_c": float(max(traj.abs_c.max(), ana.abs_c.max()))}
    return out, meta


def _spectrum(cfg, delta):
    model, atom = system_for(cfg, delta)
    bs = find_bound_state(model, atom)
    return [Dataset("spectrum", None, [[atom.omega0, delta, bs.E0 if bs.exists else None,
                                        bs.Z if bs.exists else None]])], {"residual": bs.residual}


def _probe(cfg, n=None):
    pr = cfg["probe"]
    return ProbeConfig(n or pr["n"], pr["T"], InputState(pr["input_state"]), pr["n_cap"])


def _precision_evolution(cfg, delta):
    nu = cfg["numerics"]
    model, atom = system_for(cfg, delta)
    traj = amplitude_for(model, atom, nu["t_max"], nu["h"], nu["method"])
    dc = omega0_derivative(traj, nu["h_omega"])
    curve = precision_curve(traj, _probe(cfg), dc=dc)
    mins = np.zeros(curve.t_grid.size, dtype=bool)
    mins[curve.envelope] = True
    rows = [[t, v, bool(m)] for t, v, m in zip(curve.t_grid, curve.delta_omega, mins)]
    meta = {"delta": delta, "envelope_points": int(curve.envelope.size)}
    meta.update({k: v for k, v in traj.metadata.items() if k in ("branches", "form", "frame")})
    if "branches" in meta:
        meta["branches"] = list(meta["branches"])
    return [Dataset(f"precision_delta_{label(delta)}", ["t", "delta_omega", "is_envelope_min"], rows)], meta


def _scaling(cfg, delta):
    nu = cfg["numerics"]
    model, atom = system_for(cfg, delta)
    rows = min_precision_vs_n(model, atom, nu["t_max"], cfg["probe"]["n_grid"], T=cfg["probe"]["T"],
                              h=nu["h"], method=nu["method"], window=nu["window"], h_omega=nu["h_omega"])
    bs = find_bound_state(model, atom)
    return ([Dataset(f"scaling_delta_{label(delta)}",
                     ["n", "min_delta_omega", "bound_long_time", "hl_reference"], [list(r) for r in rows])],
            {"delta": delta, "Z": bs.Z, "window_fraction": nu["window"]})


def _markovian(cfg, point):
    gamma, n = point
    T = cfg["probe"]["T"]
    u = markovian_optimum(gamma, n, T, InputState.UNCORRELATED)
    g = markovian_optimum(gamma, n, T, InputState.GHZ)
    row = [gamma, n, u[0], u[1], g[0], g[1], markovian_limit(gamma, n, T)]
    return [Dataset("markovian_check", None, [row])], {}


def _asymptote(cfg, delta):
    nu = cfg["numerics"]
    model, atom = system_for(cfg, delta)
    beta = model.beta
    plateau = rate = fitted = z = None
    if delta < 0:
        plateau = float(large_detuning_asymptote(atom, model, 0.0))
        z = find_bound_state(model, atom).Z
    else:
        rate = math.sqrt(beta ** 3 / delta)
        t, _ = uniform_grid(nu["t_max"], nu["h"])
        ana = analytic_pbg(atom, model, t)
        # stop before the residual bound-state plateau takes over
        floor = 100 * find_bound_state(model, atom).Z
        late = (t >= 0.2 * nu["t_max"]) & (ana.abs_c > floor)
        fitted = -float(np.polyfit(t[late], np.log(ana.abs_c[late]), 1)[0])
    return [Dataset("asymptote", None, [[delta, model.omega_c, beta, z, plateau, rate, fitted]])], {}


_SCENARIOS = {
    Scenario.STEADY_STATE: (_steady_state, "steady_state",
                            ["delta", "omega0", "beta", "E0", "Z", "abs_c_volterra", "abs_c_analytic"]),
    Scenario.SPECTRUM: (_spectrum, "spectrum", ["omega0", "delta", "E0", "Z"]),
    Scenario.PRECISION_EVOLUTION: (_precision_evolution, None, None),
    Scenario.SCALING_VS_N: (_scaling, None, None),
    Scenario.MARKOVIAN_CHECK: (_markovian, "markovian_check",
                               ["gamma_tilde", "n", "min_uncorrelated", "t_opt_uncorrelated",
                                "min_ghz", "t_opt_ghz", "closed_form"]),
    Scenario.ASYMPTOTE_CHECK: (_asymptote, "asymptote",
                               ["delta", "omega_c", "beta", "Z", "plateau_asymptote", "rate_asymptote", "fitted_rate"]),
}


def _points(cfg):
    if Scenario(cfg["scenario"]) is Scenario.MARKOVIAN_CHECK:
        return [(g, n) for g in cfg["numerics"]["gamma_grid"] for n in cfg["probe"]["n_grid"]]
    return list(cfg["physical"]["delta_grid"])


def _run_point(args):
    scenario, cfg, index, point = args
    func = _SCENARIOS[Scenario(scenario)][0]
    try:
        datasets, meta = func(cfg, point)
        return PointResult(index, datasets, meta)
    except (MetrolError, ValueError, ArithmeticError) as exc:
        return PointResult(index, error=f"{type(exc).__name__}: {exc}")
    except Exception:  # noqa: BLE001 - one bad point must not abort the sweep
        return PointResult(index, error=traceback.format_exc(limit=3))


# --------------------------------------------------------------------------
# writing

def _write(directory, fmt_name, name, columns, rows):
    if fmt_name == "csv":
        path = os.path.join(directory, f"{name}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([fmt(x) for x in r])
    else:
        path = os.path.join(directory, f"{name}.json")
        records = [dict(zip(columns, [fmt(x) for x in r])) for r in rows]
        with open(path, "w") as fh:
            json.dump({"columns": columns, "rows": records}, fh, indent=1)
            fh.write("\n")
    return path


@dataclass
class RunReport:
    exit_code: int
    files: list
    failures: list
    manifest: str | None
    wall_time: float


def run(config):
    """Execute the configured scenario and write its datasets plus ``manifest.json``.

    Returns a :class:`RunReport`; ``exit_code`` is 0 on success and 2 if
    some grid points failed (they are listed in the manifest).
    """
    start = time.perf_counter()
    cfg = config.to_dict()
    scenario = Scenario(cfg["scenario"])
    out_dir = cfg["output"]["directory"]
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write-test")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as exc:
        raise MetrolError(f"output.directory: cannot write to {out_dir!r}: {exc}") from exc

    points = _points(cfg)
    jobs = [(scenario.value, cfg, i, p) for i, p in enumerate(points)]
    workers = min(cfg["numerics"]["parallel_workers"], len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_point, jobs))
    else:
        results = [_run_point(j) for j in jobs]
    results.sort(key=lambda r: r.index)

    _, table_name, table_cols = _SCENARIOS[scenario]
    files, failures, point_meta = [], [], []
    table_rows = []
    for r in results:
        if r.error is not None:
            failures.append({"index": r.index, "point": _jsonable(points[r.index]), "error": r.error})
            continue
        point_meta.append({"index": r.index, **r.meta})
        for ds in r.datasets:
            if ds.columns is None:
                table_rows.extend(ds.rows)
            else:
                files.append(_write(out_dir, cfg["output"]["format"], ds.name, ds.columns, ds.rows))
    if table_name is not None and table_rows:
        files.insert(0, _write(out_dir, cfg["output"]["format"], table_name, table_cols, table_rows))

    exit_code = EXIT_PARTIAL if failures else EXIT_OK
    wall = time.perf_counter() - start
    manifest = {
        "scenario": scenario.value,
        "config": cfg,
        "code_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time_s": wall,
        "files": [os.path.basename(f) for f in files],
        "points": point_meta,
        "failures": failures,
        "exit_code": exit_code,
    }
    mpath = os.path.join(out_dir, "manifest.json")
    with open(mpath, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return RunReport(exit_code, files, failures, mpath, wall)


def _jsonable(x):
    if isinstance(x, tuple):
        return list(x)
    return x
