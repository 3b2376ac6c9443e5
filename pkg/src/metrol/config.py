"""Experiment configuration: YAML file, dotted-path overrides, validation.

Grids may be given as explicit lists or as ``{start, stop, step}`` mappings
(``stop`` inclusive).
"""

from dataclasses import asdict, dataclass, field, fields, is_dataclass
import enum
import os

import numpy as np
import yaml

from .errors import ConfigError
from .metrology import InputState


class Scenario(str, enum.Enum):
    STEADY_STATE = "steady-state"
    SPECTRUM = "spectrum"
    PRECISION_EVOLUTION = "precision-evolution"
    SCALING_VS_N = "scaling-vs-n"
    MARKOVIAN_CHECK = "markovian-check"
    ASYMPTOTE_CHECK = "asymptote-check"


SCENARIO_HELP = {
    Scenario.STEADY_STATE: "long-time |c| and bound-state Z versus detuning",
    Scenario.SPECTRUM: "bound-state energy below the band edge versus omega0",
    Scenario.PRECISION_EVOLUTION: "GHZ precision and its minima envelope versus encoding time",
    Scenario.SCALING_VS_N: "minimal precision versus atom number at fixed time",
    Scenario.MARKOVIAN_CHECK: "numerical Markovian optimum against the closed form",
    Scenario.ASYMPTOTE_CHECK: "large-detuning plateau and decay rate against Z and fits",
}


@dataclass
class Physical:
    omega_c: float = 100.0
    delta_grid: list = field(default_factory=lambda: [-20.0])
    # None ties beta to omega0 through the photonic-crystal formula
    beta: float | None = None


@dataclass
class Probe:
    n: int = 10
    T: float = 1.0
    input_state: str = "ghz"
    n_grid: list = field(default_factory=lambda: list(range(2, 15)))
    n_cap: int = 40


@dataclass
class Numerics:
    h: float = 1e-3
    t_max: float = 10.0
    h_omega: float = 1e-4
    parallel_workers: int = 1
    method: str = "analytic"
    window: float = 0.1
    tail_fraction: float = 0.2
    gamma_grid: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    inset_deltas: list = field(default_factory=lambda: [-20.0])


@dataclass
class Output:
    directory: str = "metrol-out"
    format: str = "csv"


@dataclass
class ExperimentConfig:
    scenario: str = Scenario.STEADY_STATE.value
    physical: Physical = field(default_factory=Physical)
    probe: Probe = field(default_factory=Probe)
    numerics: Numerics = field(default_factory=Numerics)
    output: Output = field(default_factory=Output)

    def to_dict(self):
        return asdict(self)


def _expand_grid(value, path):
    if isinstance(value, dict):
        try:
            start, stop, step = float(value["start"]), float(value["stop"]), float(value["step"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: grid mapping needs numeric start/stop/step") from exc
        if step <= 0:
            raise ConfigError(f"{path}: step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [float(x) for x in np.round(start + step * np.arange(max(count, 0)), 12)]
    if isinstance(value, (list, tuple)):
        return list(value)
    raise ConfigError(f"{path}: expected a list or a start/stop/step mapping")


def _merge(obj, data, prefix):
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix or 'config'}: expected a mapping")
    names = {f.name: f for f in fields(obj)}
    for key, value in data.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in names:
            raise ConfigError(f"{path}: unknown field")
        current = getattr(obj, key)
        if is_dataclass(current):
            _merge(current, value, path)
        elif key.endswith("_grid") or key == "inset_deltas":
            setattr(obj, key, _expand_grid(value, path))
        else:
            setattr(obj, key, value)


def _number(value, path, kind=float):
    try:
        out = kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: expected {kind.__name__}, got {value!r}") from exc
    if kind is int and out != value:
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return out


def _positive(value, path, kind=float):
    out = _number(value, path, kind)
    if not out > 0:
        raise ConfigError(f"{path}: must be positive, got {value!r}")
    return out


def validate(cfg):
    """Coerce types in place and raise :class:`ConfigError` naming the bad field."""
    try:
        cfg.scenario = Scenario(cfg.scenario).value
    except ValueError:
        names = ", ".join(s.value for s in Scenario)
        raise ConfigError(f"scenario: unknown scenario {cfg.scenario!r} (one of {names})") from None

    p = cfg.physical
    p.omega_c = _positive(p.omega_c, "physical.omega_c")
    if p.beta is not None:
        p.beta = _positive(p.beta, "physical.beta")
    if not p.delta_grid:
        raise ConfigError("physical.delta_grid: empty")
    p.delta_grid = [_number(d, "physical.delta_grid") for d in p.delta_grid]

    pr = cfg.probe
    pr.n = _positive(pr.n, "probe.n", int)
    pr.T = _positive(pr.T, "probe.T")
    pr.n_cap = _positive(pr.n_cap, "probe.n_cap", int)
    try:
        pr.input_state = InputState(pr.input_state).value
    except ValueError:
        raise ConfigError(f"probe.input_state: must be 'uncorrelated' or 'ghz', got {pr.input_state!r}") from None
    if not pr.n_grid:
        raise ConfigError("probe.n_grid: empty")
    pr.n_grid = [_positive(n, "probe.n_grid", int) for n in pr.n_grid]
    if any(b <= a for a, b in zip(pr.n_grid, pr.n_grid[1:])):
        raise ConfigError("probe.n_grid: must be ascending")
    if max(pr.n_grid + [pr.n]) > pr.n_cap:
        raise ConfigError(f"probe.n_grid: atom count above n_cap={pr.n_cap}")

    nu = cfg.numerics
    nu.h = _positive(nu.h, "numerics.h")
    nu.t_max = _positive(nu.t_max, "numerics.t_max")
    steps = nu.t_max / nu.h
    if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
        raise ConfigError("numerics.t_max: must be an integer multiple of numerics.h")
    nu.h_omega = _positive(nu.h_omega, "numerics.h_omega")
    nu.parallel_workers = _positive(nu.parallel_workers, "numerics.parallel_workers", int)
    if nu.method not in ("analytic", "volterra"):
        raise ConfigError(f"numerics.method: must be 'analytic' or 'volterra', got {nu.method!r}")
    nu.window = _positive(nu.window, "numerics.window")
    nu.tail_fraction = _positive(nu.tail_fraction, "numerics.tail_fraction")
    if not nu.gamma_grid:
        raise ConfigError("numerics.gamma_grid: empty")
    nu.gamma_grid = [_positive(g, "numerics.gamma_grid") for g in nu.gamma_grid]
    nu.inset_deltas = [_number(d, "numerics.inset_deltas") for d in nu.inset_deltas]

    o = cfg.output
    if o.format not in ("csv", "json"):
        raise ConfigError(f"output.format: must be 'csv' or 'json', got {o.format!r}")
    if not o.directory:
        raise ConfigError("output.directory: empty")
    return cfg


def _parse_scalar(text):
    value = yaml.safe_load(text)
    if isinstance(value, str):
        # YAML 1.1 reads "5e-4" (no dot) as a string
        for kind in (int, float):
            try:
                return kind(value)
            except ValueError:
                pass
    return value


def apply_override(cfg, assignment):
    """Apply ``section.field=value``; the value is parsed as YAML."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r}: expected path=value")
    path, raw = assignment.split("=", 1)
    parts = path.strip().split(".")
    data = value = _parse_scalar(raw)
    for key in reversed(parts):
        data = {key: data}
    _merge(cfg, data, "")
    return value


def load_config(path=None, overrides=(), data=None):
    """Build a validated config from a YAML file and ``path=value`` overrides."""
    cfg = ExperimentConfig()
    if path is not None:
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"config: malformed YAML in {path}: {exc}") from exc
    if data:
        _merge(cfg, data, "")
    for item in overrides:
        apply_override(cfg, item)
    env_workers = os.environ.get("METROL_WORKERS")
    if env_workers and not _explicit_workers(data, overrides):
        cfg.numerics.parallel_workers = _parse_scalar(env_workers)
    return validate(cfg)


def _explicit_workers(data, overrides):
    if data and isinstance(data.get("numerics"), dict) and "parallel_workers" in data["numerics"]:
        return True
    return any(o.split("=", 1)[0].strip() == "numerics.parallel_workers" for o in overrides)
