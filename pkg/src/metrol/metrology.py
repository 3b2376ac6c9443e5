"""Frequency-estimation precision from decoherence amplitudes.

Precision is the Cramer-Rao value ``delta_omega0 = (N F)^{-1/2}`` for the
Ramsey readout: ``N = n T / t`` repetitions with uncorrelated atoms, ``T / t``
with a GHZ probe.  Derivatives with respect to omega0 are central finite
differences over re-solved trajectories (beta held fixed).
"""

from collections import OrderedDict
from dataclasses import dataclass
import enum
import logging
import math
import threading

import numpy as np
from scipy import optimize

from .amplitude import (
    AmplitudeTrajectory,
    Method,
    analytic_pbg,
    bound_state_asymptote,
    markovian_c,
    solve_volterra,
)
from .bound_state import find_bound_state
from .errors import DegenerateRootsError, DomainError, MetrolError, ResolutionError, SingularOutcomeError
from .spectral import AtomParams, FlatMarkovian

log = logging.getLogger(__name__)

H_OMEGA = 1e-4
N_CAP = 40
NO_INFO = 1e-12
# fringes where |c^n| sits below this carry no usable signal
SIGNAL_FLOOR = 1e-8


class InputState(str, enum.Enum):
    UNCORRELATED = "uncorrelated"
    GHZ = "ghz"


@dataclass(frozen=True)
class ProbeConfig:
    n: int
    T: float = 1.0
    input_state: InputState = InputState.GHZ
    n_cap: int = N_CAP

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"atom count must be a positive integer, got {self.n}")
        if not self.T > 0:
            raise DomainError(f"total duration T must be positive, got {self.T}")
        object.__setattr__(self, "input_state", InputState(self.input_state))
        if self.n > self.n_cap:
            raise DomainError(f"n={self.n} exceeds the cap n_cap={self.n_cap}; raise n_cap explicitly")
        if self.n_cap != N_CAP:
            log.warning("atom-count cap raised to %d; c**n and Z**-(n+1) may under/overflow", self.n_cap)


@dataclass(frozen=True, eq=False)
class PrecisionCurve:
    t_grid: np.ndarray
    delta_omega: np.ndarray
    envelope: np.ndarray
    config: ProbeConfig

    @property
    def envelope_t(self):
        return self.t_grid[self.envelope]

    @property
    def envelope_values(self):
        return self.delta_omega[self.envelope]


# --------------------------------------------------------------------------
# Fisher information and ideal limits

def fisher_information(p, dp, atol=1e-9):
    """Classical Fisher information ``sum_i (dp_i)^2 / p_i``.

    Outcomes with ``p_i = 0`` and ``dp_i = 0`` contribute nothing; a zero
    probability with non-zero slope raises :class:`SingularOutcomeError`.
    """
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    if abs(p.sum() - 1.0) > atol:
        raise DomainError(f"probabilities sum to {p.sum()}, not 1")
    zero = p <= 0
    if np.any(zero & (dp != 0)):
        raise SingularOutcomeError("outcome with zero probability has non-zero derivative")
    keep = ~zero
    return float(np.sum(dp[keep] ** 2 / p[keep]))


def ideal_precision(config, t):
    """Noise-free precision: ``(n T t)^{-1/2}`` uncorrelated, ``(n^2 T t)^{-1/2}`` GHZ."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("encoding time must be positive")
    scale = config.n if config.input_state is InputState.UNCORRELATED else config.n ** 2
    return ((scale * config.T * t) ** -0.5)[()]


def sql_reference(config, t):
    return ideal_precision(ProbeConfig(config.n, config.T, InputState.UNCORRELATED, config.n_cap), t)


def hl_reference(config, t):
    return ideal_precision(ProbeConfig(config.n, config.T, InputState.GHZ, config.n_cap), t)


def scaling_bound(bs, config, t):
    """Long-time bound-state precision ``Z^{-(n+1)} (n^2 T t)^{-1/2}``."""
    if not bs.exists:
        raise DomainError("scaling bound needs a bound state")
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("encoding time must be positive")
    n = config.n
    return (bs.Z ** -(n + 1) * (n * n * config.T * t) ** -0.5)[()]


def validity_limit(Z):
    """``floor(-1/ln Z)``: the HL is approached only for n well below this."""
    if not 0 < Z <= 1:
        raise DomainError(f"Z must lie in (0, 1], got {Z}")
    return math.inf if Z == 1 else math.floor(-1.0 / math.log(Z))


# --------------------------------------------------------------------------
# omega0 derivatives

class _DerivativeCache:
    """Small LRU of re-solved amplitudes; reads are lock-free, inserts locked."""

    def __init__(self, maxsize=64):
        self._data = OrderedDict()
        self._lock = threading.Lock()
        self.maxsize = maxsize

    def get(self, key):
        return self._data.get(key)

    def put(self, key, value):
        with self._lock:
            self._data[key] = value
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)

    def clear(self):
        with self._lock:
            self._data.clear()


_CACHE = _DerivativeCache()


def _resolve_key(traj, omega0):
    meta = traj.metadata
    return (traj.method, traj.model, round(omega0, 12), traj.t_grid.size, traj.h,
            meta.get("frame"), meta.get("extrapolated"), meta.get("branches"), meta.get("form"))


def resolve(traj, omega0):
    """Recompute ``traj`` with the same method, model and grid at a new omega0."""
    key = _resolve_key(traj, omega0)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    atom = AtomParams(omega0=omega0)
    t = traj.t_grid
    meta = traj.metadata
    if traj.method is Method.VOLTERRA:
        out = solve_volterra(traj.model, atom, float(t[-1]), traj.h,
                             extrapolate=meta.get("extrapolated", True), frame=meta.get("frame"))
        out = out.c_values
    elif traj.method is Method.ANALYTIC_PBG:
        out = analytic_pbg(atom, traj.model, t, meta["branches"], meta["form"]).c_values
    elif traj.method is Method.MARKOVIAN:
        out = markovian_c(atom, traj.model, t).c_values
    elif traj.method is Method.BOUND_STATE:
        bs = find_bound_state(traj.model, atom)
        out = bound_state_asymptote(bs, t).c_values
    else:
        raise DomainError(f"cannot re-solve method {traj.method}")
    _CACHE.put(key, out)
    return out


def omega0_derivative(traj, h_omega=H_OMEGA, check=False, rtol=1e-3):
    """``d c / d omega0`` on the trajectory grid.

    Central differences over re-solves, except for a flat Markovian
    reservoir where the derivative is exact.

    With ``check`` the estimate is repeated at ``h_omega / 2`` and must
    agree to ``rtol`` relative to its largest magnitude.
    """
    if traj.atom is None or traj.model is None:
        raise DomainError("trajectory lacks model/atom snapshot; cannot differentiate")
    if traj.method is Method.MARKOVIAN and isinstance(traj.model, FlatMarkovian):
        # flat reservoir: omega0 enters only through exp(-i omega0 t)
        return -1j * traj.t_grid * traj.c_values
    w0 = traj.atom.omega0
    dc = (resolve(traj, w0 + h_omega) - resolve(traj, w0 - h_omega)) / (2 * h_omega)
    if check:
        half = h_omega / 2
        dc2 = (resolve(traj, w0 + half) - resolve(traj, w0 - half)) / (2 * half)
        scale = np.max(np.abs(dc2))
        if scale > 0 and np.max(np.abs(dc - dc2)) > rtol * scale:
            raise MetrolError(f"omega0 derivative not converged at h_omega={h_omega:g}")
    return dc


# --------------------------------------------------------------------------
# dissipative precision

def _precision_from_signal(signal, dsignal, repetitions_per_time, t):
    """(reps/t * dS^2 / (1 - S^2))^{-1/2} with +inf where no information."""
    t = np.asarray(t, dtype=float)
    out = np.full(np.shape(signal), np.inf)
    visibility = 1.0 - signal ** 2
    ok = (np.abs(dsignal) >= NO_INFO) & (visibility > 0) & (t > 0)
    fisher = repetitions_per_time * dsignal[ok] ** 2 / (t[ok] * visibility[ok])
    out[ok] = fisher ** -0.5
    return out


def _select(traj, t):
    if t is None:
        return slice(None)
    return np.array([traj.index_of(x) for x in np.atleast_1d(t)])


def precision_uncorrelated(traj, config, t=None, dc=None, h_omega=H_OMEGA):
    """Uncorrelated-probe precision ``{n T [d Re c]^2 / (t [1 - Re^2 c])}^{-1/2}``.

    ``t`` may be a grid time, an array of grid times, or None for the whole
    grid.  Points with no information come back as +inf.
    """
    if dc is None:
        dc = omega0_derivative(traj, h_omega)
    sel = _select(traj, t)
    c = traj.c_values[sel]
    out = _precision_from_signal(c.real, np.asarray(dc)[sel].real, config.n * config.T, traj.t_grid[sel])
    return out[0] if np.ndim(t) == 0 and t is not None else out


def precision_entangled(traj, config, t=None, dc=None, h_omega=H_OMEGA):
    """GHZ-probe precision ``{T [d Re c^n]^2 / (t [1 - Re^2 c^n])}^{-1/2}``."""
    if dc is None:
        dc = omega0_derivative(traj, h_omega)
    sel = _select(traj, t)
    n = config.n
    c = traj.c_values[sel]
    dcn = n * c ** (n - 1) * np.asarray(dc)[sel]
    out = _precision_from_signal((c ** n).real, dcn.real, config.T, traj.t_grid[sel])
    return out[0] if np.ndim(t) == 0 and t is not None else out


def precision(traj, config, t=None, dc=None, h_omega=H_OMEGA):
    if config.input_state is InputState.UNCORRELATED:
        return precision_uncorrelated(traj, config, t, dc, h_omega)
    return precision_entangled(traj, config, t, dc, h_omega)


# --------------------------------------------------------------------------
# curves and envelopes

def local_minima(values):
    """Indices of strict three-point local minima (infinite entries never qualify)."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return np.array([], dtype=int)
    mid = v[1:-1]
    mask = np.isfinite(mid) & (mid < v[:-2]) & (mid < v[2:])
    return np.flatnonzero(mask) + 1


def fringe_samples(traj, n):
    """Fewest grid samples per fringe of Re c^n where the signal is above the floor."""
    c = traj.c_values
    floor = SIGNAL_FLOOR ** (1.0 / n)
    nz = (np.abs(c[:-1]) > floor) & (np.abs(c[1:]) > floor)
    step = np.abs(np.angle(c[1:][nz] / c[:-1][nz]))
    worst = n * np.max(step) if step.size else 0.0
    return math.inf if worst == 0 else 2 * math.pi / worst


def precision_curve(traj, config, dc=None, min_samples=4.0, h_omega=H_OMEGA):
    """Precision on the full grid together with its local-minimum envelope.

    Raises :class:`ResolutionError` when the grid puts fewer than
    ``min_samples`` points on one fringe of the signal.
    """
    n_eff = config.n if config.input_state is InputState.GHZ else 1
    samples = fringe_samples(traj, n_eff)
    if samples < min_samples:
        raise ResolutionError(
            f"grid under-resolves fringes ({samples:.2f} samples per fringe)",
            suggested_h=traj.h * samples / (2 * min_samples),
        )
    values = precision(traj, config, dc=dc, h_omega=h_omega)
    return PrecisionCurve(traj.t_grid, values, local_minima(values), config)


def min_precision_at(curve, t, window=0.1):
    """Best envelope value with encoding time in ``[(1 - window) t, t]``.

    Returns ``(value, time)``; ``(nan, nan)`` if no minimum falls inside.
    """
    te = curve.envelope_t
    sel = (te >= (1 - window) * t - 1e-12) & (te <= t + 1e-12)
    if not np.any(sel):
        return math.nan, math.nan
    vals = curve.envelope_values[sel]
    k = int(np.argmin(vals))
    return float(vals[k]), float(te[sel][k])


def amplitude_for(model, atom, t_max, h, method="analytic"):
    """Amplitude trajectory by the named route on ``[0, t_max]``."""
    key = method.value if isinstance(method, Method) else str(method)
    n = int(round(t_max / h))
    t = h * np.arange(n + 1)
    if key in ("analytic", Method.ANALYTIC_PBG.value):
        try:
            return analytic_pbg(atom, model, t)
        except DegenerateRootsError:
            log.warning("degenerate cubic at omega0=%g; falling back to the Volterra solver", atom.omega0)
            return solve_volterra(model, atom, t_max, h)
    if key == Method.VOLTERRA.value:
        return solve_volterra(model, atom, t_max, h)
    if key == Method.MARKOVIAN.value:
        return markovian_c(atom, model, t)
    raise DomainError(f"unknown amplitude method {method!r}")


def min_precision_vs_n(model, atom, t_fixed, n_grid, T=1.0, h=1e-3, method="analytic",
                       window=0.1, h_omega=H_OMEGA):
    """Rows ``(n, min_delta_omega, bound_long_time, hl_reference)`` for each n.

    One amplitude solve (plus its two derivative re-solves) serves every n.
    """
    n_grid = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise DomainError("n grid must be ascending")
    traj = amplitude_for(model, atom, t_fixed, h, method)
    dc = omega0_derivative(traj, h_omega)
    bs = find_bound_state(model, atom)
    rows = []
    for n in n_grid:
        cfg = ProbeConfig(n, T, InputState.GHZ, n_cap=max(N_CAP, n))
        curve = precision_curve(traj, cfg, dc=dc)
        best, _ = min_precision_at(curve, t_fixed, window)
        bound = float(scaling_bound(bs, cfg, t_fixed)) if bs.exists else math.nan
        rows.append((n, best, bound, float(hl_reference(cfg, t_fixed))))
    return rows


# --------------------------------------------------------------------------
# Markovian optimum

def markovian_optimum(gamma_tilde, n, T=1.0, input_state=InputState.UNCORRELATED, omega0=10.0):
    """Numerically minimise the Markovian precision over encoding time and omega0.

    Returns ``(min_delta_omega, t_opt, omega0_opt)``.  A coarse grid over one
    fringe period in omega0 and a few decay times seeds Nelder-Mead.
    """
    model = FlatMarkovian(gamma_tilde=gamma_tilde)
    cfg = ProbeConfig(n, T, input_state, n_cap=max(N_CAP, n))

    def value(params):
        t, w0 = params
        if t <= 0:
            return math.inf
        traj = markovian_c(AtomParams(omega0=w0), model, np.array([0.0, t]))
        return float(precision(traj, cfg, t=t))

    n_eff = n if cfg.input_state is InputState.GHZ else 1
    t_scale = 1.0 / (n_eff * gamma_tilde)
    best = None
    for t in np.linspace(0.1, 4.0, 40) * t_scale:
        period = 2 * math.pi / (n_eff * t)
        for w0 in omega0 + np.linspace(0, period, 32, endpoint=False):
            v = value((t, w0))
            if best is None or v < best[0]:
                best = (v, t, w0)
    res = optimize.minimize(value, x0=[best[1], best[2]], method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
    t_opt, w_opt = res.x
    return float(res.fun), float(t_opt), float(w_opt)


def markovian_limit(gamma_tilde, n, T=1.0):
    """Closed-form optimum ``(n T / (gamma e))^{-1/2}`` shared by both probes."""
    return (n * T / (gamma_tilde * math.e)) ** -0.5
