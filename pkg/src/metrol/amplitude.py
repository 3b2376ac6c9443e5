"""Decoherence amplitude c(t) of a single atom in its local reservoir.

Four routes are provided:

* :func:`solve_volterra` integrates the exact memory equation
  ``c' + i omega0 c + int_0^t f(t - tau) c(tau) dtau = 0``, ``c(0) = 1``;
* :func:`analytic_pbg` evaluates the closed-form band-gap solution;
* :func:`markovian_c` is the memoryless exponential decay;
* :func:`bound_state_asymptote` keeps only the bound-state pole.

Plus the Kraus pair of the resulting amplitude-damping channel and the
time-dependent rates of the exact master equation.
"""

from dataclasses import dataclass, field
import csv
import enum
import itertools
import math
import warnings

import numpy as np
from scipy.special import erf, roots_jacobi, wofz

from .bound_state import find_bound_state
from .errors import (
    AmplitudeVanishesError,
    DegenerateRootsError,
    DomainError,
    ResolutionError,
)
from .spectral import PhotonicBandGap, markovian_rate

DEFAULT_H = 1e-3
DEGENERACY_RTOL = 1e-12
NORM_SLACK = 1e-9


class Method(str, enum.Enum):
    VOLTERRA = "volterra"
    ANALYTIC_PBG = "analytic_pbg"
    MARKOVIAN = "markovian"
    BOUND_STATE = "bound_state_asymptotic"


@dataclass(frozen=True, eq=False)
class AmplitudeTrajectory:
    """Complex amplitude sampled on a uniform grid starting at t = 0."""

    t_grid: np.ndarray
    c_values: np.ndarray
    method: Method
    model: object
    atom: object
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.array(self.t_grid, dtype=float)
        c = np.array(self.c_values, dtype=complex)
        if t.shape != c.shape or t.ndim != 1:
            raise ValueError("t_grid and c_values must be 1-D and of equal length")
        t.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "c_values", c)

    @property
    def h(self):
        return float(self.t_grid[1] - self.t_grid[0]) if self.t_grid.size > 1 else math.nan

    @property
    def abs_c(self):
        return np.abs(self.c_values)

    def index_of(self, t):
        """Grid index of time ``t``; raises if ``t`` is not on the grid."""
        k = int(round((t - self.t_grid[0]) / self.h))
        if k < 0 or k >= self.t_grid.size or abs(self.t_grid[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise DomainError(f"t={t} is not on the trajectory grid")
        return k

    def to_csv(self, path):
        """Write columns ``t, re_c, im_c, abs_c`` with 17 significant digits."""
        write_trajectory_csv(path, self)


def write_trajectory_csv(path, traj):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "re_c", "im_c", "abs_c"])
        for t, c in zip(traj.t_grid, traj.c_values):
            w.writerow([f"{t:.17g}", f"{c.real:.17g}", f"{c.imag:.17g}", f"{abs(c):.17g}"])


def uniform_grid(t_max, h):
    n = int(round(t_max / h))
    if not (t_max > 0 and h > 0) or n < 1 or abs(n * h - t_max) > 1e-9 * max(1.0, t_max):
        raise DomainError(f"t_max={t_max} must be a positive integer multiple of h={h}")
    return h * np.arange(n + 1), n


# --------------------------------------------------------------------------
# Volterra solver

_JAC_X, _JAC_W = roots_jacobi(24, 0.0, 0.5)
_JAC_X = 0.5 * (_JAC_X + 1.0)             # nodes on [0, 1], weight s**0.5
_JAC_W = _JAC_W / 2.0 ** 1.5
_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def _erf_over_z(z):
    z = np.asarray(z, dtype=complex)
    out = np.full(z.shape, 2.0 / math.sqrt(math.pi), dtype=complex)
    big = np.abs(z) > 1e-6
    out[big] = erf(z[big]) / z[big]
    small = ~big
    # erf(z)/z = 2/sqrt(pi) (1 - z^2/3 + ...)
    out[small] *= 1.0 - z[small] ** 2 / 3.0
    return out


def _memory_kernel(model, lam, u):
    """G(u) = int_0^u f(s) e^{i Omega s} ds in a frame rotating at Omega.

    ``lam = omega_c - Omega``.  Written as ``K sqrt(pi u) erf(z)/z`` with
    ``z**2 = i lam u``, which is branch independent.
    """
    K = model.strength * np.exp(-1j * math.pi / 4) / math.sqrt(math.pi)
    u = np.asarray(u, dtype=float)
    return K * np.sqrt(math.pi * u) * _erf_over_z(np.sqrt(1j * lam * u))


def _memory_weights(model, lam, h, n):
    """Hat-function moments of G(h s) for lags 0..n, plus end weights.

    Interval [0, 1] carries the sqrt(s) behaviour and uses Gauss-Jacobi;
    all others are smooth and use Gauss-Legendre.
    """
    # G(h s) / sqrt(s) is entire; integrate against s**0.5 weight
    g0 = _memory_kernel(model, lam, h * _JAC_X) / np.sqrt(_JAC_X)
    right0 = np.dot(_JAC_W, g0 * (1 - _JAC_X))
    left1 = np.dot(_JAC_W, g0 * _JAC_X)

    m = np.arange(1, n)
    if m.size:
        s = m[:, None] + _GL_X[None, :]
        gs = _memory_kernel(model, lam, h * s)
        left_next = gs @ (_GL_W * _GL_X)          # attributed to lag m + 1
        right_m = gs @ (_GL_W * (1 - _GL_X))      # attributed to lag m
    left = np.zeros(n + 1, dtype=complex)
    right = np.zeros(n + 1, dtype=complex)
    right[0] = right0
    if n >= 1:
        left[1] = left1
    if m.size:
        left[2:] = left_next
        right[1:n] = right_m
    return left + right, left


def _product_trapezoid(model, atom, frame, h, n):
    """Raw second-order product-integration solve; returns d = c e^{i frame t}.

    The integrated form ``d(t) = 1 - int_0^t k(t - tau) d(tau) dtau`` with
    ``k(u) = i (omega0 - frame) + G(u)`` is discretized with exact hat
    moments and solved one implicit step at a time.
    """
    lam = model.omega_c - frame
    wg, endg = _memory_weights(model, lam, h, n)
    detune = 1j * (atom.omega0 - frame)
    w = h * (wg + detune * np.r_[0.5, np.ones(n)])
    end = h * (endg + detune * np.r_[0.0, np.full(n, 0.5)])
    end_fix = end - w
    wrev = w[::-1].copy()         # wrev[n - k] = w[k]
    denom = 1.0 + w[0]

    d = np.empty(n + 1, dtype=complex)
    d[0] = 1.0
    for k in range(1, n + 1):
        hist = np.dot(wrev[n - k:n], d[:k]) + end_fix[k] * d[0]
        d[k] = (1.0 - hist) / denom
    return d


def _default_frame(model, atom):
    bs = find_bound_state(model, atom)
    return bs.E0 if bs.exists else atom.omega0


def solve_volterra(model, atom, t_max, h=DEFAULT_H, *, extrapolate=True, check=False,
                   frame=None, min_ratio=2.5):
    """Integrate the amplitude memory equation on ``[0, t_max]``.

    Parameters
    ----------
    model : PhotonicBandGap
    atom : AtomParams
    t_max, h : float
        Horizon and step; ``t_max / h`` must be an integer.
    extrapolate : bool
        Combine the solves at ``h`` and ``h/2`` by Richardson extrapolation
        (p = 2).  The returned grid always has step ``h``.
    check : bool
        Run the step-halving ratio test (solves at h, h/2, h/4) and raise
        :class:`ResolutionError` if the error ratio is below ``min_ratio``.
    frame : float, optional
        Rotating-frame frequency.  Defaults to the bound-state energy, which
        makes the long-time solution stationary in the frame.
    """
    if not isinstance(model, PhotonicBandGap):
        raise DomainError("solve_volterra needs a band-gap model; use markovian_c for flat reservoirs")
    t, n = uniform_grid(t_max, h)
    if frame is None:
        frame = _default_frame(model, atom)

    d_h = _product_trapezoid(model, atom, frame, h, n)
    meta = {"h": h, "frame": frame, "extrapolated": extrapolate}
    if extrapolate or check:
        d_h2 = _product_trapezoid(model, atom, frame, h / 2, 2 * n)[::2]
    if check:
        d_h4 = _product_trapezoid(model, atom, frame, h / 4, 4 * n)[::4]
        ratio = _halving_ratio(d_h, d_h2, d_h4)
        meta["convergence_ratio"] = ratio
        if not ratio >= min_ratio:
            raise ResolutionError(
                f"step-halving ratio {ratio:.3g} < {min_ratio}; resolution insufficient, try h={h / 4:g}",
                suggested_h=h / 4,
            )
    d = (4.0 * d_h2 - d_h) / 3.0 if extrapolate else d_h
    d[0] = 1.0
    c = d * np.exp(-1j * frame * t)
    return AmplitudeTrajectory(t, c, Method.VOLTERRA, model, atom, meta)


def _halving_ratio(d_h, d_h2, d_h4):
    ref = (4.0 * d_h4 - d_h2) / 3.0
    e1 = np.max(np.abs(d_h - ref))
    e2 = np.max(np.abs(d_h2 - ref))
    return e1 / e2 if e2 > 0 else math.inf


def convergence_ratio(model, atom, t_max, h, frame=None):
    """Ratio err(h)/err(h/2) of the raw scheme against a Richardson reference."""
    t, n = uniform_grid(t_max, h)
    if frame is None:
        frame = _default_frame(model, atom)
    d_h = _product_trapezoid(model, atom, frame, h, n)
    d_h2 = _product_trapezoid(model, atom, frame, h / 2, 2 * n)[::2]
    d_h4 = _product_trapezoid(model, atom, frame, h / 4, 4 * n)[::4]
    return _halving_ratio(d_h, d_h2, d_h4)


# --------------------------------------------------------------------------
# closed-form band-gap solution

def cubic_roots(model, atom):
    """Roots x_j of ``(beta x^2 + i delta) sqrt(beta) x - (i beta)^{3/2} = 0``.

    Solved as companion-matrix eigenvalues.  A double root occurs at
    ``delta = -(27/4)^{1/3} beta``; computed roots there stay ~sqrt(eps)
    apart, so the discriminant is tested as well as the root spacing.
    """
    beta = model.beta
    delta = atom.detuning(model)
    coeffs = [beta ** 1.5, 0.0, 1j * delta * math.sqrt(beta), -((1j * beta) ** 1.5)]
    # discriminant of q^3 + i delta q + beta^{3/2} e^{-i pi/4} is i (4 delta^3 + 27 beta^3)
    if abs(4 * delta ** 3 + 27 * beta ** 3) <= DEGENERACY_RTOL * 27 * beta ** 3:
        raise DegenerateRootsError(f"cubic has a double root at delta={delta}, beta={beta}")
    x = np.roots(coeffs)
    for i, j in itertools.combinations(range(3), 2):
        if abs(x[i] - x[j]) < 1e-10:
            raise DegenerateRootsError(f"cubic roots {x[i]} and {x[j]} coincide")
    # deterministic order: by argument, then modulus
    return np.array(sorted(x, key=lambda z: (round(np.angle(z), 12), abs(z))))


def _partial_fraction_weights(x):
    a = np.empty(3, dtype=complex)
    for j in range(3):
        i, k = [m for m in range(3) if m != j]
        a[j] = x[j] / ((x[j] - x[i]) * (x[j] - x[k]))
    return a


# Forms of the error-function term tried when resolving the printed formula.
# "sqrt_t": x_j [1 + s_j erf(x_j sqrt(beta t))]; "printed_t": argument beta^{1/2} x_j t.
ANALYTIC_FORMS = ("sqrt_t", "printed_t")
DEFAULT_BRANCHES = (1, 1, 1)


def _analytic_terms(model, atom, t, branches, form):
    x = cubic_roots(model, atom)
    a = _partial_fraction_weights(x)
    t = np.asarray(t, dtype=float)
    sb = math.sqrt(model.beta)
    total = np.zeros(t.shape, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(3):
            s = branches[j]
            if form == "sqrt_t":
                # e^{beta x^2 t} [1 + s erf(x sqrt(beta t))] = w(-i s x sqrt(beta t)) for s = +-1
                z = -1j * s * x[j] * sb * np.sqrt(t)
                core = wofz(z)
            elif form == "printed_t":
                core = np.exp(model.beta * x[j] ** 2 * t) * (1 + s * erf(s * sb * x[j] * t))
            else:
                raise ValueError(f"unknown analytic form {form!r}")
            total += a[j] * x[j] * core
    return np.exp(-1j * model.omega_c * t) * total


def analytic_pbg(atom, model, t_grid, branches=DEFAULT_BRANCHES, form="sqrt_t"):
    """Closed-form band-gap amplitude on ``t_grid``.

    ``c(t) = e^{-i omega_c t} sum_j a_j x_j e^{beta x_j^2 t} [1 + erf(x_j sqrt(beta t))]``
    with ``a_j = x_j / prod_{k != j}(x_j - x_k)``, evaluated through the
    Faddeeva function so that no exponential overflows.  The default form
    and branch set were fixed against the Volterra solution; see
    :func:`select_branches`.
    """
    if not isinstance(model, PhotonicBandGap):
        raise DomainError("analytic_pbg needs a band-gap model")
    t = np.asarray(t_grid, dtype=float)
    c = _analytic_terms(model, atom, t, branches, form)
    meta = {"branches": tuple(int(b) for b in branches), "form": form,
            "roots": [complex(z) for z in cubic_roots(model, atom)]}
    return AmplitudeTrajectory(t, c, Method.ANALYTIC_PBG, model, atom, meta)


def select_branches(model, atom, check_times=(0.1, 1.0, 5.0), h=DEFAULT_H):
    """Pick the error-function form and sign set that best matches Volterra.

    Returns ``(form, branches, mismatch)`` where mismatch is the largest
    deviation at ``check_times`` for the winning candidate.
    """
    t_max = max(check_times)
    ref = solve_volterra(model, atom, t_max, h)
    idx = [ref.index_of(t) for t in check_times]
    target = ref.c_values[idx]
    times = ref.t_grid[idx]
    best = None
    for form in ANALYTIC_FORMS:
        for branches in itertools.product((1, -1), repeat=3):
            vals = _analytic_terms(model, atom, times, branches, form)
            err = np.max(np.abs(vals - target))
            if not np.isfinite(err):
                continue
            if best is None or err < best[2]:
                best = (form, branches, float(err))
    return best


# --------------------------------------------------------------------------
# Markovian and asymptotic forms

def markovian_c(atom, model, t_grid):
    """Memoryless amplitude ``exp[-(gamma/2 + i(omega0 + shift)) t]``.

    For a band-gap model the rate is the golden-rule value
    ``2 sqrt(beta^3/delta)``, defined only above the edge.
    """
    gamma, shift = markovian_rate(model, atom)
    t = np.asarray(t_grid, dtype=float)
    c = np.exp(-(gamma / 2 + 1j * (atom.omega0 + shift)) * t)
    return AmplitudeTrajectory(t, c, Method.MARKOVIAN, model, atom,
                               {"gamma_tilde": gamma, "delta_omega": shift})


def bound_state_asymptote(bs, t_grid, model=None, atom=None):
    """Long-time amplitude ``Z exp(-i E0 t)`` from the bound-state pole."""
    if not bs.exists:
        raise DomainError("no bound state; the long-time amplitude is zero")
    t = np.asarray(t_grid, dtype=float)
    return AmplitudeTrajectory(t, bs.Z * np.exp(-1j * bs.E0 * t), Method.BOUND_STATE,
                               model, atom, {"E0": bs.E0, "Z": bs.Z})


def large_detuning_asymptote(atom, model, t):
    """Modulus ``|[1 + (-beta/delta)^{3/2}/2]^{-1} exp(-(beta^3/delta)^{1/2} t)|``.

    Powers of negative numbers use principal complex branches, so for
    delta < 0 the exponent is imaginary and only the plateau remains.
    """
    delta = atom.detuning(model)
    beta = model.beta
    if delta == 0:
        raise DomainError("large-detuning form is undefined at delta = 0")
    if abs(delta) < 10 * beta:
        warnings.warn(f"|delta| = {abs(delta):g} < 10 beta = {10 * beta:g}; asymptote may be inaccurate",
                      stacklevel=2)
    ratio = complex(-beta / delta)
    prefactor = 1.0 / (1.0 + 0.5 * ratio ** 1.5)
    rate = complex(beta ** 3 / delta) ** 0.5
    return np.abs(prefactor * np.exp(-rate * np.asarray(t, dtype=float)))[()]


# --------------------------------------------------------------------------
# master-equation rates and Kraus channel

def decoherence_rates(traj, threshold=1e-8):
    """gamma(t) and omega(t) from ``gamma + i omega = -2 c'/c``.

    Raises :class:`AmplitudeVanishesError` (carrying the first bad index)
    if |c| falls to ``threshold`` or below anywhere on the grid.
    """
    c = traj.c_values
    small = np.flatnonzero(np.abs(c) <= threshold)
    if small.size:
        k = int(small[0])
        raise AmplitudeVanishesError(
            f"amplitude vanishes; rates undefined beyond t*={traj.t_grid[k]:g}", cutoff_index=k)
    dc = np.gradient(c, traj.h)
    rate = -2.0 * dc / c
    return rate.real, rate.imag


@dataclass(frozen=True, eq=False)
class KrausPair:
    """Amplitude-damping Kraus operators, basis order (|e>, |g>) as printed."""

    k0: np.ndarray
    k1: np.ndarray

    def apply(self, rho):
        return self.k0 @ rho @ self.k0.conj().T + self.k1 @ rho @ self.k1.conj().T

    def completeness(self):
        return self.k0.conj().T @ self.k0 + self.k1.conj().T @ self.k1


def kraus_channel(c_t):
    """K0 = diag(c, 1); K1 carries sqrt(1 - |c|^2) from |e> to |g>."""
    c_t = complex(c_t)
    mod2 = abs(c_t) ** 2
    if mod2 > (1 + NORM_SLACK) ** 2:
        raise DomainError(f"|c| = {abs(c_t)} exceeds 1")
    k0 = np.array([[c_t, 0], [0, 1]], dtype=complex)
    k1 = np.array([[0, 0], [math.sqrt(max(0.0, 1.0 - mod2)), 0]], dtype=complex)
    return KrausPair(k0, k1)
