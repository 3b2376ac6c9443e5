"""Environment spectral densities and their closed-form integrals.

Frequencies and rates are in units of the vacuum emission rate gamma_0 = 1,
times in units of 1/gamma_0.

The band-gap density is

    J(w) = (beta**1.5 / pi) * (w - omega_c)**-0.5,   w > omega_c,

zero below the edge.  Its correlation function, self-energy and residue
integral all have closed forms, implemented here.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError, SingularPointError
from .weights import power_weights


@dataclass(frozen=True)
class PhotonicBandGap:
    """Band-gapped reservoir with hard edge ``omega_c`` and coupling ``beta``."""

    omega_c: float
    beta: float

    def __post_init__(self):
        if not self.omega_c > 0:
            raise DomainError(f"omega_c must be positive, got {self.omega_c}")
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")

    @property
    def strength(self):
        """beta**1.5, the prefactor shared by every closed form."""
        return self.beta ** 1.5

    def density(self, omega):
        omega = np.asarray(omega, dtype=float)
        u = omega - self.omega_c
        out = np.zeros_like(omega)
        above = u > 0
        out[above] = self.strength / math.pi / np.sqrt(u[above])
        return out


@dataclass(frozen=True)
class FlatMarkovian:
    """Flat reservoir: memoryless decay ``gamma_tilde`` and Lamb shift ``delta_omega``."""

    gamma_tilde: float
    delta_omega: float = 0.0

    def __post_init__(self):
        if not self.gamma_tilde >= 0:
            raise DomainError(f"gamma_tilde must be non-negative, got {self.gamma_tilde}")

    def density(self, omega):
        return np.full_like(np.asarray(omega, dtype=float), self.gamma_tilde / (2 * math.pi))


@dataclass(frozen=True)
class AtomParams:
    """Two-level atom with bare frequency ``omega0`` (gamma0 is the unit)."""

    omega0: float
    gamma0: float = 1.0

    def detuning(self, model):
        """Detuning from the band edge, recomputed from ``model.omega_c``."""
        return self.omega0 - model.omega_c


def pbg_beta(omega0, omega_c):
    """Coupling scale ``omega_c * (pi / (2 omega0))**(2/3)`` of a photonic crystal."""
    if not (omega0 > 0 and omega_c > 0):
        raise DomainError(f"pbg_beta needs positive frequencies, got omega0={omega0}, omega_c={omega_c}")
    return omega_c * (math.pi / (2.0 * omega0)) ** (2.0 / 3.0)


def pbg_system(delta, omega_c=100.0):
    """Band-gap model and atom at detuning ``delta`` with beta tied to omega0."""
    omega0 = omega_c + delta
    model = PhotonicBandGap(omega_c=omega_c, beta=pbg_beta(omega0, omega_c))
    return model, AtomParams(omega0=omega0)


def _require_pbg(model, what):
    if not isinstance(model, PhotonicBandGap):
        raise DomainError(f"{what} has no closed form for {type(model).__name__}")


def correlation_kernel(model, tau):
    """Environment correlation function f(tau) = int J(w) exp(-i w tau) dw.

    For the band-gap model this is
    ``beta**1.5 * exp(-i omega_c tau - i pi/4) / sqrt(pi tau)``, integrable
    but singular at ``tau = 0``; evaluating there raises
    :class:`SingularPointError`.  Convolutions must go through
    product-integration weights (see :func:`kernel_integral`).

    The flat reservoir has ``f = gamma_tilde * delta(tau)``; it returns 0 for
    ``tau > 0`` and raises at ``tau = 0``.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise DomainError("correlation kernel needs tau >= 0")
    if np.any(tau == 0):
        raise SingularPointError("correlation kernel is singular at tau = 0")
    if isinstance(model, FlatMarkovian):
        return np.zeros(tau.shape, dtype=complex)[()]
    _require_pbg(model, "correlation_kernel")
    phase = np.exp(-1j * (model.omega_c * tau + math.pi / 4))
    return (model.strength * phase / np.sqrt(math.pi * tau))[()]


def kernel_integral(model, t, h):
    """int_0^t f(tau) dtau by product integration on a grid of step ``h``.

    The tau**-1/2 singularity is integrated exactly against the
    piecewise-linear interpolant of the oscillating phase factor.
    """
    _require_pbg(model, "kernel_integral")
    n = int(round(t / h))
    if n < 1 or abs(n * h - t) > 1e-9 * max(1.0, t):
        raise DomainError(f"t={t} is not a positive multiple of h={h}")
    w, end = power_weights(-0.5, n)
    w = w.copy()
    w[n] = end[n]
    tau = h * np.arange(n + 1)
    phase = np.exp(-1j * (model.omega_c * tau + math.pi / 4))
    return model.strength / math.sqrt(math.pi) * math.sqrt(h) * np.dot(w, phase)


def self_energy_y(model, E, omega0):
    """y(E) = omega0 + int J(w) / (E - w) dw below the band edge.

    Band-gap closed form: ``omega0 - beta**1.5 / sqrt(omega_c - E)``.
    Strictly decreasing in E, diverging to -inf at the edge.
    """
    _require_pbg(model, "self_energy_y")
    E = np.asarray(E, dtype=float)
    if np.any(E >= model.omega_c):
        raise DomainError(f"self-energy requested at E >= omega_c = {model.omega_c}")
    return (omega0 - model.strength / np.sqrt(model.omega_c - E))[()]


def residue_integral(model, E0):
    """int J(w) / (E0 - w)**2 dw = beta**1.5 / (2 (omega_c - E0)**1.5)."""
    _require_pbg(model, "residue_integral")
    E0 = np.asarray(E0, dtype=float)
    if np.any(E0 >= model.omega_c):
        raise DomainError(f"residue integral requested at E0 >= omega_c = {model.omega_c}")
    return (model.strength / (2.0 * (model.omega_c - E0) ** 1.5))[()]


def markovian_rate(model, atom):
    """Golden-rule rate 2 pi J(omega0) and principal-value shift.

    For the band-gap density above the edge the rate is
    ``2 sqrt(beta**3 / delta)`` and the principal-value shift vanishes.
    """
    if isinstance(model, FlatMarkovian):
        return model.gamma_tilde, model.delta_omega
    _require_pbg(model, "markovian_rate")
    delta = atom.detuning(model)
    if delta <= 0:
        raise DomainError(f"no Markovian decay inside the gap (delta={delta})")
    return 2.0 * math.sqrt(model.beta ** 3 / delta), 0.0
