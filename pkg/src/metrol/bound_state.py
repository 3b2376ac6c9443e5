"""Atom-reservoir bound state below the band edge.

The single-excitation eigenenergies solve ``y(E) = E``.  Below the edge
``y`` is strictly decreasing, so ``g(E) = y(E) - E`` has at most one root
there, found by bisection.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError, NoBracketError
from .spectral import PhotonicBandGap, pbg_beta, residue_integral, self_energy_y, AtomParams

EDGE_OFFSET = 1e-9
E_TOL = 1e-12
MAX_BRACKET = 1e6


@dataclass(frozen=True)
class BoundStateResult:
    exists: bool
    E0: float = math.nan
    Z: float = math.nan
    residual: float = math.nan


@dataclass(frozen=True)
class SpectrumSlice:
    omega0: float
    band_edge: float
    bound_energy: float | None
    Z: float | None = None
    valid: bool = True
    error: str | None = None

    @property
    def delta(self):
        return self.omega0 - self.band_edge

    @property
    def band(self):
        """Continuum interval ``[omega_c, inf)``."""
        return (self.band_edge, math.inf)


def _bisect(g, lo, hi, tol=E_TOL):
    glo = g(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid == lo or mid == hi:
            break
        gm = g(mid)
        if gm == 0:
            return mid
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_bound_state(model, atom, lower=None):
    """Locate the bound-state energy E0 and its residue Z.

    Parameters
    ----------
    model : PhotonicBandGap
    atom : AtomParams
    lower : float, optional
        Initial lower end of the bracket.  Defaults to ``omega0 - 1``; it is
        pushed down until ``y(E) > E`` there.

    Returns
    -------
    BoundStateResult
        ``exists`` is False only when ``y`` at the edge is not below the
        edge, which cannot happen for the band-gap density.
    """
    if not isinstance(model, PhotonicBandGap):
        raise DomainError(f"bound-state search needs a band-gap model, got {type(model).__name__}")
    omega_c = model.omega_c
    g = lambda E: self_energy_y(model, E, atom.omega0) - E

    hi = omega_c - EDGE_OFFSET
    if g(hi) >= 0:
        return BoundStateResult(exists=False)

    lo = min(atom.omega0, hi) - 1.0 if lower is None else min(lower, hi)
    step = max(1.0, hi - lo)
    while g(lo) <= 0:
        lo = hi - 2 * step
        step *= 2
        if hi - lo > MAX_BRACKET:
            raise NoBracketError(f"no bracket for the bound state within {MAX_BRACKET:g} of the band edge")

    E0 = _bisect(g, lo, hi)
    Z = 1.0 / (1.0 + residue_integral(model, E0))
    return BoundStateResult(exists=True, E0=E0, Z=Z, residual=abs(g(E0)))


def spectrum_sweep(omega0_grid, omega_c=100.0):
    """One :class:`SpectrumSlice` per atomic frequency, beta recomputed per point.

    A point whose bound-state search fails is kept with ``valid=False``.
    """
    grid = np.asarray(omega0_grid, dtype=float)
    if grid.size == 0:
        raise DomainError("omega0 grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("omega0 grid must be ascending")
    out = []
    for omega0 in grid:
        try:
            model = PhotonicBandGap(omega_c=omega_c, beta=pbg_beta(omega0, omega_c))
            bs = find_bound_state(model, AtomParams(omega0=float(omega0)))
        except (DomainError, NoBracketError) as exc:
            out.append(SpectrumSlice(float(omega0), omega_c, None, valid=False, error=str(exc)))
            continue
        out.append(SpectrumSlice(
            float(omega0), omega_c,
            bs.E0 if bs.exists else None,
            bs.Z if bs.exists else None,
        ))
    return out
