import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import integrate

from metrol.errors import DomainError, SingularPointError
from metrol.spectral import (
    AtomParams,
    FlatMarkovian,
    PhotonicBandGap,
    correlation_kernel,
    kernel_integral,
    markovian_rate,
    pbg_beta,
    residue_integral,
    self_energy_y,
)

BETA_80 = 7.27813197954014935  # mpmath, 30 digits


def quad_self_energy(model, E, omega0, cutoff=1e4):
    """omega0 + int J/(E - w): algebraic-weight quadrature up to a cutoff, then a tail."""
    k = model.strength / math.pi
    a = model.omega_c - E
    head = integrate.quad(lambda u: 1.0 / (-a - u), 0.0, cutoff, weight="alg", wvar=(-0.5, 0.0),
                          epsabs=0, epsrel=1e-13, limit=400)[0]
    tail = integrate.quad(lambda u: u ** -0.5 / (-a - u), cutoff, np.inf, epsabs=0, epsrel=1e-11)[0]
    return omega0 + k * (head + tail)


def quad_residue(model, E0):
    k = model.strength / math.pi
    a = model.omega_c - E0
    head = integrate.quad(lambda u: 1.0 / (a + u) ** 2, 0.0, 1e3, weight="alg", wvar=(-0.5, 0.0),
                          epsabs=0, epsrel=1e-13, limit=400)[0]
    tail = integrate.quad(lambda u: u ** -0.5 / (a + u) ** 2, 1e3, np.inf, epsabs=0, epsrel=1e-13)[0]
    return k * (head + tail)


def quad_kernel(model, tau, split=50.0):
    """int J(w) e^{-i w tau} dw with an algebraic weight near the edge and a Fourier tail."""
    kw = dict(weight="alg", wvar=(-0.5, 0.0), limit=500)
    re = integrate.quad(lambda u: math.cos(u * tau), 0, split, **kw)[0]
    im = -integrate.quad(lambda u: math.sin(u * tau), 0, split, **kw)[0]
    re += integrate.quad(lambda u: u ** -0.5, split, np.inf, weight="cos", wvar=tau)[0]
    im -= integrate.quad(lambda u: u ** -0.5, split, np.inf, weight="sin", wvar=tau)[0]
    return model.strength / math.pi * complex(re, im) * np.exp(-1j * model.omega_c * tau)


def test_pbg_beta_values():
    assert pbg_beta(80.0, 100.0) == pytest.approx(BETA_80, rel=1e-14)
    assert pbg_beta(80.0, 100.0) == pytest.approx(7.277, abs=2e-3)
    assert pbg_beta(100.0, 100.0) == pytest.approx(100 * (math.pi / 200) ** (2 / 3), rel=1e-15)


@pytest.mark.parametrize("w0, wc", [(0.0, 100.0), (-1.0, 100.0), (80.0, 0.0)])
def test_pbg_beta_rejects_non_positive(w0, wc):
    with pytest.raises(DomainError):
        pbg_beta(w0, wc)


def test_model_invariants():
    with pytest.raises(DomainError):
        PhotonicBandGap(omega_c=-1.0, beta=1.0)
    with pytest.raises(DomainError):
        PhotonicBandGap(omega_c=100.0, beta=0.0)
    with pytest.raises(DomainError):
        FlatMarkovian(gamma_tilde=-0.1)
    m = PhotonicBandGap(100.0, 7.0)
    assert np.all(m.density([50.0, 99.9, 100.0]) == 0)
    assert m.density([101.0])[0] > 0


def test_detuning_follows_model():
    atom = AtomParams(80.0)
    assert atom.detuning(PhotonicBandGap(100.0, 7.0)) == -20.0
    assert atom.detuning(PhotonicBandGap(60.0, 7.0)) == 20.0


def test_kernel_value_and_quadrature():
    m = PhotonicBandGap(100.0, BETA_80)
    f1 = correlation_kernel(m, 1.0)
    assert abs(f1) == pytest.approx(m.strength / math.sqrt(math.pi), rel=1e-14)
    assert abs(f1) == pytest.approx(11.08, abs=5e-3)
    for tau in [0.3, 1.0, 2.5]:
        assert correlation_kernel(m, tau) == pytest.approx(quad_kernel(m, tau), rel=1e-8)


def test_kernel_decays_and_is_singular_at_zero():
    m = PhotonicBandGap(100.0, BETA_80)
    taus = np.geomspace(1e-3, 1e4, 200)
    mod = np.abs(correlation_kernel(m, taus))
    assert np.all(np.diff(mod) < 0)
    np.testing.assert_allclose(mod * np.sqrt(taus), m.strength / math.sqrt(math.pi), rtol=1e-12)
    with pytest.raises(SingularPointError):
        correlation_kernel(m, 0.0)
    with pytest.raises(DomainError):
        correlation_kernel(m, -1.0)


def test_flat_kernel_is_local():
    m = FlatMarkovian(1.0)
    assert correlation_kernel(m, 0.5) == 0
    with pytest.raises(SingularPointError):
        correlation_kernel(m, 0.0)


def test_kernel_integral_matches_adaptive_quadrature():
    m = PhotonicBandGap(100.0, BETA_80)
    t = 0.5
    kw = dict(weight="alg", wvar=(-0.5, 0.0), limit=2000, epsabs=1e-13, epsrel=1e-13)
    pref = m.strength / math.sqrt(math.pi)
    re = integrate.quad(lambda s: math.cos(m.omega_c * s + math.pi / 4), 0, t, **kw)[0]
    im = -integrate.quad(lambda s: math.sin(m.omega_c * s + math.pi / 4), 0, t, **kw)[0]
    ref = pref * complex(re, im)
    assert abs(kernel_integral(m, t, 1e-5) - ref) < 1e-6


def test_self_energy_value():
    m = PhotonicBandGap(100.0, BETA_80)
    y = self_energy_y(m, 76.0, 80.0)
    assert y == pytest.approx(75.99203178074417, abs=1e-10)   # mpmath oracle
    assert y == pytest.approx(75.993, abs=2e-3)


def test_self_energy_matches_quadrature_on_band():
    m = PhotonicBandGap(100.0, BETA_80)
    for E in np.linspace(m.omega_c - 50, m.omega_c - 0.1, 25):
        assert self_energy_y(m, E, 80.0) == pytest.approx(quad_self_energy(m, E, 80.0), rel=1e-8)


def test_self_energy_edge_and_domain():
    m = PhotonicBandGap(100.0, BETA_80)
    assert self_energy_y(m, 100.0 - 1e-14, 80.0) < -1e6
    with pytest.raises(DomainError):
        self_energy_y(m, 100.0, 80.0)
    with pytest.raises(DomainError):
        self_energy_y(FlatMarkovian(1.0), 10.0, 80.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=-1e3, max_value=100 - 1e-6), min_size=2, max_size=30, unique=True),
       st.floats(min_value=0.1, max_value=60.0))
def test_self_energy_strictly_decreasing(energies, beta):
    m = PhotonicBandGap(100.0, beta)
    E = np.sort(np.array(energies))
    assume(np.min(np.diff(E)) > 1e-3)
    y = self_energy_y(m, E, 80.0)
    assert np.all(np.diff(y) < 0)


def test_residue_integral_values_and_limits():
    m = PhotonicBandGap(100.0, BETA_80)
    val = residue_integral(m, 75.993)
    assert val == pytest.approx(0.08346282025487999, rel=1e-12)  # mpmath oracle
    assert val == pytest.approx(quad_residue(m, 75.993), rel=1e-9)
    assert 1 / (1 + val) == pytest.approx(0.923, abs=5e-4)
    assert residue_integral(m, -1e12) < 1e-15
    assert residue_integral(m, 100 - 1e-12) > 1e15
    with pytest.raises(DomainError):
        residue_integral(m, 100.0)


def test_markovian_rate_from_band_gap():
    m = PhotonicBandGap(100.0, 5.0)
    gamma, shift = markovian_rate(m, AtomParams(600.0))
    assert gamma == pytest.approx(2 * math.pi * m.density([600.0])[0], rel=1e-14)
    assert gamma == pytest.approx(2 * math.sqrt(125 / 500), rel=1e-14)
    assert shift == 0.0
    with pytest.raises(DomainError):
        markovian_rate(m, AtomParams(90.0))
    assert markovian_rate(FlatMarkovian(1.5, 0.2), AtomParams(3.0)) == (1.5, 0.2)
