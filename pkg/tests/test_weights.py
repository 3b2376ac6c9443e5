import numpy as np
import pytest
from scipy import integrate

from metrol.weights import hat_halves, power_weights, trapezoid_weights


@pytest.mark.parametrize("p", [-0.5, 0.5])
def test_hat_moments_match_quadrature(p):
    left, right = hat_halves(p, 40)
    for k in [0, 1, 2, 7, 8, 9, 25, 40]:
        if k >= 1:
            ref = integrate.quad(lambda s: s ** p * (s - k + 1), k - 1, k,
                                 weight=None if k > 1 else None, epsabs=1e-14, epsrel=1e-13)[0]
            assert left[k] == pytest.approx(ref, rel=1e-11)
        ref = integrate.quad(lambda s: s ** p * (k + 1 - s), k, k + 1, epsabs=1e-14, epsrel=1e-13)[0]
        assert right[k] == pytest.approx(ref, rel=1e-11)


@pytest.mark.parametrize("p", [-0.5, 0.5])
def test_weights_integrate_linear_functions_exactly(p):
    n = 300
    w, end = power_weights(p, n)
    w = w.copy()
    w[n] = end[n]
    s = np.arange(n + 1)
    # int_0^n s^p (a + b s) ds, nodes at lags s
    for a, b in [(1.0, 0.0), (0.3, -2.0)]:
        exact = a * n ** (p + 1) / (p + 1) + b * n ** (p + 2) / (p + 2)
        assert np.dot(w, a + b * s) == pytest.approx(exact, rel=1e-12)


def test_trapezoid_weights_are_p_zero():
    w, end = trapezoid_weights(12)
    pw, pend = power_weights(0.0, 12)
    np.testing.assert_allclose(w[:-1], pw[:-1])
    np.testing.assert_allclose(end[1:], pend[1:])
