"""Product-integration weights for power-law kernels on a uniform grid.

For a kernel ``g(u) = u**p`` (p > -1) and a function ``phi`` known on the
nodes ``tau_j = j*h``, the convolution

    int_0^{t_n} g(t_n - tau) phi(tau) dtau

is approximated by integrating ``g`` exactly against the piecewise-linear
interpolant of ``phi``.  The result is ``h**(p+1) * sum_k w[k] phi_{n-k}``
where ``w`` depends only on the lag ``k`` except at the far end ``k = n``.
"""

import numpy as np

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W

# below this lag the closed-form antiderivatives are used directly; above
# it they lose digits to cancellation and Gauss-Legendre takes over
_EXACT_LAGS = 8


def _halves_exact(p, k):
    k = np.asarray(k, dtype=float)
    a1 = lambda s: s ** (p + 1) / (p + 1)
    a2 = lambda s: s ** (p + 2) / (p + 2)
    left = np.where(
        k >= 1,
        a2(k) - a2(np.maximum(k - 1, 0)) - (k - 1) * (a1(k) - a1(np.maximum(k - 1, 0))),
        0.0,
    )
    right = (k + 1) * (a1(k + 1) - a1(k)) - (a2(k + 1) - a2(k))
    return left, right


def _halves_gauss(p, k):
    k = np.asarray(k, dtype=float)[:, None]
    left = ((k - 1 + _GL_X) ** p * _GL_X) @ _GL_W
    right = ((k + _GL_X) ** p * (1 - _GL_X)) @ _GL_W
    return left, right


def hat_halves(p, n):
    """Left and right half-hat moments of ``s**p`` for lags ``0..n``.

    ``left[k] = int_{k-1}^{k} s^p (s-k+1) ds`` (zero for k = 0) and
    ``right[k] = int_k^{k+1} s^p (k+1-s) ds``.
    """
    if p <= -1:
        raise ValueError("kernel exponent must exceed -1")
    lags = np.arange(n + 1)
    left = np.empty(n + 1)
    right = np.empty(n + 1)
    small = lags[: _EXACT_LAGS + 1]
    left[: small.size], right[: small.size] = _halves_exact(p, small)
    if n > _EXACT_LAGS:
        big = lags[_EXACT_LAGS + 1:]
        left[big], right[big] = _halves_gauss(p, big)
    return left, right


def power_weights(p, n):
    """Interior weights ``w[k]`` and the end weight for lag ``n``.

    Returns ``(w, end)`` with ``w[0] = right[0]``, ``w[k] = left[k] + right[k]``
    and ``end[k] = left[k]``, the weight used when lag ``k`` hits ``tau = 0``.
    """
    left, right = hat_halves(p, n)
    return left + right, left


def trapezoid_weights(n):
    """Weights for the constant kernel, matching ``power_weights(0, n)``."""
    w = np.ones(n + 1)
    w[0] = 0.5
    end = np.full(n + 1, 0.5)
    end[0] = 0.0
    return w, end
