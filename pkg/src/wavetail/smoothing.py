"""Smooth weight functions shared across the package.

The weight bracket(x) is a fixed smooth even function that equals |x| for
|x| >= 2 and stays >= 1 everywhere.  All decay hypotheses, norms and
asymptotic fits in this package are expressed in terms of this one frozen
realization so that results are bit-reproducible.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import Polynomial


def _bump_profile(s):
    """exp(-1/s) for s > 0, 0 otherwise (the standard C-infinity mollifier)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smoothstep(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1, strictly increasing between."""
    u = np.asarray(u, dtype=float)
    a = _bump_profile(u)
    b = _bump_profile(1.0 - u)
    return a / (a + b + np.finfo(float).tiny)


def cutoff(lam, delta):
    """Smooth cutoff chi_delta: 1 for lam <= delta, 0 for lam >= 2*delta."""
    lam = np.asarray(lam, dtype=float)
    return 1.0 - smoothstep((lam - delta) / delta)


# Polynomial smoothstep with 7 vanishing derivatives at both ends (degree 15).
# Used where the transition must stay inside the polynomial algebra that the
# closed-form potential derivatives rely on.
def _poly_smoothstep(order: int) -> Polynomial:
    n = order
    coeffs = np.zeros(2 * n + 2)
    for k in range(n + 1):
        coeffs[n + 1 + k] = math.comb(n + k, k) * math.comb(2 * n + 1, n - k) * (-1.0) ** k
    return Polynomial(coeffs)


SMOOTHSTEP_POLY = _poly_smoothstep(7)

# bracket(x) = sqrt(x^2 + e(x^2)) on |x| < 2 with e(s) = ((4-s)/4)^7 (1+s).
# e(0) = 1, e vanishes to 7th order at s = 4, and x^2 + e(x^2) is monotone
# and >= 1 on [0, 4]; the junction at |x| = 2 is C^6.
_E_POLY = (Polynomial([1.0, -0.25]) ** 7) * Polynomial([1.0, 1.0])

# x^2 + e(x^2) as an even polynomial in x (degree 16).
_s_of_x = Polynomial([0.0, 0.0, 1.0])
BRACKET_CORE_POLY = _s_of_x + _E_POLY(_s_of_x)
_BRACKET_CORE_DERIV = BRACKET_CORE_POLY.deriv()


def bracket(x):
    """The weight <x>: smooth, even, equal to |x| for |x| >= 2, >= 1 everywhere."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    inner = ax < 2.0
    out = ax.copy()
    if np.any(inner):
        out[inner] = np.sqrt(BRACKET_CORE_POLY(x[inner]))
    if out.ndim == 0:
        return float(out)
    return out


def bracket_deriv(x):
    """d<x>/dx (equals sign(x) for |x| >= 2)."""
    x = np.asarray(x, dtype=float)
    out = np.sign(x)
    inner = np.abs(x) < 2.0
    if np.any(inner):
        xi = x[inner]
        out[inner] = 0.5 * _BRACKET_CORE_DERIV(xi) / np.sqrt(BRACKET_CORE_POLY(xi))
    if out.ndim == 0:
        return float(out)
    return out
