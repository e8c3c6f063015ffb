"""Panel quadrature machinery.

Two families of tools live here:

* ``PanelGrid`` — composite 8-point Gauss panels with moment-fitted weights
  for integrands of the form g(y) or g(y) e^{i kappa y}, where g is smooth
  and known at the panel nodes.  Partial integrals from any node (or panel
  boundary) to the end of its panel are linear functionals of the six nodal
  values; the functional weights are computed once per (grid, kappa) and
  reused across Picard sweeps.  Panel phases are capped at construction so
  the weight series always converges to machine precision.

* Moment-exact integrals of a cubic spline against sin(t lambda) and
  cos(t lambda) — the oscillatory-integral backend of the evolution module.
  Exactness for piecewise-cubic integrands holds for every t, so late-time
  values inherit only the spline's approximation error, not a quadrature
  floor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

_NODES_PER_PANEL = 8
_SERIES_TERMS = 24
_PHASE_CAP = np.pi / 4


@lru_cache(maxsize=8)
def gauss_rule(n: int):
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _lagrange_coeff_matrix(nodes):
    """Monomial coefficients (ascending) of the Lagrange basis on the nodes."""
    n = len(nodes)
    mat = np.zeros((n, n))
    for k in range(n):
        others = np.delete(nodes, k)
        poly = np.polynomial.polynomial.polyfromroots(others)
        poly /= np.prod(nodes[k] - others)
        mat[k, : len(poly)] = poly
    return mat


_T6, _W6 = gauss_rule(_NODES_PER_PANEL)
_LC = _lagrange_coeff_matrix(_T6)          # (6, 6): basis k -> monomial m
_TGRID = np.concatenate(([-1.0], _T6))     # row 0: integrate the whole panel

# Series tensor for mu_m(t_j, theta) = int_{t_j}^1 t^m e^{i theta t} dt
#   = sum_n (i theta)^n / n! * (1 - t_j^(m+n+1)) / (m+n+1)
_pow = np.arange(_SERIES_TERMS)[:, None, None] \
    + np.arange(_NODES_PER_PANEL)[None, None, :] + 1
_TSER = (1.0 - _TGRID[None, :, None] ** _pow) / _pow
_INV_FACT = 1.0 / np.cumprod(np.concatenate(([1.0], np.arange(1.0, _SERIES_TERMS))))


def panel_boundaries(x_lo, x_hi, kappa=0.0, required=(), ratio=0.25, base=2.0,
                     phase_cap=_PHASE_CAP):
    """Panel boundaries on [x_lo, x_hi], marching down from x_hi.

    Local panel length is min(ratio * max(|y|, base), phase_cap / kappa);
    every point in `required` inside the interval becomes a boundary, so
    integrals from those points are whole-panel sums (no interpolation).
    """
    if not x_hi > x_lo:
        raise ValueError(f"empty panel range [{x_lo}, {x_hi}]")
    req = sorted({float(r) for r in required if x_lo < r < x_hi}, reverse=True)
    bounds = [float(x_hi)]
    cur = float(x_hi)
    ri = 0
    while cur > x_lo:
        step = ratio * max(abs(cur), base)
        if kappa > 0.0:
            step = min(step, phase_cap / kappa)
        target = cur - step
        floor = req[ri] if ri < len(req) else x_lo
        if target <= floor + 1e-12 * max(1.0, abs(floor)):
            target = floor
            if ri < len(req):
                ri += 1
        bounds.append(target)
        cur = target
    return np.array(bounds[::-1])


@dataclass(frozen=True)
class PanelGrid:
    """Composite Gauss panels: boundaries (P+1,), nodes (P, 8)."""

    boundaries: np.ndarray
    centers: np.ndarray
    half: np.ndarray
    nodes: np.ndarray

    @classmethod
    def from_boundaries(cls, bounds):
        bounds = np.asarray(bounds, dtype=float)
        lo, hi = bounds[:-1], bounds[1:]
        centers = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        nodes = centers[:, None] + half[:, None] * _T6[None, :]
        return cls(bounds, centers, half, nodes)

    @property
    def n_panels(self) -> int:
        return len(self.centers)

    @property
    def flat_nodes(self) -> np.ndarray:
        return self.nodes.reshape(-1)

    def weights(self, kappa=0.0):
        """Partial-integral weight tensor W[p, j, k].

        sum_k W[p, j, k] g[p, k] equals the integral of (the high-order
        interpolant of g times e^{i kappa y}) from position j to the right
        boundary of panel p, where j = 0 is the left boundary and j = 1..8
        the Gauss nodes.  Real tensor for kappa = 0.
        """
        if kappa == 0.0:
            mu = _TSER[0]                          # (7, 6) real
            base = mu @ _LC.T                      # (7, 6): j, k
            return self.half[:, None, None] * base[None, :, :]
        theta = kappa * self.half
        n = np.arange(_SERIES_TERMS)
        coef = (1j * theta[:, None]) ** n[None, :] * _INV_FACT[None, :]
        mu = np.einsum("pn,njm->pjm", coef, _TSER)
        wgt = np.einsum("pjm,km->pjk", mu, _LC)
        phase = np.exp(1j * kappa * self.centers)
        return (self.half * phase)[:, None, None] * wgt

    def suffix_integrals(self, wgt, g):
        """Integrals from each node / boundary to the grid's right end.

        Returns (at_nodes (P, 6), at_boundaries (P+1,)).  Summation order is
        fixed, so results are independent of worker count.
        """
        part = np.einsum("pjk,pk->pj", wgt, g)
        full = part[:, 0]
        suffix = np.zeros(len(full) + 1, dtype=full.dtype)
        suffix[:-1] = np.cumsum(full[::-1])[::-1]
        at_nodes = part[:, 1:] + suffix[1:][:, None]
        return at_nodes, suffix

    def prefix_integrals(self, wgt, g):
        """Integrals from the grid's left end to each node / boundary."""
        part = np.einsum("pjk,pk->pj", wgt, g)
        full = part[:, 0]
        prefix = np.zeros(len(full) + 1, dtype=full.dtype)
        prefix[1:] = np.cumsum(full)
        at_nodes = prefix[:-1][:, None] + (full[:, None] - part[:, 1:])
        return at_nodes, prefix


def osc_power_tail(x_start, kappa, alpha):
    """int_X^inf e^{i kappa y} y^(-alpha) dy via the integration-by-parts series.

    Requires kappa * x_start >= ~10 so the asymptotic series reaches machine
    accuracy before its smallest term.
    """
    z = 1j * kappa
    term = -np.exp(z * x_start) * x_start ** (-alpha) / z
    total = term
    scale = abs(term)
    prev = np.inf
    for n in range(60):
        ratio = (alpha + n) / (z * x_start)
        term = term * ratio
        mag = abs(term)
        if mag >= prev:        # past the optimal truncation point
            break
        total += term
        prev = mag
        if mag < 1e-18 * scale:
            break
    return total


def composite_gauss(f, a, b, n_panels=8, order=10):
    """Plain composite Gauss-Legendre integral of a callable."""
    t, w = gauss_rule(order)
    edges = np.linspace(a, b, n_panels + 1)
    c = 0.5 * (edges[:-1] + edges[1:])
    h = 0.5 * (edges[1:] - edges[:-1])
    pts = c[:, None] + h[:, None] * t[None, :]
    vals = f(pts.reshape(-1)).reshape(pts.shape)
    return float(np.sum(vals * w[None, :] * h[:, None]))


# ----------------------------------------------------------------------
# Oscillatory integrals of splined weights: int omega(l) sin(t l) dl etc.
# ----------------------------------------------------------------------

_SIN_SERIES_TERMS = 34
_THETA_SWITCH = 2.0


def _exp_moments(t, h):
    """mu_m(t, h) = int_0^h s^m e^{its} ds for m = 0..3, vectorized over h."""
    h = np.asarray(h, dtype=float)
    theta = t * h
    mu = np.empty((4, len(h)), dtype=complex)
    small = np.abs(theta) < _THETA_SWITCH
    if np.any(small):
        hs = h[small]
        ths = theta[small]
        n = np.arange(_SIN_SERIES_TERMS)
        fact = np.cumprod(np.concatenate(([1.0], np.arange(1.0, _SIN_SERIES_TERMS))))
        zpow = (1j * ths[:, None]) ** n[None, :] / fact[None, :]
        for m in range(4):
            mu[m, small] = hs ** (m + 1) * np.sum(zpow / (n[None, :] + m + 1), axis=1)
    big = ~small
    if np.any(big):
        hb = h[big]
        ei = np.exp(1j * t * hb)
        it = 1j * t
        m0 = (ei - 1.0) / it
        m1 = (hb * ei - m0) / it
        m2 = (hb ** 2 * ei - 2.0 * m1) / it
        m3 = (hb ** 3 * ei - 3.0 * m2) / it
        mu[0, big], mu[1, big], mu[2, big], mu[3, big] = m0, m1, m2, m3
    return mu


def _spline_osc_integral(spline, t, part):
    """Integral of the spline against e^{i t lambda}, reduced by Im/Re."""
    x = spline.x
    h = np.diff(x)
    c = spline.c                      # (4, n): highest power first
    mu = _exp_moments(t, h)
    inner = (c[3] * mu[0] + c[2] * mu[1] + c[1] * mu[2] + c[0] * mu[3])
    contrib = np.exp(1j * t * x[:-1]) * inner
    total = np.sum(part(contrib))
    return float(total)


def spline_sin_integral(grid, values, t):
    """int values(l) sin(t l) dl over the grid span, exact for the cubic spline."""
    if t == 0.0:
        return 0.0
    spline = CubicSpline(grid, values)
    return _spline_osc_integral(spline, t, np.imag)


def spline_cos_integral(grid, values, t):
    """int values(l) cos(t l) dl over the grid span, exact for the cubic spline."""
    spline = CubicSpline(grid, values)
    return _spline_osc_integral(spline, t, np.real)
