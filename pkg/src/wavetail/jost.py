"""Jost solutions via the oscillation-free Volterra equation.

We work with m(x, lambda) = e^{-+ i lambda x} f_pm(x, lambda), which solves

    m(x) = 1 + (2 i lambda)^-1 int_x^inf (e^{2 i lambda (y-x)} - 1) V(y) m(y) dy

on the + side (the - side is handled by reflecting the potential).  The
solver Picard-iterates this equation on a composite Gauss panel grid that
marches inward from the truncation point X_max; the integral beyond X_max is
replaced by its closed form for V ~ c y^(-alpha) with m ~ 1.  m' follows
from the differentiated representation

    m'(x) = - int_x^inf e^{2 i lambda (y-x)} V(y) m(y) dy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConvergenceError, GridRangeError, ParameterError, RegimeError
from .potential import PotentialModel
from .quadrature import PanelGrid, osc_power_tail, panel_boundaries

__all__ = ["GridSpec", "JostData", "TurningPointReport", "solve_m",
           "jost_eval", "turning_point_residual", "dump_csv"]

LAMBDA_FLOOR = 1e-8
PICARD_TOL = 1e-12
PICARD_MAX_ITER = 50


@dataclass(frozen=True)
class GridSpec:
    """Spatial grid request for one Jost solve.

    x_inner is the innermost coordinate the solution must reach (the lower
    grid end for the + solution, the upper end for the - solution); every
    point in `required` becomes a panel boundary, where the profile is later
    available without interpolation.
    """

    x_inner: float = 0.0
    required: tuple = ()
    ratio: float = 0.25
    x_max: float | None = None


def truncation_point(lam: float, alpha: float) -> float:
    """X_max = max(1e3, 50 lambda^(-2/alpha), 10 / lambda): the turning point
    and the oscillation scale must both sit deep inside the grid."""
    return max(1e3, 50.0 * lam ** (-2.0 / alpha), 10.0 / lam)


@dataclass
class JostData:
    """Converged profile m(., lambda) for one sign and energy."""

    lam: float
    sign: int                       # +1 or -1
    alpha: float
    grid: np.ndarray                # strictly increasing sample positions
    m_values: np.ndarray            # complex m at grid
    m_deriv: np.ndarray             # complex m' at grid
    truncation_point: float
    iteration_count: int
    residual_norm: float
    exact_points: dict              # x -> index into grid (quadrature-exact)
    _spline_m: object = field(default=None, repr=False)
    _spline_mp: object = field(default=None, repr=False)

    def m_at(self, x: float):
        """m and m' at a requested point (exact when x was a required point)."""
        idx = self.exact_points.get(float(x))
        if idx is not None:
            return self.m_values[idx], self.m_deriv[idx]
        return self._interp(x)

    def _interp(self, x: float):
        if not (self.grid[0] <= x <= self.grid[-1]):
            raise GridRangeError(
                f"x={x} outside solved range [{self.grid[0]}, {self.grid[-1]}]")
        if self._spline_m is None:
            self._spline_m = CubicSpline(self.grid, self.m_values)
            self._spline_mp = CubicSpline(self.grid, self.m_deriv)
        return complex(self._spline_m(x)), complex(self._spline_mp(x))


def solve_m(model: PotentialModel, sign, lam: float,
            grid_spec: GridSpec | None = None) -> JostData:
    """Solve the Volterra equation for m_pm(., lambda) by Picard iteration."""
    if lam <= 0.0:
        raise ParameterError(f"lambda must be positive, got {lam}")
    if lam < LAMBDA_FLOOR:
        raise RegimeError(
            f"lambda={lam} below solver floor {LAMBDA_FLOOR}; "
            "use the low-energy representation instead")
    sgn = _parse_sign(sign)
    spec = grid_spec or GridSpec()

    work = model if sgn > 0 else model.reflected()
    x_inner = spec.x_inner if sgn > 0 else -spec.x_inner
    required = tuple(r if sgn > 0 else -r for r in spec.required)

    alpha = work.alpha
    x_max = spec.x_max if spec.x_max is not None else truncation_point(lam, alpha)
    if x_inner >= x_max:
        raise ParameterError(f"x_inner={x_inner} beyond truncation {x_max}")

    kappa = 2.0 * lam
    bounds = panel_boundaries(x_inner, x_max, kappa=kappa,
                              required=required, ratio=spec.ratio)
    grid = PanelGrid.from_boundaries(bounds)
    v_nodes = work.evaluator(grid.nodes.reshape(-1), 0).reshape(grid.nodes.shape)

    c_tail = work.c_plus
    i_osc = c_tail * osc_power_tail(x_max, kappa, alpha) if c_tail != 0.0 else 0.0
    flat_tail = c_tail * x_max ** (1.0 - alpha) / (alpha - 1.0)
    inv2il = 1.0 / (2j * lam)

    w_osc = grid.weights(kappa)
    w_flat = grid.weights(0.0).astype(complex)

    phase_nodes = np.exp(-1j * kappa * grid.nodes)
    tail_nodes = inv2il * (phase_nodes * i_osc - flat_tail)

    m = np.ones_like(v_nodes, dtype=complex)
    delta = np.inf
    for iteration in range(1, PICARD_MAX_ITER + 1):
        g = v_nodes * m
        j_nodes, j_bounds = grid.suffix_integrals(w_osc, g)
        k_nodes, k_bounds = grid.suffix_integrals(w_flat, g)
        m_new = 1.0 + tail_nodes + inv2il * (phase_nodes * j_nodes - k_nodes)
        delta = float(np.max(np.abs(m_new - m)))
        m = m_new
        if delta < PICARD_TOL:
            break
    else:
        raise ConvergenceError(
            f"Picard iteration stalled at residual {delta:.3e} "
            f"(lambda={lam}, sign={sgn:+d})", residual=delta,
            iterations=PICARD_MAX_ITER)

    # converged g and its integrals, reused for m', boundary values, defect
    g = v_nodes * m
    j_nodes, j_bounds = grid.suffix_integrals(w_osc, g)
    k_nodes, k_bounds = grid.suffix_integrals(w_flat, g)
    defect = float(np.max(np.abs(
        1.0 + tail_nodes + inv2il * (phase_nodes * j_nodes - k_nodes) - m)))

    mp = -phase_nodes * (j_nodes + i_osc)

    phase_b = np.exp(-1j * kappa * grid.boundaries)
    tail_b = inv2il * (phase_b * i_osc - flat_tail)
    m_b = 1.0 + tail_b + inv2il * (phase_b * j_bounds - k_bounds)
    mp_b = -phase_b * (j_bounds + i_osc)

    x_all = np.concatenate([grid.nodes.reshape(-1), grid.boundaries])
    m_all = np.concatenate([m.reshape(-1), m_b])
    mp_all = np.concatenate([mp.reshape(-1), mp_b])
    order = np.argsort(x_all)
    x_all, m_all, mp_all = x_all[order], m_all[order], mp_all[order]

    if sgn < 0:
        x_all = -x_all[::-1]
        m_all = m_all[::-1]
        mp_all = -mp_all[::-1]

    exact = {}
    want = set(float(r) for r in spec.required)
    want.add(sgn * x_max)
    for target in want:
        idx = int(np.searchsorted(x_all, target))
        for cand in (idx - 1, idx, idx + 1):
            if 0 <= cand < len(x_all) and abs(x_all[cand] - target) <= 1e-12 * max(1.0, abs(target)):
                exact[target] = cand
                break

    return JostData(lam=lam, sign=sgn, alpha=alpha, grid=x_all,
                    m_values=m_all, m_deriv=mp_all, truncation_point=x_max,
                    iteration_count=iteration, residual_norm=defect,
                    exact_points=exact)


def _parse_sign(sign) -> int:
    if sign in (1, +1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise ParameterError(f"sign must be +/-, got {sign!r}")


def jost_eval(jd: JostData, x: float):
    """f(x) and f'(x) from the stored profile; cubic interpolation off-node."""
    m, mp = jd.m_at(x)
    osc = np.exp(1j * jd.sign * jd.lam * x)
    f = osc * m
    fp = osc * (1j * jd.sign * jd.lam * m + mp)
    return f, fp


# ---------------------------------------------------------------------------
# Turning-point expansions
# ---------------------------------------------------------------------------

@dataclass
class TurningPointReport:
    lam: float
    mu: float
    sign: int
    f_value: complex
    f_deriv: complex
    predicted_value: complex
    predicted_deriv: complex
    residual_value: complex
    residual_deriv: complex


def predicted_turning_value(alpha: float, c_side: float, mu: float) -> complex:
    """Closed-form expansion of f at the turning point (remainder dropped)."""
    if alpha == 3.0:
        return (1.0 + 1j * mu + 0.5 * (c_side - 1.0) * mu ** 2
                - 1j * c_side * mu ** 3 * np.log(mu))
    return (1.0 + 1j * mu
            + (c_side / ((alpha - 1.0) * (alpha - 2.0)) - 0.5) * mu ** 2
            + 1j * (c_side / ((alpha - 2.0) * (alpha - 3.0)) - 1.0 / 6.0) * mu ** 3)


def predicted_turning_deriv(alpha: float, c_side: float, mu: float, lam: float,
                            sgn: int) -> complex:
    bracketed = (1j * mu - (c_side / (alpha - 1.0) + 1.0) * mu ** 2
                 - 1j * (c_side / (alpha - 2.0) + 0.5) * mu ** 3)
    return sgn * lam ** (2.0 / alpha) * bracketed


def turning_point_residual(model: PotentialModel, lam: float,
                           sign="+") -> TurningPointReport:
    """Numerical f, f' at x = sgn * lambda^(-2/alpha) minus the closed forms."""
    sgn = _parse_sign(sign)
    alpha = model.alpha
    tp = lam ** (-2.0 / alpha)
    if tp >= truncation_point(lam, alpha):
        raise GridRangeError(
            f"turning point {tp} outside truncation; enlarge x_max")
    jd = solve_m(model, sgn, lam, GridSpec(x_inner=sgn * tp, required=(sgn * tp,)))
    f, fp = jost_eval(jd, sgn * tp)
    mu = lam ** (1.0 - 2.0 / alpha)
    c_side = model.c_plus if sgn > 0 else model.c_minus
    pv = predicted_turning_value(alpha, c_side, mu)
    pd = predicted_turning_deriv(alpha, c_side, mu, lam, sgn)
    return TurningPointReport(lam=lam, mu=mu, sign=sgn, f_value=f, f_deriv=fp,
                              predicted_value=pv, predicted_deriv=pd,
                              residual_value=f - pv, residual_deriv=fp - pd)


def dump_csv(jd: JostData, path):
    """CSV dump: x, Re m, Im m, Re m', Im m' with a parameter header."""
    with open(path, "w") as fh:
        fh.write(f"# lambda={jd.lam:.17g} sign={jd.sign:+d} alpha={jd.alpha:.17g} "
                 f"tol={PICARD_TOL:g} residual={jd.residual_norm:.3e}\n")
        fh.write("x,re_m,im_m,re_mp,im_mp\n")
        for x, m, mp in zip(jd.grid, jd.m_values, jd.m_deriv):
            fh.write(f"{x:.17g},{m.real:.17g},{m.imag:.17g},"
                     f"{mp.real:.17g},{mp.imag:.17g}\n")
