"""Potential families: inverse-power class, Regge-Wheeler, diagnostics.

Every model carries closed-form derivatives up to ceil(alpha)+1 and its
declared asymptotic parameters (alpha, c_plus, c_minus, beta).  Models are
immutable after construction and evaluation is pure, so they can be shared
freely across workers.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ParameterError
from .smoothing import BRACKET_CORE_POLY, SMOOTHSTEP_POLY, bracket

__all__ = [
    "PotentialModel", "SchwarzschildParams", "HypothesisReport",
    "make_inverse_power", "make_regge_wheeler", "make_poschl_teller",
    "make_zero", "make_custom", "eval_derivative", "tortoise_to_areal",
    "verify_hypotheses",
]


@dataclass(frozen=True)
class PotentialModel:
    """Evaluable potential with derivatives and declared decay asymptotics."""

    kind: str
    alpha: float
    c_plus: float
    c_minus: float
    beta: float
    max_derivative_order: int
    evaluator: Callable[[np.ndarray, int], np.ndarray]
    x_asym: float = 2.0
    claims_hypotheses: bool = True
    params: dict = field(default_factory=dict)

    def __call__(self, x, k: int = 0):
        return eval_derivative(self, x, k)

    def reflected(self) -> "PotentialModel":
        """The potential x -> V(-x) with the side constants swapped."""
        ev = self.evaluator

        def refl_eval(x, k):
            return (-1.0) ** k * ev(-np.asarray(x, dtype=float), k)

        pars = dict(self.params)
        pars["reflected"] = not pars.get("reflected", False)
        return PotentialModel(
            kind=self.kind, alpha=self.alpha, c_plus=self.c_minus,
            c_minus=self.c_plus, beta=self.beta,
            max_derivative_order=self.max_derivative_order,
            evaluator=refl_eval, x_asym=self.x_asym,
            claims_hypotheses=self.claims_hypotheses, params=pars)

    def hash_hex(self) -> str:
        payload = dict(self.params)
        payload.update(kind=self.kind, alpha=self.alpha,
                       c_plus=self.c_plus, c_minus=self.c_minus)
        blob = json.dumps(payload, sort_keys=True, default=repr)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class SchwarzschildParams:
    """Mass in geometric units; sigma in {0, 1, -3} selects the field type."""

    mass: float
    sigma: float = 1.0

    def __post_init__(self):
        if not self.mass > 0.0:
            raise ParameterError(f"mass must be positive, got {self.mass}")


def eval_derivative(model: PotentialModel, x, k: int):
    """V^(k)(x); k must not exceed the model's declared derivative order."""
    if not 0 <= k <= model.max_derivative_order:
        raise ParameterError(
            f"derivative order {k} outside [0, {model.max_derivative_order}]")
    x = np.asarray(x, dtype=float)
    out = model.evaluator(x, k)
    if np.ndim(x) == 0:
        return float(out)
    return out


def _falling_power_coeff(alpha: float, k: int) -> float:
    c = 1.0
    for i in range(k):
        c *= -(alpha + i)
    return c


def _power_law_derivative_table(core_poly: Polynomial, amp_poly: Polynomial,
                                exponent: float, max_k: int):
    """Derivatives of amp(x) * core(x)^exponent as lists {j: poly} with
    V^(k) = sum_j Q_j(x) core(x)^(exponent - j)."""
    dcore = core_poly.deriv()
    tables = [{0: amp_poly}]
    for _ in range(max_k):
        prev = tables[-1]
        nxt: dict[int, Polynomial] = {}
        for j, q in prev.items():
            nxt[j] = nxt.get(j, Polynomial([0.0])) + q.deriv()
            nxt[j + 1] = nxt.get(j + 1, Polynomial([0.0])) + (exponent - j) * q * dcore
        tables.append(nxt)
    return tables


def make_inverse_power(alpha: float, c_plus: float, c_minus: float | None = None) -> PotentialModel:
    """V(x) = c_pm <x>^(-alpha) on +-x >= 0 (exact for |x| >= 2).

    For c_plus != c_minus the two amplitudes are blended across [-2, 2] by a
    polynomial step with seven flat derivatives, which keeps the potential in
    C^7 and leaves the |x| >= 2 closed form untouched.
    """
    if not 2.0 < alpha <= 4.0:
        raise ParameterError(f"alpha must lie in (2, 4], got {alpha}")
    if c_minus is None:
        c_minus = c_plus
    max_k = math.ceil(alpha) + 1
    # amplitude polynomial on [-2, 2]
    blend = SMOOTHSTEP_POLY(Polynomial([0.5, 0.25]))      # S7((x+2)/4)
    amp = Polynomial([c_minus]) + (c_plus - c_minus) * blend
    tables = _power_law_derivative_table(BRACKET_CORE_POLY, amp, -alpha / 2.0, max_k)

    def evaluator(x, k):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        inner = np.abs(x) < 2.0
        outer = ~inner
        if np.any(outer):
            xo = x[outer]
            side = np.where(xo >= 0.0, c_plus, c_minus)
            coeff = _falling_power_coeff(alpha, k)
            out[outer] = side * coeff * np.abs(xo) ** (-alpha - k) * np.sign(xo) ** k
        if np.any(inner):
            xi = x[inner]
            core = BRACKET_CORE_POLY(xi)
            acc = np.zeros_like(xi)
            for j, q in tables[k].items():
                acc += q(xi) * core ** (-alpha / 2.0 - j)
            out[inner] = acc
        return out

    return PotentialModel(
        kind="inverse_power", alpha=alpha, c_plus=c_plus, c_minus=c_minus,
        beta=0.5 * (alpha - 2.0) ** 2, max_derivative_order=max_k,
        evaluator=evaluator, x_asym=2.0, claims_hypotheses=True,
        params={"alpha": alpha, "c_plus": c_plus, "c_minus": c_minus})


def make_zero() -> PotentialModel:
    """The free model V = 0 (resonant at zero energy; d'Alembert baseline)."""

    def evaluator(x, k):
        return np.zeros_like(np.asarray(x, dtype=float))

    return PotentialModel(
        kind="zero", alpha=3.0, c_plus=0.0, c_minus=0.0, beta=0.5,
        max_derivative_order=4, evaluator=evaluator, x_asym=2.0,
        claims_hypotheses=False, params={})


# ---------------------------------------------------------------------------
# Regge-Wheeler on Schwarzschild
# ---------------------------------------------------------------------------

def tortoise_to_areal(params: SchwarzschildParams, x):
    """Invert x = r + 2M log(r/2M - 1) for r > 2M.

    Newton iteration with a bisection fallback; the initial guess r = x for
    x > 4M and r = 2M(1 + exp((x - 2M)/(2M))) for x <= 4M puts the iterate on
    the correct asymptotic branch on either side.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    two_m = 2.0 * params.mass
    # Solve in v = log(r/2M - 1): x = 2M(1 + e^v + v), monotone and smooth,
    # so plain Newton is globally convergent here; this avoids catastrophic
    # r - 2M cancellation near the horizon.  Initial guesses per branch:
    # r = x for x > 4M, r = 2M(1 + exp((x - 2M)/2M)) for x <= 4M.
    v = np.where(x > 2.0 * two_m,
                 np.log(np.maximum(x / two_m - 1.0, 1e-12)),
                 (x - two_m) / two_m)
    for _ in range(200):
        ev = np.exp(v)
        fval = two_m * (1.0 + ev + v) - x
        step = fval / (two_m * (ev + 1.0))
        v = v - step
        if np.all(np.abs(step) < 1e-15 * (1.0 + np.abs(v))):
            break
    else:  # pragma: no cover - Newton on this monotone map always lands
        v_lo = np.full_like(x, -745.0)
        v_hi = np.full_like(x, 710.0)
        for _ in range(200):
            v = 0.5 * (v_lo + v_hi)
            high = two_m * (1.0 + np.exp(v) + v) > x
            v_hi = np.where(high, v, v_hi)
            v_lo = np.where(high, v_lo, v)
    r = two_m * (1.0 + np.exp(v))
    return float(r[0]) if scalar else r


def _rw_derivative_polys(params: SchwarzschildParams, max_k: int):
    """x-derivatives of V as polynomials in u = 1/r.

    d/dx = (1 - 2Mu) dr maps polynomials in u to polynomials in u because
    d/dr = -u^2 d/du.
    """
    two_m = 2.0 * params.mass
    polys = [Polynomial([0.0, 0.0, 0.0, two_m * params.sigma,
                         -two_m * two_m * params.sigma])]
    factor = Polynomial([1.0, -two_m])           # (1 - 2Mu)
    minus_u2 = Polynomial([0.0, 0.0, -1.0])
    for _ in range(max_k):
        polys.append(factor * minus_u2 * polys[-1].deriv())
    return polys


def make_regge_wheeler(params: SchwarzschildParams) -> PotentialModel:
    """V(x) = (2 M sigma / r^3)(1 - 2M/r) with r(x) the areal radius.

    Declared asymptotics: alpha = 3 with right amplitude 2 M sigma; the left
    tail decays exponentially, so the left power-law amplitude is zero and
    the solver tail corrections vanish on that side.
    """
    max_k = 4
    polys = _rw_derivative_polys(params, max_k)

    def evaluator(x, k):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        r = tortoise_to_areal(params, x)
        return polys[k](1.0 / r)

    return PotentialModel(
        kind="regge_wheeler", alpha=3.0,
        c_plus=2.0 * params.mass * params.sigma, c_minus=0.0, beta=0.5,
        max_derivative_order=max_k, evaluator=evaluator,
        x_asym=50.0 * params.mass, claims_hypotheses=True,
        params={"mass": params.mass, "sigma": params.sigma})


# ---------------------------------------------------------------------------
# Poschl-Teller diagnostic family (violates the no-bound-state hypothesis)
# ---------------------------------------------------------------------------

def _pt_derivative_terms(n: int, max_k: int):
    """Derivatives of -n(n+1) sech^2 x as {(a, b): coeff} monomials in
    sech^a x tanh^b x, using (sech)' = -sech tanh, (tanh)' = sech^2."""
    terms = [{(2, 0): -float(n * (n + 1))}]
    for _ in range(max_k):
        nxt: dict[tuple, float] = {}
        for (a, b), c in terms[-1].items():
            nxt[(a, b + 1)] = nxt.get((a, b + 1), 0.0) - a * c
            if b > 0:
                nxt[(a + 2, b - 1)] = nxt.get((a + 2, b - 1), 0.0) + b * c
        terms.append(nxt)
    return terms


def make_poschl_teller(n: int) -> PotentialModel:
    """V(x) = -n(n+1) sech^2 x; exactly n bound states, no zero-energy resonance."""
    if n < 1 or n != int(n):
        raise ParameterError(f"well index must be a positive integer, got {n}")
    n = int(n)
    max_k = 5
    terms = _pt_derivative_terms(n, max_k)

    def evaluator(x, k):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        e = np.exp(-np.abs(x))
        s = 2.0 * e / (1.0 + e * e)        # sech without cosh overflow
        t = np.sign(x) * (1.0 - e * e) / (1.0 + e * e)
        out = np.zeros_like(x)
        for (a, b), c in terms[k].items():
            out += c * s ** a * t ** b
        return out

    return PotentialModel(
        kind="poschl_teller", alpha=4.0, c_plus=0.0, c_minus=0.0, beta=2.0,
        max_derivative_order=max_k, evaluator=evaluator, x_asym=5.0,
        claims_hypotheses=False, params={"n": n})


def make_custom(evaluator, alpha: float, c_plus: float, c_minus: float,
                max_derivative_order: int, x_asym: float = 2.0,
                claims_hypotheses: bool = True, label: str = "custom") -> PotentialModel:
    """Wrap a user-supplied analytic-derivative evaluator (x, k) -> V^(k)(x)."""
    if claims_hypotheses and not 2.0 < alpha <= 4.0:
        raise ParameterError(f"alpha must lie in (2, 4], got {alpha}")
    return PotentialModel(
        kind="custom", alpha=alpha, c_plus=c_plus, c_minus=c_minus,
        beta=0.5 * (alpha - 2.0) ** 2, max_derivative_order=max_derivative_order,
        evaluator=lambda x, k: np.asarray(evaluator(np.atleast_1d(np.asarray(x, float)), k), float),
        x_asym=x_asym, claims_hypotheses=claims_hypotheses,
        params={"label": label, "alpha": alpha})


# ---------------------------------------------------------------------------
# Hypothesis verification
# ---------------------------------------------------------------------------

@dataclass
class HypothesisReport:
    """Local (sampled) hypothesis checks; spectral checks are delegated."""

    exponent_ok: bool
    decay_ok: bool
    decay_constants: dict
    remainder_ok: bool
    remainder_constant: float
    smoothness_ok: bool
    smoothness_slopes: dict
    resonant: bool | None = None          # filled by spectral.resonance_and_bound_states
    bound_states: int | None = None

    @property
    def local_ok(self) -> bool:
        return self.exponent_ok and self.decay_ok and self.remainder_ok and self.smoothness_ok


def verify_hypotheses(model: PotentialModel) -> HypothesisReport:
    """Sampled checks of the decay hypotheses; see HypothesisReport."""
    alpha = model.alpha
    exponent_ok = 2.0 < alpha <= 4.0

    def _bounded_trend(xs, ratios):
        """True when the ratio sequence shows no upward trend in |x|."""
        big = ratios > 1e-300
        if np.count_nonzero(big) <= 10:
            return True
        slope = np.polyfit(np.log(np.abs(xs[big])), np.log(ratios[big]), 1)[0]
        return slope < 0.1

    sides = [np.geomspace(model.x_asym, 1e5, 40),
             -np.geomspace(model.x_asym, 1e5, 40)]
    decay_constants = {}
    decay_ok = True
    for k in range(model.max_derivative_order + 1):
        c_k = 0.0
        for xs in sides:
            ratios = np.abs(eval_derivative(model, xs, k)) * bracket(xs) ** (alpha + k)
            c_k = max(c_k, float(np.max(ratios)))
            decay_ok = decay_ok and _bounded_trend(xs, ratios)
        decay_constants[k] = c_k

    # sampled remainder bound |V - c_pm |x|^-alpha| <= C |x|^(-alpha-beta)
    remainder_constant = 0.0
    remainder_ok = True
    for xs, amp in [(sides[0], model.c_plus), (sides[1], model.c_minus)]:
        rem = np.abs(eval_derivative(model, xs, 0) - amp * np.abs(xs) ** -alpha)
        rem_ratio = rem * np.abs(xs) ** (alpha + model.beta)
        remainder_constant = max(remainder_constant, float(np.max(rem_ratio)))
        remainder_ok = remainder_ok and _bounded_trend(xs, rem_ratio)

    # finite-difference consistency of the supplied derivatives
    probes = np.array([-7.3, -1.1, 0.4, 3.7, 21.0])
    hs = np.geomspace(1e-3, 1e-2, 6)
    smoothness_slopes = {}
    smoothness_ok = True
    for k in range(model.max_derivative_order):
        errs = []
        for h in hs:
            fd = (eval_derivative(model, probes + h, k)
                  - eval_derivative(model, probes - h, k)) / (2.0 * h)
            errs.append(np.max(np.abs(fd - eval_derivative(model, probes, k + 1))))
        errs = np.array(errs)
        if np.max(errs) < 1e-13:
            smoothness_slopes[k] = 2.0   # derivative locally polynomial or zero
            continue
        slope = float(np.polyfit(np.log(hs), np.log(errs + 1e-300), 1)[0])
        smoothness_slopes[k] = slope
        if abs(slope - 2.0) > 0.5:
            smoothness_ok = False

    return HypothesisReport(
        exponent_ok=exponent_ok, decay_ok=decay_ok,
        decay_constants=decay_constants, remainder_ok=remainder_ok,
        remainder_constant=remainder_constant, smoothness_ok=smoothness_ok,
        smoothness_slopes=smoothness_slopes)
