"""Function-space functionals on rearranged step functions.

Lorentz L(p, q) norms, the oscillation spaces L(inf, q) and L(inf, inf),
plain Lebesgue norms, the exponential-Orlicz (Luxemburg) gauge and the
sup_{q>1} ||f||_q / q extrapolation functional.  Everything except the
Orlicz gauge (a bisection) is a closed form over the pieces of f*.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .steps import (
    DecreasingStep,
    StepFunction,
    oscillation_power_integral,
    rearrange,
)

__all__ = [
    "LorentzParams",
    "lorentz_norm",
    "lp_norm",
    "lorentz_inf_q",
    "linf_inf",
    "luxemburg_expL",
    "delta_extrapolation",
    "default_delta_grid",
    "norm_from_request",
]


@dataclass(frozen=True)
class LorentzParams:
    """Indices of an L(p, q) space: p in [1, inf], q in (0, inf].

    ``p = inf`` is valid as a parameter combination but routes to the
    oscillation definitions (:func:`lorentz_inf_q`, :func:`linf_inf`)
    rather than to :func:`lorentz_norm`.
    """

    p: float
    q: float

    def __post_init__(self):
        if not (1.0 <= self.p):
            raise ValueError("p must be >= 1 (inf allowed)")
        if not (0.0 < self.q):
            raise ValueError("q must be > 0 (inf allowed)")


def lorentz_norm(g: DecreasingStep, params: LorentzParams) -> float:
    """``{ integral (g(t) t^{1/p})^q dt/t }^{1/q}`` for p < inf, exact.

    For p = q this is the L^p norm; q = inf gives ``sup_t g(t) t^{1/p}``,
    attained at piece right endpoints.
    """
    p, q = params.p, params.q
    if p == math.inf:
        raise ValueError("p = inf routes to lorentz_inf_q / linf_inf")
    if not g.breaks.size:
        return 0.0
    if q == math.inf:
        return float(np.max(g.values * g.breaks ** (1.0 / p)))
    # sum_i v_i^q * (p/q) * (b_i^{q/p} - a_i^{q/p}); exponent q/p > 0
    e = q / p
    edges = np.concatenate(([0.0], g.breaks)) ** e
    total = float(np.dot(g.values ** q, np.diff(edges))) * (p / q)
    return total ** (1.0 / q)


def lp_norm(g: DecreasingStep, p: float) -> float:
    """L^p norm ``(sum v_i^p width_i)^{1/p}``, p in (0, inf)."""
    if p <= 0:
        raise ValueError("p must be > 0")
    if not g.breaks.size:
        return 0.0
    return float(np.dot(g.values ** p, g.widths)) ** (1.0 / p)


def lorentz_inf_q(g: DecreasingStep, q: float) -> float:
    """Oscillation norm ``{ integral (g** - g)^q dt/t }^{1/q}``, q in (0, inf).

    Exact: on each flat piece of g the integrand is (D/t)^q / t, and the
    tail beyond the support contributes (M/t)^q / t with M the L1 mass.
    Never divergent for step functions (the oscillation vanishes near 0).
    """
    if not (0.0 < q < math.inf):
        raise ValueError("q must be in (0, inf); use linf_inf for q = inf")
    return oscillation_power_integral(g, q, alpha=-1.0) ** (1.0 / q)


def linf_inf(g: DecreasingStep) -> float:
    """``sup_t (g**(t) - g(t))``, exact.

    The oscillation is D/t on each flat piece, so the supremum is scanned
    over piece left endpoints (where it is attained, by right continuity)
    and the start of the zero tail.
    """
    if not g.breaks.size:
        return 0.0
    best = 0.0
    # pieces after the first: D_i / left_i; first piece has D = 0
    D = g._cum[:-1] - g.values * g.lefts
    for left, d in zip(g.lefts[1:], D[1:]):
        best = max(best, d / left)
    best = max(best, g._cum[-1] / g.breaks[-1])
    return float(best)


def luxemburg_expL(f: StepFunction, total_space_measure: float) -> float:
    """Luxemburg gauge of the exponential Orlicz space:
    ``inf{ lam > 0 : integral (e^{|f|/lam} - 1) dmu <= mu(Omega) }``.

    The normalization threshold is the total measure of the ambient space,
    which makes the gauge scale-free on probability spaces.  Solved by
    bisection to 1e-10 relative; 1-homogeneous and monotone in |f|.
    """
    if total_space_measure <= 0:
        raise ValueError("total_space_measure must be > 0")
    v = np.abs(f.values)
    keep = v > 0
    v = v[keep]
    m = f.masses[keep]
    if not v.size:
        return 0.0
    target = total_space_measure
    vmax = float(v.max())
    mtot = float(m.sum())

    def excess(lam: float) -> float:
        return float(np.dot(np.expm1(v / lam), m)) - target

    # G is strictly decreasing in lam; bracket the root analytically
    hi = vmax / math.log1p(target / mtot)          # G(hi) <= 0
    lo = vmax / math.log1p(target / float(m.max()))  # G(lo) >= 0
    if lo > hi:
        lo, hi = hi, lo
    for _ in range(200):
        if hi - lo <= 1e-10 * hi:
            break
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def default_delta_grid() -> np.ndarray:
    """Geometric q grid {1 + 2^-k} union {2^j} used by delta_extrapolation."""
    grid = sorted({1.0 + 2.0 ** (-k) for k in range(13)} | {2.0 ** j for j in range(1, 7)})
    return np.asarray(grid)


def delta_extrapolation(g: DecreasingStep, q_grid=None) -> float:
    """``max over the grid of ||g||_q / q``, a lower bound for
    ``sup_{q>1} ||g||_q / q`` (the sup over all q is not finitely
    computable; the default grid accumulates at q = 1+)."""
    grid = default_delta_grid() if q_grid is None else np.asarray(q_grid, dtype=np.float64)
    if not grid.size:
        raise ValueError("q_grid must be non-empty")
    if np.any(grid <= 1.0):
        raise ValueError("q_grid entries must be > 1")
    if not g.breaks.size:
        return 0.0
    best = 0.0
    for q in grid:
        best = max(best, lp_norm(g, float(q)) / float(q))
    return best


def norm_from_request(obj: StepFunction | DecreasingStep, request: dict) -> float:
    """Evaluate a norm-request JSON object against a function.

    Request schema: ``{"space": "lorentz" | "lorentz-inf" | "linf-inf" |
    "expL" | "delta", "p": ..., "q": ...}``.  ``expL`` additionally
    accepts ``"measure"`` for the ambient space measure (default: the
    function's total mass).
    """
    space = request.get("space")
    if isinstance(obj, StepFunction):
        f, g = obj, rearrange(obj)
    else:
        f, g = obj.as_step(), obj
    if space == "lorentz":
        p = float(request["p"])
        q = float(request.get("q", p))
        return lorentz_norm(g, LorentzParams(p, q))
    if space == "lorentz-inf":
        return lorentz_inf_q(g, float(request["q"]))
    if space == "linf-inf":
        return linf_inf(g)
    if space == "expL":
        measure = float(request.get("measure", f.total_mass or 1.0))
        return luxemburg_expL(f, measure)
    if space == "delta":
        return delta_extrapolation(g, request.get("q_grid"))
    raise ValueError(f"unknown space {space!r}")
