"""K- and J-functional machinery over piecewise-linear concave curves.

The curve ``K(t)`` of a step function for the pair (L1, Linf) is exactly
piecewise linear with slopes f*, so interpolation norms, the two Gagliardo
coordinate functionals and optimal decompositions are computed from the
curve pieces.  Any caller able to produce a concave curve (for instance
the (L1, BMO) proxy) gets all functionals for free.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._quad import adaptive_simpson_log, golden_section_min
from .steps import (
    DecreasingStep,
    Divergent,
    StepFunction,
    power_integral,
    rearrange,
)

__all__ = [
    "ConcaveCurve",
    "ThetaQ",
    "k_curve_l1_linf",
    "k_derivative",
    "j_inf_theta",
    "interp_norm",
    "gagliardo1_norm",
    "gagliardo2_norm",
    "optimal_decomposition_l1_linf",
    "k_l1_bmo_proxy",
    "k_lp_bmo_proxy",
]


def _lock(a) -> np.ndarray:
    a = np.ascontiguousarray(np.atleast_1d(np.asarray(a, dtype=np.float64)))
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ConcaveCurve:
    """Non-decreasing concave piecewise-linear curve with K(0) = 0.

    ``values[i] = K(breaks[i])`` with linear interpolation between
    breakpoints; beyond the last breakpoint the curve continues with
    ``terminal_slope`` (0 for curves of integrable functions).  Slopes are
    non-increasing and bounded below by the terminal slope.
    """

    breaks: np.ndarray
    values: np.ndarray
    terminal_slope: float = 0.0

    def __post_init__(self):
        b = _lock(self.breaks)
        v = _lock(self.values)
        if b.shape != v.shape or b.ndim != 1:
            raise ValueError("breaks and values must be 1-d arrays of equal length")
        if self.terminal_slope < 0:
            raise ValueError("terminal_slope must be >= 0")
        if b.size:
            if b[0] <= 0 or np.any(np.diff(b) <= 0) or not np.all(np.isfinite(b)):
                raise ValueError("breakpoints must be positive, strictly increasing")
            slopes = np.diff(np.concatenate(([0.0], v))) / np.diff(np.concatenate(([0.0], b)))
            if np.any(slopes < -1e-15) or np.any(np.diff(slopes) > 1e-12 * max(slopes[0], 1.0)):
                raise ValueError("curve must be non-decreasing and concave")
            if slopes[-1] < self.terminal_slope - 1e-15:
                raise ValueError("terminal slope may not exceed the last piece slope")
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "values", v)

    @cached_property
    def lefts(self) -> np.ndarray:
        return _lock(np.concatenate(([0.0], self.breaks[:-1])))

    @cached_property
    def slopes(self) -> np.ndarray:
        v = np.concatenate(([0.0], self.values))
        b = np.concatenate(([0.0], self.breaks))
        return _lock(np.diff(v) / np.diff(b))

    @cached_property
    def intercepts(self) -> np.ndarray:
        """a_i with K(t) = a_i + b_i t on piece i; a_i >= 0 by concavity."""
        left_vals = np.concatenate(([0.0], self.values[:-1]))
        return _lock(left_vals - self.slopes * self.lefts)

    @property
    def terminal_value(self) -> float:
        return float(self.values[-1]) if self.values.size else 0.0

    @property
    def terminal_intercept(self) -> float:
        """Intercept of the tail line K_k + c (t - s_k)."""
        if not self.breaks.size:
            return 0.0
        return float(self.values[-1] - self.terminal_slope * self.breaks[-1])

    def value_at(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if np.any(t_arr < 0):
            raise ValueError("t must be >= 0")
        if not self.breaks.size:
            out = self.terminal_slope * t_arr
        else:
            idx = np.searchsorted(self.breaks, t_arr, side="right")
            capped = np.minimum(idx, self.breaks.size - 1)
            out = np.where(
                idx < self.breaks.size,
                self.intercepts[capped] + self.slopes[capped] * t_arr,
                self.terminal_value + self.terminal_slope * (t_arr - (self.breaks[-1] if self.breaks.size else 0.0)),
            )
        out = np.asarray(out, dtype=np.float64)
        return float(out[0]) if np.ndim(t) == 0 else out

    def slope_at(self, t):
        """Right derivative K'(t); constant on pieces, right-continuous."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if np.any(t_arr < 0):
            raise ValueError("t must be >= 0")
        if not self.breaks.size:
            out = np.full_like(t_arr, self.terminal_slope)
        else:
            idx = np.searchsorted(self.breaks, t_arr, side="right")
            capped = np.minimum(idx, self.breaks.size - 1)
            out = np.where(idx < self.breaks.size, self.slopes[capped], self.terminal_slope)
        out = np.asarray(out, dtype=np.float64)
        return float(out[0]) if np.ndim(t) == 0 else out

    def to_json(self) -> dict:
        return {
            "breakpoints": [0.0] + [float(b) for b in self.breaks],
            "values": [0.0] + [float(v) for v in self.values],
            "terminal_slope": float(self.terminal_slope),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ConcaveCurve":
        bp = [float(x) for x in obj["breakpoints"]]
        vals = [float(x) for x in obj["values"]]
        if not bp or bp[0] != 0.0 or not vals or vals[0] != 0.0:
            raise ValueError("curve JSON must start at (0, 0)")
        return cls(np.asarray(bp[1:]), np.asarray(vals[1:]),
                   float(obj.get("terminal_slope", 0.0)))


@dataclass(frozen=True)
class ThetaQ:
    """Interpolation indices theta in [0, 1], q in (0, inf]."""

    theta: float
    q: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= 1.0):
            raise ValueError("theta must be in [0, 1]")
        if not (self.q > 0.0):
            raise ValueError("q must be > 0 (inf allowed)")


def k_curve_l1_linf(g: DecreasingStep) -> ConcaveCurve:
    """Exact K(t; L1, Linf) curve: breakpoints of g, slopes g's values."""
    if not g.breaks.size:
        return ConcaveCurve(np.empty(0), np.empty(0), 0.0)
    return ConcaveCurve(g.breaks.copy(), g._cum[1:].copy(), 0.0)


def k_derivative(K: ConcaveCurve, t) -> float | np.ndarray:
    """Right derivative of the curve; for (L1, Linf) curves this is f*."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(t_arr <= 0):
        raise ValueError("t must be > 0")
    return K.slope_at(t)


def j_inf_theta(n1: float, n2: float, theta: float) -> float:
    """``inf_t t^{-theta} max(n1, t n2) = n1^{1-theta} n2^{theta}``.

    Conventions: inf^0 = 1 and 0^0 = 1 (so theta = 0 returns n1, theta = 1
    returns n2 regardless of the other argument); a zero factor with a
    positive exponent wins over an infinite one.
    """
    if n1 < 0 or n2 < 0:
        raise ValueError("norms must be >= 0")
    if not (0.0 <= theta <= 1.0):
        raise ValueError("theta must be in [0, 1]")
    if theta == 0.0:
        return float(n1)
    if theta == 1.0:
        return float(n2)
    if n1 == 0.0 or n2 == 0.0:
        return 0.0
    return float(n1 ** (1.0 - theta) * n2 ** theta)


def j_inf_theta_numeric(n1: float, n2: float, theta: float,
                        span: float = 1e8) -> float:
    """Golden-section evaluation of ``inf_t t^{-theta} J(t)``.

    Independent of the closed form; used to cross-validate it.  The
    bracket is a wide log-interval around the balance point n1/n2.
    """
    if n1 <= 0 or n2 <= 0:
        raise ValueError("numeric route needs positive norms")
    center = math.log(n1 / n2)

    def phi(u: float) -> float:
        t = math.exp(u)
        return t ** (-theta) * max(n1, t * n2)

    _, val = golden_section_min(phi, center - math.log(span), center + math.log(span))
    return val


def _theta_pow_segment(a: float, b: float, e: float) -> float:
    """integral of t^(e-1) over (a, b), 0 <= a < b <= inf; inf if divergent."""
    if e == 0.0:
        if a == 0.0 or b == math.inf:
            return math.inf
        return math.log(b / a)
    if b == math.inf:
        return math.inf if e > 0 else -(a ** e) / e
    lo = a ** e if a > 0 else (0.0 if e > 0 else math.inf)
    return (b ** e - lo) / e if lo != math.inf else math.inf


def _curve_pieces(K: ConcaveCurve):
    """(a, b, intercept, slope) segments including the tail (b may be inf)."""
    for left, right, a0, b0 in zip(K.lefts, K.breaks, K.intercepts, K.slopes):
        yield float(left), float(right), float(a0), float(b0)
    if K.breaks.size:
        yield float(K.breaks[-1]), math.inf, K.terminal_intercept, float(K.terminal_slope)


def interp_norm(K: ConcaveCurve, tq: ThetaQ) -> float:
    """Lions-Peetre norm ``{ integral (t^-theta K(t))^q dt/t }^{1/q}``.

    Exact (binomial) for integer q; adaptive Simpson in log t at relative
    tolerance 1e-9 otherwise.  q = inf returns the exact supremum, scanned
    over breakpoints and per-piece stationary points.  Divergent cases
    (theta = 0 with a nonzero tail value, theta = 1 with a nonzero head
    slope, or a positive terminal slope) raise :class:`Divergent`.
    """
    theta, q = tq.theta, tq.q
    if not K.breaks.size:
        return 0.0
    if q == math.inf:
        return _interp_sup(K, theta)
    if K.terminal_slope > 0:
        raise Divergent("interp_norm", "positive terminal slope")
    q_int = int(round(q)) if (abs(q - round(q)) < 1e-12 and q <= 128) else None
    total = 0.0
    for a, b, a0, b0 in _curve_pieces(K):
        if a0 == 0.0 and b0 == 0.0:
            continue
        if a0 == 0.0:
            seg = _theta_pow_segment(a, b, (1.0 - theta) * q)
            if seg == math.inf:
                raise Divergent("interp_norm", "head slope with theta >= 1")
            total += (b0 ** q) * seg
        elif b0 == 0.0:
            seg = _theta_pow_segment(a, b, -theta * q)
            if seg == math.inf:
                raise Divergent("interp_norm", "flat tail with theta <= 0")
            total += (a0 ** q) * seg
        elif q_int is not None:
            for j in range(q_int + 1):
                seg = _theta_pow_segment(a, b, j - theta * q)
                if seg == math.inf:
                    raise Divergent("interp_norm", "non-integrable binomial term")
                total += math.comb(q_int, j) * (a0 ** (q_int - j)) * (b0 ** j) * seg
        else:
            total += adaptive_simpson_log(
                lambda t, a0=a0, b0=b0: (a0 + b0 * t) ** q * t ** (-theta * q - 1.0),
                a, b, rel_tol=1e-9)
    return total ** (1.0 / q)


def _interp_sup(K: ConcaveCurve, theta: float) -> float:
    # phi(t) = (a0 + b0 t) t^-theta is U-shaped on each piece (a decreasing
    # plus an increasing power), so the supremum sits at piece endpoints.
    best = 0.0
    for a, b, a0, b0 in _curve_pieces(K):
        if a0 == 0.0 and b0 == 0.0:
            continue

        def phi(t: float) -> float:
            return (a0 + b0 * t) * t ** (-theta)

        if a > 0.0:
            best = max(best, phi(a))
        if b == math.inf:
            if b0 > 0.0 and theta < 1.0:
                raise Divergent("interp_norm", "sup grows like t^(1-theta) in the tail")
            best = max(best, b0 if theta == 1.0 else a0)
        else:
            best = max(best, phi(b))
    return float(best)


def gagliardo1_norm(K: ConcaveCurve, tq: ThetaQ) -> float:
    """First Gagliardo coordinate:
    ``{ integral (t^{1-theta} [K(t)/t - K'(t)])^q dt/t }^{1/q}``.

    For piecewise-linear K the bracket equals ``a_i / t`` on piece i
    (a_i the intercept), so the integral is closed form for every q; for
    (L1, Linf) curves the bracket is f** - f*.  q = inf is the exact sup
    over piece left endpoints.
    """
    theta, q = tq.theta, tq.q
    if not K.breaks.size:
        return 0.0
    pieces = list(_curve_pieces(K))
    if q == math.inf:
        # the integrand a0 t^-theta decreases on each piece: sup at left ends
        # (the first piece always has a0 = 0 since K(0) = 0)
        best = 0.0
        for a, b, a0, _ in pieces:
            if a0 == 0.0 or a == 0.0:
                continue
            best = max(best, a0 if theta == 0.0 else a0 * a ** (-theta))
        return float(best)
    total = 0.0
    for a, b, a0, _ in pieces:
        if a0 == 0.0:
            continue
        seg = _theta_pow_segment(a, b, -theta * q)
        if seg == math.inf:
            raise Divergent("gagliardo1_norm",
                            "theta = 0 with a nonzero tail" if b == math.inf else "head")
        total += (a0 ** q) * seg
    return total ** (1.0 / q)


def gagliardo2_norm(K: ConcaveCurve, tq: ThetaQ) -> float:
    """Second Gagliardo coordinate:
    ``{ integral (t^{1-theta} K'(t))^q dt/t }^{1/q}``.

    K' is the slope, constant per piece, so the integral is closed form;
    for (L1, Linf) curves with 1/q = 1 - theta this is the L^q norm.
    q = inf gives ``sup_t t^{1-theta} K'(t)`` over piece right endpoints.
    """
    theta, q = tq.theta, tq.q
    if not K.breaks.size:
        return 0.0
    pieces = list(_curve_pieces(K))
    if q == math.inf:
        best = 0.0
        for a, b, _, b0 in pieces:
            if b0 == 0.0:
                continue
            if b == math.inf:
                if theta < 1:
                    return math.inf
                best = max(best, b0)
            elif theta == 1.0:
                best = max(best, b0)
            else:
                best = max(best, b0 * b ** (1.0 - theta))
        return float(best)
    total = 0.0
    for a, b, _, b0 in pieces:
        if b0 == 0.0:
            continue
        seg = _theta_pow_segment(a, b, (1.0 - theta) * q)
        if seg == math.inf:
            raise Divergent("gagliardo2_norm",
                            "positive terminal slope" if b == math.inf
                            else "head slope with theta >= 1")
        total += (b0 ** q) * seg
    return total ** (1.0 / q)


def optimal_decomposition_l1_linf(f: StepFunction, t: float) -> tuple[StepFunction, StepFunction]:
    """Split f = part1 + part2 realizing K(t; L1, Linf) exactly.

    ``part1`` is the truncation of |f| at level f*(t) with signs
    reattached, ``part2`` the remainder: ||part1||_1 = K(t) - t K'(t) and
    ||part2||_inf = K'(t) = f*(t).
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    level = rearrange(f).value_at(t)
    sign = np.sign(f.values)
    part2_vals = sign * np.minimum(np.abs(f.values), level)
    part1_vals = f.values - part2_vals
    return (StepFunction(part1_vals, f.masses.copy()),
            StepFunction(part2_vals, f.masses.copy()))


def k_l1_bmo_proxy(sharp_rearranged: DecreasingStep, t: float) -> float:
    """K-functional proxy for (L1, BMO): ``t * (f#)*(t)``.

    Equivalent (not equal) to the true K-functional, with absolute
    constants of equivalence; the input is the rearrangement of a sharp
    maximal function.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    return t * sharp_rearranged.value_at(t)


def k_lp_bmo_proxy(sharp_rearranged: DecreasingStep, p: float, t: float) -> float:
    """K-functional proxy for (Lp, BMO):
    ``{ integral_0^{t^p} (f#)*(s)^p ds }^{1/p}``, exact head integral."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if t <= 0:
        raise ValueError("t must be > 0")
    if not sharp_rearranged.breaks.size:
        return 0.0
    return power_integral(sharp_rearranged, p, 0.0, 0.0, t ** p) ** (1.0 / p)
