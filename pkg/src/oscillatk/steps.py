"""Exact calculus for finite step functions and their rearrangements.

A function is modelled as a finite list of ``(value, mass)`` atoms on an
abstract measure space.  Its non-increasing rearrangement is a
right-continuous step function on ``(0, inf)`` vanishing beyond the total
support mass.  Within this class the distribution function, the maximal
average ``f**``, the oscillation ``f** - f*`` and all power integrals have
closed forms, so inequality checks reduce to exact floating-point
arithmetic instead of quadrature error budgets.

Conventions: rearrangement always acts on ``|f|``; ``f*`` and the
distribution function are right-continuous; pieces with equal values are
merged, zero values are dropped (the zero tail represents them).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np


__all__ = [
    "Divergent",
    "StepFunction",
    "DecreasingStep",
    "rearrange",
    "distribution",
    "integrate_star",
    "double_star",
    "oscillation",
    "truncate",
    "power_integral",
    "oscillation_power_integral",
    "double_star_power_integral",
]

#: default relative tolerance for exact-arithmetic comparisons
REL_TOL = 1e-12


class Divergent(ArithmeticError):
    """A requested integral or norm has no finite value.

    Raised instead of returning ``inf`` so that callers (and the CLI) can
    tell a genuinely divergent functional apart from overflow.
    """

    def __init__(self, functional: str, detail: str = ""):
        self.functional = functional
        msg = f"{functional} is divergent"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


def _asfloats(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    return np.atleast_1d(a)


def _lock(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Finite weighted list of values: atom ``i`` has value ``values[i]``
    carried on a set of measure ``masses[i]``.

    Atoms are positional (two atoms may share a value); all masses are
    strictly positive and all values finite.  The empty atom list is the
    zero function.  Instances are immutable.
    """

    values: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        v = _lock(np.atleast_1d(np.asarray(self.values, dtype=np.float64)))
        m = _lock(np.atleast_1d(np.asarray(self.masses, dtype=np.float64)))
        if v.ndim != 1 or m.ndim != 1 or v.shape != m.shape:
            raise ValueError("values and masses must be 1-d arrays of equal length")
        if v.size and not np.all(np.isfinite(v)):
            raise ValueError("all values must be finite")
        if m.size and (not np.all(np.isfinite(m)) or np.any(m <= 0)):
            raise ValueError("all masses must be finite and > 0")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "masses", m)

    @classmethod
    def from_atoms(cls, atoms) -> "StepFunction":
        """Build from an iterable of ``(value, mass)`` pairs."""
        atoms = list(atoms)
        if not atoms:
            return cls(np.empty(0), np.empty(0))
        v, m = zip(*atoms)
        return cls(np.asarray(v, dtype=np.float64), np.asarray(m, dtype=np.float64))

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return [(float(v), float(m)) for v, m in zip(self.values, self.masses)]

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def l1_norm(self) -> float:
        return float(np.abs(self.values) @ self.masses)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def lp_norm(self, p: float) -> float:
        """``(integral of |f|^p)^(1/p)`` by direct atom summation."""
        if p <= 0:
            raise ValueError("p must be positive")
        if not self.values.size:
            return 0.0
        return float((np.abs(self.values) ** p @ self.masses) ** (1.0 / p))

    def to_json(self) -> dict:
        return {"atoms": [[float(v), float(m)] for v, m in zip(self.values, self.masses)]}

    @classmethod
    def from_json(cls, obj: dict) -> "StepFunction":
        return cls.from_atoms(obj["atoms"])


@dataclass(frozen=True, eq=False)
class DecreasingStep:
    """Canonical non-increasing right-continuous step function on (0, inf).

    ``values[i] > 0`` on ``[lefts[i], breaks[i])`` with
    ``lefts = [0, breaks[:-1]]``; zero on ``[breaks[-1], inf)``.  Values are
    strictly decreasing (equal neighbours merged) and breakpoints strictly
    increasing.  The empty instance is the zero function.
    """

    breaks: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = _lock(np.atleast_1d(np.asarray(self.breaks, dtype=np.float64)))
        v = _lock(np.atleast_1d(np.asarray(self.values, dtype=np.float64)))
        if b.shape != v.shape or b.ndim != 1:
            raise ValueError("breaks and values must be 1-d arrays of equal length")
        if b.size:
            if not np.all(np.isfinite(b)) or b[0] <= 0 or np.any(np.diff(b) <= 0):
                raise ValueError("breakpoints must be finite, positive, strictly increasing")
            if not np.all(np.isfinite(v)) or v[-1] <= 0 or np.any(np.diff(v) >= 0):
                raise ValueError("values must be finite, positive, strictly decreasing")
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "values", v)

    @cached_property
    def lefts(self) -> np.ndarray:
        return _lock(np.concatenate(([0.0], self.breaks[:-1])))

    @cached_property
    def widths(self) -> np.ndarray:
        return _lock(np.diff(np.concatenate(([0.0], self.breaks))))

    @cached_property
    def _cum(self) -> np.ndarray:
        # cumulative integral of the step up to each breakpoint, leading 0
        return _lock(np.concatenate(([0.0], np.cumsum(self.values * self.widths))))

    @property
    def support_measure(self) -> float:
        return float(self.breaks[-1]) if self.breaks.size else 0.0

    @property
    def total_integral(self) -> float:
        """Total L1 mass ``integral of g`` over (0, inf)."""
        return float(self._cum[-1])

    def value_at(self, t):
        """g(t) for scalar or array t >= 0 (right-continuous)."""
        t_arr = _asfloats(t)
        if np.any(t_arr < 0):
            raise ValueError("t must be >= 0")
        idx = np.searchsorted(self.breaks, t_arr, side="right")
        out = np.where(idx < self.values.size,
                       self.values[np.minimum(idx, max(self.values.size - 1, 0))]
                       if self.values.size else 0.0,
                       0.0)
        out = np.asarray(out, dtype=np.float64)
        return float(out[0]) if np.isscalar(t) or np.ndim(t) == 0 else out

    def head_integral(self, t):
        """integral of g over (0, t) for scalar or array t >= 0."""
        t_arr = _asfloats(t)
        if np.any(t_arr < 0):
            raise ValueError("t must be >= 0")
        if not self.breaks.size:
            out = np.zeros_like(t_arr)
            return float(out[0]) if np.ndim(t) == 0 else out
        idx = np.searchsorted(self.breaks, t_arr, side="right")
        capped = np.minimum(idx, self.values.size - 1)
        inside = idx < self.values.size
        out = np.where(
            inside,
            self._cum[capped] + self.values[capped] * (t_arr - self.lefts[capped]),
            self._cum[-1],
        )
        out = np.asarray(out, dtype=np.float64)
        return float(out[0]) if np.ndim(t) == 0 else out

    def as_step(self) -> StepFunction:
        """View as a StepFunction (one atom per piece)."""
        return StepFunction(self.values.copy(), self.widths.copy())

    def to_json(self) -> dict:
        return {
            "breakpoints": [0.0] + [float(b) for b in self.breaks],
            "values": [float(v) for v in self.values],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DecreasingStep":
        bp = [float(b) for b in obj["breakpoints"]]
        if not bp or bp[0] != 0.0:
            raise ValueError("breakpoints must start at 0")
        return cls(np.asarray(bp[1:]), np.asarray(obj["values"], dtype=np.float64))


def rearrange(f: StepFunction) -> DecreasingStep:
    """Non-increasing rearrangement of ``|f|`` in canonical form.

    Preserves the total mass of the support of ``|f|`` and every integral
    ``integral of |f|^q`` exactly.
    """
    a = np.abs(f.values)
    keep = a > 0
    a = a[keep]
    m = f.masses[keep]
    if not a.size:
        return DecreasingStep(np.empty(0), np.empty(0))
    order = np.argsort(-a, kind="stable")
    a = a[order]
    m = m[order]
    starts = np.empty(a.size, dtype=bool)
    starts[0] = True
    starts[1:] = a[1:] != a[:-1]
    group = np.cumsum(starts) - 1
    vals = a[starts]
    masses = np.zeros(vals.size)
    np.add.at(masses, group, m)
    return DecreasingStep(np.cumsum(masses), vals)


def distribution(f: StepFunction, s) -> float | np.ndarray:
    """Distribution function ``mu{|f| > s}`` for scalar or array ``s >= 0``."""
    s_arr = _asfloats(s)
    if np.any(s_arr < 0):
        raise ValueError("s must be >= 0")
    if not f.values.size:
        out = np.zeros_like(s_arr)
        return float(out[0]) if np.ndim(s) == 0 else out
    a = np.abs(f.values)
    order = np.argsort(a, kind="stable")
    a_sorted = a[order]
    # suffix sums: mass of atoms with |value| > s
    suffix = np.concatenate((np.cumsum(f.masses[order][::-1])[::-1], [0.0]))
    idx = np.searchsorted(a_sorted, s_arr, side="right")
    out = suffix[idx]
    return float(out[0]) if np.ndim(s) == 0 else out


def integrate_star(g: DecreasingStep, t) -> float | np.ndarray:
    """``integral of g over (0, t)``, exact; equals K(t; L1, Linf) of the
    underlying function.  Non-decreasing and concave in t."""
    return g.head_integral(t)


def double_star(g: DecreasingStep, t) -> float | np.ndarray:
    """Maximal average ``g**(t) = (1/t) integral_0^t g``; requires t > 0."""
    t_arr = _asfloats(t)
    if np.any(t_arr <= 0):
        raise ValueError("t must be > 0")
    out = g.head_integral(t_arr) / t_arr
    return float(out[0]) if np.ndim(t) == 0 else out


def oscillation(g: DecreasingStep, t) -> float | np.ndarray:
    """``g**(t) - g(t) >= 0``; requires t > 0.

    Satisfies the layer-cake identity
    ``t (g**(t) - g(t)) = integral_{g(t)}^inf mu{g > u} du``.
    """
    t_arr = _asfloats(t)
    if np.any(t_arr <= 0):
        raise ValueError("t must be > 0")
    out = g.head_integral(t_arr) / t_arr - g.value_at(t_arr)
    out = np.maximum(out, 0.0)
    return float(out[0]) if np.ndim(t) == 0 else out


def truncate(f: StepFunction, level: float) -> StepFunction:
    """Truncation ``f_level = max(|f| - level, 0)`` atom by atom.

    Signs are dropped: the operation is defined on ``|f|`` (callers that
    need a signed decomposition reattach signs, see
    ``kfunc.optimal_decomposition_l1_linf``).  With ``level = f*(t)`` the
    result has L1 mass ``t (f**(t) - f*(t))`` and ``|f| - f_level`` has sup
    norm ``min(max |f|, level)``.
    """
    if level < 0:
        raise ValueError("level must be >= 0")
    return StepFunction(np.maximum(np.abs(f.values) - level, 0.0), f.masses.copy())


def _piece_overlaps(g: DecreasingStep, lo: float, hi: float):
    """Yield (a, b, v) piece segments of g intersected with (lo, hi)."""
    for left, right, v in zip(g.lefts, g.breaks, g.values):
        a = max(left, lo)
        b = min(right, hi)
        if a < b:
            yield a, b, float(v)


def _power_segment(a: float, b: float, alpha: float) -> float:
    """integral of t^alpha over (a, b) with 0 <= a < b <= inf; may be inf."""
    if alpha == -1.0:
        if a == 0.0 or b == math.inf:
            return math.inf
        return math.log(b / a)
    e = alpha + 1.0
    if b == math.inf:
        return math.inf if e > 0 else -(a ** e) / e
    hi = b ** e
    lo = a ** e if a > 0 else (0.0 if e > 0 else math.inf)
    return (hi - lo) / e if lo != math.inf else math.inf


def power_integral(g: DecreasingStep, q: float, alpha: float,
                   lo: float = 0.0, hi: float = math.inf) -> float:
    """``integral of g(t)^q t^alpha dt`` over (lo, hi), closed form per piece.

    Raises :class:`Divergent` when the requested integral is infinite
    (only possible at the lower end: ``lo = 0``, ``alpha <= -1`` with
    ``g(0+) > 0``).  ``hi = inf`` is always allowed because g has bounded
    support.
    """
    if q <= 0:
        raise ValueError("q must be > 0")
    if lo < 0 or not lo < hi:
        raise ValueError("need 0 <= lo < hi")
    total = 0.0
    for a, b, v in _piece_overlaps(g, lo, hi):
        seg = _power_segment(a, b, alpha)
        if seg == math.inf:
            raise Divergent("power_integral", f"t^{alpha} not integrable on ({a}, {b})")
        total += (v ** q) * seg
    return total


def _osc_pieces(g: DecreasingStep):
    """Pieces of g** - g as D/t segments: (a, b, v, D) with b possibly inf.

    On each interval where g is flat with value v,
    ``g**(t) - g(t) = D / t`` with ``D = integral_0^a g - a v``; beyond the
    support v = 0 and D equals the total L1 mass.
    """
    for left, right, v, cum in zip(g.lefts, g.breaks, g.values, g._cum[:-1]):
        yield float(left), float(right), float(v), float(cum - v * left)
    if g.breaks.size:
        yield float(g.breaks[-1]), math.inf, 0.0, float(g._cum[-1])


def oscillation_power_integral(g: DecreasingStep, q: float, alpha: float = 0.0,
                               lo: float = 0.0, hi: float = math.inf) -> float:
    """``integral of (g**(t) - g(t))^q t^alpha dt`` over (lo, hi), exact.

    The integrand is ``(D/t)^q t^alpha`` piecewise, so every segment has a
    closed form.  Divergence can only come from the tail (needs
    ``q > alpha + 1`` when ``hi = inf``); near zero the oscillation
    vanishes identically on the first piece.
    """
    if q <= 0:
        raise ValueError("q must be > 0")
    if lo < 0 or not lo < hi:
        raise ValueError("need 0 <= lo < hi")
    total = 0.0
    for left, right, _v, D in _osc_pieces(g):
        a = max(left, lo)
        b = min(right, hi)
        if not a < b or D == 0.0:
            continue
        seg = _power_segment(a, b, alpha - q)
        if seg == math.inf:
            raise Divergent("oscillation_power_integral",
                            f"tail exponent {alpha - q} >= -1")
        total += (D ** q) * seg
    return total


def oscillation_power_head(g: DecreasingStep, q: float, alpha: float, ts) -> np.ndarray:
    """Vectorized ``integral_0^t (g** - g)^q s^alpha ds`` for an array of t.

    Same segments as :func:`oscillation_power_integral`; needs
    ``alpha - q > -1`` impossible only at the lower end, where the first
    piece vanishes, so the head is always finite.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    if np.any(ts < 0):
        raise ValueError("t must be >= 0")
    segs = list(_osc_pieces(g))
    if not segs:
        return np.zeros_like(ts)
    lefts = np.asarray([s[0] for s in segs])
    D = np.asarray([s[3] for s in segs])
    e = alpha - q + 1.0
    # antiderivative D^q * s^e / e per piece (log form if e == 0)
    if e == 0.0:
        prim = lambda s: np.log(np.maximum(s, 1e-300))
    else:
        prim = lambda s: s ** e / e
    pl = np.where(D > 0, prim(np.maximum(lefts, 1e-300)), 0.0)
    rights = np.append(lefts[1:], math.inf)
    finite_r = np.where(np.isfinite(rights), rights, 1.0)
    pr = np.where(D > 0, np.where(np.isfinite(rights),
                                  prim(finite_r), 0.0 if e < 0 else math.inf), 0.0)
    full = np.where(D > 0, D ** q * (pr - pl), 0.0)
    cum = np.concatenate(([0.0], np.cumsum(full)))
    idx = np.searchsorted(lefts, ts, side="right") - 1
    idx = np.clip(idx, 0, len(segs) - 1)
    partial = np.where(D[idx] > 0,
                       D[idx] ** q * (prim(np.maximum(ts, 1e-300)) - pl[idx]), 0.0)
    out = cum[idx] + np.maximum(partial, 0.0)
    return out


def _segment_powers(a: np.ndarray, b: np.ndarray, e: float) -> np.ndarray:
    """Vectorized ``integral of t^e dt`` on finite segments with a > 0."""
    if e == -1.0:
        return np.log(b / a)
    return (b ** (e + 1.0) - a ** (e + 1.0)) / (e + 1.0)


def double_star_power_integral(g: DecreasingStep, q: float, alpha: float = 0.0,
                               lo: float = 0.0, hi: float = math.inf) -> float:
    """``integral of g**(t)^q t^alpha dt`` over (lo, hi).

    Piecewise ``g**(t) = v + D/t``.  Integer q expands binomially (all
    terms non-negative, hence stable); non-integer q uses batched
    Gauss-Legendre in log t, which converges to machine precision on these
    analytic segments.  Head and tail segments are always closed form.
    """
    if q <= 0:
        raise ValueError("q must be > 0")
    if lo < 0 or not lo < hi:
        raise ValueError("need 0 <= lo < hi")
    if not g.breaks.size:
        return 0.0
    q_int = int(round(q)) if (abs(q - round(q)) < 1e-12 and q <= 128) else None
    total = 0.0
    seg_a, seg_b, seg_v, seg_D = [], [], [], []
    for left, right, v, D in _osc_pieces(g):
        a = max(left, lo)
        b = min(right, hi)
        if not a < b:
            continue
        if D == 0.0:
            seg = _power_segment(a, b, alpha)
            if seg == math.inf:
                raise Divergent("double_star_power_integral",
                                f"t^{alpha} not integrable near {a}")
            total += (v ** q) * seg
        elif v == 0.0:
            seg = _power_segment(a, b, alpha - q)
            if seg == math.inf:
                raise Divergent("double_star_power_integral",
                                f"tail exponent {alpha - q} >= -1")
            total += (D ** q) * seg
        else:
            # interior piece: 0 < a < b < inf, both v and D positive
            seg_a.append(a)
            seg_b.append(b)
            seg_v.append(v)
            seg_D.append(D)
    if not seg_a:
        return total
    a = np.asarray(seg_a)
    b = np.asarray(seg_b)
    v = np.asarray(seg_v)
    D = np.asarray(seg_D)
    if q_int is not None:
        for j in range(q_int + 1):
            segs = _segment_powers(a, b, alpha - j)
            total += math.comb(q_int, j) * float(
                np.dot(v ** (q_int - j) * D ** j, segs))
    else:
        total += _gauss_log_batch(a, b, v, D, q, alpha)
    return total


def _gauss_log_batch(a, b, v, D, q: float, alpha: float) -> float:
    """Batched GL in log t of (v + D/t)^q t^alpha over finite segments."""
    from ._quad import _GL_NODES, _GL_WEIGHTS
    ua = np.log(a)
    ub = np.log(b)
    counts = np.maximum(np.ceil(ub - ua).astype(np.int64), 1)
    idx = np.repeat(np.arange(a.size), counts)
    offsets = np.arange(idx.size) - np.repeat(
        np.concatenate(([0], np.cumsum(counts[:-1]))), counts)
    width = ((ub - ua) / counts)[idx]
    lo_u = ua[idx] + offsets * width
    mid = lo_u + 0.5 * width
    half = 0.5 * width
    u = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    t = np.exp(u)
    vals = (v[idx, None] + D[idx, None] / t) ** q * t ** (alpha + 1.0)
    return float(np.dot(half, vals @ _GL_WEIGHTS))
