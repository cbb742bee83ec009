"""Quadrature helpers for the few functionals without closed forms.

Two engines:

* ``gauss_log_integral``: composite Gauss-Legendre after the substitution
  u = log t.  Used for power integrals of maximal averages at non-integer
  exponents; those integrands are analytic in a wide strip around the real
  u axis, so 32 nodes per unit log-length reach ~1e-13 relative error.
* ``adaptive_simpson_log``: classic interval-halving Simpson with
  Richardson acceptance, also in u = log t, with a hard evaluation cap.
  Used by the interpolation-norm path for non-closed-form exponents.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["gauss_log_integral", "adaptive_simpson_log", "ToleranceNotMet", "golden_section_min"]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


class ToleranceNotMet(ArithmeticError):
    """Adaptive quadrature hit its evaluation cap before the tolerance."""


def gauss_log_integral(fn, a: float, b: float, max_chunk: float = 1.0) -> float:
    """``integral of fn(t) dt`` over 0 < a < b < inf via GL nodes in log t.

    ``fn`` must accept an ndarray of t values.  The log interval is split
    into chunks of length <= ``max_chunk`` so accuracy is independent of
    how elongated the piece is.
    """
    if not (0 < a < b < math.inf):
        raise ValueError("need 0 < a < b < inf")
    ua, ub = math.log(a), math.log(b)
    n_chunks = max(1, math.ceil((ub - ua) / max_chunk))
    edges = np.linspace(ua, ub, n_chunks + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        u = mid + half * _GL_NODES
        t = np.exp(u)
        total += half * float(np.dot(_GL_WEIGHTS, fn(t) * t))
    return total


def adaptive_simpson_log(fn, a: float, b: float, rel_tol: float = 1e-9,
                         max_evals: int = 1_000_000) -> float:
    """Adaptive Simpson for ``integral of fn(t) dt`` in u = log t.

    Interval halving with the standard 15x Richardson error estimate.
    Raises :class:`ToleranceNotMet` if ``max_evals`` integrand evaluations
    are insufficient.
    """
    if not (0 < a < b < math.inf):
        raise ValueError("need 0 < a < b < inf")

    def g(u: float) -> float:
        t = math.exp(u)
        return fn(t) * t

    ua, ub = math.log(a), math.log(b)
    evals = [0]

    def ev(u: float) -> float:
        evals[0] += 1
        if evals[0] > max_evals:
            raise ToleranceNotMet(
                f"adaptive Simpson exceeded {max_evals} evaluations")
        return g(u)

    def simpson(lo, hi, flo, fmid, fhi):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, hi, flo, fmid, fhi, whole, tol, depth):
        mid = 0.5 * (lo + hi)
        lmid = 0.5 * (lo + mid)
        rmid = 0.5 * (mid + hi)
        fl = ev(lmid)
        fr = ev(rmid)
        left = simpson(lo, mid, flo, fl, fmid)
        right = simpson(mid, hi, fmid, fr, fhi)
        err = left + right - whole
        if depth > 60 or abs(err) <= 15.0 * tol:
            return left + right + err / 15.0
        return (recurse(lo, mid, flo, fl, fmid, left, tol / 2.0, depth + 1)
                + recurse(mid, hi, fmid, fr, fhi, right, tol / 2.0, depth + 1))

    fa, fm, fb = ev(ua), ev(0.5 * (ua + ub)), ev(ub)
    whole = simpson(ua, ub, fa, fm, fb)
    scale = abs(whole) + 1e-300
    return recurse(ua, ub, fa, fm, fb, whole, rel_tol * scale, 0)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(fn, lo: float, hi: float, iters: int = 200) -> tuple[float, float]:
    """Golden-section minimum of a unimodal ``fn`` on [lo, hi].

    Returns ``(argmin, min)``.  Runs a fixed number of shrink steps, which
    is plenty for the bracket widths used here.
    """
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
        if b - a <= 1e-14 * max(abs(a), abs(b), 1.0):
            break
    x = 0.5 * (a + b)
    return x, fn(x)
