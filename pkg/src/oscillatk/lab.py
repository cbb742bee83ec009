"""Registry of oscillation inequalities as executable, seeded checks.

Each check evaluates a left-hand side against ``constant * right-hand
side`` over a generated family and reports the worst ratio.  Two modes:

* ``exact-constant``: the constant is explicit; the check passes when the
  worst ratio stays within tolerance of 1.  A tiny absolute slack is built
  into the denominators so that 0-vs-0 corners do not manufacture
  violations.
* ``observed-constant``: the constant is an unquantified absolute one; the
  worst ratio *is* the observed constant, and the check passes when it is
  finite and stable under refinement (resampling at doubled resolution or
  family size changes it by less than the stability budget).

Everything is deterministic given the seed: per-trial streams are keyed on
``(seed, trial)``, so parallel execution cannot perturb results.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import grid as gridmod
from . import norms
from .generators import generate
from .kfunc import (
    ThetaQ,
    gagliardo1_norm,
    gagliardo2_norm,
    interp_norm,
    j_inf_theta,
    j_inf_theta_numeric,
    k_curve_l1_linf,
)
from .steps import (
    DecreasingStep,
    Divergent,
    StepFunction,
    double_star,
    double_star_power_integral,
    integrate_star,
    oscillation,
    oscillation_power_head,
    oscillation_power_integral,
    rearrange,
)

__all__ = ["CheckSpec", "CheckReport", "run_check", "probe_sharpness", "registry_names"]

_SLACK = 1e-12


# ---------------------------------------------------------------------------
# spec / report types


@dataclass(frozen=True)
class CheckSpec:
    """One verification request: which check, over which seeded family."""

    name: str
    params: dict = field(default_factory=dict)
    family: str = ""
    size: int = 0
    dim: int = 1
    seed: int = 0
    trials: int = 50
    mode: str = ""
    tolerance: float = 0.0

    @classmethod
    def for_check(cls, name: str, trials: int = 50, seed: int = 0,
                  params: dict | None = None, family: str | None = None,
                  size: int | None = None, dim: int | None = None) -> "CheckSpec":
        cd = _registry_get(name)
        merged = dict(cd.params)
        if params:
            merged.update(params)
        return cls(
            name=name,
            params=merged,
            family=family if family is not None else cd.family,
            size=size if size is not None else cd.size,
            dim=dim if dim is not None else cd.dim,
            seed=seed,
            trials=max(int(trials), 1),
            mode=cd.mode,
            tolerance=cd.tolerance,
        )


@dataclass
class CheckReport:
    """Outcome of one check run (or sharpness probe)."""

    name: str
    params: dict
    trials: int
    max_ratio: float
    observed_constant: float
    witness: dict
    passed: bool
    runtime_ms: float
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("passed")
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "CheckReport":
        obj = dict(obj)
        obj["passed"] = obj.pop("pass")
        return cls(**obj)


# ---------------------------------------------------------------------------
# small helpers


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(trial)])


def _doubling_ts(rng: np.random.Generator, g: DecreasingStep, n_t: int) -> np.ndarray:
    """t samples for pointwise-in-t checks: random log-spaced plus the
    deterministic breakpoint-derived candidates where equality can live."""
    if not g.breaks.size:
        return np.asarray([1.0])
    lo = g.breaks[0] / 8.0
    hi = g.breaks[-1] * 4.0
    ts = np.exp(rng.uniform(math.log(lo), math.log(hi), n_t))
    cands = np.concatenate([
        g.breaks,
        g.breaks * 0.5,
        g.breaks * 2.0,
        g.breaks * 2.0 * (1.0 - 1e-9),
    ])
    return np.concatenate([ts, cands[cands > 0]])


def _geom_ts(lo: float, hi: float, n: int) -> np.ndarray:
    if not (0 < lo < hi):
        lo = hi / 2.0 ** 20
    return np.geomspace(lo, hi, n)


def _grid_step(g: gridmod.GridFunction) -> StepFunction:
    return gridmod.to_step(g)


def _max_ratio(num: np.ndarray, den: np.ndarray, slack: float = _SLACK) -> float:
    return float(np.max(num / (den + slack))) if num.size else 0.0


# ---------------------------------------------------------------------------
# check evaluators: (obj, params, rng) -> dict of named ratios (+ extras)


def _ev_reverse_hardy(obj: StepFunction, params, rng):
    g = rearrange(obj)
    out = {}
    for q in params["qs"]:
        if not g.breaks.size:
            out[f"q={q:g}"] = 0.0
            continue
        lhs = norms.lp_norm(g, q)
        rhs = double_star_power_integral(g, q) ** (1.0 / q)
        c = ((q - 1.0) / q) ** (1.0 / q)
        out[f"q={q:g}"] = lhs / (c * rhs + _SLACK)
    return out, {}


def _ev_hardy_osc(obj: StepFunction, params, rng):
    g = rearrange(obj)
    out = {}
    for q in params["qs"]:
        if not g.breaks.size:
            out[f"q={q:g}"] = 0.0
            continue
        lhs = double_star_power_integral(g, q) ** (1.0 / q)
        rhs = q * oscillation_power_integral(g, q) ** (1.0 / q)
        out[f"q={q:g}"] = lhs / (rhs + _SLACK)
    return out, {}


def _ev_lemma_k(obj: StepFunction, params, rng):
    g = rearrange(obj)
    K = k_curve_l1_linf(g)
    n1 = obj.l1_norm()
    n2 = obj.sup_norm()
    out = {}
    for theta in params["thetas"]:
        for q in params["qs"]:
            key = f"theta={theta:g},q={q:g}"
            if n1 == 0.0:
                out[key] = 0.0
                continue
            lhs = ((1.0 - theta) * theta * q) ** (1.0 / q) * interp_norm(K, ThetaQ(theta, q))
            rhs = n1 ** (1.0 - theta) * n2 ** theta
            out[key] = lhs / (rhs + _SLACK)
    return out, {}


def _sample_triple(rng: np.random.Generator, size, params, dim, family=None):
    n1, n2 = rng.lognormal(0.0, 1.5, 2)
    theta = rng.uniform(0.05, 0.95)
    return np.asarray([n1, n2, theta])


def _ev_j_identity(obj: np.ndarray, params, rng):
    n1, n2, theta = float(obj[0]), float(obj[1]), float(obj[2])
    theta = min(max(theta, 1e-6), 1.0 - 1e-6)
    closed = j_inf_theta(n1, n2, theta)
    numeric = j_inf_theta_numeric(n1, n2, theta)
    ratio = max(closed, numeric) / max(min(closed, numeric), 1e-300)
    return {"agree": ratio}, {}


def _ev_chen_zhu(obj: gridmod.GridFunction, params, rng):
    fs = _grid_step(obj)
    p = params["p"]
    bmo = gridmod.bmo_seminorm(obj, 1.0)
    base = fs.lp_norm(p)
    out = {}
    for q in params["qs"]:
        key = f"q={q:g}"
        if bmo <= 0 or base <= 0:
            out[key] = 0.0
            continue
        ratio = fs.lp_norm(q) / (base ** (p / q) * bmo ** (1.0 - p / q))
        out[key] = ratio / q
    return out, {}


def _ev_john_nirenberg(obj: gridmod.GridFunction, params, rng):
    mean = float(obj.values.mean())
    centered = gridmod.GridFunction(obj.dim, obj.n_side, obj.h, obj.values - mean)
    g = rearrange(_grid_step(centered))
    bmo = gridmod.bmo_seminorm(obj, 1.0)
    if bmo <= 0 or not g.breaks.size:
        return {"jn": 0.0}, {}
    vol = obj.cube_measure
    # ratio v / log(6|Q|/t) increases on each flat piece: test right endpoints
    ratios = g.values / (bmo * np.log(6.0 * vol / g.breaks))
    return {"jn": float(ratios.max())}, {}


def _ev_bds(obj: gridmod.GridFunction, params, rng):
    g = rearrange(_grid_step(obj))
    sharp = gridmod.sharp_function(obj, 1.0)
    s = rearrange(_grid_step(sharp))
    cap = obj.cube_measure / 3.0
    ts = np.concatenate([g.lefts[1:], s.breaks, [cap * (1.0 - 1e-12)]])
    ts = ts[(ts > 0) & (ts < cap)]
    if not ts.size or not s.breaks.size:
        return {"bds": 0.0}, {}
    num = oscillation(g, ts) if g.breaks.size else np.zeros_like(ts)
    den = s.value_at(ts)
    return {"bds": _max_ratio(num, den)}, {}


def _ev_teomarkao(obj, params, rng):
    if params.get("form", "bmo5") == "general":
        return _ev_teomarkao_general(obj, params, rng)
    fs = _grid_step(obj)
    g = rearrange(fs)
    linf = norms.linf_inf(g)
    n1 = fs.l1_norm()
    out = {}
    for q in params["qs"]:
        key = f"q={q:g}"
        if linf <= 0 or n1 <= 0:
            out[key] = 0.0
            continue
        lhs = fs.lp_norm(q)
        rhs = q * n1 ** (1.0 / q) * linf ** (1.0 - 1.0 / q)
        out[key] = lhs / (rhs + _SLACK)
    return out, {}


def _ev_teomarkao_general(obj: StepFunction, params, rng):
    g = rearrange(obj)
    K = k_curve_l1_linf(g)
    linf = norms.linf_inf(g)
    n1 = obj.l1_norm()
    out = {}
    for theta in params["thetas"]:
        for q in params["qs"]:
            key = f"theta={theta:g},q={q:g}"
            if linf <= 0 or n1 <= 0:
                out[key] = 0.0
                continue
            lhs = gagliardo2_norm(K, ThetaQ(theta, q))  # divergent at theta = 1
            a = (1.0 - theta) * q
            factor = q * (1.0 + a ** (1.0 / q)) ** (1.0 - theta) * a ** (-theta)
            rhs = factor * n1 ** (1.0 - theta) * linf ** theta
            out[key] = lhs / (rhs + _SLACK)
    return out, {}


def _ev_l1_cube(obj: gridmod.GridFunction, params, rng):
    fs = _grid_step(obj)
    g = rearrange(fs)
    if not g.breaks.size:
        return {"l1": 0.0}, {}
    return {"l1": fs.l1_norm() / (obj.cube_measure * norms.linf_inf(g) + _SLACK)}, {}


def _ev_osc_doubling(obj: StepFunction, params, rng):
    g = rearrange(obj)
    if not g.breaks.size:
        return {"doubling": 0.0}, {}
    ts = _doubling_ts(rng, g, params["n_t"])
    lhs = g.value_at(ts / 2.0) - g.value_at(ts)
    rhs = 2.0 * oscillation(g, ts)
    return {"doubling": _max_ratio(lhs, rhs)}, {}


def _ev_combinaos(obj: StepFunction, params, rng):
    g = rearrange(obj)
    if not g.breaks.size:
        return {"combinaos": 0.0}, {}
    ts = _doubling_ts(rng, g, params["n_t"])
    lhs = oscillation(g, ts)
    avg = (2.0 * integrate_star(g, ts / 2.0) - integrate_star(g, ts)) / ts
    rhs = avg + g.value_at(ts / 2.0) - g.value_at(ts)
    return {"combinaos": _max_ratio(lhs, rhs)}, {}


def _ev_good_lambda(obj: gridmod.GridFunction, params, rng):
    eps = params["eps"]
    a = np.abs(obj.values)
    sharp = gridmod.sharp_function(obj, 1.0)
    b = sharp.values
    cell = obj.cell_mass
    gstar = rearrange(_grid_step(obj))
    mstar = rearrange(_grid_step(sharp))
    if not gstar.breaks.size or not mstar.breaks.size:
        return {"conclusion": 0.0}, {"B": 0.0}

    ts = _geom_ts(cell, obj.cube_measure, params["n_t"])
    pos = a[a > 0]
    hi = float(a.max()) / 2.0
    lo = float(pos.min())
    lam_grid = np.geomspace(lo, hi, params["n_lambda"]) if lo < hi \
        else np.geomspace(max(hi, 1e-12) / 100.0, max(hi, 1e-12), params["n_lambda"])
    lam_extra = gstar.value_at(2.0 * ts)
    lams = np.unique(np.concatenate([lam_grid, lam_extra, [0.0]]))

    rhs_counts = (a[:, None] > lams[None, :]).sum(axis=0).astype(np.float64)

    def feasible(B: float) -> bool:
        lhs_counts = (a[:, None] > B * b[:, None] + lams[None, :]).sum(axis=0)
        return bool(np.all(lhs_counts <= eps * rhs_counts + 1e-9))

    if np.any(b <= 0):
        # the sharp function vanishes somewhere: no B can thin those cells
        if not feasible(0.0):
            return {"conclusion": math.inf}, {"B": math.inf}
        b_hi = 0.0
    else:
        b_hi = float(np.max(a / b)) * 1.0000001
    if feasible(0.0):
        B = 0.0
    else:
        lo_b, hi_b = 0.0, max(b_hi, 1e-12)
        if not feasible(hi_b):
            return {"conclusion": math.inf}, {"B": math.inf}
        for _ in range(60):
            mid = 0.5 * (lo_b + hi_b)
            if feasible(mid):
                hi_b = mid
            else:
                lo_b = mid
        B = hi_b

    lhs = gstar.value_at(ts) - gstar.value_at(2.0 * ts)
    rhs = B * mstar.value_at(ts / 2.0)
    return {"conclusion": _max_ratio(lhs, rhs)}, {"B": B}


def _ev_kurtz_lp(obj: gridmod.GridFunction, params, rng):
    u = gridmod.sharp_function(obj, 1.0)
    us = _grid_step(u)
    mean = float(obj.values.mean())
    centered = StepFunction(obj.values - mean, np.full(obj.values.size, obj.cell_mass))
    out = {}
    for p in params["ps"]:
        key = f"p={p:g}"
        den = p * us.lp_norm(p)
        num = centered.lp_norm(p)
        out[key] = 0.0 if den <= 0 and num <= 1e-15 else num / (den + _SLACK)
    return out, {}


def _sobolev_setup(obj: gridmod.GridFunction):
    g = rearrange(_grid_step(obj))
    grad = gridmod.gradient_magnitude(obj)
    d = rearrange(_grid_step(grad))
    return g, d


def _ev_sobolev_osc(obj: gridmod.GridFunction, params, rng):
    n = obj.dim
    g, d = _sobolev_setup(obj)
    if not g.breaks.size or not d.breaks.size:
        return {"sobolev": 0.0}, {}
    # stay above a few cells: below the discretization scale the ratio is
    # lattice jitter that does not converge under refinement
    t_lo = 10.0 * obj.cell_mass
    ts = np.concatenate([
        _geom_ts(t_lo, 4.0 * obj.cube_measure, 96),
        g.lefts[1:],
    ])
    ts = ts[ts >= t_lo]
    num = oscillation(g, ts)
    den = ts ** (1.0 / n) * double_star(d, ts)
    return {"sobolev": _max_ratio(num, den, 1e-300)}, {}


def _ev_sobolev_int(obj: gridmod.GridFunction, params, rng):
    n = obj.dim
    g, d = _sobolev_setup(obj)
    if not g.breaks.size or not d.breaks.size:
        return {"sobolev-int": 0.0}, {}
    ts = _geom_ts(obj.cell_mass, 2.0 * obj.cube_measure, 64)
    num = oscillation_power_head(g, 1.0, -1.0 / n, ts)
    den = integrate_star(d, ts)
    return {"sobolev-int": _max_ratio(num, den, 1e-300)}, {}


def _sample_grid_pair(rng, size, params, dim, family=None):
    fam = family or "random-bmo-grid"
    f = generate(fam, rng.integers(0, 2 ** 63), size, dim)
    g = generate(fam, rng.integers(0, 2 ** 63), size, dim)
    return (f, g)


def _ev_product(obj, params, rng):
    f, g = obj
    pf, pg = _grid_step(f), _grid_step(g)
    prod = gridmod.GridFunction(f.dim, f.n_side, f.h, f.values * g.values)
    pp = _grid_step(prod)
    lf = norms.linf_inf(rearrange(pf))
    lg = norms.linf_inf(rearrange(pg))
    out = {}
    for p in params["ps"]:
        rhs = pf.lp_norm(p) * lg + pg.lp_norm(p) * lf
        out[f"p={p:g}"] = pp.lp_norm(p) / (rhs + _SLACK)
    return out, {}


def _ev_berkovich(obj: StepFunction, params, rng):
    g = rearrange(obj)
    if not g.breaks.size:
        return {"berkovich": 0.0}, {}
    K = k_curve_l1_linf(g)
    linf = norms.linf_inf(g)
    out = {}
    for p in params["ps"]:
        theta = 1.0 / p
        lhs = interp_norm(K, ThetaQ(1.0 - theta / 2.0, 2.0 * p))
        rhs = math.sqrt(interp_norm(K, ThetaQ(1.0 - theta, p)) * linf)
        out[f"p={p:g}"] = lhs / (rhs + _SLACK)
    return out, {}


def _ev_equiva(obj: StepFunction, params, rng):
    g = rearrange(obj)
    if not g.breaks.size:
        return {"window": 0.0}, {}
    K = k_curve_l1_linf(g)
    out = {}
    for theta, q in params["tqs"]:
        tq = ThetaQ(theta, q)
        a = interp_norm(K, tq)
        b = gagliardo1_norm(K, tq)
        c = gagliardo2_norm(K, tq)
        vals = [a, b, c]
        window = 0.0
        for i in range(3):
            for j in range(i + 1, 3):
                hi, lo = max(vals[i], vals[j]), min(vals[i], vals[j])
                window = max(window, hi / max(lo, 1e-300))
        out[f"theta={theta:g},q={q:g}"] = window
    return out, {}


def _ev_expl_delta(obj: StepFunction, params, rng):
    total = obj.total_mass
    if total <= 0:
        return {"window": 0.0}, {}
    prob = StepFunction(obj.values, obj.masses / total)
    lux = norms.luxemburg_expL(prob, 1.0)
    grid = params.get("q_grid")
    delta = norms.delta_extrapolation(rearrange(prob), grid)
    if lux <= 0 or delta <= 0:
        return {"window": 0.0}, {}
    return {"window": max(lux / delta, delta / lux)}, {}


def _ev_jn_exp(obj: gridmod.GridFunction, params, rng):
    bmo = gridmod.bmo_seminorm(obj, 1.0)
    mean = float(obj.values.mean())
    centered = StepFunction(obj.values - mean, np.full(obj.values.size, obj.cell_mass))
    out = {}
    for q in params["qs"]:
        key = f"q={q:g}"
        out[key] = 0.0 if bmo <= 0 else centered.lp_norm(q) / (q * bmo)
    return out, {}


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class _CheckDef:
    name: str
    mode: str
    family: str
    size: int
    dim: int
    params: dict
    evaluate: callable
    tolerance: float = 1e-10
    stability: str = "size"      # size | trials | qgrid | none
    stability_budget: float = 0.10
    sample: callable = None      # defaults to generate(family, ...)
    aggregate: callable = None   # (per_key, params) -> (details, pass_flag)
    equality_witness: callable = None
    doc: str = ""


def _default_sample(cd: "_CheckDef"):
    def sample(rng, size, params, dim, family=None):
        return generate(family or cd.family, rng.integers(0, 2 ** 63), size, dim)
    return sample


_REGISTRY: dict[str, _CheckDef] = {}


def _register(cd: _CheckDef):
    if cd.sample is None:
        object.__setattr__(cd, "sample", _default_sample(cd))
    _REGISTRY[cd.name] = cd


def _registry_get(name: str) -> _CheckDef:
    if name not in _REGISTRY:
        raise ValueError(f"unknown check {name!r}; known: {', '.join(sorted(_REGISTRY))}")
    return _REGISTRY[name]


def registry_names() -> list[str]:
    return list(_REGISTRY)


_indicator = lambda: StepFunction(np.asarray([1.0]), np.asarray([1.0]))

_register(_CheckDef(
    "reverse-hardy", "exact-constant", "random-step", 12, 1,
    {"qs": [1.5, 2.0, 3.0, 5.0, 10.0]}, _ev_reverse_hardy,
    tolerance=1e-10, stability="none", equality_witness=_indicator,
    doc="decreasing f: ||f*||_q <= ((q-1)/q)^(1/q) ||f**||_q, sharp on indicators"))
_register(_CheckDef(
    "hardy-osc", "exact-constant", "random-step", 12, 1,
    {"qs": [1.5, 2.0, 3.0, 5.0, 10.0]}, _ev_hardy_osc,
    tolerance=1e-10, stability="none",
    doc="integrable f: ||f**||_q <= q ||f** - f*||_q"))
_register(_CheckDef(
    "lemma-K", "exact-constant", "random-step", 12, 1,
    {"thetas": [0.1, 0.25, 0.5, 0.75, 0.9], "qs": [1.0, 2.0, 5.0, 20.0]}, _ev_lemma_k,
    tolerance=1e-7, stability="none", equality_witness=_indicator,
    doc="((1-theta) theta q)^(1/q) ||f||_(theta,q) <= ||f||_1^(1-theta) ||f||_inf^theta"))
_register(_CheckDef(
    "j-identity", "exact-constant", "random-step", 1, 1,
    {}, _ev_j_identity, tolerance=1e-8, stability="none",
    sample=_sample_triple,
    equality_witness=lambda: np.asarray([4.0, 2.0, 0.5]),
    doc="inf_t t^-theta max(n1, t n2) equals n1^(1-theta) n2^theta"))
def _agg_chen_zhu(per_key, params):
    vals = [per_key.get(f"q={q:g}", 0.0) for q in params["qs"]]
    vals = [v for v in vals if v > 0]
    if not vals:
        return {}, True
    spread = max(vals) / min(vals)
    trend_ok = vals[-1] <= vals[0] * 1.5
    return {"rate_spread": spread, "trend_ok": trend_ok}, bool(trend_ok)


_register(_CheckDef(
    "chen-zhu", "observed-constant", "random-bmo-grid", 128, 1,
    {"p": 1.0, "qs": [float(2.0 * 2.0 ** (k / 2.0)) for k in range(11)]}, _ev_chen_zhu,
    aggregate=_agg_chen_zhu,
    doc="||f||_q <= C q ||f||_p^(p/q) |f|_BMO^(1-p/q); reports ratio/q"))
_register(_CheckDef(
    "john-nirenberg", "observed-constant", "random-bmo-grid", 128, 1,
    {}, _ev_john_nirenberg,
    doc="((f - f_Q) chi_Q)*(t) <= c |f|_BMO log+(6|Q|/t)"))
_register(_CheckDef(
    "bds", "observed-constant", "random-bmo-grid", 128, 1,
    {}, _ev_bds,
    doc="on cubes, f**(t) - f*(t) <= c (f#)*(t) for t < |Q0|/3"))
_register(_CheckDef(
    "teomarkao", "observed-constant", "random-bmo-grid", 128, 1,
    {"qs": [2.0, 4.0, 8.0, 16.0], "form": "bmo5"}, _ev_teomarkao,
    doc="||f||_q <= c q ||f||_1^(1/q) ||f||_(Linf,inf)^(1-1/q) and the general factor form"))
_register(_CheckDef(
    "l1-cube-bound", "exact-constant", "random-bmo-grid", 128, 1,
    {}, _ev_l1_cube, tolerance=1e-10, stability="none",
    equality_witness=lambda: gridmod.GridFunction(1, 8, 0.125, np.full(8, 3.0)),
    doc="||f||_1 <= |Q0| ||f||_(Linf,inf) on the cube"))
_register(_CheckDef(
    "osc-doubling", "exact-constant", "random-step", 12, 1,
    {"n_t": 50}, _ev_osc_doubling, tolerance=1e-9, stability="none",
    equality_witness=_indicator,
    doc="g*(t/2) - g*(t) <= 2 (g**(t) - g*(t)) for every t"))
_register(_CheckDef(
    "combinaos", "exact-constant", "random-step", 12, 1,
    {"n_t": 50}, _ev_combinaos, tolerance=1e-9, stability="none",
    equality_witness=_indicator,
    doc="g** - g* <= (1/t) int_0^t (g*(s/2) - g*(s)) ds + g*(t/2) - g*(t)"))
_register(_CheckDef(
    "good-lambda", "exact-constant", "random-bmo-grid", 128, 1,
    {"eps": 0.25, "n_lambda": 64, "n_t": 64}, _ev_good_lambda,
    tolerance=1e-9, stability="none",
    doc="minimal B for the distributional inequality, then g*(t) - g*(2t) <= B (f#)*(t/2)"))
_register(_CheckDef(
    "kurtz-lp", "observed-constant", "random-bmo-grid", 128, 1,
    {"ps": [2.0, 4.0, 8.0, 16.0, 32.0]}, _ev_kurtz_lp,
    doc="||f - f_Q||_p <= c p ||f#||_p, linear rate in p"))
_register(_CheckDef(
    "sobolev-osc", "observed-constant", "random-lipschitz", 256, 1,
    {}, _ev_sobolev_osc,
    doc="f**(t) - f*(t) <= c_n t^(1/n) |grad f|**(t) for Lipschitz f"))
_register(_CheckDef(
    "sobolev-int", "observed-constant", "random-lipschitz", 256, 1,
    {}, _ev_sobolev_int,
    doc="int_0^t s^(1-1/n) (f** - f*)(s) ds/s <= c_n int_0^t |grad f|*(s) ds"))
_register(_CheckDef(
    "product", "observed-constant", "random-bmo-grid", 128, 1,
    {"ps": [2.0, 4.0]}, _ev_product, sample=_sample_grid_pair,
    doc="||fg||_p <= c (||f||_p ||g||_(Linf,inf) + ||g||_p ||f||_(Linf,inf))"))
_register(_CheckDef(
    "berkovich", "observed-constant", "random-step", 12, 1,
    {"ps": [2.0, 4.0]}, _ev_berkovich,
    doc="||f||_(1-theta/2, 2p) <= c ||f||_(1-theta,p)^(1/2) ||f||^(1)_(1,inf)^(1/2), theta = 1/p"))
_register(_CheckDef(
    "equiva", "observed-constant", "random-step", 12, 1,
    {"tqs": [(0.5, 2.0), (1.0 / 3.0, 3.0)]}, _ev_equiva,
    stability="trials", stability_budget=0.05,
    doc="two-sided window between the interpolation norm and both coordinate norms"))
_register(_CheckDef(
    "expL-delta", "observed-constant", "random-step", 12, 1,
    {}, _ev_expl_delta, stability="qgrid",
    doc="two-sided window between the exp-Orlicz gauge and sup_q ||f||_q / q"))
_register(_CheckDef(
    "jn-exp", "observed-constant", "random-bmo-grid", 128, 1,
    {"qs": [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]}, _ev_jn_exp,
    doc="||f - f_Q||_q <= C q |f|_BMO, the exponential-integrability rate"))


# ---------------------------------------------------------------------------
# runner


def _n_threads() -> int:
    try:
        return max(1, int(os.environ.get("OSCILLATK_THREADS", "1")))
    except ValueError:
        return 1


def _run_family(cd: _CheckDef, spec: CheckSpec, size: int, trials: int):
    """Evaluate all trials; returns (per-key max, global max, witness trial,
    extras of the worst trial)."""

    def one(trial: int):
        rng = _trial_rng(spec.seed, trial)
        obj = cd.sample(rng, size, spec.params, spec.dim, spec.family or cd.family)
        try:
            ratios, extras = cd.evaluate(obj, spec.params, rng)
        except Divergent as exc:
            ratios, extras = {"divergent": math.inf}, {"error": str(exc)}
        return ratios, extras

    n_jobs = _n_threads()
    if n_jobs > 1 and trials > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(one, range(trials)))
    else:
        results = [one(t) for t in range(trials)]

    per_key: dict[str, float] = {}
    best = -math.inf
    witness_trial = 0
    witness_extras: dict = {}
    for trial, (ratios, extras) in enumerate(results):
        m = max(ratios.values()) if ratios else 0.0
        if m > best:
            best, witness_trial, witness_extras = m, trial, extras
        for k, v in ratios.items():
            per_key[k] = max(per_key.get(k, 0.0), v)
    return per_key, (best if best > -math.inf else 0.0), witness_trial, witness_extras


def run_check(spec: CheckSpec) -> CheckReport:
    """Run one registered check.  Deterministic given the spec."""
    cd = _registry_get(spec.name)
    if spec.trials < 1:
        raise ValueError("trials must be >= 1")
    # fill in registry defaults for hand-built specs
    if not spec.mode or not spec.family or not spec.size:
        spec = CheckSpec(
            name=spec.name,
            params={**cd.params, **spec.params},
            family=spec.family or cd.family,
            size=spec.size or cd.size,
            dim=spec.dim,
            seed=spec.seed,
            trials=spec.trials,
            mode=spec.mode or cd.mode,
            tolerance=spec.tolerance or cd.tolerance,
        )
    t0 = time.perf_counter()
    per_key, max_ratio, wit_trial, wit_extras = _run_family(cd, spec, spec.size, spec.trials)
    details: dict = {"per_key": per_key}
    details.update(wit_extras)
    agg_ok = True
    if cd.aggregate is not None:
        agg_details, agg_ok = cd.aggregate(per_key, spec.params)
        details.update(agg_details)

    if spec.mode == "exact-constant":
        passed = math.isfinite(max_ratio) and max_ratio <= 1.0 + spec.tolerance
    else:
        stability = cd.stability
        if stability == "size" and spec.family in ("random-step", "indicator"):
            # atom-count doubling resamples different functions; family-size
            # doubling is the meaningful stability probe for step families
            stability = "trials"
        stable = True
        if stability == "size":
            per2, max2, _, _ = _run_family(cd, spec, spec.size * 2, spec.trials)
            drifts = {k: abs(per2.get(k, 0.0) - v) / max(v, 1e-300)
                      for k, v in per_key.items() if v > 0}
            stable = all(d < cd.stability_budget for d in drifts.values())
            details["refined"] = {"size": spec.size * 2, "per_key": per2,
                                  "max_ratio": max2, "drifts": drifts}
        elif stability == "trials":
            per2, max2, _, _ = _run_family(cd, spec, spec.size, spec.trials * 2)
            drift = abs(max2 - max_ratio) / max(max_ratio, 1e-300)
            stable = drift < cd.stability_budget
            details["refined"] = {"trials": spec.trials * 2, "max_ratio": max2,
                                  "drift": drift}
        elif stability == "qgrid":
            fine = sorted({1.0 + 2.0 ** (-k / 2.0) for k in range(26)}
                          | {2.0 ** (j / 2.0) for j in range(2, 13)})
            spec2 = CheckSpec(**{**asdict(spec), "params": {**spec.params, "q_grid": fine}})
            per2, max2, _, _ = _run_family(cd, spec2, spec.size, spec.trials)
            drift = abs(max2 - max_ratio) / max(max_ratio, 1e-300)
            stable = drift < cd.stability_budget
            details["refined"] = {"q_grid": "half-step", "max_ratio": max2, "drift": drift}
        passed = math.isfinite(max_ratio) and stable and agg_ok
        details["stable"] = stable

    runtime_ms = (time.perf_counter() - t0) * 1000.0
    return CheckReport(
        name=spec.name,
        params=_jsonable(spec.params),
        trials=spec.trials,
        max_ratio=float(max_ratio),
        observed_constant=float(max_ratio),
        witness={"family": spec.family, "seed": spec.seed, "size": spec.size,
                 "dim": spec.dim, "trial": wit_trial},
        passed=bool(passed),
        runtime_ms=runtime_ms,
        details=_jsonable(details),
    )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj]
    return obj


# ---------------------------------------------------------------------------
# sharpness probe


def _probe_vector(obj) -> np.ndarray:
    if isinstance(obj, StepFunction):
        return np.concatenate([obj.values, obj.masses])
    if isinstance(obj, gridmod.GridFunction):
        return obj.values.copy()
    if isinstance(obj, tuple):
        return np.concatenate([_probe_vector(o) for o in obj])
    return np.asarray(obj, dtype=np.float64).copy()


def _probe_rebuild(template, vec: np.ndarray):
    if isinstance(template, StepFunction):
        n = template.values.size
        return StepFunction(vec[:n], np.abs(vec[n:]) + 1e-12)
    if isinstance(template, gridmod.GridFunction):
        return gridmod.GridFunction(template.dim, template.n_side, template.h, vec)
    if isinstance(template, tuple):
        out = []
        pos = 0
        for o in template:
            size = _probe_vector(o).size
            out.append(_probe_rebuild(o, vec[pos:pos + size]))
            pos += size
        return tuple(out)
    v = np.asarray(vec, dtype=np.float64).copy()
    if v.size == 3:  # (n1, n2, theta) triple
        v[2] = min(max(v[2], 1e-6), 1.0 - 1e-6)
    return v


def _obj_json(obj):
    if isinstance(obj, (StepFunction, gridmod.GridFunction)):
        return obj.to_json()
    if isinstance(obj, tuple):
        return [_obj_json(o) for o in obj]
    return _jsonable(np.asarray(obj))


def probe_sharpness(name: str, params: dict | None = None, budget: int = 1000,
                    seed: int = 0, size: int | None = None,
                    dim: int | None = None) -> CheckReport:
    """Randomized-restart coordinate hill climb maximizing a check's ratio.

    Per-coordinate multiplicative moves x(1 +- delta) with delta stepping
    through {0.5, 0.1, 0.02}; accept on improvement, restart from a fresh
    sample once the finest scale stagnates.  Deterministic given the seed;
    ``budget`` caps ratio evaluations.
    """
    cd = _registry_get(name)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    merged = dict(cd.params)
    if params:
        merged.update(params)
    size = size if size is not None else cd.size
    dim = dim if dim is not None else cd.dim
    rng = np.random.default_rng([seed, 0x5eed])
    t0 = time.perf_counter()

    def ratio_of(obj) -> float:
        try:
            ratios, _ = cd.evaluate(obj, merged, np.random.default_rng([seed, 0xabcd]))
        except (Divergent, ValueError):
            return -math.inf
        return max(ratios.values()) if ratios else -math.inf

    evals = 0
    best_ratio = -math.inf
    best_obj = None
    schedule = (0.5, 0.1, 0.02)

    while evals < budget:
        template = cd.sample(rng, size, merged, dim, cd.family)
        vec = _probe_vector(template)
        cur = ratio_of(_probe_rebuild(template, vec))
        evals += 1
        if cur > best_ratio:
            best_ratio, best_obj = cur, _probe_rebuild(template, vec)
        for delta in schedule:
            improved = True
            while improved and evals < budget:
                improved = False
                for i in range(vec.size):
                    if evals >= budget:
                        break
                    base = vec[i]
                    for factor in (1.0 + delta, 1.0 - delta):
                        cand_vec = vec.copy()
                        cand_vec[i] = base * factor
                        cand = ratio_of(_probe_rebuild(template, cand_vec))
                        evals += 1
                        if cand > cur:
                            cur, vec = cand, cand_vec
                            improved = True
                            if cand > best_ratio:
                                best_ratio = cand
                                best_obj = _probe_rebuild(template, cand_vec)
                            break
                        if evals >= budget:
                            break
            if evals >= budget:
                break

    runtime_ms = (time.perf_counter() - t0) * 1000.0
    return CheckReport(
        name=name,
        params=_jsonable(merged),
        trials=evals,
        max_ratio=float(best_ratio),
        observed_constant=float(best_ratio),
        witness={"family": cd.family, "seed": seed, "size": size, "dim": dim,
                 "object": _obj_json(best_obj) if best_obj is not None else None},
        passed=bool(math.isfinite(best_ratio)),
        runtime_ms=runtime_ms,
        details={"budget": budget, "mode": "probe"},
    )
