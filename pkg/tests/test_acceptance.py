"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Criterion 7 is known-red: the 3x band on the Chen-Zhu rate cannot hold for
a uniform midpoint discretization at h = 1e-5 because the discrete sup is
log(2/h) ~ 12.2, so ||f_h||_q saturates once q >> log(1/h) ~ 11.5 while
the comparison weight keeps growing linearly in q (no uniform grid escapes
this: essentially all of integral log(1/x)^64 dx lives below x ~ e^-64).
The assertion is kept as stated; a companion test shows the band does hold
on the resolution-tracked part of the range and that the trend clause
holds.
"""
import json
import math
import time

import numpy as np
import pytest

from oscillatk import lab
from oscillatk.cli import main as cli_main
from oscillatk.generators import generate
from oscillatk.grid import GridFunction, bmo_seminorm, to_step
from oscillatk.kfunc import ThetaQ, interp_norm, j_inf_theta, j_inf_theta_numeric, k_curve_l1_linf
from oscillatk.norms import linf_inf, lp_norm
from oscillatk.steps import (
    StepFunction,
    double_star_power_integral,
    integrate_star,
    oscillation,
    rearrange,
)


def report_line(criterion: int, ok: bool, detail: str):
    print(f"[criterion {criterion:02d}] {'PASS' if ok else 'FAIL'} - {detail}")


def seeded_step(tag: int, i: int, n: int = 12) -> StepFunction:
    return generate("random-step", [tag, i], n)


def log_ts(rng, g, n):
    lo = g.breaks[0] / 8.0
    hi = g.breaks[-1] * 4.0
    return np.exp(rng.uniform(math.log(lo), math.log(hi), n))


def test_criterion_01_layer_cake():
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(500):
        f = seeded_step(1, i)
        g = rearrange(f)
        rng = np.random.default_rng([1, 10_000 + i])
        ts = log_ts(rng, g, 20)
        levels = g.value_at(ts)
        lhs = ts * oscillation(g, ts)
        absf = np.abs(f.values)
        rhs = np.asarray([(f.masses * np.maximum(absf - lv, 0.0)).sum() for lv in levels])
        err = np.max(np.abs(lhs - rhs) / (1.0 + f.total_mass))
        worst = max(worst, float(err))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 1.0
    report_line(1, ok, f"layer-cake max rel err {worst:.3e}, {elapsed:.2f} s")
    assert worst <= 1e-10
    assert elapsed < 1.0


def test_criterion_02_reverse_hardy():
    t0 = time.perf_counter()
    qs = (1.5, 2.0, 3.0, 5.0, 10.0)
    worst = 0.0
    for i in range(500):
        g = rearrange(seeded_step(2, i))
        for q in qs:
            lhs = lp_norm(g, q)
            rhs = double_star_power_integral(g, q) ** (1.0 / q)
            worst = max(worst, lhs / (((q - 1) / q) ** (1.0 / q) * rhs))
    ind = rearrange(StepFunction.from_atoms([(1.0, 1.0)]))
    ind_dev = 0.0
    for q in qs:
        ratio = lp_norm(ind, q) / (((q - 1) / q) ** (1.0 / q)
                                   * double_star_power_integral(ind, q) ** (1.0 / q))
        ind_dev = max(ind_dev, abs(ratio - 1.0))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1.0 + 1e-10 and ind_dev <= 1e-9 and elapsed < 1.0
    report_line(2, ok, f"reverse-Hardy worst ratio {worst:.12f}, "
                       f"indicator dev {ind_dev:.2e}, {elapsed:.2f} s")
    assert worst <= 1.0 + 1e-10
    assert ind_dev <= 1e-9
    assert elapsed < 1.0


def test_criterion_03_interpolation_bound():
    t0 = time.perf_counter()
    thetas = (0.1, 0.25, 0.5, 0.75, 0.9)
    qs = (1.0, 2.0, 5.0, 20.0)
    worst = 0.0
    for i in range(200):
        f = seeded_step(3, i)
        K = k_curve_l1_linf(rearrange(f))
        rhs1 = f.l1_norm()
        rhs2 = f.sup_norm()
        for theta in thetas:
            for q in qs:
                lhs = ((1 - theta) * theta * q) ** (1.0 / q) * interp_norm(K, ThetaQ(theta, q))
                worst = max(worst, lhs / (rhs1 ** (1 - theta) * rhs2 ** theta))
    ind = k_curve_l1_linf(rearrange(StepFunction.from_atoms([(1.0, 1.0)])))
    ind_dev = max(abs(((1 - th) * th * q) ** (1.0 / q) * interp_norm(ind, ThetaQ(th, q)) - 1.0)
                  for th in thetas for q in qs)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1.0 + 1e-7 and ind_dev <= 1e-6 and elapsed < 30.0
    report_line(3, ok, f"interpolation bound worst ratio {worst:.9f}, "
                       f"indicator dev {ind_dev:.2e}, {elapsed:.1f} s")
    assert worst <= 1.0 + 1e-7
    assert ind_dev <= 1e-6
    assert elapsed < 30.0


def test_criterion_04_j_functional_identity():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(1000):
        n1, n2 = rng.lognormal(0.0, 1.5, 2)
        theta = rng.uniform(0.05, 0.95)
        closed = j_inf_theta(n1, n2, theta)
        numeric = j_inf_theta_numeric(n1, n2, theta)
        worst = max(worst, abs(closed - numeric) / closed)
    ok = worst <= 1e-8
    report_line(4, ok, f"J-identity worst rel disagreement {worst:.2e}")
    assert worst <= 1e-8


def test_criterion_05_doubling_and_average():
    worst_doubling = -math.inf
    worst_combined = -math.inf
    for i in range(500):
        g = rearrange(seeded_step(5, i))
        rng = np.random.default_rng([5, 10_000 + i])
        ts = np.concatenate([log_ts(rng, g, 50), g.breaks, 2.0 * g.breaks,
                             2.0 * g.breaks * (1 - 1e-9)])
        lhs = g.value_at(ts / 2.0) - g.value_at(ts)
        rhs = 2.0 * oscillation(g, ts)
        worst_doubling = max(worst_doubling, float(np.max(lhs - rhs)))
        osc = oscillation(g, ts)
        avg = (2.0 * integrate_star(g, ts / 2.0) - integrate_star(g, ts)) / ts
        rhs2 = avg + g.value_at(ts / 2.0) - g.value_at(ts)
        worst_combined = max(worst_combined, float(np.max(osc - rhs2)))
    ok = worst_doubling <= 1e-12 and worst_combined <= 1e-12
    report_line(5, ok, f"doubling violation {worst_doubling:.2e}, "
                       f"averaged form violation {worst_combined:.2e}")
    assert worst_doubling <= 1e-12
    assert worst_combined <= 1e-12


def test_criterion_06_log_singularity_oscillation():
    t0 = time.perf_counter()
    h = 1e-5
    f = generate("log-singularity", 0, 100_000)
    g = rearrange(to_step(f))
    ts = g.breaks[(g.breaks >= 10 * h - 1e-15) & (g.breaks <= 0.5 + 1e-15)]
    dev = float(np.max(np.abs(oscillation(g, ts) - 1.0)))
    elapsed = time.perf_counter() - t0
    ok = dev <= 0.02 and elapsed < 5.0
    report_line(6, ok, f"log-singularity max |osc - 1| = {dev:.4f}, {elapsed:.2f} s")
    assert dev <= 0.02
    assert elapsed < 5.0


import functools


@functools.lru_cache(maxsize=1)
def _chen_zhu_rates():
    f = generate("log-singularity", 0, 100_000)
    fs = to_step(f)
    bmo = bmo_seminorm(f, 1.0)
    l1 = fs.l1_norm()
    qs = np.geomspace(2.0, 64.0, 13)
    rates = np.asarray([fs.lp_norm(q) / (l1 ** (1 / q) * bmo ** (1 - 1 / q)) / q
                        for q in qs])
    return qs, rates


def test_criterion_07_chen_zhu_linear_rate():
    qs, rates = _chen_zhu_rates()
    spread = float(rates.max() / rates.min())
    trend_ok = rates[-1] <= rates[0] * 1.5
    ok = spread <= 3.0 and trend_ok
    report_line(7, ok, f"Chen-Zhu rate spread {spread:.3f} (band <= 3), "
                       f"trend {'ok' if trend_ok else 'violated'}")
    assert trend_ok
    # Known-red: the uniform h = 1e-5 discretization saturates ||f||_q at
    # log(2/h) for q >> log(1/h), so the spread lands near 3.8 (the
    # continuum function satisfies the band easily at ~1.6; no uniform
    # grid can resolve q = 64, which needs cells near x ~ e^-64).
    assert spread <= 3.0


def test_criterion_07_companion_resolved_regime():
    # the band and trend do hold on the part of the q-range the h = 1e-5
    # discretization actually resolves (q up to ~log(1/h))
    qs, rates = _chen_zhu_rates()
    tracked = rates[qs <= 11.5]
    spread = float(tracked.max() / tracked.min())
    ok = spread <= 3.0 and tracked[-1] <= tracked[0] * 1.5
    report_line(7, ok, f"Chen-Zhu resolved-regime spread {spread:.3f} over q <= 11.5")
    assert ok


def test_criterion_08_l1_cube_bound():
    worst = 0.0
    for i in range(200):
        dim = 1 if i % 2 == 0 else 2
        g = generate("random-bmo-grid", [8, i], 64 if dim == 1 else 16, dim)
        fs = to_step(g)
        ratio = fs.l1_norm() / (g.cube_measure * linf_inf(rearrange(fs)))
        worst = max(worst, ratio)
    ok = worst <= 1.0 + 1e-10
    report_line(8, ok, f"L1 vs |Q| L(inf,inf) worst ratio {worst:.12f}")
    assert worst <= 1.0 + 1e-10


def test_criterion_09_rate_with_oscillation_norm():
    spec = lab.CheckSpec.for_check("teomarkao", trials=50, seed=0)
    rep = lab.run_check(spec)
    drifts = rep.details["refined"]["drifts"]
    ok = rep.passed and all(d < 0.10 for d in drifts.values())
    report_line(9, ok, f"observed constant {rep.max_ratio:.4f}, per-q drifts "
                       + ", ".join(f"{k}:{v:.3f}" for k, v in drifts.items()))
    assert rep.passed
    assert all(d < 0.10 for d in drifts.values())


def test_criterion_10_good_lambda_pipeline():
    rep = lab.run_check(lab.CheckSpec.for_check("good-lambda", trials=50, seed=0))
    ok = rep.passed and rep.max_ratio <= 1.0 + 1e-9 and math.isfinite(rep.details["B"])
    report_line(10, ok, f"good-lambda conclusion worst ratio {rep.max_ratio:.6f}, "
                        f"worst-trial B {rep.details['B']:.3f}")
    assert rep.passed
    assert rep.max_ratio <= 1.0 + 1e-9


def test_criterion_11_sobolev_oscillation():
    tent = lab.run_check(lab.CheckSpec.for_check("sobolev-osc", trials=1, seed=0,
                                                 family="tent", size=512))
    lip1 = lab.run_check(lab.CheckSpec.for_check("sobolev-osc", trials=50, seed=0))
    lip2 = lab.run_check(lab.CheckSpec.for_check("sobolev-osc", trials=25, seed=0,
                                                 dim=2, size=32))
    int1 = lab.run_check(lab.CheckSpec.for_check("sobolev-int", trials=50, seed=0))
    int2 = lab.run_check(lab.CheckSpec.for_check("sobolev-int", trials=25, seed=0,
                                                 dim=2, size=32))
    one_d_const = max(tent.max_ratio, lip1.max_ratio)
    ok = (one_d_const <= 1.05 and lip1.passed and lip2.passed
          and int1.passed and int2.passed and int1.max_ratio <= 1.05)
    report_line(11, ok, f"1-d constant {one_d_const:.4f} (<= 1.05), "
                        f"2-d constant {lip2.max_ratio:.4f}, "
                        f"integral form 1-d {int1.max_ratio:.4f} / 2-d {int2.max_ratio:.4f}")
    assert one_d_const <= 1.05
    assert lip1.passed and lip2.passed
    assert int1.passed and int1.max_ratio <= 1.05
    assert int2.passed and math.isfinite(int2.max_ratio)


def test_criterion_12_equivalence_window():
    spec = lab.CheckSpec.for_check("equiva", trials=200, seed=0,
                                   params={"tqs": [(0.5, 2.0)]})
    rep = lab.run_check(spec)
    drift = rep.details["refined"]["drift"]
    ok = rep.passed and drift < 0.05
    report_line(12, ok, f"equivalence window W = {rep.max_ratio:.4f}, "
                        f"drift under family doubling {drift:.4f}")
    assert rep.passed
    assert drift < 0.05


def _strip_runtime(obj):
    if isinstance(obj, dict):
        return {k: _strip_runtime(v) for k, v in obj.items() if k != "runtime_ms"}
    if isinstance(obj, list):
        return [_strip_runtime(v) for v in obj]
    return obj


def test_criterion_13_full_suite(tmp_path, capsys):
    out1 = tmp_path / "suite1.json"
    t0 = time.perf_counter()
    code = cli_main(["verify", "all", "--trials", "50", "--seed", "0",
                     "--out", str(out1)])
    elapsed = time.perf_counter() - t0
    summary = json.loads(out1.read_text())
    out2 = tmp_path / "suite2.json"
    code2 = cli_main(["verify", "all", "--trials", "50", "--seed", "0",
                      "--out", str(out2)])
    same = _strip_runtime(summary) == _strip_runtime(json.loads(out2.read_text()))
    ok = code == 0 and code2 == 0 and elapsed < 60.0 and summary["all_pass"] and same
    report_line(13, ok, f"verify all: exit {code}, {elapsed:.1f} s, "
                        f"{len(summary['reports'])} reports, deterministic={same}")
    assert code == 0 and code2 == 0
    assert elapsed < 60.0
    assert summary["all_pass"]
    assert same
