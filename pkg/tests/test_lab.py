"""The inequality lab: generator determinism, the full check registry,
report determinism and serialization, and sharpness probes."""
import json
import math
import os

import numpy as np
import pytest

from oscillatk import lab
from oscillatk.generators import FAMILIES, generate
from oscillatk.grid import GridFunction, gradient_magnitude
from oscillatk.lab import CheckReport, CheckSpec, probe_sharpness, registry_names, run_check
from oscillatk.steps import StepFunction

EXPECTED_CHECKS = {
    "reverse-hardy", "hardy-osc", "lemma-K", "j-identity", "chen-zhu",
    "john-nirenberg", "bds", "teomarkao", "l1-cube-bound", "osc-doubling",
    "combinaos", "good-lambda", "kurtz-lp", "sobolev-osc", "sobolev-int",
    "product", "berkovich", "equiva", "expL-delta", "jn-exp",
}


# -- generators -------------------------------------------------------------------

def test_registry_complete():
    assert set(registry_names()) == EXPECTED_CHECKS


def test_generate_indicator():
    f = generate("indicator", 0, 1)
    assert isinstance(f, StepFunction) and f.atoms == [(1.0, 1.0)]


def test_generate_deterministic():
    a = generate("random-step", 42, 10)
    b = generate("random-step", 42, 10)
    assert np.array_equal(a.values, b.values) and np.array_equal(a.masses, b.masses)
    assert a.values.size == 10
    c = generate("random-step", 43, 10)
    assert not np.array_equal(a.values, c.values)


def test_generate_unknown_family():
    with pytest.raises(ValueError):
        generate("no-such-family", 0, 4)


def test_generate_log_singularity():
    g = generate("log-singularity", 0, 1000)
    assert isinstance(g, GridFunction)
    assert g.values[0] == pytest.approx(math.log(2000.0))


def test_generate_lipschitz_bound():
    for seed in range(5):
        for dim in (1, 2):
            g = generate("random-lipschitz", seed, 64, dim)
            mag = gradient_magnitude(g).values
            # axis-wise difference quotients of a 1-Lipschitz function
            assert mag.max() <= math.sqrt(2.0) + 1e-9
            assert g.values.min() >= 0.0


def test_generate_refinement_keeps_underlying_function():
    # same seed at doubled resolution samples the same cones finer
    a = generate("random-lipschitz", 7, 32)
    b = generate("random-lipschitz", 7, 64)
    assert abs(a.values.max() - b.values.max()) < 0.05


# -- run_check --------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(EXPECTED_CHECKS))
def test_every_check_passes_smoke(name):
    report = run_check(CheckSpec.for_check(name, trials=6, seed=2))
    assert report.passed, (name, report.max_ratio, report.details)
    assert math.isfinite(report.max_ratio)
    assert report.trials == 6


def test_unknown_check_rejected():
    with pytest.raises(ValueError):
        CheckSpec.for_check("nope")
    with pytest.raises(ValueError):
        run_check(CheckSpec(name="nope"))


def test_exact_checks_pass_on_equality_witness():
    for name in sorted(EXPECTED_CHECKS):
        cd = lab._registry_get(name)
        if cd.equality_witness is None or cd.mode != "exact-constant":
            continue
        obj = cd.equality_witness()
        ratios, _ = cd.evaluate(obj, cd.params, np.random.default_rng(0))
        assert max(ratios.values()) == pytest.approx(1.0, abs=1e-6), name


def test_report_determinism_bit_exact():
    spec = CheckSpec.for_check("reverse-hardy", trials=25, seed=9)
    r1, r2 = run_check(spec), run_check(spec)
    a, b = r1.to_json(), r2.to_json()
    a.pop("runtime_ms"), b.pop("runtime_ms")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_thread_pool_does_not_perturb_results():
    spec = CheckSpec.for_check("lemma-K", trials=8, seed=3)
    base = run_check(spec).to_json()
    os.environ["OSCILLATK_THREADS"] = "4"
    try:
        threaded = run_check(spec).to_json()
    finally:
        del os.environ["OSCILLATK_THREADS"]
    base.pop("runtime_ms"), threaded.pop("runtime_ms")
    assert json.dumps(base, sort_keys=True) == json.dumps(threaded, sort_keys=True)


def test_report_json_roundtrip():
    report = run_check(CheckSpec.for_check("osc-doubling", trials=5, seed=1))
    payload = report.to_json()
    assert "pass" in payload and "passed" not in payload
    back = CheckReport.from_json(json.loads(json.dumps(payload)))
    assert back.name == report.name and back.max_ratio == report.max_ratio
    assert back.passed == report.passed


def test_witness_trial_regenerates_worst_ratio():
    spec = CheckSpec.for_check("reverse-hardy", trials=30, seed=5)
    report = run_check(spec)
    cd = lab._registry_get("reverse-hardy")
    rng = lab._trial_rng(spec.seed, report.witness["trial"])
    obj = cd.sample(rng, spec.size, spec.params, spec.dim, spec.family)
    ratios, _ = cd.evaluate(obj, spec.params, rng)
    assert max(ratios.values()) == report.max_ratio


def test_family_override_reaches_sampler():
    spec = CheckSpec.for_check("john-nirenberg", trials=1, seed=0,
                               family="log-singularity", size=2000)
    report = run_check(spec)
    assert report.witness["family"] == "log-singularity"
    assert math.isfinite(report.max_ratio) and report.max_ratio > 0


def test_good_lambda_records_B():
    report = run_check(CheckSpec.for_check("good-lambda", trials=5, seed=4))
    assert report.passed
    assert report.details.get("B", 0) > 0
    assert report.max_ratio <= 1.0 + 1e-9


def test_chen_zhu_rate_details():
    report = run_check(CheckSpec.for_check("chen-zhu", trials=5, seed=4))
    assert report.passed
    assert report.details["trend_ok"]
    assert report.details["rate_spread"] >= 1.0


def test_teomarkao_general_form():
    spec = CheckSpec.for_check(
        "teomarkao", trials=10, seed=1, family="random-step", size=12,
        params={"form": "general", "thetas": [0.25, 0.5, 0.75], "qs": [1.5, 2.0, 4.0]})
    report = run_check(spec)
    assert math.isfinite(report.max_ratio) and report.max_ratio > 0
    assert report.passed


def test_divergent_trial_fails_check():
    # force a divergent norm through params: theta=1 makes gagliardo2 blow up
    spec = CheckSpec.for_check(
        "teomarkao", trials=2, seed=0, family="random-step", size=6,
        params={"form": "general", "thetas": [1.0], "qs": [2.0]})
    report = run_check(spec)
    assert not report.passed
    assert report.max_ratio == math.inf


# -- probes -----------------------------------------------------------------------

def test_probe_reverse_hardy_reaches_indicator():
    report = probe_sharpness("reverse-hardy", {"qs": [2.0]}, budget=10000, seed=7)
    assert report.max_ratio >= 0.999
    assert report.trials <= 10000
    # witness should resemble an indicator: one dominant flat level
    obj = report.witness["object"]
    assert "atoms" in obj


def test_probe_osc_doubling_bounded():
    report = probe_sharpness("osc-doubling", budget=1000, seed=3)
    assert report.max_ratio <= 1.0 + 1e-9
    assert report.passed


def test_probe_lemma_k_smoke():
    report = probe_sharpness("lemma-K", {"thetas": [0.5], "qs": [2.0]},
                             budget=300, seed=0)
    assert report.max_ratio <= 1.0 + 1e-7
    assert report.max_ratio > 0.9


def test_probe_deterministic():
    r1 = probe_sharpness("combinaos", budget=120, seed=11)
    r2 = probe_sharpness("combinaos", budget=120, seed=11)
    assert r1.max_ratio == r2.max_ratio
    assert r1.trials == r2.trials


def test_probe_rejects_bad_budget():
    with pytest.raises(ValueError):
        probe_sharpness("reverse-hardy", budget=0, seed=0)
    with pytest.raises(ValueError):
        probe_sharpness("no-such-check", budget=10, seed=0)
