import math

import numpy as np
import pytest

from adrctf.verify import (
    CHECKS,
    CheckResult,
    check_accumulator,
    check_ct_bandwidth,
    check_ct_terms,
    check_dt_bandwidth,
    check_dt_terms,
    check_tf_ss,
    group_deviation,
    random_design,
    run_verify,
)

CHECK_FUNCS = {
    "ct_bandwidth": check_ct_bandwidth,
    "ct_terms": check_ct_terms,
    "dt_bandwidth": check_dt_bandwidth,
    "dt_terms": check_dt_terms,
}


def test_group_deviation():
    assert group_deviation([1.0, 2.0], [1.0, 2.0]) == 0.0
    # the small entry is judged against the group scale, not its own size
    assert group_deviation([1e-6, 10.0], [0.0, 10.0]) == pytest.approx(1e-7)
    assert group_deviation([1.1], [1.0]) == pytest.approx(0.1)
    assert group_deviation([0.5], [0.0]) == 0.5


def test_random_design_ranges(rng):
    for _ in range(200):
        d = random_design(rng, 2)
        assert 0.1 <= d.plant.b0 <= 10 and 0.1 <= d.tuning.omega_cl <= 100
        assert 1 <= d.tuning.k_eso <= 25
        assert 0.001 * (1 - 1e-12) <= d.tuning.omega_cl * d.T <= 0.5 * (1 + 1e-12)


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("name", sorted(CHECK_FUNCS))
def test_checks_pass_and_detect_faults(n, name):
    ok = CHECK_FUNCS[name](n, 20, np.random.default_rng(1))
    bad = CHECK_FUNCS[name](n, 5, np.random.default_rng(1), fault=True)
    assert ok.passed, ok.line()
    assert not bad.passed, bad.line()


def test_tf_ss_check():
    assert check_tf_ss(2, 3, np.random.default_rng(0), steps=300).passed
    assert not check_tf_ss(2, 2, np.random.default_rng(0), steps=300, fault=True).passed


def test_accumulator_check():
    assert check_accumulator(200, np.random.default_rng(0)).passed
    assert not check_accumulator(5, np.random.default_rng(0), fault=True).passed


def test_result_line_and_nan():
    r = CheckResult("x", 3, 1e-13, 1e-12)
    assert r.passed and r.line().startswith("PASS x: trials=3")
    assert not CheckResult("x", 3, math.nan, 1e-12).passed


def test_run_verify():
    report = run_verify(1, 2, seed=0, steps=200)
    assert report.passed and len(report.results) == len(CHECKS)
    assert report.lines()[-1] == "PASS"
    faulty = run_verify(1, 2, seed=0, inject_fault="dt_bandwidth", steps=200)
    assert [r.passed for r in faulty.results] == [c != "dt_bandwidth" for c in CHECKS]
    with pytest.raises(ValueError):
        run_verify(1, 1, seed=0, inject_fault="nope")
