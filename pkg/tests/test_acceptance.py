"""Acceptance criteria 1-10 at their stated tolerances.

Each test is tagged with its criterion number; ``conftest.py`` prints one
PASS/FAIL line per criterion in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from adrctf.design import ContinuousTuning, PlantSpec, continuous_tf_bandwidth
from adrctf.discrete import discrete_bandwidth_gains, discrete_tf_general
from adrctf.freq import (
    RationalTf,
    adrc_ct_to_rational,
    bandwidth_design,
    estimate_b0_crossover,
    fb_poles_zeros,
    freqresp,
    gang_of_six,
    hf_feedback_gain,
)
from adrctf.opcount import multiplications_per_step, static_multiplications
from adrctf.runtime import SsController, TfController, _tf_kernel_1, _tf_kernel_2
from adrctf.sim import (
    Scenario,
    closed_loop_bandwidth,
    default_sample_time,
    metrics,
    plant_from_tf,
    run_closed_loop,
)
from adrctf.verify import (
    check_accumulator,
    check_ct_bandwidth,
    check_ct_terms,
    check_dt_bandwidth,
    check_dt_terms,
    check_tf_ss,
)


def _controller(n, b0, w, k, T, limits=None, form="tf"):
    plant = PlantSpec(n, b0)
    g = discrete_bandwidth_gains(n, ContinuousTuning(w, k), T)
    if form == "ss":
        return SsController(plant, g, T)
    return TfController(discrete_tf_general(plant, g.k, g.l, T), limits)


@pytest.mark.acceptance(1)
def test_tf_and_ss_forms_produce_identical_control(detail):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    results = [check_tf_ss(n, 100, rng, steps=2000) for n in (1, 2)]
    elapsed = time.perf_counter() - t0
    detail(" ".join(f"{r.name}={r.max_deviation:.2e}" for r in results) + f" time={elapsed:.1f}s")
    for r in results:
        assert r.max_deviation <= 1e-9, r.line()
    assert elapsed < 10.0


@pytest.mark.acceptance(2)
def test_closed_forms_agree_with_resolvent_path(detail):
    rng = np.random.default_rng(77)
    results = []
    for n in (1, 2):
        results += [check_ct_bandwidth(n, 1000, rng), check_ct_terms(n, 1000, rng)]
        results += [check_dt_bandwidth(n, 1000, rng), check_dt_terms(n, 1000, rng)]
    detail(f"worst continuous={max(r.max_deviation for r in results if 'continuous' in r.name):.1e} "
           f"discrete={max(r.max_deviation for r in results if 'discrete' in r.name):.1e}")
    for r in results:
        tol = 1e-12 if r.name.startswith("continuous") else 1e-10
        assert r.max_deviation <= tol, r.line()


@pytest.mark.acceptance(3)
def test_accumulator_factoring_identity(detail):
    r = check_accumulator(1000, np.random.default_rng(5), max_order=5)
    detail(f"max_deviation={r.max_deviation:.1e}")
    assert r.max_deviation <= 1e-12


@pytest.mark.acceptance(4)
def test_feedback_zero_and_damping_limits(detail):
    w = 1.0
    for k in (10.0, 100.0, 10000.0):
        wz = fb_poles_zeros(1, w, k).omega_z
        assert wz == pytest.approx(k * w / (2 + k), rel=1e-15)
        assert abs(wz - w) < 2.1 * w / k
    d1 = fb_poles_zeros(2, w, 1.0).damping[0]
    d100 = fb_poles_zeros(2, w, 100.0).damping[0]
    detail(f"D(1)={d1:.5f} D(100)={d100:.5f}")
    assert abs(d1 - 0.7906) <= 1e-3
    assert abs(d100 - math.sqrt(0.75)) < 0.01


@pytest.mark.acceptance(5)
def test_noise_gain_increase_from_keso_5_to_25(detail):
    w = 0.4 * math.pi
    plant = PlantSpec(2, 1.0)
    formula = 20 * math.log10(
        hf_feedback_gain(continuous_tf_bandwidth(plant, ContinuousTuning(w, 25.0)))
        / hf_feedback_gain(continuous_tf_bandwidth(plant, ContinuousTuning(w, 5.0)))
    )
    P = RationalTf([1.0], [1.0, 2.0, 1.0])
    probe = [1e3 * w]
    g_un = []
    for k in (5.0, 25.0):
        b = bandwidth_design(2, 1.0, w, k)
        g_un.append(abs(freqresp(gang_of_six(P, b["C_FB"], b["C_PF"], b["C_FF"]).G_un, probe)[0]))
    sampled = 20 * math.log10(g_un[1] / g_un[0])
    detail(f"formula={formula:.4f} dB sampled={sampled:.4f} dB")
    assert abs(formula - 36.53) <= 0.1
    assert abs(sampled - 36.53) <= 0.5


@pytest.mark.acceptance(6)
def test_b0_recovered_from_crossover(detail):
    b1 = estimate_b0_crossover(RationalTf([1.0], [1.0, 2.0, 1.0]), 2)
    b4 = estimate_b0_crossover(RationalTf([4.0], [1.0, 2.0, 1.0]), 2)
    detail(f"b0(1/(1+s)^2)={b1:.5f} b0(4/(1+s)^2)={b4:.5f}")
    assert abs(b1 - 1.0) <= 0.02
    assert abs(b4 - 4.0) <= 0.02 * 4.0


@pytest.mark.acceptance(7)
def test_multiplication_counts(detail):
    s1, s2 = static_multiplications(_tf_kernel_1), static_multiplications(_tf_kernel_2)
    ss1 = multiplications_per_step(_controller(1, 1.0, 1.0, 5.0, 0.1, form="ss"))
    ss2 = multiplications_per_step(_controller(2, 1.0, 1.0, 5.0, 0.1, form="ss"))
    detail(f"tf: {s1}/{s2}  ss: {ss1}/{ss2}")
    assert (s1, s2) == (7, 11)
    assert ss1 <= 11 and ss2 <= 19


@pytest.mark.acceptance(8)
def test_exact_model_closed_loop(detail):
    worst = 0.0
    for n, b0, w in ((1, 1.0, 1.0), (2, 1.0, 1.0), (1, 3.0, 0.5), (2, 0.4, 7.0)):
        blocks = bandwidth_design(n, b0, w, 5.0)
        P = RationalTf([b0], [0.0] * n + [1.0])
        G = gang_of_six(P, blocks["C_FB"], blocks["C_PF"], blocks["C_FF"]).G_yr
        omegas = np.logspace(-2, 2, 50) * w
        target = (w / (1j * omegas + w)) ** n
        worst = max(worst, float(np.max(np.abs(freqresp(G, omegas) - target) / np.abs(target))))
    assert worst <= 1e-8

    w, k = 1.0, 5.0
    T = default_sample_time(w, k)
    trace = run_closed_loop(
        plant_from_tf(RationalTf([1.0], [0.0, 0.0, 1.0])),
        _controller(2, 1.0, w, k, T),
        Scenario.for_duration(T, 20.0 / w),
    )
    ts = metrics(trace).settling_time
    detail(f"G_yr max rel dev={worst:.1e} settling={ts:.3f}s (limit {8 / w:.1f}s)")
    assert ts <= 8.0 / w


@pytest.mark.acceptance(9)
def test_clamped_accumulator_prevents_windup(detail):
    w, k = 1.0, 5.0
    T = default_sample_time(w, k)
    scenario = Scenario.for_duration(T, 40.0, r_profile=((0.0, 10.0),), actuator_limits=(-1.0, 1.0))
    parts = []
    for n in (1, 2):
        P = plant_from_tf(RationalTf([1.0], [0.0] * n + [1.0]))
        clamped = _controller(n, 1.0, w, k, T, limits=(-1.0, 1.0))
        seen = []
        step = clamped.step

        def recording_step(r, y, _step=step, _c=clamped):
            u = _step(r, y)
            seen.append(_c.accumulator)
            return u

        clamped.step = recording_step
        a = run_closed_loop(P, clamped, scenario)
        b = run_closed_loop(P, _controller(n, 1.0, w, k, T), scenario)
        oa, ob = metrics(a).overshoot_pct, metrics(b).overshoot_pct
        parts.append(f"n={n}: clamped {oa:.1f}% vs unclamped {ob:.1f}%")
        assert oa <= ob
        assert min(seen) >= -1.0 and max(seen) <= 1.0
        assert np.all(np.abs(a.u) <= 1.0)
    detail("; ".join(parts))


@pytest.mark.acceptance(10)
def test_sensitivity_directions(detail):
    w, k = 0.4 * math.pi, 5.0
    T = default_sample_time(w, k)
    P = plant_from_tf(RationalTf([1.0], [1.0, 2.0, 1.0]))
    step = Scenario.for_duration(T, 30.0)
    bw = {b0: closed_loop_bandwidth(run_closed_loop(P, _controller(2, b0, w, k, T), step)) for b0 in (1.0, 5.0)}
    noisy = Scenario.for_duration(T, 30.0, noise_sigma=1e-3, seed=11)
    peak = {b0: metrics(run_closed_loop(P, _controller(2, b0, w, k, T), noisy)).peak_u for b0 in (1.0, 0.2)}
    zero_peak = {}
    for tau in (0.2, -0.2):
        Pz = plant_from_tf(RationalTf([1.0, tau], [1.0, 2.0, 1.0]))
        zero_peak[tau] = metrics(run_closed_loop(Pz, _controller(2, 1.0, w, k, T), step)).peak_u
    detail(
        f"bw b0=1:{bw[1.0]:.3f} b0=5:{bw[5.0]:.3f}; peak|u| b0=1:{peak[1.0]:.2f} b0=0.2:{peak[0.2]:.2f}; "
        f"peak|u| LHP:{zero_peak[0.2]:.3f} RHP:{zero_peak[-0.2]:.3f}"
    )
    assert bw[5.0] < bw[1.0]
    assert peak[0.2] > peak[1.0]
    assert zero_peak[-0.2] > zero_peak[0.2]
