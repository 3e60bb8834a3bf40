"""Randomized self-checks: closed forms against the resolvent path, and TF
runtime against the state-space runtime.

Each check reports the largest relative deviation seen over its trials and
passes when it does not exceed the check's tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .design import (
    ContinuousTuning,
    GainSet,
    PlantSpec,
    bandwidth_gains,
    continuous_tf_bandwidth,
    continuous_tf_general,
    continuous_tf_terms,
)
from .discrete import (
    discrete_bandwidth_gains,
    discrete_tf_bandwidth,
    discrete_tf_general,
    discrete_tf_terms,
    factor_accumulator,
    unfactor_accumulator,
)
from .runtime import SsController, TfController

CT_RTOL = 1e-12
DT_RTOL = 1e-10
TF_SS_RTOL = 1e-9
ACC_TOL = 1e-12

CHECKS = ("tf_ss", "ct_bandwidth", "ct_terms", "dt_bandwidth", "dt_terms", "accumulator")


@dataclass(frozen=True)
class RandomDesign:
    plant: PlantSpec
    tuning: ContinuousTuning
    T: float


def random_design(rng: np.random.Generator, n: int) -> RandomDesign:
    """b0 in [0.1, 10] and omega_cl in [0.1, 100] (log-uniform), k_eso in [1, 25],
    omega_cl*T in [0.001, 0.5] (log-uniform)."""
    b0 = 10 ** rng.uniform(-1, 1)
    w = 10 ** rng.uniform(-1, 2)
    k = rng.uniform(1, 25)
    T = 10 ** rng.uniform(-3, math.log10(0.5)) / w
    return RandomDesign(PlantSpec(n, b0), ContinuousTuning(w, k), T)


def _perturbed(rng, values):
    return tuple(v * 10 ** rng.uniform(-0.3, 0.3) for v in values)


def group_deviation(a, b, floor: float = 0.0) -> float:
    """max |a-b| / max(|b_i|, group scale); the scale is max|b| (at least ``floor``)."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = max(floor, float(np.max(np.abs(b))))
    if scale == 0.0:
        return float(np.max(np.abs(a - b)))
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), scale)))


def ct_deviation(x, ref) -> float:
    return max(
        group_deviation([x.K_I, x.K_FF], [ref.K_I, ref.K_FF]),
        group_deviation(x.alpha, ref.alpha),
        group_deviation(x.beta, ref.beta),
        group_deviation(x.gamma, ref.gamma),
    )


def dt_deviation(x, ref) -> float:
    """Per-group relative deviation; the alpha group is scaled by 1 + max|alpha~|.

    The alpha_i are partial sums of alpha~ that cancel to much smaller values
    than the terms they are built from, so their error floor is set by the
    unfactored coefficients.
    """
    return max(
        group_deviation(x.alpha, ref.alpha, floor=1.0 + max(abs(v) for v in ref.alpha_tilde)),
        group_deviation(x.beta, ref.beta),
        group_deviation(x.gamma, ref.gamma),
    )


@dataclass
class CheckResult:
    name: str
    trials: int
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.max_deviation) and self.max_deviation <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: trials={self.trials} max_deviation={self.max_deviation:.3e} tol={self.tolerance:.0e}"


@dataclass
class VerifyReport:
    results: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def lines(self) -> list:
        return [r.line() for r in self.results] + ["PASS" if self.passed else "FAIL"]


def _corrupt(tf, name):
    """Perturb one coefficient; used to prove the checks can fail."""
    vals = list(getattr(tf, name))
    vals[-1] = vals[-1] * (1 + 1e-6) + 1e-6
    d = tf.as_dict()
    d[name] = vals
    return type(tf)(**d)


# --- individual checks --------------------------------------------------------


def check_tf_ss(n, trials, rng, steps=2000, fault=False) -> CheckResult:
    """Open-loop drive of both runtime forms with the same random r, y sequences."""
    worst = 0.0
    for _ in range(trials):
        d = random_design(rng, n)
        gains = discrete_bandwidth_gains(n, d.tuning, d.T)
        coeffs = discrete_tf_general(d.plant, gains.k, gains.l, d.T)
        if fault:
            coeffs = _corrupt(coeffs, "beta")
        tf = TfController(coeffs)
        ss = SsController(d.plant, gains, d.T)
        r = rng.uniform(-1, 1, size=steps)
        y = rng.uniform(-1, 1, size=steps)
        u_tf = np.array([tf.step(a, b) for a, b in zip(r, y)])
        u_ss = np.array([ss.step(a, b) for a, b in zip(r, y)])
        scale = max(1.0, float(np.max(np.abs(u_ss))))
        worst = max(worst, float(np.max(np.abs(u_tf - u_ss))) / scale)
    return CheckResult(f"tf_ss_equivalence[n={n}]", trials, worst, TF_SS_RTOL)


def check_ct_bandwidth(n, trials, rng, fault=False) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        d = random_design(rng, n)
        closed = continuous_tf_bandwidth(d.plant, d.tuning)
        if fault:
            closed = _corrupt(closed, "beta")
        ref = continuous_tf_general(d.plant, bandwidth_gains(n, d.tuning))
        worst = max(worst, ct_deviation(closed, ref))
    return CheckResult(f"continuous_bandwidth_table[n={n}]", trials, worst, CT_RTOL)


def check_ct_terms(n, trials, rng, fault=False) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        d = random_design(rng, n)
        g = bandwidth_gains(n, d.tuning)
        gains = GainSet(_perturbed(rng, g.k), _perturbed(rng, g.l))
        closed = continuous_tf_terms(d.plant, gains)
        if fault:
            closed = _corrupt(closed, "gamma")
        worst = max(worst, ct_deviation(closed, continuous_tf_general(d.plant, gains)))
    return CheckResult(f"continuous_terms_table[n={n}]", trials, worst, CT_RTOL)


def check_dt_bandwidth(n, trials, rng, fault=False) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        d = random_design(rng, n)
        closed = discrete_tf_bandwidth(d.plant, d.tuning.omega_cl, d.tuning.k_eso, d.T)
        if fault:
            closed = _corrupt(closed, "gamma")
        g = discrete_bandwidth_gains(n, d.tuning, d.T)
        ref = discrete_tf_general(d.plant, g.k, g.l, d.T)
        worst = max(worst, dt_deviation(closed, ref))
    return CheckResult(f"discrete_bandwidth_table[n={n}]", trials, worst, DT_RTOL)


def check_dt_terms(n, trials, rng, fault=False) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        d = random_design(rng, n)
        g = discrete_bandwidth_gains(n, d.tuning, d.T)
        k, l = _perturbed(rng, g.k), _perturbed(rng, g.l)
        closed = discrete_tf_terms(d.plant, k, l, d.T)
        if fault:
            closed = _corrupt(closed, "beta")
        worst = max(worst, dt_deviation(closed, discrete_tf_general(d.plant, k, l, d.T)))
    return CheckResult(f"discrete_terms_table[n={n}]", trials, worst, DT_RTOL)


def check_accumulator(trials, rng, max_order=5, fault=False) -> CheckResult:
    """Factor (1 + sum a_i q^i)(1 - q), built with numpy, and multiply back."""
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, max_order + 1))
        a = np.concatenate([[1.0], rng.normal(size=n)])
        full = np.polynomial.polynomial.polymul(a, [1.0, -1.0])
        alpha_tilde = tuple(full[1:])
        alpha = factor_accumulator(alpha_tilde)
        if fault:
            alpha = alpha[:-1] + (alpha[-1] + 1e-6,) if alpha else alpha
        back = np.array(unfactor_accumulator(alpha))
        scale = max(1.0, float(np.max(np.abs(full))))
        dev = max(
            float(np.max(np.abs(back - full[1:]))) / scale,
            float(np.max(np.abs(np.array(alpha) - a[1:]))) / scale,
        )
        worst = max(worst, dev)
    return CheckResult("accumulator_identity", trials, worst, ACC_TOL)


def run_verify(n: int, trials: int, seed: int, inject_fault: str | None = None, steps: int = 2000) -> VerifyReport:
    """Run all checks for order ``n``; ``inject_fault`` names one check to corrupt."""
    if inject_fault is not None and inject_fault not in CHECKS:
        raise ValueError(f"unknown check {inject_fault!r}; choose from {CHECKS}")
    rng = np.random.default_rng(seed)
    report = VerifyReport()
    f = inject_fault
    report.results.append(check_tf_ss(n, trials, rng, steps=steps, fault=f == "tf_ss"))
    report.results.append(check_ct_bandwidth(n, trials, rng, fault=f == "ct_bandwidth"))
    report.results.append(check_ct_terms(n, trials, rng, fault=f == "ct_terms"))
    report.results.append(check_dt_bandwidth(n, trials, rng, fault=f == "dt_bandwidth"))
    report.results.append(check_dt_terms(n, trials, rng, fault=f == "dt_terms"))
    report.results.append(check_accumulator(trials, rng, fault=f == "accumulator"))
    return report
