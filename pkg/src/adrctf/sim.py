"""Closed-loop simulation of an LTI plant under discrete ADRC.

The plant is simulated exactly at the controller sample instants via ZOH.
Loop timing per step ``k``::

    y(k) = c x(k) + n(k)            measured output (noise added)
    u(k) = controller.step(r(k), y(k))
    x(k+1) = A_d x(k) + b_d (sat(u(k)) + d(k))

The current observer uses y(k) in the same step, and u(k) is held over
[kT, (k+1)T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .design import _readonly
from .discrete import _check_T
from .errors import (
    AnalysisError,
    ConfigError,
    ImproperTfError,
    NoStepFoundError,
    ZohOverflowError,
)
from .freq import RationalTf

DIVERGENCE_LIMIT = 1e9
SETTLING_BAND = 0.02


@dataclass(frozen=True)
class LtiPlant:
    """Controllable canonical realization; discrete fields filled by :meth:`at`."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: float
    T: Optional[float] = None
    A_d: Optional[np.ndarray] = None
    b_d: Optional[np.ndarray] = None

    @property
    def order(self) -> int:
        return self.A.shape[0]

    def at(self, T: float) -> "LtiPlant":
        A_d, b_d = zoh_discretize_plant(self, T)
        return LtiPlant(self.A, self.b, self.c, self.d, float(T), A_d, b_d)

    def response(self, omega: float) -> complex:
        m = self.order
        if m == 0:
            return complex(self.d)
        x = np.linalg.solve(1j * omega * np.eye(m) - self.A, self.b)
        return complex(self.c @ x + self.d)


def plant_from_tf(tf: RationalTf) -> LtiPlant:
    if tf.domain != "continuous":
        raise ConfigError("plant must be a continuous-time transfer function")
    if tf.relative_degree < 0:
        raise ImproperTfError("plant transfer function is improper")
    den = np.array(tf.den) / tf.den[-1]
    num = np.array(tf.num) / tf.den[-1]
    m = len(den) - 1
    num = np.concatenate([num, np.zeros(m + 1 - len(num))])
    d = float(num[m])
    A = np.zeros((m, m))
    if m:
        A[:-1, 1:] = np.eye(m - 1)
        A[-1, :] = -den[:m]
    b = np.zeros(m)
    if m:
        b[-1] = 1.0
    c = num[:m] - d * den[:m]
    return LtiPlant(_readonly(A), _readonly(b), _readonly(c), d)


def zoh_discretize_plant(plant: LtiPlant, T: float, max_norm: float = 1e3):
    """Exact ZOH via the exponential of the augmented matrix [[A, b], [0, 0]]."""
    T = _check_T(T)
    m = plant.order
    if m and np.linalg.norm(plant.A, 1) * T > max_norm:
        raise ZohOverflowError(f"|A|*T exceeds {max_norm}; reduce the sample time")
    aug = np.zeros((m + 1, m + 1))
    aug[:m, :m] = plant.A
    aug[:m, m] = plant.b
    E = expm(aug * T)
    if not np.all(np.isfinite(E)):
        raise ZohOverflowError("matrix exponential overflowed")
    return _readonly(E[:m, :m]), _readonly(E[:m, m])


def default_sample_time(omega_cl: float, k_eso: float) -> float:
    return 2.0 * math.pi / (200.0 * k_eso * omega_cl)


def _profile(points) -> tuple:
    pts = tuple((float(t), float(v)) for t, v in (points or ()))
    if any(not (math.isfinite(t) and math.isfinite(v)) for t, v in pts):
        raise ConfigError("profile breakpoints must be finite")
    return tuple(sorted(pts))


@dataclass(frozen=True)
class Scenario:
    """Piecewise-constant reference and input disturbance plus Gaussian output noise.

    Profiles are ``(t_start, value)`` breakpoints; the signal is 0 before the
    first one. ``actuator_limits`` saturates the plant input (not the
    controller state).
    """

    T: float
    steps: int
    r_profile: tuple = ((0.0, 1.0),)
    d_profile: tuple = ()
    noise_sigma: float = 0.0
    seed: int = 0
    actuator_limits: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "T", _check_T(self.T))
        if int(self.steps) != self.steps or self.steps < 1:
            raise ConfigError("steps must be an integer >= 1")
        object.__setattr__(self, "steps", int(self.steps))
        object.__setattr__(self, "r_profile", _profile(self.r_profile))
        object.__setattr__(self, "d_profile", _profile(self.d_profile))
        if not (self.noise_sigma >= 0 and math.isfinite(self.noise_sigma)):
            raise ConfigError("noise_sigma must be >= 0")
        if self.actuator_limits is not None:
            lo, hi = (float(v) for v in self.actuator_limits)
            if not lo < hi:
                raise ConfigError("actuator_limits must satisfy lo < hi")
            object.__setattr__(self, "actuator_limits", (lo, hi))

    @classmethod
    def for_duration(cls, T: float, duration: float, **kw) -> "Scenario":
        return cls(T=T, steps=int(math.ceil(duration / T - 1e-9)) + 1, **kw)

    def times(self) -> np.ndarray:
        return np.arange(self.steps) * self.T

    def _sample(self, profile) -> np.ndarray:
        out = np.zeros(self.steps)
        for t0, v in profile:
            k0 = max(0, math.ceil(t0 / self.T - 1e-9))
            out[k0:] = v
        return out

    def reference(self) -> np.ndarray:
        return self._sample(self.r_profile)

    def disturbance(self) -> np.ndarray:
        return self._sample(self.d_profile)

    def noise(self) -> np.ndarray:
        if self.noise_sigma == 0:
            return np.zeros(self.steps)
        return np.random.default_rng(self.seed).normal(0.0, self.noise_sigma, self.steps)


@dataclass
class SimTrace:
    t: np.ndarray
    r: np.ndarray
    y: np.ndarray
    u: np.ndarray
    d: np.ndarray
    n: np.ndarray
    diverged_at: Optional[int] = None
    T: float = field(default=0.0)

    COLUMNS = ("t", "r", "y", "u", "d", "n")

    def __len__(self):
        return len(self.t)

    def to_csv(self, fp) -> None:
        fp.write(",".join(self.COLUMNS) + "\n")
        cols = [getattr(self, c) for c in self.COLUMNS]
        for row in zip(*cols):
            fp.write(",".join("%.17g" % v for v in row) + "\n")


def run_closed_loop(plant: LtiPlant, controller, scenario: Scenario) -> SimTrace:
    """Simulate ``steps`` samples; stop early (recorded) if |y| exceeds 1e9."""
    T = scenario.T
    if abs(controller.T - T) > 1e-12 * T:
        raise ConfigError(f"controller sample time {controller.T} != scenario sample time {T}")
    if plant.d != 0.0:
        raise ImproperTfError("closed-loop simulation needs a strictly proper plant")
    if plant.T is not None and abs(plant.T - T) <= 1e-15 * T:
        A_d, b_d = plant.A_d, plant.b_d
    else:
        A_d, b_d = zoh_discretize_plant(plant, T)
    c = np.asarray(plant.c)
    r, d, noise = scenario.reference(), scenario.disturbance(), scenario.noise()
    sat = scenario.actuator_limits
    N = scenario.steps
    y_rec = np.zeros(N)
    u_rec = np.zeros(N)
    x = np.zeros(plant.order)
    controller.reset()
    diverged = None
    for k in range(N):
        y = float(c @ x)
        if not math.isfinite(y) or abs(y) > DIVERGENCE_LIMIT:
            diverged = k
            break
        u = controller.step(float(r[k]), y + float(noise[k]))
        v = u if sat is None else min(max(u, sat[0]), sat[1])
        x = A_d @ x + b_d * (v + d[k])
        y_rec[k] = y
        u_rec[k] = u
    K = N if diverged is None else diverged
    return SimTrace(
        t=scenario.times()[:K],
        r=r[:K],
        y=y_rec[:K],
        u=u_rec[:K],
        d=d[:K],
        n=noise[:K],
        diverged_at=diverged,
        T=T,
    )


# --- metrics -----------------------------------------------------------------


@dataclass(frozen=True)
class StepMetrics:
    overshoot_pct: float
    settling_time: float
    control_effort: float
    peak_u: float
    peak_u_ratio: Optional[float]
    y_crossings: int
    step_time: float
    final_reference: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _find_step(r: np.ndarray) -> int:
    prev = np.concatenate([[0.0], r[:-1]])
    idx = np.flatnonzero(r != prev)
    if idx.size == 0:
        raise NoStepFoundError("reference contains no step")
    return int(idx[0])


def metrics(trace: SimTrace) -> StepMetrics:
    """Step-response metrics relative to the first reference step.

    Settling uses a 2% band around the final reference value; it is ``inf``
    if the response is still outside the band at the end of the trace.
    """
    if trace.diverged_at is not None:
        raise AnalysisError(f"trace diverged at step {trace.diverged_at}")
    if len(trace) == 0:
        raise NoStepFoundError("empty trace")
    ks = _find_step(trace.r)
    r_before = trace.r[ks - 1] if ks > 0 else 0.0
    r_final = float(trace.r[-1])
    step = r_final - r_before
    if step == 0.0:
        raise NoStepFoundError("reference returns to its initial value")
    err = (trace.y[ks:] - r_final) * math.copysign(1.0, step)
    overshoot = max(0.0, float(err.max())) / abs(step) * 100.0
    band = SETTLING_BAND * abs(step)
    outside = np.flatnonzero(np.abs(err) > band)
    if outside.size == 0:
        settling = 0.0
    elif outside[-1] == len(err) - 1:
        settling = math.inf
    else:
        settling = float(trace.t[ks + outside[-1] + 1] - trace.t[ks])
    u = trace.u
    effort = float(np.sum(np.abs(np.diff(u))))
    peak = float(np.max(np.abs(u)))
    tail = u[-max(1, len(u) // 20) :]
    u_final = float(np.mean(tail))
    # undefined when the steady-state input is zero (e.g. integrating plants)
    ratio = peak / abs(u_final) if abs(u_final) > 1e-9 * peak else None
    sig = np.sign(err[np.abs(err) > band])
    crossings = int(np.count_nonzero(np.diff(sig) != 0)) if sig.size > 1 else 0
    return StepMetrics(
        overshoot_pct=overshoot,
        settling_time=settling,
        control_effort=effort,
        peak_u=peak,
        peak_u_ratio=ratio,
        y_crossings=crossings,
        step_time=float(trace.t[ks]),
        final_reference=r_final,
    )


def closed_loop_bandwidth(trace: SimTrace, points: int = 2000) -> float:
    """-3 dB bandwidth (rad/s) of the sampled r -> y map, from a settled step response.

    The differenced step response is the impulse response of the sampled loop;
    its DTFT is scanned upward from low frequency for the first drop below
    |H(0)|/sqrt(2).
    """
    ks = _find_step(trace.r)
    r_before = trace.r[ks - 1] if ks > 0 else 0.0
    step = float(trace.r[-1] - r_before)
    if step == 0.0:
        raise NoStepFoundError("reference returns to its initial value")
    y0 = trace.y[ks - 1] if ks > 0 else 0.0
    s = (trace.y[ks:] - y0) / step
    h = np.diff(np.concatenate([[0.0], s]))
    T = trace.T
    k = np.arange(len(h))
    dc = abs(h.sum())
    omegas = np.logspace(math.log10(1e-4 * math.pi / T), math.log10(0.999 * math.pi / T), points)
    target = dc / math.sqrt(2.0)
    prev_w, prev_m = None, None
    for w in omegas:
        m = abs(np.dot(h, np.exp(-1j * w * T * k)))
        if m < target:
            if prev_w is None:
                return float(w)
            # log-linear interpolation between grid points
            f = (prev_m - target) / (prev_m - m)
            return float(10 ** (math.log10(prev_w) + f * (math.log10(w) - math.log10(prev_w))))
        prev_w, prev_m = w, m
    return math.pi / T
