"""Sample-by-sample execution of discrete ADRC.

Two interchangeable controller forms:

* :class:`TfController` runs the prefilter and the feedback filter as direct-form
  difference equations, followed by a (optionally clamped) accumulator.
* :class:`SsController` runs the current observer and state feedback directly.

For the same design both produce the same control sequence (up to round-off)
as long as the accumulator does not clamp.

Controllers are mutable, single-threaded objects. Coefficients are immutable.
"""

from __future__ import annotations

import math

from .design import GainSet, PlantSpec
from .discrete import DiscreteAdrcTf, DiscreteObserverMatrices, _check_T, discrete_observer
from .errors import ConfigError, DimensionMismatchError, NonFiniteInputError


def _check_limits(limits):
    if limits is None:
        return None
    lo, hi = (float(v) for v in limits)
    if not (lo < hi) or math.isnan(lo) or math.isnan(hi):
        raise ConfigError(f"limits must satisfy u_min < u_max, got {limits!r}")
    return lo, hi


def _check_inputs(r, y):
    if not (math.isfinite(r) and math.isfinite(y)):
        raise NonFiniteInputError(f"non-finite controller input r={r!r}, y={y!r}")


class TfController:
    """Transfer-function form with factored accumulator.

    Per step::

        r_f = C_PF(r)
        du  = dC_FB(r_f - y)
        u   = clamp(u_prev + du)

    Only the accumulator is clamped; the prefilter runs open loop on ``r``.
    The clamped value is what is stored, so ``accumulator`` always lies within
    ``limits``.
    """

    def __init__(self, coeffs: DiscreteAdrcTf, limits=None):
        self.coeffs = coeffs
        self.n = coeffs.n
        self.T = coeffs.T
        self.limits = _check_limits(limits)
        self._g = coeffs.gamma
        self._p = coeffs.prefilter_den
        self._b = coeffs.beta
        self._a = coeffs.alpha
        self._kernel = {1: _tf_kernel_1, 2: _tf_kernel_2}.get(self.n, _tf_kernel_generic)
        self.reset()

    def reset(self) -> "TfController":
        n = self.n
        self.pf_inputs = [0.0] * (n + 1)  # r(k-1) ... r(k-n-1)
        self.pf_outputs = [0.0] * n  # r_f(k-1) ... r_f(k-n)
        self.fb_inputs = [0.0] * n  # e(k-1) ... e(k-n)
        self.fb_outputs = [0.0] * n  # du(k-1) ... du(k-n)
        self.accumulator = 0.0
        return self

    def step(self, r: float, y: float) -> float:
        _check_inputs(r, y)
        return self._kernel(self, r, y)

    __call__ = step


def _tf_kernel_1(s: TfController, r, y):
    g0, g1, g2 = s._g
    (p1,) = s._p
    b0, b1 = s._b
    (a1,) = s._a
    r1, r2 = s.pf_inputs
    (rf1,) = s.pf_outputs
    (e1,) = s.fb_inputs
    (du1,) = s.fb_outputs

    rf = g0 * r + g1 * r1 + g2 * r2 - p1 * rf1
    e = rf - y
    du = b0 * e + b1 * e1 - a1 * du1
    u = s.accumulator + du
    if s.limits is not None:
        lo, hi = s.limits
        u = lo if u < lo else hi if u > hi else u

    s.pf_inputs[0], s.pf_inputs[1] = r, r1
    s.pf_outputs[0] = rf
    s.fb_inputs[0] = e
    s.fb_outputs[0] = du
    s.accumulator = u
    return u


def _tf_kernel_2(s: TfController, r, y):
    g0, g1, g2, g3 = s._g
    p1, p2 = s._p
    b0, b1, b2 = s._b
    a1, a2 = s._a
    r1, r2, r3 = s.pf_inputs
    rf1, rf2 = s.pf_outputs
    e1, e2 = s.fb_inputs
    du1, du2 = s.fb_outputs

    rf = g0 * r + g1 * r1 + g2 * r2 + g3 * r3 - p1 * rf1 - p2 * rf2
    e = rf - y
    du = b0 * e + b1 * e1 + b2 * e2 - a1 * du1 - a2 * du2
    u = s.accumulator + du
    if s.limits is not None:
        lo, hi = s.limits
        u = lo if u < lo else hi if u > hi else u

    s.pf_inputs[0], s.pf_inputs[1], s.pf_inputs[2] = r, r1, r2
    s.pf_outputs[0], s.pf_outputs[1] = rf, rf1
    s.fb_inputs[0], s.fb_inputs[1] = e, e1
    s.fb_outputs[0], s.fb_outputs[1] = du, du1
    s.accumulator = u
    return u


def _tf_kernel_generic(s: TfController, r, y):
    n = s.n
    g, p, b, a = s._g, s._p, s._b, s._a
    rin, rout, ein, dout = s.pf_inputs, s.pf_outputs, s.fb_inputs, s.fb_outputs
    rf = g[0] * r
    for i in range(n + 1):
        rf += g[i + 1] * rin[i]
    for i in range(n):
        rf -= p[i] * rout[i]
    e = rf - y
    du = b[0] * e
    for i in range(n):
        du += b[i + 1] * ein[i] - a[i] * dout[i]
    u = s.accumulator + du
    if s.limits is not None:
        lo, hi = s.limits
        u = lo if u < lo else hi if u > hi else u
    rin.insert(0, r)
    rin.pop()
    rout.insert(0, rf)
    rout.pop()
    ein.insert(0, e)
    ein.pop()
    dout.insert(0, du)
    dout.pop()
    s.accumulator = u
    return u


class SsController:
    """Current-observer state-space form.

    Per step::

        x_hat(k) = A_eso x_hat(k-1) + b_eso u(k-1) + l y(k)
        u(k)     = (k1 r(k) - k^T x_hat(k)) / b0
    """

    def __init__(self, plant: PlantSpec, gains: GainSet, T: float):
        if gains.n != plant.n:
            raise DimensionMismatchError(f"gains are for order {gains.n}, plant has order {plant.n}")
        self.T = _check_T(T)
        self.n = plant.n
        self.b0 = plant.b0
        self.gains = gains
        self.matrices: DiscreteObserverMatrices = discrete_observer(plant, gains.l, self.T)
        self._A = [list(map(float, row)) for row in self.matrices.A_eso]
        self._bu = [float(v) for v in self.matrices.b_eso]
        self._l = list(gains.l)
        self._k = list(gains.k)
        self._inv_b0 = 1.0 / plant.b0
        self.reset()

    def reset(self) -> "SsController":
        self.x_hat = [0.0] * (self.n + 1)
        self.u_prev = 0.0
        return self

    def step(self, r: float, y: float) -> float:
        _check_inputs(r, y)
        A, bu, l, k = self._A, self._bu, self._l, self._k
        x, up = self.x_hat, self.u_prev
        m = self.n + 1
        xn = [0.0] * m
        for i in range(m):
            acc = bu[i] * up + l[i] * y
            row = A[i]
            for j in range(m):
                acc += row[j] * x[j]
            xn[i] = acc
        v = k[0] * r - xn[m - 1]
        for i in range(self.n):
            v -= k[i] * xn[i]
        u = self._inv_b0 * v
        self.x_hat = xn
        self.u_prev = u
        return u

    __call__ = step


def tf_step(state: TfController, r: float, y: float) -> float:
    return state.step(r, y)


def ss_step(state: SsController, r: float, y: float) -> float:
    return state.step(r, y)


def reset(state):
    """Zero all delay lines, accumulator and observer state; limits are kept."""
    return state.reset()
