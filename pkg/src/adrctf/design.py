"""Continuous-time linear ADRC design.

Bandwidth-parameterized controller/observer gains, the state-space matrices of
the extended state observer, and the realizable transfer-function form

    u = C_FB * (C_PF * r - y) + C_FF * r

with

    C_FB(s) = K_I / s * (1 + sum beta_i s^i) / (1 + sum alpha_i s^i)
    C_PF(s) = (1 + sum gamma_i s^i) / (1 + sum beta_i s^i)
    C_FF(s) = K_FF * s^n / (1 + sum alpha_i s^i)

Coefficients are available both from closed-form expressions (orders 1 and 2)
and from a generic resolvent derivation that works for any order up to
``MAX_ORDER``. Polynomials are stored in ascending powers of ``s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    ConfigError,
    DegenerateGainsError,
    DesignError,
    DimensionMismatchError,
    InvalidBandwidthError,
    InvalidOrderError,
    NormalizationError,
    UnsupportedOrderError,
)

MAX_ORDER = 5
NORM_TOL = 1e-9


def _check_order(n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidOrderError(f"order must be an integer >= 1, got {n!r}")
    return int(n)


def _check_positive(name: str, value, exc=ConfigError) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise exc(f"{name} must be finite and > 0, got {value!r}")
    return value


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PlantSpec:
    """Design model y^(n) = f + b0 * u."""

    n: int
    b0: float

    def __post_init__(self):
        object.__setattr__(self, "n", _check_order(self.n))
        b0 = float(self.b0)
        if not math.isfinite(b0) or b0 == 0.0:
            raise ConfigError(f"b0 must be finite and nonzero, got {self.b0!r}")
        object.__setattr__(self, "b0", b0)


@dataclass(frozen=True)
class ContinuousTuning:
    omega_cl: float
    k_eso: float

    def __post_init__(self):
        object.__setattr__(
            self, "omega_cl", _check_positive("omega_cl", self.omega_cl, InvalidBandwidthError)
        )
        object.__setattr__(self, "k_eso", _check_positive("k_eso", self.k_eso, InvalidBandwidthError))


@dataclass(frozen=True)
class GainSet:
    """Controller gains k[1..n] and observer gains l[1..n+1].

    The trailing 1 of the extended controller row (acting on the disturbance
    estimate) is implicit, see :meth:`k_ext`.
    """

    k: tuple
    l: tuple

    def __post_init__(self):
        k = tuple(float(v) for v in self.k)
        l = tuple(float(v) for v in self.l)
        if len(k) < 1:
            raise InvalidOrderError("at least one controller gain is required")
        if len(l) != len(k) + 1:
            raise DimensionMismatchError(
                f"expected {len(k) + 1} observer gains for {len(k)} controller gains, got {len(l)}"
            )
        if not all(math.isfinite(v) for v in k + l):
            raise ConfigError("gains must be finite")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "l", l)

    @property
    def n(self) -> int:
        return len(self.k)

    @property
    def k_ext(self) -> tuple:
        return self.k + (1.0,)


@dataclass(frozen=True)
class SystemMatrices:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    A_cl: np.ndarray


@dataclass(frozen=True)
class ContinuousAdrcTf:
    n: int
    K_I: float
    K_FF: float
    alpha: tuple
    beta: tuple
    gamma: tuple

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            vals = tuple(float(v) for v in getattr(self, name))
            if len(vals) != self.n:
                raise DimensionMismatchError(f"{name} must have {self.n} entries")
            object.__setattr__(self, name, vals)
        vals = (self.K_I, self.K_FF) + self.alpha + self.beta + self.gamma
        if not all(math.isfinite(v) for v in vals):
            raise DesignError("non-finite transfer-function coefficient")

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "K_I": self.K_I,
            "K_FF": self.K_FF,
            "alpha": list(self.alpha),
            "beta": list(self.beta),
            "gamma": list(self.gamma),
        }


# --- gains -------------------------------------------------------------------


def controller_gains(n: int, omega_cl: float) -> tuple:
    """k_i such that s^n + k_n s^(n-1) + ... + k_1 = (s + omega_cl)^n."""
    n = _check_order(n)
    w = _check_positive("omega_cl", omega_cl, InvalidBandwidthError)
    return tuple(math.comb(n, i - 1) * w ** (n - i + 1) for i in range(1, n + 1))


def observer_gains_ct(n: int, tuning: ContinuousTuning) -> tuple:
    """l_i such that det(sI - (A - l c^T)) = (s + k_eso * omega_cl)^(n+1)."""
    n = _check_order(n)
    wo = tuning.k_eso * tuning.omega_cl
    return tuple(math.comb(n + 1, i) * wo**i for i in range(1, n + 2))


def bandwidth_gains(n: int, tuning: ContinuousTuning) -> GainSet:
    return GainSet(controller_gains(n, tuning.omega_cl), observer_gains_ct(n, tuning))


# --- matrices ----------------------------------------------------------------


def _chain_matrices(n: int, b0):
    m = n + 1
    A = [[0] * m for _ in range(m)]
    for i in range(n):
        A[i][i + 1] = 1
    b = [0] * m
    b[n - 1] = b0
    c = [1] + [0] * n
    return A, b, c


def _closed_loop_rows(n: int, k_ext: Sequence, l: Sequence, zero, one):
    # A - l c^T - (1/b0) b k^T; the b0 in b cancels against 1/b0.
    m = n + 1
    A = [[zero] * m for _ in range(m)]
    for i in range(n):
        A[i][i + 1] = one
    for i in range(m):
        A[i][0] = A[i][0] - l[i]
    for j in range(m):
        A[n - 1][j] = A[n - 1][j] - k_ext[j]
    return A


def build_system_matrices(plant: PlantSpec, gains: GainSet) -> SystemMatrices:
    if gains.n != plant.n:
        raise DimensionMismatchError(f"gains are for order {gains.n}, plant has order {plant.n}")
    A, b, c = _chain_matrices(plant.n, plant.b0)
    A_cl = _closed_loop_rows(plant.n, gains.k_ext, gains.l, 0.0, 1.0)
    return SystemMatrices(_readonly(A), _readonly(b), _readonly(c), _readonly(A_cl))


# --- resolvent ---------------------------------------------------------------


def _faddeev_leverrier(M, zero, one):
    """Coefficients of det(sI - M) and adj(sI - M) over any exact or float field.

    Returns ``(d, B)`` with ``d[i]`` the coefficient of s^i (``d[m] = 1``) and
    ``B[i]`` the matrix coefficient of s^i in the adjugate.
    """
    m = len(M)
    d = [zero] * (m + 1)
    d[m] = one
    B = [None] * m
    prev = [[zero] * m for _ in range(m)]
    for k in range(1, m + 1):
        # N_k = M N_{k-1} + d[m-k+1] I
        cur = [
            [sum((M[i][p] * prev[p][j] for p in range(m)), zero) for j in range(m)]
            for i in range(m)
        ]
        for i in range(m):
            cur[i][i] = cur[i][i] + d[m - k + 1]
        B[m - k] = cur
        tr = sum((M[i][p] * cur[p][i] for i in range(m) for p in range(m)), zero)
        d[m - k] = -tr / k
        prev = cur
    return d, B


def resolvent_polynomials(M, m: int | None = None):
    """Polynomial coefficients of det(sI - M) and adj(sI - M).

    The recursion runs in exact rational arithmetic on the binary values of
    ``M``; only the final results are rounded to float.

    Returns ``(d, B)``: ``d`` has shape (m+1,), ascending powers, ``d[m] == 1``;
    ``B`` has shape (m, m, m) with ``B[i]`` multiplying s^i.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionMismatchError(f"expected a non-empty square matrix, got shape {M.shape}")
    if m is not None and m != M.shape[0]:
        raise DimensionMismatchError(f"size {m} does not match matrix shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ConfigError("matrix entries must be finite")
    Mq = [[Fraction(float(v)) for v in row] for row in M]
    d, B = _faddeev_leverrier(Mq, Fraction(0), Fraction(1))
    d = np.array([float(v) for v in d])
    B = np.array([[[float(v) for v in row] for row in Bi] for Bi in B])
    return d, B


def _row_mat_col(row, mat, col, zero):
    m = len(row)
    return sum((row[i] * mat[i][j] * col[j] for i in range(m) for j in range(m)), zero)


def _check_gains_nonzero(gains: GainSet):
    if any(v == 0.0 for v in gains.k + gains.l):
        raise DegenerateGainsError("controller and observer gains must be nonzero")


# --- transfer functions ------------------------------------------------------


def continuous_tf_general(plant: PlantSpec, gains: GainSet) -> ContinuousAdrcTf:
    """Realizable TF coefficients from arbitrary gains via the resolvent of A_cl."""
    if gains.n != plant.n:
        raise DimensionMismatchError(f"gains are for order {gains.n}, plant has order {plant.n}")
    n = plant.n
    if n > MAX_ORDER:
        raise UnsupportedOrderError(f"general path supports orders up to {MAX_ORDER}")
    _check_gains_nonzero(gains)
    zero, one = Fraction(0), Fraction(1)
    k = [Fraction(v) for v in gains.k_ext]
    l = [Fraction(v) for v in gains.l]
    b0 = Fraction(plant.b0)
    A_cl = _closed_loop_rows(n, k, l, zero, one)
    d, B = _faddeev_leverrier(A_cl, zero, one)

    scale = max(abs(v) for v in d)
    if abs(d[0]) > NORM_TOL * scale:
        raise DegenerateGainsError("det(sI - A_cl) has no root at the origin")
    den = d[1:]  # s cancelled
    num_fb = [_row_mat_col(k, Bi, l, zero) for Bi in B]
    # C_PF numerator: k1 * (det - s^(n+1) - k^T adj (b/b0)); b/b0 is the unit vector e_{n-1}
    e = [zero] * (n + 1)
    e[n - 1] = one
    num_pf = [k[0] * (d[i] - _row_mat_col(k, B[i], e, zero)) for i in range(n + 1)]
    top = d[n + 1] - one
    if top != 0:
        num_pf.append(k[0] * top)
    for name, poly in (("C_FB denominator", den), ("C_FB numerator", num_fb), ("C_PF numerator", num_pf)):
        pscale = max(abs(v) for v in poly)
        if pscale == 0 or abs(poly[0]) <= NORM_TOL * pscale:
            raise NormalizationError(f"{name} has a vanishing constant term")
    if len(num_pf) > n + 1 and abs(num_pf[-1]) > NORM_TOL * max(abs(v) for v in num_pf):
        raise DesignError("C_PF numerator is not of order n")

    K_I = num_fb[0] / (b0 * den[0])
    K_FF = k[0] / (b0 * den[0])
    # k^T adj(-A_cl) l reduces to k1 * l_{n+1}, so K_FF * l_{n+1} == K_I
    if abs(K_FF * l[n] - K_I) > 1e-12 * abs(K_I):
        raise DesignError("feedforward gain inconsistent with integrator gain")
    # unit DC gain of the prefilter: its denominator is the C_FB numerator
    if abs(num_pf[0] - num_fb[0]) > NORM_TOL * abs(num_fb[0]):
        raise DesignError("prefilter DC gain differs from 1")
    return ContinuousAdrcTf(
        n=n,
        K_I=float(K_I),
        K_FF=float(K_FF),
        alpha=[float(v / den[0]) for v in den[1:]],
        beta=[float(v / num_fb[0]) for v in num_fb[1:]],
        gamma=[float(v / num_pf[0]) for v in num_pf[1 : n + 1]],
    )


def continuous_tf_bandwidth(plant: PlantSpec, tuning: ContinuousTuning) -> ContinuousAdrcTf:
    """Closed-form coefficients for bandwidth parameterization.

    Orders 1 and 2 use the closed forms; higher orders fall back to the
    resolvent derivation with bandwidth gains.
    """
    n, b0 = plant.n, plant.b0
    w, ke = tuning.omega_cl, tuning.k_eso
    if n == 1:
        q = 1.0 + 2.0 * ke
        return ContinuousAdrcTf(
            n=1,
            K_I=ke**2 * w**2 / (b0 * q),
            K_FF=1.0 / (b0 * q),
            alpha=[1.0 / (w * q)],
            beta=[(2.0 + ke) / (ke * w)],
            gamma=[2.0 / (ke * w)],
        )
    if n == 2:
        q = 1.0 + 6.0 * ke + 3.0 * ke**2
        return ContinuousAdrcTf(
            n=2,
            K_I=ke**3 * w**3 / (b0 * q),
            K_FF=1.0 / (b0 * q),
            alpha=[(2.0 + 3.0 * ke) / (w * q), 1.0 / (w**2 * q)],
            beta=[(3.0 / ke + 2.0) / w, (3.0 / ke**2 + 6.0 / ke + 1.0) / w**2],
            gamma=[3.0 / (ke * w), 3.0 / (ke**2 * w**2)],
        )
    if n > MAX_ORDER:
        raise UnsupportedOrderError(f"orders above {MAX_ORDER} are not supported")
    return continuous_tf_general(plant, bandwidth_gains(n, tuning))


def continuous_tf_terms(plant: PlantSpec, gains: GainSet) -> ContinuousAdrcTf:
    """Closed-form coefficients in terms of arbitrary gains (orders 1 and 2)."""
    if gains.n != plant.n:
        raise DimensionMismatchError(f"gains are for order {gains.n}, plant has order {plant.n}")
    b0 = plant.b0
    if plant.n == 1:
        (k1,), (l1, l2) = gains.k, gains.l
        s = k1 + l1
        return ContinuousAdrcTf(
            n=1,
            K_I=k1 * l2 / (b0 * s),
            K_FF=k1 / (b0 * s),
            alpha=[1.0 / s],
            beta=[l1 / l2 + 1.0 / k1],
            gamma=[l1 / l2],
        )
    if plant.n == 2:
        (k1, k2), (l1, l2, l3) = gains.k, gains.l
        s = k1 + k2 * l1 + l2
        return ContinuousAdrcTf(
            n=2,
            K_I=k1 * l3 / (b0 * s),
            K_FF=k1 / (b0 * s),
            alpha=[(k2 + l1) / s, 1.0 / s],
            beta=[l2 / l3 + k2 / k1, l1 / l3 + (k2 / k1) * (l2 / l3) + 1.0 / k1],
            gamma=[l2 / l3, l1 / l3],
        )
    raise UnsupportedOrderError("closed-form terms exist for orders 1 and 2 only")
