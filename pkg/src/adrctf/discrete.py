"""Discrete-time linear ADRC design.

ZOH discretization of the integrator chain, current-observer gains, and the
exact transfer-function form

    u = C_FB(z) * (C_PF(z) * r - y)

    C_FB(z) = sum_{i=0..n} beta_i q^i / (1 + sum_{i=1..n} alpha_i q^i) * 1 / (1 - q)
    C_PF(z) = sum_{i=0..n+1} gamma_i q^i / (1 + sum_{i=1..n} (beta_i / beta_0) q^i)

with ``q = z^-1``. The accumulator ``1 / (1 - q)`` is kept as a separate factor
so the runtime can clamp it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .design import (
    MAX_ORDER,
    ContinuousTuning,
    GainSet,
    PlantSpec,
    _faddeev_leverrier,
    _readonly,
    _row_mat_col,
    controller_gains,
)
from .errors import (
    ConfigError,
    DegenerateB0Error,
    DesignError,
    DimensionMismatchError,
    IllConditionedError,
    InvalidSampleTimeError,
    NoIntegratorError,
    UnsupportedOrderError,
)

ROOT_AT_ONE_TOL = 1e-8


def _check_T(T) -> float:
    T = float(T)
    if not math.isfinite(T) or T <= 0.0:
        raise InvalidSampleTimeError(f"sample time must be finite and > 0, got {T!r}")
    return T


def _check_z(z_eso) -> float:
    z = float(z_eso)
    if not (0.0 <= z < 1.0):
        raise ConfigError(f"z_eso must lie in [0, 1), got {z!r}")
    return z


@dataclass(frozen=True)
class DiscreteTuning:
    T: float
    z_eso: float

    def __post_init__(self):
        object.__setattr__(self, "T", _check_T(self.T))
        object.__setattr__(self, "z_eso", _check_z(self.z_eso))

    @classmethod
    def from_bandwidth(cls, T: float, tuning: ContinuousTuning) -> "DiscreteTuning":
        T = _check_T(T)
        return cls(T, math.exp(-tuning.k_eso * tuning.omega_cl * T))


@dataclass(frozen=True)
class DiscreteObserverMatrices:
    A_d: np.ndarray
    b_d: np.ndarray
    A_eso: np.ndarray
    b_eso: np.ndarray


@dataclass(frozen=True)
class DiscreteAdrcTf:
    """Coefficients of the factored discrete controller (powers of z^-1).

    ``alpha_tilde`` is the unfactored C_FB denominator (without its leading 1);
    it is kept for inspection only.
    """

    n: int
    T: float
    alpha: tuple
    beta: tuple
    gamma: tuple
    alpha_tilde: tuple

    def __post_init__(self):
        n = self.n
        for name, size in (("alpha", n), ("beta", n + 1), ("gamma", n + 2), ("alpha_tilde", n + 1)):
            vals = tuple(float(v) for v in getattr(self, name))
            if len(vals) != size:
                raise DimensionMismatchError(f"{name} must have {size} entries, got {len(vals)}")
            if not all(math.isfinite(v) for v in vals):
                raise DesignError(f"non-finite coefficient in {name}")
            object.__setattr__(self, name, vals)
        if self.beta[0] == 0.0:
            raise DegenerateB0Error("beta_0 must be nonzero")
        if sum(self.beta) == 0.0:
            raise DesignError("feedback numerator vanishes at z = 1 (no integrator drive)")

    @property
    def prefilter_den(self) -> tuple:
        """(beta_1 / beta_0, ..., beta_n / beta_0)."""
        return tuple(b / self.beta[0] for b in self.beta[1:])

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "T": self.T,
            "alpha": list(self.alpha),
            "beta": list(self.beta),
            "gamma": list(self.gamma),
            "alpha_tilde": list(self.alpha_tilde),
        }


# --- ZOH and observer --------------------------------------------------------


def _zoh_chain(n: int, T, b0, one):
    m = n + 1
    A = [[one * 0 for _ in range(m)] for _ in range(m)]
    for i in range(m):
        for j in range(i, m):
            A[i][j] = T ** (j - i) / math.factorial(j - i) * one
    b = [one * 0 for _ in range(m)]
    for i in range(n):
        p = n - i
        b[i] = b0 * T**p / math.factorial(p)
    return A, b


def zoh_integrator_chain(plant: PlantSpec, T: float):
    """Exact ZOH discretization of the (n+1)-state integrator chain.

    A is nilpotent, so the exponential series terminates and is evaluated
    term by term. Returns ``(A_d, b_d)``.
    """
    T = _check_T(T)
    A, b = _zoh_chain(plant.n, T, plant.b0, 1.0)
    return _readonly(A), _readonly(b)


def _observer_gains_closed(n: int, T, z):
    if n == 1:
        return [1 - z**2, (1 - z) ** 2 / T]
    if n == 2:
        return [1 - z**3, 3 * (1 - z) ** 2 * (1 + z) / (2 * T), (1 - z) ** 3 / T**2]
    raise UnsupportedOrderError("closed-form discrete observer gains exist for orders 1 and 2")


def _solve_exact(J, rhs):
    m = len(J)
    a = [list(row) + [r] for row, r in zip(J, rhs)]
    for col in range(m):
        piv = next((r for r in range(col, m) if a[r][col] != 0), None)
        if piv is None:
            raise IllConditionedError("coefficient-matching system is singular")
        a[col], a[piv] = a[piv], a[col]
        for r in range(m):
            if r != col and a[r][col] != 0:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][m] / a[i][i] for i in range(m)]


def _eso_charpoly_exact(A, l):
    m = len(A)
    row = A[0]
    Aeso = [[A[i][j] - l[i] * row[j] for j in range(m)] for i in range(m)]
    d, _ = _faddeev_leverrier(Aeso, Fraction(0), Fraction(1))
    return d[:m]


def observer_gains_dt_solve(n: int, T: float, z_eso: float) -> tuple:
    """Discrete observer gains for any order via coefficient matching.

    det(zI - A_eso) is affine in l, so its coefficients are p0 + J l. The
    system is assembled and solved in exact rational arithmetic; only the
    result is rounded.
    """
    if n < 1 or n > MAX_ORDER:
        raise UnsupportedOrderError(f"orders 1..{MAX_ORDER} are supported, got {n}")
    T, z = Fraction(_check_T(T)), Fraction(_check_z(z_eso))
    m = n + 1
    A, _ = _zoh_chain(n, T, Fraction(0), Fraction(1))
    zero = [Fraction(0)] * m
    p0 = _eso_charpoly_exact(A, zero)
    cols = []
    for j in range(m):
        e = list(zero)
        e[j] = Fraction(1)
        pj = _eso_charpoly_exact(A, e)
        cols.append([a - b for a, b in zip(pj, p0)])
    J = [[cols[j][i] for j in range(m)] for i in range(m)]
    target = [Fraction(math.comb(m, i)) * (-z) ** (m - i) for i in range(m)]
    l = _solve_exact(J, [t - p for t, p in zip(target, p0)])
    return tuple(float(v) for v in l)


def observer_gains_dt(n: int, T: float, z_eso: float) -> tuple:
    """Current-observer gains placing all eigenvalues of A_eso at z_eso."""
    T, z = _check_T(T), _check_z(z_eso)
    if n in (1, 2):
        return tuple(_observer_gains_closed(n, T, z))
    return observer_gains_dt_solve(n, T, z)


def current_observer_matrices(A_d, b_d, l):
    """A_eso = A_d - l c^T A_d and b_eso = b_d - l c^T b_d, with c^T = e_1^T."""
    A_d = np.asarray(A_d, dtype=float)
    b_d = np.asarray(b_d, dtype=float).reshape(-1)
    l = np.asarray(l, dtype=float).reshape(-1)
    m = A_d.shape[0]
    if A_d.shape != (m, m) or b_d.shape != (m,) or l.shape != (m,):
        raise DimensionMismatchError(
            f"inconsistent shapes A_d={A_d.shape}, b_d={b_d.shape}, l={l.shape}"
        )
    return _readonly(A_d - np.outer(l, A_d[0])), _readonly(b_d - l * b_d[0])


def discrete_observer(plant: PlantSpec, l, T: float) -> DiscreteObserverMatrices:
    A_d, b_d = zoh_integrator_chain(plant, T)
    A_eso, b_eso = current_observer_matrices(A_d, b_d, l)
    return DiscreteObserverMatrices(A_d, b_d, A_eso, b_eso)


# --- accumulator -------------------------------------------------------------


def factor_accumulator(alpha_tilde: Sequence) -> tuple:
    """Split 1 + sum alpha~_i q^i into (1 + sum alpha_i q^i) * (1 - q).

    Requires a root at q = 1. Works on floats or Fractions; the element type is
    preserved.
    """
    at = list(alpha_tilde)
    if not at:
        raise DimensionMismatchError("alpha_tilde must be non-empty")
    residual = 1 + sum(at)
    scale = max([1] + [abs(v) for v in at])
    if abs(residual) > ROOT_AT_ONE_TOL * scale:
        raise NoIntegratorError(f"denominator has no root at z = 1 (residual {float(residual):.3g})")
    alpha = []
    acc = 1
    for v in at[:-1]:
        acc = acc + v
        alpha.append(acc)
    return tuple(alpha)


def unfactor_accumulator(alpha: Sequence) -> tuple:
    """Coefficients of (1 + sum alpha_i q^i)(1 - q), leading 1 dropped."""
    a = [1] + list(alpha)
    out = [a[i] - a[i - 1] for i in range(1, len(a))]
    out.append(-a[-1])
    return tuple(out)


# --- transfer functions ------------------------------------------------------


def _validate_gains(plant: PlantSpec, k, l) -> GainSet:
    gains = GainSet(k, l)
    if gains.n != plant.n:
        raise DimensionMismatchError(f"gains are for order {gains.n}, plant has order {plant.n}")
    return gains


def discrete_tf_general(plant: PlantSpec, gains_k, gains_l, T: float) -> DiscreteAdrcTf:
    """Exact TF coefficients from the closed-loop observer resolvent.

    With M = A_eso - b_eso k^T / b0, the closed-loop observer operator
    (I - q M)^-1 equals adj(zI - M) / det(zI - M) rewritten in powers of q.
    Everything runs in rational arithmetic on the binary input values.
    """
    gains = _validate_gains(plant, gains_k, gains_l)
    n = plant.n
    if n > MAX_ORDER:
        raise UnsupportedOrderError(f"general path supports orders up to {MAX_ORDER}")
    T = _check_T(T)
    zero, one = Fraction(0), Fraction(1)
    b0 = Fraction(plant.b0)
    k = [Fraction(v) for v in gains.k_ext]
    l = [Fraction(v) for v in gains.l]
    m = n + 1
    A_d, b_d = _zoh_chain(n, Fraction(T), b0, one)
    row = A_d[0]
    A_eso = [[A_d[i][j] - l[i] * row[j] for j in range(m)] for i in range(m)]
    b_eso = [b_d[i] - l[i] * b_d[0] for i in range(m)]
    M = [[A_eso[i][j] - b_eso[i] * k[j] / b0 for j in range(m)] for i in range(m)]
    d, B = _faddeev_leverrier(M, zero, one)

    alpha_tilde = [d[m - i] for i in range(1, m + 1)]
    beta = [_row_mat_col(k, B[m - 1 - i], l, zero) / b0 for i in range(n + 1)]
    if beta[0] == 0:
        raise DegenerateB0Error("beta_0 vanishes")
    # numerator of 1 - q k^T Phi b_eso / b0, times det in q-form
    P = [one] + [d[m - i] - _row_mat_col(k, B[m - i], b_eso, zero) / b0 for i in range(1, m + 1)]
    gamma = [k[0] / b0 * p / beta[0] for p in P]
    alpha = factor_accumulator(alpha_tilde)
    return DiscreteAdrcTf(n=n, T=T, alpha=alpha, beta=beta, gamma=gamma, alpha_tilde=alpha_tilde)


def discrete_tf_bandwidth(plant: PlantSpec, omega_cl: float, k_eso: float, T: float) -> DiscreteAdrcTf:
    """Closed-form coefficients for bandwidth parameterization (orders 1 and 2)."""
    tuning = ContinuousTuning(omega_cl, k_eso)
    T = _check_T(T)
    w, b0 = tuning.omega_cl, plant.b0
    z = math.exp(-tuning.k_eso * w * T)
    Tw = T * w
    if plant.n == 1:
        D = Tw * (1 - z**2) + (1 - z) ** 2
        alpha = [(Tw - 1) * z**2]
        beta = [D / (b0 * T), (-2 * Tw * z * (1 - z) - (1 - z) ** 2) / (b0 * T)]
        gamma = [Tw / D, -2 * Tw * z / D, Tw * z**2 / D]
    elif plant.n == 2:
        Tw2 = Tw * Tw
        D = Tw2 * (1 - z**3) + 3 * Tw * (1 - z - z**2 + z**3) + (1 - z) ** 3
        alpha = [
            0.5 * (Tw2 * z**3 + Tw * (1 + 3 * z + 3 * z**2 - 3 * z**3) + (1 - 3 * z - 3 * z**2 + z**3)),
            z**3 / 2 * (Tw2 - 4 * Tw + 2),
        ]
        s = b0 * T * T
        beta = [
            D / s,
            (-3 * Tw2 * z * (1 - z**2) - 4 * Tw * (1 - 3 * z**2 + 2 * z**3) - 2 * (1 - z) ** 3) / s,
            (3 * Tw2 * z**2 * (1 - z) + Tw * (1 + 3 * z - 9 * z**2 + 5 * z**3) + (1 - z) ** 3) / s,
        ]
        gamma = [Tw2 / D, -3 * Tw2 * z / D, 3 * Tw2 * z**2 / D, -Tw2 * z**3 / D]
    else:
        raise UnsupportedOrderError("closed-form discrete coefficients exist for orders 1 and 2")
    return DiscreteAdrcTf(
        n=plant.n, T=T, alpha=alpha, beta=beta, gamma=gamma, alpha_tilde=unfactor_accumulator(alpha)
    )


def discrete_tf_terms(plant: PlantSpec, gains_k, gains_l, T: float) -> DiscreteAdrcTf:
    """Closed-form coefficients in terms of arbitrary gains (orders 1 and 2)."""
    gains = _validate_gains(plant, gains_k, gains_l)
    T = _check_T(T)
    b0 = plant.b0
    if plant.n == 1:
        (k1,), (l1, l2) = gains.k, gains.l
        S = k1 * l1 + l2
        alpha = [(T * k1 - 1) * (1 - l1)]
        beta = [S / b0, (T * k1 * l2 - k1 * l1 - l2) / b0]
        gamma = [k1 / S, k1 * (T * l2 + l1 - 2) / S, k1 * (1 - l1) / S]
    elif plant.n == 2:
        (k1, k2), (l1, l2, l3) = gains.k, gains.l
        S = k1 * l1 + k2 * l2 + l3
        alpha = [
            T * T / 2 * (k1 - k1 * l1 - k2 * l2) + T * k2 + T * l2 + l1 - 2,
            (T * T * k1 / 2 - T * k2 + 1) * (1 - l1),
        ]
        beta = [
            S / b0,
            (T * T * k1 * l3 / 2 + T * k1 * l2 + T * k2 * l3 - 2 * S) / b0,
            (T * T * k1 * l3 / 2 - T * k1 * l2 - T * k2 * l3 + S) / b0,
        ]
        # gamma_1, gamma_2 carry a factor 1/2; without it they disagree with
        # both the bandwidth closed forms and the resolvent path by exactly 2x.
        gamma = [
            k1 / S,
            k1 * (T * T * l3 + 2 * T * l2 + 2 * l1 - 6) / (2 * S),
            k1 * (T * T * l3 - 2 * T * l2 - 4 * l1 + 6) / (2 * S),
            k1 * (l1 - 1) / S,
        ]
    else:
        raise UnsupportedOrderError("closed-form discrete coefficients exist for orders 1 and 2")
    return DiscreteAdrcTf(
        n=plant.n, T=T, alpha=alpha, beta=beta, gamma=gamma, alpha_tilde=unfactor_accumulator(alpha)
    )


def discrete_bandwidth_gains(n: int, tuning: ContinuousTuning, T: float) -> GainSet:
    dt = DiscreteTuning.from_bandwidth(T, tuning)
    return GainSet(controller_gains(n, tuning.omega_cl), observer_gains_dt(n, dt.T, dt.z_eso))
