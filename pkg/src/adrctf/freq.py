"""Frequency-domain evaluation of ADRC loops.

Rational transfer functions are stored as ascending coefficient sequences,
in powers of ``s`` (continuous) or ``q = z^-1`` (discrete).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .design import ContinuousAdrcTf, ContinuousTuning, PlantSpec, continuous_tf_bandwidth
from .discrete import DiscreteAdrcTf
from .errors import (
    AlgebraicDegeneracyError,
    AnalysisError,
    ConfigError,
    PoleHitError,
    UnsupportedOrderError,
    WrongRelativeDegreeError,
)

POLE_HIT = 1e-300
PAIR_RTOL = 1e-9


def _trim(coeffs) -> tuple:
    c = [float(v) for v in coeffs]
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class RationalTf:
    num: tuple
    den: tuple
    domain: str = "continuous"
    T: Optional[float] = None

    def __post_init__(self):
        num, den = _trim(self.num), _trim(self.den)
        if not num:
            num = (0.0,)
        if not den or all(v == 0.0 for v in den):
            raise AlgebraicDegeneracyError("denominator polynomial is identically zero")
        if not all(math.isfinite(v) for v in num + den):
            raise ConfigError("transfer-function coefficients must be finite")
        if self.domain not in ("continuous", "discrete"):
            raise ConfigError(f"unknown domain {self.domain!r}")
        if self.domain == "discrete" and not (self.T and self.T > 0):
            raise ConfigError("discrete transfer functions need a sample time T > 0")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def relative_degree(self) -> int:
        return (len(self.den) - 1) - (len(self.num) - 1)

    def poles(self) -> np.ndarray:
        return poly_roots(self.den)

    def zeros(self) -> np.ndarray:
        return poly_roots(self.num)

    def __call__(self, omega):
        return eval_response(self, omega)


def _point(tf: RationalTf, omega: float) -> complex:
    if tf.domain == "continuous":
        return 1j * omega
    return cmath.exp(-1j * omega * tf.T)


def eval_response(tf: RationalTf, omega: float) -> complex:
    """Complex gain at s = j*omega (or z = exp(j*omega*T))."""
    omega = float(omega)
    if not math.isfinite(omega) or omega < 0:
        raise ConfigError(f"omega must be finite and >= 0, got {omega!r}")
    if tf.domain == "discrete" and omega >= math.pi / tf.T:
        raise ConfigError("omega must be below the Nyquist frequency pi/T")
    x = _point(tf, omega)
    den = npoly.polyval(x, tf.den)
    if abs(den) < POLE_HIT:
        raise PoleHitError(f"evaluation at omega={omega} hits a pole")
    return complex(npoly.polyval(x, tf.num) / den)


def freqresp(tf: RationalTf, omegas) -> np.ndarray:
    omegas = np.asarray(omegas, dtype=float)
    if tf.domain == "continuous":
        x = 1j * omegas
    else:
        if np.any(omegas >= math.pi / tf.T):
            raise ConfigError("omega must be below the Nyquist frequency pi/T")
        x = np.exp(-1j * omegas * tf.T)
    den = npoly.polyval(x, tf.den)
    if np.any(np.abs(den) < POLE_HIT):
        raise PoleHitError("frequency grid hits a pole")
    return npoly.polyval(x, tf.num) / den


def bode(tf: RationalTf, omegas):
    """(magnitude in dB, unwrapped phase in degrees) on ``omegas``."""
    h = freqresp(tf, omegas)
    return 20.0 * np.log10(np.abs(h)), np.degrees(np.unwrap(np.angle(h)))


def default_grid(omega_cl: float, points: int = 400) -> np.ndarray:
    return np.logspace(-2, 3, points) * omega_cl


# --- polynomial helpers --------------------------------------------------------


def poly_roots(coeffs) -> np.ndarray:
    """Roots of an ascending polynomial; quadratics in closed form."""
    c = list(_trim(coeffs))
    if len(c) <= 1:
        return np.array([], dtype=complex)
    if len(c) == 2:
        return np.array([-c[0] / c[1]], dtype=complex)
    if len(c) == 3:
        a0, a1, a2 = c
        disc = a1 * a1 - 4 * a2 * a0
        if disc >= 0:
            # avoid cancellation between -a1 and sqrt(disc)
            q = -0.5 * (a1 + math.copysign(math.sqrt(disc), a1))
            r = [q / a2, a0 / q] if q != 0 else [0.0, 0.0]
            return np.array(sorted(r), dtype=complex)
        re, im = -a1 / (2 * a2), math.sqrt(-disc) / (2 * abs(a2))
        return np.array([complex(re, im), complex(re, -im)])
    return npoly.polyroots(c)


def conjugate_pairs(roots, rtol: float = PAIR_RTOL):
    """Split roots into real roots and conjugate pairs (upper-half member listed)."""
    roots = [complex(r) for r in roots]
    real, pairs = [], []
    used = [False] * len(roots)
    for i, r in enumerate(roots):
        if used[i]:
            continue
        used[i] = True
        scale = max(abs(r), 1e-300)
        if abs(r.imag) <= rtol * scale:
            real.append(r.real)
            continue
        j = next(
            (j for j in range(len(roots)) if not used[j] and abs(roots[j] - r.conjugate()) <= rtol * scale),
            None,
        )
        if j is None:
            raise AnalysisError(f"root {r} has no conjugate partner")
        used[j] = True
        pairs.append(r if r.imag > 0 else r.conjugate())
    return real, pairs


def damping(root: complex) -> float:
    return -root.real / abs(root)


# --- ADRC blocks -------------------------------------------------------------


def adrc_ct_to_rational(tf: ContinuousAdrcTf) -> dict:
    """C_FB, C_PF, C_FF as rational functions of s."""
    n = tf.n
    a = [1.0, *tf.alpha]
    b = [1.0, *tf.beta]
    return {
        "C_FB": RationalTf([tf.K_I * v for v in b], [0.0, *a]),
        "C_PF": RationalTf([1.0, *tf.gamma], b),
        "C_FF": RationalTf([0.0] * n + [tf.K_FF], a),
    }


def adrc_dt_to_rational(tf: DiscreteAdrcTf) -> dict:
    """C_FB (accumulator multiplied back in) and C_PF as rational functions of z^-1."""
    den_fb = npoly.polymul([1.0, *tf.alpha], [1.0, -1.0])
    return {
        "C_FB": RationalTf(tf.beta, den_fb, "discrete", tf.T),
        "C_PF": RationalTf(tf.gamma, [1.0, *tf.prefilter_den], "discrete", tf.T),
    }


def discrete_fb_response(tf: DiscreteAdrcTf, omegas) -> np.ndarray:
    """C_FB(e^{j w T}) with the accumulator evaluated in factored form.

    Keeps full relative accuracy at w*T << 1, where the expanded denominator
    suffers from cancellation.
    """
    q = np.exp(-1j * np.asarray(omegas, dtype=float) * tf.T)
    acc = -np.expm1(-1j * np.asarray(omegas, dtype=float) * tf.T)  # 1 - q
    return npoly.polyval(q, tf.beta) / (npoly.polyval(q, [1.0, *tf.alpha]) * acc)


def hf_feedback_gain(tf: ContinuousAdrcTf) -> float:
    """K_I * beta_n / alpha_n: |C_FB(jw)| ~ this / w at high frequency."""
    return tf.K_I * tf.beta[-1] / tf.alpha[-1]


# --- gang of six ---------------------------------------------------------------


@dataclass(frozen=True)
class GangOfSix:
    G_yr: RationalTf
    G_yd: RationalTf
    G_yn: RationalTf
    G_ur: RationalTf
    G_ud: RationalTf
    G_un: RationalTf
    char_poly: tuple = field(default=())

    NAMES = ("G_yr", "G_yd", "G_yn", "G_ur", "G_ud", "G_un")

    def items(self):
        return [(name, getattr(self, name)) for name in self.NAMES]


def gang_of_six(P: RationalTf, C_FB: RationalTf, C_PF: RationalTf, C_FF: RationalTf | None) -> GangOfSix:
    """The six closed-loop transfer functions from (r, d, n) to (y, u).

    Built by polynomial arithmetic; common factors are not cancelled.
    """
    blocks = [P, C_FB, C_PF] + ([C_FF] if C_FF is not None else [])
    if any(b.domain != "continuous" for b in blocks):
        raise ConfigError("gang_of_six expects continuous-time transfer functions")
    if P.relative_degree < 0:
        raise ConfigError("plant must be proper")
    mul, add = npoly.polymul, npoly.polyadd
    Np, Dp = P.num, P.den
    Nf, Df = C_FB.num, C_FB.den
    char = add(mul(Dp, Df), mul(Np, Nf))
    if np.all(char == 0):
        raise AlgebraicDegeneracyError("1 + P*C_FB vanishes identically")
    # reference path C_FF + C_FB * C_PF
    if C_FF is not None:
        Nr = add(mul(mul(C_FF.num, Df), C_PF.den), mul(mul(Nf, C_PF.num), C_FF.den))
        Dr = mul(mul(C_FF.den, Df), C_PF.den)
    else:
        Nr = mul(Nf, C_PF.num)
        Dr = mul(Df, C_PF.den)
    DpDf = mul(Dp, Df)
    return GangOfSix(
        G_yr=RationalTf(mul(mul(Np, Nr), Df), mul(Dr, char)),
        G_yd=RationalTf(mul(Np, Df), char),
        G_yn=RationalTf(DpDf, char),
        G_ur=RationalTf(mul(Nr, DpDf), mul(Dr, char)),
        G_ud=RationalTf(-mul(Np, Nf), char),
        G_un=RationalTf(-mul(Nf, Dp), char),
        char_poly=tuple(char),
    )


def near_cancellations(tf: RationalTf, rtol: float = 1e-6):
    """(pole, zero) pairs lying within ``rtol`` (relative) of each other."""
    out = []
    zeros = list(tf.zeros())
    for p in tf.poles():
        for z in zeros:
            if abs(p - z) <= rtol * max(abs(p), abs(z), 1e-300):
                out.append((complex(p), complex(z)))
    return out


# --- feedback-controller poles and zeros -------------------------------------


@dataclass(frozen=True)
class PoleZeroSet:
    """Poles/zeros of C_FB in rad/s.

    ``damping`` and ``zero_damping`` hold -Re(s)/|s| for each conjugate pair;
    ``omega_p``/``omega_z`` are corner frequencies (n=1) or natural
    frequencies of the pairs (n=2).
    """

    poles: tuple
    zeros: tuple
    damping: tuple
    zero_damping: tuple
    omega_p: float
    omega_z: float

    def as_dict(self) -> dict:
        def c(v):
            return [v.real, v.imag]

        return {
            "poles": [c(p) for p in self.poles],
            "zeros": [c(z) for z in self.zeros],
            "damping": list(self.damping),
            "zero_damping": list(self.zero_damping),
            "omega_p": self.omega_p,
            "omega_z": self.omega_z,
        }


def fb_poles_zeros(n: int, omega_cl: float, k_eso: float) -> PoleZeroSet:
    """Closed-form poles and zeros of the bandwidth-parameterized C_FB."""
    t = ContinuousTuning(omega_cl, k_eso)
    w, ke = t.omega_cl, t.k_eso
    if n == 1:
        wp = w * (1 + 2 * ke)
        wz = ke * w / (2 + ke)
        return PoleZeroSet((0j, complex(-wp)), (complex(-wz),), (), (), wp, wz)
    if n == 2:
        sp = w * complex(-(1 + 1.5 * ke), math.sqrt(3 * ke + 0.75 * ke * ke))
        g = ke * w / (3 + 6 * ke + ke * ke)
        sz = g * complex(-(1.5 + ke), math.sqrt(0.75 + 3 * ke))
        return PoleZeroSet(
            (0j, sp, sp.conjugate()),
            (sz, sz.conjugate()),
            (damping(sp),),
            (damping(sz),),
            abs(sp),
            abs(sz),
        )
    raise UnsupportedOrderError("closed-form poles/zeros exist for orders 1 and 2")


def fb_poles_zeros_numeric(tf: ContinuousAdrcTf):
    """Numerically computed (poles, zeros) of C_FB, origin pole included."""
    poles = np.concatenate([[0j], poly_roots([1.0, *tf.alpha])])
    zeros = poly_roots([1.0, *tf.beta])
    return poles, zeros


# --- critical gain from the plant magnitude asymptote -----------------------


def estimate_b0_crossover(P: RationalTf, n: int, points: int = 50) -> float:
    """b0 from the 0 dB crossover of the -20n dB/decade high-frequency asymptote.

    |P| is sampled over one decade starting two decades above the largest
    pole/zero magnitude. The measured slope must match -20n dB/decade within
    1 dB/decade; the asymptote level is then fitted with the slope fixed.
    """
    if P.domain != "continuous":
        raise ConfigError("b0 estimation expects a continuous-time plant")
    mags = [abs(r) for r in np.concatenate([P.poles(), P.zeros()])]
    base = max(mags) if mags and max(mags) > 0 else 1.0
    omegas = np.logspace(2, 3, points) * base
    x = np.log10(omegas)
    ydb = 20.0 * np.log10(np.abs(freqresp(P, omegas)))
    slope, _ = np.polyfit(x, ydb, 1)
    if abs(slope + 20.0 * n) > 1.0:
        raise WrongRelativeDegreeError(
            f"high-frequency slope {slope:.2f} dB/dec does not match {-20 * n} dB/dec"
        )
    level_db = float(np.mean(ydb + 20.0 * n * x))
    b0 = 10.0 ** (level_db / 20.0)
    return math.copysign(b0, P.num[-1] / P.den[-1])


def crossover_frequency(b0: float, n: int) -> float:
    return abs(b0) ** (1.0 / n)


def bandwidth_design(n: int, b0: float, omega_cl: float, k_eso: float) -> dict:
    """Rational C_FB, C_PF, C_FF for a bandwidth-parameterized design."""
    return adrc_ct_to_rational(continuous_tf_bandwidth(PlantSpec(n, b0), ContinuousTuning(omega_cl, k_eso)))
