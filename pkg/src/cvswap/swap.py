"""Entanglement swapping of two identical two-mode Gaussian states.

Modes 1, 2 carry the first copy and modes 3, 4 the second. A Bell
measurement on modes 2 and 3 (50:50 beam splitter, homodyne of ``q_u`` and
``p_v``) leaves modes 1 and 4 in a conditional state, which is then
displaced by gain-weighted copies of the measurement record.

Two routes are provided and must agree: closed forms on the standard-form
parameters (:func:`conditional_cm`, :func:`ensemble_cm`) and the
constructive 8x8 route (:func:`beam_splitter_cm`,
:func:`condition_on_homodyne`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NonPhysicalState, NotEntangled, SingularConditioning
from .gaussian import (
    Params,
    SimpleFormParams,
    StandardFormParams,
    TwoModeState,
    as_standard,
    is_separable,
    require_physical,
)

SQRT2 = np.sqrt(2.0)

# indices in the 8-vector (q1, p1, q2, p2, q3, p3, q4, p4) after the beam
# splitter, where slots 2..5 hold (q_u, p_u, q_v, p_v)
_KEEP = [0, 1, 6, 7]
_MEASURED = [2, 5]


@dataclass(frozen=True)
class GainSetting:
    """Displacement gains applied to modes 1 and 4.

    The output quadratures are ``q1 - sqrt(2) g1q q_u``,
    ``p1 + sqrt(2) g1p p_v``, ``q4 + sqrt(2) g4q q_u`` and
    ``p4 + sqrt(2) g4p p_v``. Build instances with the classmethods.
    """

    g1q: float
    g1p: float
    g4q: float
    g4p: float
    kind: str = "per_quadrature"

    def __post_init__(self):
        if not np.all(np.isfinite([self.g1q, self.g1p, self.g4q, self.g4p])):
            raise ValueError("gains must be finite")

    @classmethod
    def symmetric(cls, g: float) -> "GainSetting":
        return cls(g, g, g, g, "symmetric")

    @classmethod
    def per_mode(cls, g1: float, g4: float) -> "GainSetting":
        return cls(g1, g1, g4, g4, "per_mode")

    @classmethod
    def per_quadrature(cls, g1q, g1p, g4q, g4p) -> "GainSetting":
        return cls(g1q, g1p, g4q, g4p, "per_quadrature")

    @classmethod
    def one_sided(cls, g: float, mode: int = 4) -> "GainSetting":
        """Displace only ``mode`` (1 or 4); the other gain is fixed to 0."""
        if mode == 1:
            return cls(g, g, 0.0, 0.0, "one_sided")
        if mode == 4:
            return cls(0.0, 0.0, g, g, "one_sided")
        raise ValueError(f"mode must be 1 or 4, got {mode}")

    @property
    def g1(self) -> float:
        if self.g1q != self.g1p:
            raise ValueError("gain on mode 1 is quadrature dependent")
        return self.g1q

    @property
    def g4(self) -> float:
        if self.g4q != self.g4p:
            raise ValueError("gain on mode 4 is quadrature dependent")
        return self.g4q

    def displacement_matrix(self) -> np.ndarray:
        """4x2 matrix mapping ``(q_u, p_v)`` to the output displacement."""
        return SQRT2 * np.array(
            [
                [-self.g1q, 0.0],
                [0.0, self.g1p],
                [self.g4q, 0.0],
                [0.0, self.g4p],
            ]
        )


class BellOutcome(NamedTuple):
    qu: float
    pv: float


def _checked(p: Params) -> StandardFormParams:
    sp = require_physical(p)
    if sp.a + sp.b <= 0:
        raise NonPhysicalState("a + b must be positive")
    return sp


def _simple(p) -> SimpleFormParams:
    if isinstance(p, StandardFormParams):
        p = p.to_simple()
    elif not isinstance(p, SimpleFormParams):
        p = SimpleFormParams(*map(float, p))
    _checked(p)
    return p


# constructive route -------------------------------------------------------


def four_mode_input_cm(p: Params) -> np.ndarray:
    """Block-diagonal 8x8 covariance matrix of two copies of the input."""
    cm = as_standard(p).cm()
    out = np.zeros((8, 8))
    out[:4, :4] = cm
    out[4:, 4:] = cm
    return out


def beam_splitter_symplectic() -> np.ndarray:
    """Symplectic map ``(q2, p2, q3, p3) -> (q_u, p_u, q_v, p_v)`` embedded in 8x8.

    ``a_u = (a_2 - a_3) / sqrt(2)`` and ``a_v = (a_2 + a_3) / sqrt(2)``.
    """
    s = np.eye(8)
    h = 1 / SQRT2
    bs = np.array(
        [
            [h, 0, -h, 0],
            [0, h, 0, -h],
            [h, 0, h, 0],
            [0, h, 0, h],
        ]
    )
    s[2:6, 2:6] = bs
    return s


def beam_splitter_cm(four_mode_cm) -> np.ndarray:
    """Covariance matrix after the 50:50 beam splitter on modes 2 and 3."""
    s = beam_splitter_symplectic()
    cm = np.asarray(four_mode_cm, dtype=float)
    if cm.shape != (8, 8):
        raise ValueError(f"expected an 8x8 covariance matrix, got {cm.shape}")
    return s @ cm @ s.T


@dataclass(frozen=True)
class HomodyneResult:
    """Conditional state of modes 1 and 4 and the law of the Bell record.

    Attributes:
        state: conditional state (mean is zero unless an outcome was given)
        measured_cm: 2x2 covariance of ``(q_u, p_v)``
        measured_mean: mean of ``(q_u, p_v)``
        gain: 4x2 regression matrix of the output mean on the record
    """

    state: TwoModeState
    measured_cm: np.ndarray
    measured_mean: np.ndarray
    gain: np.ndarray

    def outcome_density(self, outcome) -> float:
        d = np.asarray(outcome, dtype=float) - self.measured_mean
        inv = np.linalg.inv(self.measured_cm)
        norm = 2 * np.pi * np.sqrt(np.linalg.det(self.measured_cm))
        return float(np.exp(-0.5 * d @ inv @ d) / norm)


def condition_on_homodyne(bs_cm, outcome=None, bs_mean=None) -> HomodyneResult:
    """Gaussian conditioning on the homodyne record ``(q_u, p_v)``.

    The unmeasured quadratures ``p_u`` and ``q_v`` are marginalised out.

    Args:
        bs_cm: 8x8 covariance matrix after the beam splitter
        outcome: measured ``(q_u, p_v)``; ``None`` gives zero conditional mean
        bs_mean: 8-vector of first moments after the beam splitter

    Raises:
        SingularConditioning: if the measured covariance block is singular
    """
    cm = np.asarray(bs_cm, dtype=float)
    mean = np.zeros(8) if bs_mean is None else np.asarray(bs_mean, dtype=float)
    s_kk = cm[np.ix_(_KEEP, _KEEP)]
    s_km = cm[np.ix_(_KEEP, _MEASURED)]
    s_mm = cm[np.ix_(_MEASURED, _MEASURED)]
    if abs(np.linalg.det(s_mm)) <= 1e-12 * max(1.0, np.abs(s_mm).max()) ** 2:
        raise SingularConditioning("measured quadratures have singular covariance")
    reg = np.linalg.solve(s_mm, s_km.T).T
    cond = s_kk - reg @ s_km.T
    cond = (cond + cond.T) / 2
    mu_m = mean[_MEASURED]
    cond_mean = mean[_KEEP].copy()
    if outcome is not None:
        cond_mean = cond_mean + reg @ (np.asarray(outcome, dtype=float) - mu_m)
    return HomodyneResult(TwoModeState(cond, cond_mean), s_mm, mu_m, reg)


def bell_measurement(p: Params, outcome=None) -> HomodyneResult:
    """Run the constructive route for two copies of ``p``."""
    _checked(p)
    return condition_on_homodyne(beam_splitter_cm(four_mode_input_cm(p)), outcome)


# closed forms ----------------------------------------------------------


def conditional_cm(p: Params) -> np.ndarray:
    """Covariance matrix of modes 1 and 4 after the Bell measurement.

    Independent of the measurement record.
    """
    p = _checked(p)
    s = p.a + p.b
    kp, km = p.c_plus**2 / s, p.c_minus**2 / s
    return np.array(
        [
            [p.a - kp, 0.0, kp, 0.0],
            [0.0, p.a - km, 0.0, -km],
            [kp, 0.0, p.b - kp, 0.0],
            [0.0, -km, 0.0, p.b - km],
        ]
    )


def conditional_mean(p: Params, outcome, gains: GainSetting) -> np.ndarray:
    """First moments of the displaced conditional state for one Bell record.

    Obtained by conditioning the 8-mode Gaussian on the record and adding
    the gain-weighted displacements.
    """
    outcome = np.asarray(outcome, dtype=float)
    res = bell_measurement(p, outcome)
    return res.state.mean + gains.displacement_matrix() @ outcome


def linear_coefficients(p: Params, outcome, gains: GainSetting) -> np.ndarray:
    """Closed-form coefficients of the linear terms in the conditional Wigner exponent.

    These equal ``inv(conditional_cm) @ conditional_mean`` and serve as a
    cross-check of :func:`conditional_mean`. Only phase-independent gains
    (``g1q == g1p``, ``g4q == g4p``) are supported.
    """
    p = _checked(p)
    a, b, cp, cm = p.a, p.b, p.c_plus, p.c_minus
    g1, g4 = gains.g1, gains.g4
    qu, pv = outcome
    s = a + b
    dp, dm = s * (a * b - cp**2), s * (a * b - cm**2)
    return SQRT2 * np.array(
        [
            -qu * (g1 * b * b + (a * g1 - cp) * b + cp**2 * (g4 - g1)) / dp,
            pv * (g1 * b * b + (cm + a * g1) * b + cm**2 * (g4 - g1)) / dm,
            qu * (g4 * a * a + (b * g4 - cp) * a + cp**2 * (g1 - g4)) / dp,
            pv * (g4 * a * a + (cm + b * g4) * a + cm**2 * (g1 - g4)) / dm,
        ]
    )


def ensemble_cm(p: Params, gains: GainSetting) -> np.ndarray:
    """Covariance matrix of the output averaged over all Bell records."""
    p = _checked(p)
    a, b, cp, cm = p.a, p.b, p.c_plus, p.c_minus
    s = a + b
    g1q, g1p, g4q, g4p = gains.g1q, gains.g1p, gains.g4q, gains.g4p
    xq = cp * (g1q + g4q) - g1q * g4q * s
    xp = cm * (g1p + g4p) + g1p * g4p * s
    return np.array(
        [
            [a + s * g1q**2 - 2 * cp * g1q, 0.0, xq, 0.0],
            [0.0, a + s * g1p**2 + 2 * cm * g1p, 0.0, xp],
            [xq, 0.0, b + s * g4q**2 - 2 * cp * g4q, 0.0],
            [0.0, xp, 0.0, b + s * g4p**2 + 2 * cm * g4p],
        ]
    )


def ensemble_state(p: Params, gains: GainSetting) -> TwoModeState:
    return TwoModeState(ensemble_cm(p, gains))


def optimal_gains(p) -> GainSetting:
    """Phase-independent gains ``g1 = g4 = c / (a + b)`` that cancel the displacement."""
    p = _simple(p)
    g = p.c / (p.a + p.b)
    return GainSetting.per_mode(g, g)


def optimal_gains_general(p: Params) -> GainSetting:
    """Quadrature-dependent gains that cancel the displacement for any standard form."""
    p = _checked(p)
    s = p.a + p.b
    gq, gp = p.c_plus / s, -p.c_minus / s
    return GainSetting.per_quadrature(gq, gp, gq, gp)


def swap_optimal(p) -> SimpleFormParams:
    """Output parameters of optimal swapping of two simple-form states."""
    p = _simple(p)
    k = p.c**2 / (p.a + p.b)
    return SimpleFormParams(p.a - k, p.b - k, k)


def critical_gain_path(p, t: float) -> GainSetting:
    """Point ``t`` on the line of gains along which the output log-negativity is critical.

    Raises:
        NotEntangled: if the input is separable
    """
    p = _simple(p)
    if is_separable(p):
        raise NotEntangled(f"{p} is separable")
    a, b, c = p.a, p.b, p.c
    g = c / (a + b)
    d = a * a - b * b
    return GainSetting.per_mode(g + (d + np.sqrt(4 * c**4 + d * d)) * t, g - 2 * c * c * t)


def critical_path_direction(p) -> np.ndarray:
    """Unit tangent of :func:`critical_gain_path` in the ``(g1, g4)`` plane."""
    p = _simple(p)
    d = p.a**2 - p.b**2
    v = np.array([d + np.sqrt(4 * p.c**4 + d * d), -2 * p.c**2])
    return v / np.linalg.norm(v)
