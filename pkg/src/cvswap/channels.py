"""Lossy two-mode squeezed states and the effective-loss analysis of swapping.

A two-mode squeezed state with squeezing ``r`` whose modes pass pure-loss
channels of transmittivities ``tau_a`` and ``tau_b`` has simple-form
parameters ``a, b = 1 + tau_{a,b} (cosh 2r - 1)`` and
``c = sqrt(tau_a tau_b) sinh 2r``. Conversely every entangled simple-form
state is such a state for some effective ``(r_eff, tau_a_eff, tau_b_eff)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateState, NotEntangled
from .gaussian import SimpleFormParams, is_separable, require_physical
from .swap import swap_optimal


@dataclass(frozen=True)
class ChannelSpec:
    """Input squeezing and arm transmittivities of a lossy link."""

    r: float
    tau_a: float
    tau_b: float

    def __post_init__(self):
        if not self.r >= 0:
            raise ValueError(f"squeezing must be non-negative, got {self.r}")
        for name in ("tau_a", "tau_b"):
            t = getattr(self, name)
            if not 0.0 <= t <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {t}")


@dataclass(frozen=True)
class EffectiveDecomposition:
    """Effective squeezing and transmittivities reproducing a simple-form state."""

    r_eff: float
    tau_a_eff: float
    tau_b_eff: float

    @property
    def cosh_2r(self) -> float:
        return float(np.cosh(2 * self.r_eff))

    @property
    def total_transmittivity(self) -> float:
        return self.tau_a_eff * self.tau_b_eff

    def as_spec(self) -> ChannelSpec:
        return ChannelSpec(self.r_eff, self.tau_a_eff, self.tau_b_eff)


def fiber_transmittivity(length: float) -> float:
    """``exp(-l / l_a)`` for a fibre of ``length`` absorption lengths."""
    return float(np.exp(-length))


def split_transmittivities(total_loss: float, split: float):
    """Per-segment arm transmittivities of the swapping scheme.

    Each copy bridges half of ``total_loss`` (in absorption lengths); a
    fraction ``split`` of that half goes to the first arm. With ``split = 0``
    the first mode never leaves its station.

    Returns:
        tuple: ``(tau_a, tau_b)`` with ``tau_a * tau_b = exp(-total_loss / 2)``
    """
    if total_loss < 0:
        raise ValueError("total loss must be non-negative")
    if not 0.0 <= split <= 1.0:
        raise ValueError("split must lie in [0, 1]")
    half = total_loss / 2
    return fiber_transmittivity(split * half), fiber_transmittivity((1 - split) * half)


def lossy_tmss(spec: ChannelSpec) -> SimpleFormParams:
    """Simple-form parameters of a two-mode squeezed state after arm losses."""
    ch = np.cosh(2 * spec.r)
    return SimpleFormParams(
        float(1 + spec.tau_a * (ch - 1)),
        float(1 + spec.tau_b * (ch - 1)),
        float(np.sqrt(spec.tau_a * spec.tau_b) * np.sinh(2 * spec.r)),
    )


def direct_state(spec: ChannelSpec) -> SimpleFormParams:
    """Direct transmission over twice the per-copy distance of ``spec``.

    Doubling the distance squares each arm transmittivity.
    """
    return lossy_tmss(ChannelSpec(spec.r, spec.tau_a**2, spec.tau_b**2))


def swap_lossy(spec: ChannelSpec) -> SimpleFormParams:
    """Closed-form output of optimal swapping of two copies of ``lossy_tmss(spec)``."""
    ta, tb, r = spec.tau_a, spec.tau_b, spec.r
    c_opt = ta * tb * np.sinh(2 * r) ** 2 / (2 - ta - tb + (ta + tb) * np.cosh(2 * r))
    sh2 = np.sinh(r) ** 2
    return SimpleFormParams(
        float(1 + 2 * ta * sh2 - c_opt),
        float(1 + 2 * tb * sh2 - c_opt),
        float(c_opt),
    )


def _arccosh_from_excess(y: float) -> float:
    # arccosh(1 + y) without cancellation for small y
    return float(np.log1p(y + np.sqrt(y * (y + 2))))


def effective_decomposition(p) -> EffectiveDecomposition:
    """Write an entangled simple-form state as a lossy two-mode squeezed state.

    Raises:
        NotEntangled: for separable input (no valid effective squeezing)
        DegenerateState: if ``(a-1)(b-1) = 0`` while ``c != 0``
    """
    if not isinstance(p, SimpleFormParams):
        p = SimpleFormParams(*map(float, p))
    require_physical(p)
    if is_separable(p):
        raise NotEntangled(f"{p} is separable; it is not a lossy two-mode squeezed state")
    a, b, c = p.a, p.b, abs(p.c)
    prod = (a - 1) * (b - 1)
    if prod <= 0:
        raise DegenerateState(f"(a-1)(b-1) = {prod} with c = {c}")
    gap = c * c - prod
    # cosh(2 r_eff) - 1 = 2 (a-1)(b-1) / (c^2 - (a-1)(b-1))
    excess = 2 * prod / gap
    r_eff = _arccosh_from_excess(excess) / 2
    return EffectiveDecomposition(r_eff, float((a - 1) / excess), float((b - 1) / excess))


def effective_params_after_swap(spec: ChannelSpec) -> EffectiveDecomposition:
    """Closed-form effective parameters of the optimally swapped lossy states.

    Raises:
        NotEntangled: if the swapped state is separable
        DegenerateState: at ``r = 0`` or when a denominator vanishes
    """
    ta, tb, r = spec.tau_a, spec.tau_b, spec.r
    if is_separable(swap_lossy(spec)):
        raise NotEntangled(f"swapped state for {spec} is separable")
    ch2, ch4 = np.cosh(2 * r), np.cosh(4 * r)
    sh2 = np.sinh(r) ** 2
    s = ta + tb
    num = 2 * (ta - ta**2 + tb - tb**2) * ch2 + ta * tb * ch4 + 7 * ta * tb - 6 * s + 2 * (ta**2 + tb**2) + 4
    den = 2 * (s - 1) * (s * ch2 - s + 2)
    da = 2 * ta + tb - tb * ch2 - 2
    db = -ch2 * ta + ta + 2 * tb - 2
    if den == 0 or da == 0 or db == 0:
        raise DegenerateState(f"closed forms are singular at {spec}")
    cosh_eff = num / den
    tau_a_eff = -2 * ta * (s - 1) * sh2 / da
    tau_b_eff = -2 * tb * (s - 1) * sh2 / db
    r_eff = _arccosh_from_excess(max(cosh_eff - 1, 0.0)) / 2
    return EffectiveDecomposition(float(r_eff), float(tau_a_eff), float(tau_b_eff))


def total_effective_transmittivity(spec: ChannelSpec) -> float:
    """Closed-form product ``tau_a_eff * tau_b_eff`` for the swapped state.

    Raises:
        NotEntangled: if the swapped state is separable
    """
    ta, tb, r = spec.tau_a, spec.tau_b, spec.r
    if is_separable(swap_lossy(spec)):
        raise NotEntangled(f"swapped state for {spec} is separable")
    x = np.cosh(2 * r) - 1
    num = 4 * ta * tb * (ta + tb - 1) ** 2 * np.sinh(r) ** 4
    den = (x * ta + 2 - 2 * tb) * (x * tb + 2 - 2 * ta)
    return float(num / den)


def direct_transmittivity(spec: ChannelSpec) -> float:
    """Total transmittivity of direct transmission over the same distance."""
    return spec.tau_a**2 * spec.tau_b**2


def swap_via_pipeline(spec: ChannelSpec) -> SimpleFormParams:
    return swap_optimal(lossy_tmss(spec))
