"""Monte Carlo phase-space oracle for the swapping protocol.

Draws quadrature records of two independent copies of the input state,
mixes modes 2 and 3 on a 50:50 beam splitter, reads ``(q_u, p_v)`` as the
Bell record and applies the gain-weighted displacements event by event.
Nothing here uses a closed-form result for the output covariance matrix;
the only inputs are the input covariance matrix and the gains.

Randomness comes from Philox (a counter-based generator). Batch ``k``
draws from the ``k``-th child of ``SeedSequence(seed)``, so results are
reproducible and batches are independent streams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamples
from .gaussian import Params, require_physical
from .swap import GainSetting

MIN_SAMPLES = 10_000
_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class OracleConfig:
    """Sample budget and RNG seed.

    Args:
        samples: total number of events
        seed: root seed; recorded in every estimate
        batch: events per batch (one RNG stream each)
    """

    samples: int = 1_000_000
    seed: int = 0
    batch: int = 100_000

    def __post_init__(self):
        if self.samples < 2 or self.batch < 1:
            raise InsufficientSamples(f"need at least 2 samples, got {self.samples}")

    def batch_sizes(self):
        full, rest = divmod(self.samples, self.batch)
        return [self.batch] * full + ([rest] if rest else [])

    def streams(self):
        children = np.random.SeedSequence(self.seed).spawn(len(self.batch_sizes()))
        return [np.random.Generator(np.random.Philox(c)) for c in children]


class StreamingMoments:
    """Running mean and co-moment matrix with pairwise merging.

    Batches are combined with the parallel update of Chan, Golub and
    LeVeque, which stays accurate when batch means differ.
    """

    def __init__(self, dim: int):
        self.n = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros((dim, dim))

    def update(self, x: np.ndarray) -> "StreamingMoments":
        other = StreamingMoments(self.mean.size)
        other.n = x.shape[0]
        other.mean = x.mean(axis=0)
        d = x - other.mean
        other.m2 = d.T @ d
        return self.merge(other)

    def merge(self, other: "StreamingMoments") -> "StreamingMoments":
        if other.n == 0:
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        self.m2 = self.m2 + other.m2 + np.outer(delta, delta) * self.n * other.n / n
        self.mean = self.mean + delta * other.n / n
        self.n = n
        return self

    @property
    def cov(self) -> np.ndarray:
        return self.m2 / (self.n - 1)


@dataclass(frozen=True)
class EnsembleEstimate:
    """Monte Carlo estimate of the output moments.

    Attributes:
        cm, mean: estimated covariance matrix and first moments
        cm_se, mean_se: standard errors of each entry
        samples, seed: budget and root seed used
    """

    cm: np.ndarray
    mean: np.ndarray
    cm_se: np.ndarray
    mean_se: np.ndarray
    samples: int
    seed: int

    def z_scores(self, cm_ref) -> np.ndarray:
        return (self.cm - np.asarray(cm_ref)) / self.cm_se


@dataclass(frozen=True)
class ConditionalEstimate:
    """Estimated conditional moments with batch-means standard errors."""

    cm: np.ndarray
    mean: np.ndarray
    cm_se: np.ndarray
    mean_se: np.ndarray
    samples: int
    seed: int


def _check_budget(cfg: OracleConfig, minimum: int):
    if cfg.samples < minimum:
        raise InsufficientSamples(f"{cfg.samples} samples < required {minimum}")


def _draw_records(p, rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` phase-space points of the 8-mode input, ordered (q1, p1, ..., q4, p4)."""
    chol = np.linalg.cholesky(p.cm())
    z = rng.standard_normal((n, 8))
    out = np.empty((n, 8))
    out[:, :4] = z[:, :4] @ chol.T
    out[:, 4:] = z[:, 4:] @ chol.T
    return out


def _bell_and_outputs(x: np.ndarray):
    # 50:50 beam splitter on modes 2, 3: q_u = (q2 - q3)/sqrt2, p_v = (p2 + p3)/sqrt2
    qu = (x[:, 2] - x[:, 4]) / _SQRT2
    pv = (x[:, 3] + x[:, 5]) / _SQRT2
    return qu, pv, x[:, [0, 1, 6, 7]]


def sample_ensemble(p: Params, gains: GainSetting, cfg: OracleConfig, min_samples: int = MIN_SAMPLES) -> EnsembleEstimate:
    """Estimate the ensemble output moments event by event.

    Raises:
        NonPhysicalState: if ``p`` is not physical
        InsufficientSamples: if ``cfg.samples < min_samples``
    """
    p = require_physical(p)
    _check_budget(cfg, min_samples)
    acc = StreamingMoments(4)
    for rng, n in zip(cfg.streams(), cfg.batch_sizes()):
        x = _draw_records(p, rng, n)
        qu, pv, modes = _bell_and_outputs(x)
        out = np.empty_like(modes)
        out[:, 0] = modes[:, 0] - _SQRT2 * gains.g1q * qu
        out[:, 1] = modes[:, 1] + _SQRT2 * gains.g1p * pv
        out[:, 2] = modes[:, 2] + _SQRT2 * gains.g4q * qu
        out[:, 3] = modes[:, 3] + _SQRT2 * gains.g4p * pv
        acc.update(out)
    cov = acc.cov
    d = np.diag(cov)
    # standard error of a sample covariance of Gaussian data
    cm_se = np.sqrt((np.outer(d, d) + cov * cov) / (acc.n - 1))
    mean_se = np.sqrt(d / acc.n)
    return EnsembleEstimate(cov, acc.mean.copy(), cm_se, mean_se, acc.n, cfg.seed)


def _condition(joint_mean, joint_cov, outcome, disp):
    keep, meas = slice(0, 4), slice(4, 6)
    s_km = joint_cov[keep, meas]
    reg = np.linalg.solve(joint_cov[meas, meas], s_km.T).T
    cm = joint_cov[keep, keep] - reg @ s_km.T
    mean = joint_mean[keep] + reg @ (outcome - joint_mean[meas]) + disp @ outcome
    return (cm + cm.T) / 2, mean


def sample_conditional(
    p: Params,
    outcome,
    cfg: OracleConfig,
    gains: GainSetting | None = None,
    min_samples: int = MIN_SAMPLES,
) -> ConditionalEstimate:
    """Estimate the conditional state for one Bell record.

    The joint moments of ``(q1, p1, q4, p4, q_u, p_v)`` are estimated from
    samples and the empirical Gaussian is conditioned on ``outcome``.
    Standard errors come from the spread of per-batch estimates, so at
    least two batches are required.
    """
    p = require_physical(p)
    _check_budget(cfg, min_samples)
    outcome = np.asarray(outcome, dtype=float)
    disp = (gains or GainSetting.per_mode(0.0, 0.0)).displacement_matrix()
    total = StreamingMoments(6)
    per_batch = []
    for rng, n in zip(cfg.streams(), cfg.batch_sizes()):
        x = _draw_records(p, rng, n)
        qu, pv, modes = _bell_and_outputs(x)
        joint = np.column_stack([modes, qu, pv])
        part = StreamingMoments(6).update(joint)
        per_batch.append(_condition(part.mean, part.cov, outcome, disp))
        total.merge(part)
    if len(per_batch) < 2:
        raise InsufficientSamples("conditional estimate needs at least two batches")
    cm, mean = _condition(total.mean, total.cov, outcome, disp)
    k = len(per_batch)
    cms = np.array([b[0] for b in per_batch])
    means = np.array([b[1] for b in per_batch])
    return ConditionalEstimate(
        cm, mean, cms.std(axis=0, ddof=1) / np.sqrt(k), means.std(axis=0, ddof=1) / np.sqrt(k), total.n, cfg.seed
    )


def sample_conditional_window(p: Params, outcome, cfg: OracleConfig, width: float = 0.05):
    """Rejection estimate: keep events whose record lies within ``width`` of ``outcome``.

    A coarse secondary check of :func:`sample_conditional`; biased by
    ``O(width**2)``.

    Returns:
        tuple: ``(cm, mean, accepted)``
    """
    p = require_physical(p)
    outcome = np.asarray(outcome, dtype=float)
    acc = StreamingMoments(4)
    for rng, n in zip(cfg.streams(), cfg.batch_sizes()):
        x = _draw_records(p, rng, n)
        qu, pv, modes = _bell_and_outputs(x)
        hit = (np.abs(qu - outcome[0]) < width) & (np.abs(pv - outcome[1]) < width)
        if hit.any():
            acc.update(modes[hit])
    if acc.n < 2:
        raise InsufficientSamples("no events fell inside the acceptance window")
    return acc.cov, acc.mean.copy(), acc.n
