"""Margin, ramp loss, multi-margin surrogate, and their empirical averages.

A scoring function assigns each (input, class) pair a score in [-b, b].
The margin at a labeled point is the true-class score minus the best
competing score. The ramp loss counts a point as fully wrong at margin
<= 0, fully right at margin >= rho, and interpolates linearly between.
The multi-margin loss is the per-competitor hinge average; it upper
bounds the ramp loss via ramp(margin) <= (k-1) * multimargin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Episode, MetaSample

LOSS_KINDS = ("margin", "multimargin")


@dataclass(frozen=True)
class MarginConfig:
    """Validated holder for the margin parameter rho."""

    rho: float

    def __post_init__(self) -> None:
        if self.rho <= 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")


class ScoringFunction:
    """Bounded class-score map. Subclasses implement ``scores``.

    ``b`` is the score bound: concrete scorers clamp their outputs so
    that |score(x, y)| <= b always holds.
    """

    b: float

    def scores(self, x: np.ndarray) -> np.ndarray:
        """Scores for all k classes at a single input, shape (k,)."""
        raise NotImplementedError

    def score(self, x: np.ndarray, y: int) -> float:
        return float(self.scores(x)[y - 1])

    def scores_matrix(self, xs: np.ndarray) -> np.ndarray:
        """Scores for a batch of inputs, shape (m, k)."""
        return np.stack([self.scores(x) for x in xs])


def margin(f: ScoringFunction, x: np.ndarray, y: int, k: int) -> float:
    """True-class score minus the best competing score; lies in [-2b, 2b]."""
    if k < 2:
        raise ValueError("margin needs k >= 2 (max over competing classes is empty)")
    if not 1 <= y <= k:
        raise ValueError(f"label {y} outside 1..{k}")
    s = np.asarray(f.scores(x), dtype=np.float64)
    if s.shape[0] != k:
        raise ValueError(f"scorer returned {s.shape[0]} scores, expected {k}")
    others = np.delete(s, y - 1)
    return float(s[y - 1] - others.max())


def margin_loss(rho: float, t: float) -> float:
    """Ramp loss: 1 for t <= 0, 0 for t >= rho, linear in between."""
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    return float(min(1.0, max(0.0, 1.0 - t / rho)))


def margin_loss_array(rho: float, t: np.ndarray) -> np.ndarray:
    """Vectorized ramp loss."""
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    return np.clip(1.0 - np.asarray(t, dtype=np.float64) / rho, 0.0, 1.0)


def _margins_for_episode(f: ScoringFunction, episode: Episode) -> np.ndarray:
    if episode.k < 2:
        raise ValueError("losses need k >= 2")
    s = np.asarray(f.scores_matrix(episode.xs), dtype=np.float64)
    idx = np.arange(episode.m)
    true = s[idx, episode.ys - 1]
    masked = s.copy()
    masked[idx, episode.ys - 1] = -np.inf
    return true - masked.max(axis=1)


def empirical_margin_loss(f: ScoringFunction, episode: Episode, rho: float) -> float:
    """Mean ramp loss of the scorer over all m points of the episode."""
    return float(margin_loss_array(rho, _margins_for_episode(f, episode)).mean())


def multi_margin_loss(f: ScoringFunction, x: np.ndarray, y: int, rho: float, k: int) -> float:
    """Per-competitor hinge average at one point.

    Zero when every competing score trails the true score by at least
    rho; not clamped above, so the raw value can exceed 1 (bounded by
    1 + 2b/rho via the score bound).
    """
    if k < 2:
        raise ValueError("multi-margin loss needs k >= 2")
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    if not 1 <= y <= k:
        raise ValueError(f"label {y} outside 1..{k}")
    s = np.asarray(f.scores(x), dtype=np.float64)
    gaps = s[y - 1] - s
    hinges = np.maximum(0.0, 1.0 - gaps / rho)
    hinges[y - 1] = 0.0
    return float(hinges.sum() / (k - 1))


def empirical_multi_margin_loss(f: ScoringFunction, episode: Episode, rho: float) -> float:
    """Mean multi-margin loss over all m points of the episode."""
    if episode.k < 2:
        raise ValueError("losses need k >= 2")
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    s = np.asarray(f.scores_matrix(episode.xs), dtype=np.float64)
    idx = np.arange(episode.m)
    true = s[idx, episode.ys - 1]
    hinges = np.maximum(0.0, 1.0 - (true[:, None] - s) / rho)
    hinges[idx, episode.ys - 1] = 0.0
    return float((hinges.sum(axis=1) / (episode.k - 1)).mean())


def average_empirical_loss(
    meta_sample: MetaSample,
    algorithm: Callable[[Episode], ScoringFunction],
    rho: float,
    loss_kind: str = "margin",
) -> float:
    """Mean per-episode empirical loss, each scorer trained on its episode."""
    if loss_kind not in LOSS_KINDS:
        raise ValueError(f"loss_kind must be one of {LOSS_KINDS}, got {loss_kind!r}")
    per_episode = empirical_margin_loss if loss_kind == "margin" else empirical_multi_margin_loss
    total = 0.0
    for episode in meta_sample.episodes:
        total += per_episode(algorithm(episode), episode, rho)
    return total / meta_sample.n
