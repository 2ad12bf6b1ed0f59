"""Base-learners over fixed feature maps, and empirical-risk selection
of a feature map from a finite family.

A base-learner turns one episode into a scoring function while the
feature map stays frozen. Two base-learners are provided: a nearest
centroid scorer (metric style) and a linear scorer trained with
subgradient descent on the multi-margin objective (classifier style).
A softmax cross-entropy objective for the linear scorer is included
only as a comparison objective for loss-swap experiments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import Episode, MetaSample
from .losses import ScoringFunction, empirical_margin_loss, empirical_multi_margin_loss, LOSS_KINDS

FEATURE_KINDS = ("identity", "random_linear", "random_relu")

DEFAULT_NORM_CAP = 1e6


class NumericError(RuntimeError):
    """Training produced a non-finite loss or parameter."""


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Deterministic embedding of raw inputs into R^d.

    Outputs whose L2 norm exceeds ``norm_cap`` are rescaled onto the
    cap, so downstream score bounds stay enforceable.
    """

    id: str
    kind: str
    d: int
    weight: Optional[np.ndarray] = None
    norm_cap: float = DEFAULT_NORM_CAP

    def __post_init__(self) -> None:
        if self.kind not in FEATURE_KINDS:
            raise ValueError(f"kind must be one of {FEATURE_KINDS}, got {self.kind!r}")
        if self.norm_cap <= 0:
            raise ValueError("norm_cap must be > 0")
        if self.kind == "identity":
            if self.weight is not None:
                raise ValueError("identity map takes no weight")
        else:
            w = np.asarray(self.weight, dtype=np.float64)
            if w.ndim != 2 or w.shape[0] != self.d:
                raise ValueError(f"weight must be (d={self.d}, d_raw)")
            w.setflags(write=False)
            object.__setattr__(self, "weight", w)

    def apply_matrix(self, xs: np.ndarray) -> np.ndarray:
        """Embed a batch of raw inputs, shape (m, d_raw) -> (m, d)."""
        xs = np.asarray(xs, dtype=np.float64)
        if self.kind == "identity":
            out = xs.copy()
        else:
            out = xs @ self.weight.T
            if self.kind == "random_relu":
                np.maximum(out, 0.0, out=out)
        norms = np.linalg.norm(out, axis=1)
        over = norms > self.norm_cap
        if np.any(over):
            out[over] *= (self.norm_cap / norms[over])[:, None]
        return out

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.apply_matrix(np.asarray(x, dtype=np.float64)[None, :])[0]


@dataclass(frozen=True, eq=False)
class FeatureFamily:
    """Finite set of candidate feature maps with distinct ids."""

    maps: tuple[FeatureMap, ...]

    def __post_init__(self) -> None:
        maps = tuple(self.maps)
        if not maps:
            raise ValueError("feature family must be nonempty")
        ids = [m.id for m in maps]
        if len(set(ids)) != len(ids):
            raise ValueError("feature map ids must be distinct")
        object.__setattr__(self, "maps", maps)

    def __len__(self) -> int:
        return len(self.maps)


def make_feature_family(
    d_raw: int,
    d: int,
    count: int,
    kind: str,
    seed: int,
    norm_cap: float = DEFAULT_NORM_CAP,
) -> FeatureFamily:
    """Build ``count`` feature maps of one kind.

    ``random_linear`` draws a (d, d_raw) Gaussian matrix scaled by
    1/sqrt(d_raw); ``random_relu`` follows the same linear layer with a
    componentwise max(0, .). ``identity`` requires d == d_raw.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if kind not in FEATURE_KINDS:
        raise ValueError(f"kind must be one of {FEATURE_KINDS}, got {kind!r}")
    if kind == "identity" and d != d_raw:
        raise ValueError(f"identity map requires d == d_raw, got d={d}, d_raw={d_raw}")
    rng = np.random.default_rng(seed)
    maps = []
    for i in range(count):
        if kind == "identity":
            maps.append(FeatureMap(id=f"identity-{i:02d}", kind=kind, d=d, norm_cap=norm_cap))
        else:
            w = rng.normal(0.0, 1.0, size=(d, d_raw)) / np.sqrt(d_raw)
            tag = "linear" if kind == "random_linear" else "relu"
            maps.append(FeatureMap(id=f"{tag}-{i:02d}", kind=kind, d=d, weight=w, norm_cap=norm_cap))
    return FeatureFamily(maps=tuple(maps))


# A base-learner maps (episode, feature map) to a trained scorer.
BaseLearner = Callable[[Episode, FeatureMap], ScoringFunction]


class CentroidScorer(ScoringFunction):
    """Scores by normalized negative distance to class centroids."""

    def __init__(self, centroids: np.ndarray, scale: float, b: float, phi: FeatureMap):
        self.centroids = np.asarray(centroids, dtype=np.float64)
        self.scale = float(scale)
        self.b = float(b)
        self.phi = phi

    def scores_matrix(self, xs: np.ndarray) -> np.ndarray:
        feats = self.phi.apply_matrix(xs)
        diffs = feats[:, None, :] - self.centroids[None, :, :]
        dists = np.linalg.norm(diffs, axis=2)
        return np.clip(-dists / self.scale, -self.b, self.b)

    def scores(self, x: np.ndarray) -> np.ndarray:
        return self.scores_matrix(np.asarray(x, dtype=np.float64)[None, :])[0]


class LinearScorer(ScoringFunction):
    """Linear class scores W phi(x), clamped to [-b, b]."""

    def __init__(self, W: np.ndarray, b: float, phi: FeatureMap,
                 loss_history: tuple[float, ...] = ()):
        self.W = np.asarray(W, dtype=np.float64)
        self.b = float(b)
        self.phi = phi
        self.loss_history = tuple(loss_history)

    def scores_matrix(self, xs: np.ndarray) -> np.ndarray:
        feats = self.phi.apply_matrix(xs)
        return np.clip(feats @ self.W.T, -self.b, self.b)

    def scores(self, x: np.ndarray) -> np.ndarray:
        return self.scores_matrix(np.asarray(x, dtype=np.float64)[None, :])[0]

    def to_json(self) -> dict:
        return {
            "W": self.W.tolist(),
            "b": self.b,
            "feature_map": self.phi.id,
            "loss_history": list(self.loss_history),
        }


def _training_view(episode: Episode) -> tuple[np.ndarray, np.ndarray]:
    # Train on the support portion when the episode carries a split;
    # loss evaluation elsewhere always uses the full episode.
    return episode.support()


def nearest_centroid_learn(episode: Episode, phi: FeatureMap, b: float) -> CentroidScorer:
    """Fit per-class centroids in feature space.

    score(x, y) = clamp(-||phi(x) - c_y|| / s, -b, b) where s is the
    median pairwise centroid distance (1 if degenerate). Every class
    must appear in the training portion of the episode.
    """
    if b <= 0:
        raise ValueError("b must be > 0")
    xs, ys = _training_view(episode)
    feats = phi.apply_matrix(xs)
    centroids = np.empty((episode.k, phi.d))
    for y in range(1, episode.k + 1):
        mask = ys == y
        if not np.any(mask):
            raise ValueError(f"class {y} missing from training portion; centroid undefined")
        centroids[y - 1] = feats[mask].mean(axis=0)
    if episode.k >= 2:
        iu = np.triu_indices(episode.k, k=1)
        pairwise = np.linalg.norm(centroids[iu[0]] - centroids[iu[1]], axis=1)
        scale = float(np.median(pairwise))
    else:
        scale = 0.0
    if scale <= 0.0:
        scale = 1.0
    return CentroidScorer(centroids=centroids, scale=scale, b=b, phi=phi)


def linear_multimargin_learn(
    episode: Episode,
    phi: FeatureMap,
    rho: float,
    lam: float,
    steps: int,
    step_size: float,
    b: float,
    seed: int = 0,
) -> LinearScorer:
    """Train W by subgradient descent on multi-margin loss + lam ||W||^2.

    W starts at zero so the learner is deterministic; ``seed`` is kept
    in the signature for future stochastic variants but draws nothing
    with full-batch updates. The per-step objective values are recorded
    on the returned scorer.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if rho <= 0 or lam < 0 or b <= 0:
        raise ValueError("need rho > 0, lam >= 0, b > 0")
    if episode.k < 2:
        raise ValueError("linear learner needs k >= 2")
    del seed
    xs, ys = _training_view(episode)
    feats = phi.apply_matrix(xs)
    m, d = feats.shape
    k = episode.k
    idx = np.arange(m)
    onehot_col = ys - 1

    W = np.zeros((k, d))
    history = []
    for _ in range(steps):
        with np.errstate(over="ignore", invalid="ignore"):
            scores = feats @ W.T
            true = scores[idx, onehot_col]
            hinges = np.maximum(0.0, 1.0 - (true[:, None] - scores) / rho)
            hinges[idx, onehot_col] = 0.0
            loss = float(hinges.sum() / ((k - 1) * m) + lam * float((W * W).sum()))
        if not np.isfinite(loss):
            raise NumericError("non-finite training loss in linear multi-margin learner")
        history.append(loss)
        active = (hinges > 0).astype(np.float64)
        grad = active.T @ feats
        # true-class rows collect -phi_i once per active hinge of example i
        np.subtract.at(grad, onehot_col, active.sum(axis=1)[:, None] * feats)
        grad /= rho * (k - 1) * m
        grad += 2.0 * lam * W
        W -= step_size * grad
    if not np.all(np.isfinite(W)):
        raise NumericError("non-finite weights in linear multi-margin learner")
    return LinearScorer(W=W, b=b, phi=phi, loss_history=tuple(history))


def linear_softmax_learn(
    episode: Episode,
    phi: FeatureMap,
    lam: float,
    steps: int,
    step_size: float,
    b: float,
    seed: int = 0,
) -> LinearScorer:
    """Cross-entropy comparator: gradient descent on softmax NLL + L2."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if lam < 0 or b <= 0:
        raise ValueError("need lam >= 0, b > 0")
    del seed
    xs, ys = _training_view(episode)
    feats = phi.apply_matrix(xs)
    m, d = feats.shape
    k = episode.k
    idx = np.arange(m)
    W = np.zeros((k, d))
    history = []
    for _ in range(steps):
        scores = feats @ W.T
        scores -= scores.max(axis=1, keepdims=True)
        expd = np.exp(scores)
        probs = expd / expd.sum(axis=1, keepdims=True)
        nll = -np.log(np.maximum(probs[idx, ys - 1], 1e-300))
        loss = float(nll.mean() + lam * float((W * W).sum()))
        if not np.isfinite(loss):
            raise NumericError("non-finite training loss in softmax learner")
        history.append(loss)
        resid = probs
        resid[idx, ys - 1] -= 1.0
        grad = resid.T @ feats / m + 2.0 * lam * W
        W -= step_size * grad
    return LinearScorer(W=W, b=b, phi=phi, loss_history=tuple(history))


def meta_erm_select(
    meta_sample: MetaSample,
    family: FeatureFamily,
    base_learner: BaseLearner,
    rho: float,
    loss_kind: str = "margin",
) -> tuple[FeatureMap, list[float]]:
    """Pick the feature map with minimal average empirical loss.

    Returns the chosen map and the per-map average losses in family
    order. Ties are broken by the lexicographically smallest map id.
    """
    if loss_kind not in LOSS_KINDS:
        raise ValueError(f"loss_kind must be one of {LOSS_KINDS}, got {loss_kind!r}")
    per_episode = empirical_margin_loss if loss_kind == "margin" else empirical_multi_margin_loss
    losses = []
    for phi in family.maps:
        total = 0.0
        for episode in meta_sample.episodes:
            total += per_episode(base_learner(episode, phi), episode, rho)
        losses.append(total / meta_sample.n)
    best = min(range(len(family.maps)), key=lambda i: (losses[i], family.maps[i].id))
    return family.maps[best], losses
