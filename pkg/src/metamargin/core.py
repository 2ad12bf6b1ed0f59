"""Domain types and seeded samplers for synthetic task environments.

The sampling hierarchy is: an environment is a distribution over
classification tasks, a task is a distribution over labeled examples,
and a meta-sample is a collection of episodes drawn from independently
sampled tasks. Tasks are isotropic Gaussian mixtures around per-task
class prototypes; the prototypes themselves are drawn from a centered
Gaussian prior whose scale is set by the environment.

Every sampler is a pure function of (spec, seed). Child seeds are
derived from a master seed with a splitmix64-style mixer so that
results do not depend on execution order or parallelism degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

MIN_NOISE_SIGMA = 1e-12

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(z: int) -> int:
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class SeedPolicy:
    """Derives independent child seeds from a master seed.

    child(i) is a strong 64-bit mix of (master_seed, i), so identical
    (master_seed, index) pairs always yield identical child streams,
    independent of the order units of work are executed in.
    """

    master_seed: int

    def child(self, index: int) -> int:
        if index < 0:
            raise ValueError(f"unit index must be >= 0, got {index}")
        return _splitmix64(_splitmix64(self.master_seed & _MASK64) ^ (index & _MASK64))

    def rng(self, index: int) -> np.random.Generator:
        return np.random.default_rng(self.child(index))


def _as_readonly(a: np.ndarray) -> np.ndarray:
    out = np.asarray(a, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class LabeledExample:
    """One labeled point: raw input vector x and class index y in 1..k."""

    x: np.ndarray
    y: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", _as_readonly(self.x))
        if self.x.ndim != 1:
            raise ValueError("x must be a 1-D vector")
        if not np.all(np.isfinite(self.x)):
            raise ValueError("x must be finite")
        if int(self.y) < 1:
            raise ValueError(f"label must be >= 1, got {self.y}")
        object.__setattr__(self, "y", int(self.y))


@dataclass(frozen=True, eq=False)
class Episode:
    """m labeled examples from one task, stored as arrays.

    xs has shape (m, d_raw) and ys holds integer labels in 1..k. If
    ``split`` is set to a support size s, the first k*s examples are
    the support portion and the remaining k*q are query, with
    m = k*(s+q).
    """

    xs: np.ndarray
    ys: np.ndarray
    k: int
    split: Optional[int] = None

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=np.float64)
        ys = np.asarray(self.ys, dtype=np.int64)
        if xs.ndim != 2 or ys.ndim != 1 or xs.shape[0] != ys.shape[0]:
            raise ValueError("xs must be (m, d) and ys must be (m,)")
        if xs.shape[0] < 1:
            raise ValueError("episode must contain at least one example")
        if not np.all(np.isfinite(xs)):
            raise ValueError("episode inputs must be finite")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if ys.min() < 1 or ys.max() > self.k:
            raise ValueError(f"labels must lie in 1..{self.k}")
        if self.split is not None:
            s = int(self.split)
            m = xs.shape[0]
            if s < 1 or self.k * s >= m:
                raise ValueError(f"support size s={s} requires k*s < m={m}")
            rem = m - self.k * s
            if rem % self.k != 0:
                raise ValueError(f"m={m} must equal k*(s+q) for integer q >= 1")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def m(self) -> int:
        return self.xs.shape[0]

    @property
    def examples(self) -> list[LabeledExample]:
        return [LabeledExample(x, int(y)) for x, y in zip(self.xs, self.ys)]

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """(xs, ys) of the support portion; the full episode if unsplit."""
        if self.split is None:
            return self.xs, self.ys
        cut = self.k * self.split
        return self.xs[:cut], self.ys[:cut]

    def query(self) -> tuple[np.ndarray, np.ndarray]:
        """(xs, ys) of the query portion; the full episode if unsplit."""
        if self.split is None:
            return self.xs, self.ys
        cut = self.k * self.split
        return self.xs[cut:], self.ys[cut:]


@dataclass(frozen=True, eq=False)
class MetaSample:
    """n episodes, one per independently drawn task, with shared m and k."""

    episodes: tuple[Episode, ...]

    def __post_init__(self) -> None:
        eps = tuple(self.episodes)
        if len(eps) < 1:
            raise ValueError("meta-sample needs at least one episode")
        m0, k0 = eps[0].m, eps[0].k
        for e in eps:
            if e.m != m0 or e.k != k0:
                raise ValueError("all episodes must share identical m and k")
        object.__setattr__(self, "episodes", eps)

    @property
    def n(self) -> int:
        return len(self.episodes)

    @property
    def m(self) -> int:
        return self.episodes[0].m

    @property
    def k(self) -> int:
        return self.episodes[0].k


@dataclass(frozen=True, eq=False)
class TaskSpec:
    """A task: Gaussian clusters around k prototypes with class weights."""

    prototypes: np.ndarray
    noise_sigma: float
    class_probs: np.ndarray

    def __post_init__(self) -> None:
        protos = _as_readonly(self.prototypes)
        if protos.ndim != 2:
            raise ValueError("prototypes must be a (k, d_raw) array")
        probs = _as_readonly(self.class_probs)
        if probs.ndim != 1 or probs.shape[0] != protos.shape[0]:
            raise ValueError("class_probs must have one entry per prototype")
        if np.any(probs < 0) or abs(float(probs.sum()) - 1.0) > 1e-9:
            raise ValueError("class_probs must be nonnegative and sum to 1")
        sigma = max(float(self.noise_sigma), MIN_NOISE_SIGMA)
        object.__setattr__(self, "prototypes", protos)
        object.__setattr__(self, "class_probs", probs)
        object.__setattr__(self, "noise_sigma", sigma)

    @property
    def k(self) -> int:
        return self.prototypes.shape[0]

    @property
    def d_raw(self) -> int:
        return self.prototypes.shape[1]


@dataclass(frozen=True)
class EnvironmentSpec:
    """Distribution over tasks: prototype prior scale plus noise level."""

    d_raw: int
    k: int
    prototype_scale: float
    noise_sigma: float
    balanced: bool = True

    def __post_init__(self) -> None:
        if self.d_raw < 1 or self.k < 1:
            raise ValueError("d_raw and k must be positive integers")
        if self.prototype_scale < 0:
            raise ValueError("prototype_scale must be >= 0")
        if self.noise_sigma <= 0:
            raise ValueError("noise_sigma must be > 0")

    def to_json(self) -> dict:
        return {
            "d_raw": self.d_raw,
            "k": self.k,
            "prototype_scale": self.prototype_scale,
            "noise_sigma": self.noise_sigma,
            "balanced": self.balanced,
        }

    @classmethod
    def from_json(cls, data: dict) -> "EnvironmentSpec":
        return cls(
            d_raw=int(data["d_raw"]),
            k=int(data["k"]),
            prototype_scale=float(data["prototype_scale"]),
            noise_sigma=float(data["noise_sigma"]),
            balanced=bool(data.get("balanced", True)),
        )


def sample_task(env: EnvironmentSpec, seed: int) -> TaskSpec:
    """Draw one task from the environment.

    Prototypes are i.i.d. centered Gaussian with per-coordinate std
    ``prototype_scale``; class probabilities are uniform when the
    environment is balanced and a flat Dirichlet draw otherwise.
    """
    rng = np.random.default_rng(seed)
    protos = rng.normal(0.0, 1.0, size=(env.k, env.d_raw)) * env.prototype_scale
    if env.balanced:
        probs = np.full(env.k, 1.0 / env.k)
    else:
        probs = rng.dirichlet(np.ones(env.k))
        probs = probs / probs.sum()
    return TaskSpec(prototypes=protos, noise_sigma=env.noise_sigma, class_probs=probs)


def sample_episode(task: TaskSpec, m: int, seed: int) -> Episode:
    """Draw m i.i.d. labeled examples from the task."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    rng = np.random.default_rng(seed)
    ys = rng.choice(task.k, size=m, p=task.class_probs) + 1
    noise = rng.normal(0.0, task.noise_sigma, size=(m, task.d_raw))
    xs = task.prototypes[ys - 1] + noise
    return Episode(xs=xs, ys=ys, k=task.k)


def sample_kway_sshot_episode(task: TaskSpec, k: int, s: int, q: int, seed: int) -> Episode:
    """Draw an episode with exactly s support and q query examples per class.

    The first k*s examples are the support portion (class-major order),
    the remaining k*q the query portion; m = k*(s+q).
    """
    if task.k != k:
        raise ValueError(f"task has {task.k} classes, expected {k}")
    if s < 1 or q < 1:
        raise ValueError(f"s and q must be >= 1, got s={s}, q={q}")
    rng = np.random.default_rng(seed)

    def _block(per_class: int) -> tuple[np.ndarray, np.ndarray]:
        ys = np.repeat(np.arange(1, k + 1), per_class)
        noise = rng.normal(0.0, task.noise_sigma, size=(k * per_class, task.d_raw))
        return task.prototypes[ys - 1] + noise, ys

    sup_x, sup_y = _block(s)
    qry_x, qry_y = _block(q)
    xs = np.concatenate([sup_x, qry_x], axis=0)
    ys = np.concatenate([sup_y, qry_y])
    return Episode(xs=xs, ys=ys, k=k, split=s)


def sample_meta_sample(
    env: EnvironmentSpec,
    n: int,
    m: int,
    seed: int,
    shape: Optional[tuple[int, int]] = None,
) -> MetaSample:
    """Draw n independent (task, episode) pairs; only the episodes are kept.

    With ``shape=(s, q)`` the episodes are k-way s-shot with m = k*(s+q);
    otherwise each episode is m i.i.d. draws from its task.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if shape is not None:
        s, q = shape
        if m != env.k * (s + q):
            raise ValueError(f"m={m} must equal k*(s+q)={env.k * (s + q)}")
    policy = SeedPolicy(seed)
    episodes = []
    for l in range(n):
        unit = SeedPolicy(policy.child(l))
        task = sample_task(env, unit.child(0))
        if shape is None:
            episodes.append(sample_episode(task, m, unit.child(1)))
        else:
            episodes.append(sample_kway_sshot_episode(task, env.k, shape[0], shape[1], unit.child(1)))
    return MetaSample(episodes=tuple(episodes))
