"""Experiment orchestration: transfer-risk Monte Carlo, bound-validity
trials, and parameter sweeps, with JSON config in and CSV out.

A validity experiment repeats, per trial: draw a meta-sample, select a
feature map by empirical risk, evaluate its average empirical losses,
estimate its true transfer risk by Monte Carlo on fresh tasks, and
compare against the four bound evaluations. Expected complexity inputs
(Gaussian complexity and entropy integrals of the restricted class)
are estimated once per run by averaging over fresh outer draws and
shared across trials, matching the bounds' expectation form.

Trials are independent units seeded by per-trial derived seeds, so
output files are byte-identical across runs and worker counts.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .bounds import (
    BoundInputs,
    covering_transfer_bound,
    gaussian_transfer_bound,
    surrogate_multimargin_bound,
    vc_transfer_bound,
)
from .complexity import build_pi1f_restriction, entropy_integral, gaussian_complexity_mc
from .core import (
    EnvironmentSpec,
    Episode,
    SeedPolicy,
    sample_episode,
    sample_kway_sshot_episode,
    sample_meta_sample,
    sample_task,
)
from .learners import (
    BaseLearner,
    FeatureFamily,
    FeatureMap,
    NumericError,
    linear_multimargin_learn,
    linear_softmax_learn,
    make_feature_family,
    meta_erm_select,
    nearest_centroid_learn,
)
from .losses import (
    LOSS_KINDS,
    empirical_margin_loss,
    empirical_multi_margin_loss,
    margin_loss_array,
)

LEARNER_KINDS = ("nearest_centroid", "linear_multimargin", "linear_softmax")
SWEEP_AXES = ("n", "m", "rho", "s")

CSV_HEADER = (
    "trial,avg_empirical_loss,transfer_risk,transfer_risk_se,"
    "bound_vc,bound_gaussian,bound_covering,bound_surrogate,"
    "holds_vc,holds_gaussian,holds_covering,holds_surrogate,"
    "test_accuracy,vacuous_vc,elapsed_ms"
)

SWEEP_CSV_HEADER = (
    "axis,value,status,trials,mean_test_accuracy,test_accuracy_se,"
    "mean_avg_empirical_loss,mean_bound_vc,mean_bound_gaussian,"
    "mean_bound_covering,mean_bound_surrogate,hold_freq_vc,"
    "hold_freq_gaussian,hold_freq_covering,hold_freq_surrogate,error"
)


def _fmt(x: float) -> str:
    return f"{float(x):.9g}"


@dataclass(frozen=True)
class FamilyGroup:
    kind: str
    count: int
    d: Optional[int] = None  # falls back to the family-level d


@dataclass(frozen=True)
class FamilySpec:
    """How to build the candidate feature-map family."""

    d: int
    groups: tuple[FamilyGroup, ...]
    norm_cap: float = 1e6

    def to_json(self) -> dict:
        groups = []
        for g in self.groups:
            entry = {"kind": g.kind, "count": g.count}
            if g.d is not None:
                entry["d"] = g.d
            groups.append(entry)
        return {"d": self.d, "norm_cap": self.norm_cap, "groups": groups}

    @classmethod
    def from_json(cls, data: dict) -> "FamilySpec":
        groups = tuple(
            FamilyGroup(kind=g["kind"], count=int(g["count"]),
                        d=int(g["d"]) if g.get("d") is not None else None)
            for g in data["groups"]
        )
        return cls(d=int(data["d"]), groups=groups, norm_cap=float(data.get("norm_cap", 1e6)))


@dataclass(frozen=True)
class LearnerSpec:
    """Base-learner choice plus its optimizer hyperparameters.

    rho and the score bound b are taken from the bound inputs so the
    learner and the bound machinery always agree on them.
    """

    kind: str
    lam: float = 1e-3
    steps: int = 30
    step_size: float = 0.1

    def __post_init__(self) -> None:
        if self.kind not in LEARNER_KINDS:
            raise ValueError(f"learner kind must be one of {LEARNER_KINDS}, got {self.kind!r}")

    def to_json(self) -> dict:
        return {"kind": self.kind, "lam": self.lam, "steps": self.steps, "step_size": self.step_size}

    @classmethod
    def from_json(cls, data: dict) -> "LearnerSpec":
        return cls(
            kind=data["kind"],
            lam=float(data.get("lam", 1e-3)),
            steps=int(data.get("steps", 30)),
            step_size=float(data.get("step_size", 0.1)),
        )


@dataclass(frozen=True)
class ExperimentConfig:
    environment: EnvironmentSpec
    family: FamilySpec
    learner: LearnerSpec
    bound: BoundInputs
    trials: int
    test_points_per_task: int = 40
    outer_task_draws: int = 20
    outer_meta_draws: int = 3
    mc_draws: int = 2000
    dudley_levels: int = 12
    test_episodes: int = 600
    episode_shape: Optional[tuple[int, int]] = None
    loss_kind: str = "margin"
    seed: int = 0
    workers: int = 1
    record_timing: bool = False
    output_path: Optional[str] = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for name in ("test_points_per_task", "outer_task_draws", "outer_meta_draws",
                     "mc_draws", "dudley_levels", "test_episodes", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"loss_kind must be one of {LOSS_KINDS}")
        if self.environment.k != self.bound.k:
            raise ValueError("environment.k and bound.k must agree")
        if self.episode_shape is not None:
            s, q = self.episode_shape
            if s < 1 or q < 1:
                raise ValueError("episode shape needs s >= 1 and q >= 1")
            if self.bound.m != self.bound.k * (s + q):
                raise ValueError(
                    f"bound.m={self.bound.m} must equal k*(s+q)={self.bound.k * (s + q)}"
                )

    def to_json(self) -> dict:
        data = {
            "environment": self.environment.to_json(),
            "family": self.family.to_json(),
            "learner": self.learner.to_json(),
            "bound": self.bound.to_json(),
            "trials": self.trials,
            "test_points_per_task": self.test_points_per_task,
            "outer_task_draws": self.outer_task_draws,
            "outer_meta_draws": self.outer_meta_draws,
            "mc_draws": self.mc_draws,
            "dudley_levels": self.dudley_levels,
            "test_episodes": self.test_episodes,
            "loss_kind": self.loss_kind,
            "seed": self.seed,
            "workers": self.workers,
            "record_timing": self.record_timing,
            "output_path": self.output_path,
        }
        if self.episode_shape is not None:
            data["episode_shape"] = {"s": self.episode_shape[0], "q": self.episode_shape[1]}
        return data

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        shape = None
        if data.get("episode_shape") is not None:
            shape = (int(data["episode_shape"]["s"]), int(data["episode_shape"]["q"]))
        return cls(
            environment=EnvironmentSpec.from_json(data["environment"]),
            family=FamilySpec.from_json(data["family"]),
            learner=LearnerSpec.from_json(data["learner"]),
            bound=BoundInputs.from_json(data["bound"]),
            trials=int(data["trials"]),
            test_points_per_task=int(data.get("test_points_per_task", 40)),
            outer_task_draws=int(data.get("outer_task_draws", 20)),
            outer_meta_draws=int(data.get("outer_meta_draws", 3)),
            mc_draws=int(data.get("mc_draws", 2000)),
            dudley_levels=int(data.get("dudley_levels", 12)),
            test_episodes=int(data.get("test_episodes", 600)),
            episode_shape=shape,
            loss_kind=data.get("loss_kind", "margin"),
            seed=int(data.get("seed", 0)),
            workers=int(data.get("workers", 1)),
            record_timing=bool(data.get("record_timing", False)),
            output_path=data.get("output_path"),
        )


def build_family(spec: FamilySpec, d_raw: int, seed: int) -> FeatureFamily:
    """Materialize the family; map ids are prefixed per group so they
    stay distinct across groups."""
    policy = SeedPolicy(seed)
    maps: list[FeatureMap] = []
    for gi, group in enumerate(spec.groups):
        d = group.d if group.d is not None else spec.d
        sub = make_feature_family(d_raw, d, group.count, group.kind, policy.child(gi), spec.norm_cap)
        for fm in sub.maps:
            maps.append(FeatureMap(id=f"g{gi}-{fm.id}", kind=fm.kind, d=fm.d,
                                   weight=fm.weight, norm_cap=fm.norm_cap))
    return FeatureFamily(maps=tuple(maps))


def make_base_learner(spec: LearnerSpec, rho: float, b: float) -> BaseLearner:
    if spec.kind == "nearest_centroid":
        return lambda ep, phi: nearest_centroid_learn(ep, phi, b)
    if spec.kind == "linear_multimargin":
        return lambda ep, phi: linear_multimargin_learn(
            ep, phi, rho, spec.lam, spec.steps, spec.step_size, b)
    return lambda ep, phi: linear_softmax_learn(ep, phi, spec.lam, spec.steps, spec.step_size, b)


def _draw_training_episode(task, m: int, shape: Optional[tuple[int, int]], seed: int) -> Episode:
    if shape is None:
        return sample_episode(task, m, seed)
    return sample_kway_sshot_episode(task, task.k, shape[0], shape[1], seed)


@dataclass(frozen=True)
class TransferRiskEstimate:
    """Monte Carlo estimate of transfer risk for a fixed feature map."""

    risk: float
    std_error: float
    accuracy: float
    task_draws: int
    test_points: int
    failures: int


def estimate_transfer_risk(
    env: EnvironmentSpec,
    phi: FeatureMap,
    base_learner: BaseLearner,
    rho: float,
    m: int,
    task_draws: int,
    test_points: int,
    seed: int,
    shape: Optional[tuple[int, int]] = None,
) -> TransferRiskEstimate:
    """Monte Carlo evaluation of the train-on-fresh-task protocol.

    Per task draw: sample a task, a training episode of size m, and
    test_points i.i.d. test pairs; train the base-learner with phi
    frozen and average the ramp loss over the test pairs. Failed draws
    (a learner error) are excluded and counted. The standard error
    pools all per-point losses; 0-1 accuracy rides along.
    """
    if task_draws < 1 or test_points < 1:
        raise ValueError("task_draws and test_points must be >= 1")
    if env.k < 2:
        raise ValueError("transfer risk needs k >= 2 (margins are undefined otherwise)")
    policy = SeedPolicy(seed)
    losses: list[np.ndarray] = []
    hits: list[np.ndarray] = []
    failures = 0
    for j in range(task_draws):
        unit = SeedPolicy(policy.child(j))
        task = sample_task(env, unit.child(0))
        try:
            train_ep = _draw_training_episode(task, m, shape, unit.child(1))
            scorer = base_learner(train_ep, phi)
        except (ValueError, NumericError):
            failures += 1
            continue
        test_ep = sample_episode(task, test_points, unit.child(2))
        scores = scorer.scores_matrix(test_ep.xs)
        idx = np.arange(test_ep.m)
        true = scores[idx, test_ep.ys - 1]
        masked = scores.copy()
        masked[idx, test_ep.ys - 1] = -np.inf
        margins = true - masked.max(axis=1)
        losses.append(margin_loss_array(rho, margins))
        hits.append(scores.argmax(axis=1) + 1 == test_ep.ys)
    if not losses:
        raise NumericError("all transfer-risk draws failed")
    pooled = np.concatenate(losses)
    accuracy = float(np.concatenate(hits).mean())
    se = float(pooled.std(ddof=1) / math.sqrt(pooled.size)) if pooled.size > 1 else 0.0
    return TransferRiskEstimate(
        risk=float(pooled.mean()), std_error=se, accuracy=accuracy,
        task_draws=task_draws, test_points=test_points, failures=failures,
    )


def query_split_accuracy(
    env: EnvironmentSpec,
    phi: FeatureMap,
    base_learner: BaseLearner,
    shape: tuple[int, int],
    episodes: int,
    seed: int,
) -> tuple[float, float]:
    """Mean 0-1 accuracy on the query split over fresh test episodes."""
    s, q = shape
    policy = SeedPolicy(seed)
    accs = np.empty(episodes)
    for j in range(episodes):
        unit = SeedPolicy(policy.child(j))
        task = sample_task(env, unit.child(0))
        episode = sample_kway_sshot_episode(task, env.k, s, q, unit.child(1))
        scorer = base_learner(episode, phi)
        qx, qy = episode.query()
        preds = scorer.scores_matrix(qx).argmax(axis=1) + 1
        accs[j] = float((preds == qy).mean())
    se = float(accs.std(ddof=1) / math.sqrt(episodes)) if episodes > 1 else 0.0
    return float(accs.mean()), se


@dataclass(frozen=True)
class ExpectedComplexities:
    """Environment-level complexity inputs, averaged over outer draws."""

    gamma_meta: float
    gamma_task: float
    entropy_meta: float
    entropy_task: float


def estimate_expected_complexities(config: ExperimentConfig, family: FeatureFamily,
                                   base_learner: BaseLearner, seed: int) -> ExpectedComplexities:
    """Average complexity inputs over fresh outer draws.

    Draws where a learner fails (e.g. a class missing from an i.i.d.
    episode) are skipped; at least one draw must succeed per level.
    """
    env, bound = config.environment, config.bound
    policy = SeedPolicy(seed)
    task_root = SeedPolicy(policy.child(0))
    gamma_task = entropy_task = 0.0
    task_ok = 0
    for j in range(config.outer_task_draws):
        unit = SeedPolicy(task_root.child(j))
        task = sample_task(env, unit.child(0))
        try:
            episode = _draw_training_episode(task, bound.m, config.episode_shape, unit.child(1))
            A = build_pi1f_restriction(episode, family, base_learner, bound.k)
        except (ValueError, NumericError):
            continue
        gamma_task += max(0.0, gaussian_complexity_mc(A, config.mc_draws, unit.child(2)).mean)
        entropy_task += entropy_integral(A, config.dudley_levels)
        task_ok += 1
    meta_root = SeedPolicy(policy.child(1))
    gamma_meta = entropy_meta = 0.0
    meta_ok = 0
    for j in range(config.outer_meta_draws):
        unit = SeedPolicy(meta_root.child(j))
        try:
            meta = sample_meta_sample(env, bound.n, bound.m, unit.child(0), config.episode_shape)
            A = build_pi1f_restriction(meta, family, base_learner, bound.k)
        except (ValueError, NumericError):
            continue
        gamma_meta += max(0.0, gaussian_complexity_mc(A, config.mc_draws, unit.child(1)).mean)
        entropy_meta += entropy_integral(A, config.dudley_levels)
        meta_ok += 1
    if task_ok == 0 or meta_ok == 0:
        raise NumericError("every outer draw failed while estimating expected complexities")
    return ExpectedComplexities(
        gamma_meta=gamma_meta / meta_ok,
        gamma_task=gamma_task / task_ok,
        entropy_meta=entropy_meta / meta_ok,
        entropy_task=entropy_task / task_ok,
    )


@dataclass(frozen=True)
class ResultRow:
    trial: int
    avg_empirical_loss: float
    transfer_risk: float
    transfer_risk_se: float
    bound_vc: float
    bound_gaussian: float
    bound_covering: float
    bound_surrogate: float
    holds_vc: bool
    holds_gaussian: bool
    holds_covering: bool
    holds_surrogate: bool
    test_accuracy: float
    vacuous_vc: bool
    elapsed_ms: float

    def to_csv_line(self) -> str:
        return ",".join([
            str(self.trial),
            _fmt(self.avg_empirical_loss),
            _fmt(self.transfer_risk),
            _fmt(self.transfer_risk_se),
            _fmt(self.bound_vc),
            _fmt(self.bound_gaussian),
            _fmt(self.bound_covering),
            _fmt(self.bound_surrogate),
            str(int(self.holds_vc)),
            str(int(self.holds_gaussian)),
            str(int(self.holds_covering)),
            str(int(self.holds_surrogate)),
            _fmt(self.test_accuracy),
            str(int(self.vacuous_vc)),
            _fmt(self.elapsed_ms),
        ])

    @classmethod
    def from_csv_line(cls, line: str) -> "ResultRow":
        parts = line.strip().split(",")
        if len(parts) != 15:
            raise ValueError(f"expected 15 CSV fields, got {len(parts)}")
        return cls(
            trial=int(parts[0]),
            avg_empirical_loss=float(parts[1]),
            transfer_risk=float(parts[2]),
            transfer_risk_se=float(parts[3]),
            bound_vc=float(parts[4]),
            bound_gaussian=float(parts[5]),
            bound_covering=float(parts[6]),
            bound_surrogate=float(parts[7]),
            holds_vc=bool(int(parts[8])),
            holds_gaussian=bool(int(parts[9])),
            holds_covering=bool(int(parts[10])),
            holds_surrogate=bool(int(parts[11])),
            test_accuracy=float(parts[12]),
            vacuous_vc=bool(int(parts[13])),
            elapsed_ms=float(parts[14]),
        )


def bound_holds(transfer_risk: float, transfer_risk_se: float, bound_total: float) -> bool:
    """The validity check allows 2 standard errors of estimator noise
    before declaring a violation."""
    return transfer_risk <= bound_total + 2.0 * transfer_risk_se


def _run_trial(trial: int, config: ExperimentConfig, family: FeatureFamily,
               base_learner: BaseLearner, expected: ExpectedComplexities,
               trial_seed: int) -> ResultRow:
    start = time.perf_counter()
    env, bound = config.environment, config.bound
    unit = SeedPolicy(trial_seed)

    meta = sample_meta_sample(env, bound.n, bound.m, unit.child(0), config.episode_shape)
    chosen, _ = meta_erm_select(meta, family, base_learner, bound.rho, config.loss_kind)
    avg_margin = avg_multi = 0.0
    for episode in meta.episodes:
        scorer = base_learner(episode, chosen)
        avg_margin += empirical_margin_loss(scorer, episode, bound.rho)
        avg_multi += empirical_multi_margin_loss(scorer, episode, bound.rho)
    avg_margin /= meta.n
    avg_multi /= meta.n

    risk = estimate_transfer_risk(
        env, chosen, base_learner, bound.rho, bound.m,
        config.outer_task_draws, config.test_points_per_task,
        unit.child(1), config.episode_shape,
    )

    rep_vc = vc_transfer_bound(bound, avg_margin)
    rep_g = gaussian_transfer_bound(bound, avg_margin, expected.gamma_meta, expected.gamma_task)
    rep_c = covering_transfer_bound(bound, avg_margin, expected.entropy_meta, expected.entropy_task)
    rep_s = surrogate_multimargin_bound(bound, avg_multi)

    if config.episode_shape is not None:
        accuracy, _ = query_split_accuracy(
            env, chosen, base_learner, config.episode_shape, config.test_episodes, unit.child(2))
    else:
        accuracy = risk.accuracy

    elapsed_ms = (time.perf_counter() - start) * 1000.0 if config.record_timing else 0.0
    return ResultRow(
        trial=trial,
        avg_empirical_loss=avg_margin,
        transfer_risk=risk.risk,
        transfer_risk_se=risk.std_error,
        bound_vc=rep_vc.total,
        bound_gaussian=rep_g.total,
        bound_covering=rep_c.total,
        bound_surrogate=rep_s.total,
        holds_vc=bound_holds(risk.risk, risk.std_error, rep_vc.total),
        holds_gaussian=bound_holds(risk.risk, risk.std_error, rep_g.total),
        holds_covering=bound_holds(risk.risk, risk.std_error, rep_c.total),
        holds_surrogate=bound_holds(risk.risk, risk.std_error, rep_s.total),
        test_accuracy=accuracy,
        vacuous_vc=rep_vc.vacuous,
        elapsed_ms=elapsed_ms,
    )


def bound_validity_experiment(config: ExperimentConfig) -> tuple[list[ResultRow], dict]:
    """Run all trials; returns rows in trial order plus a summary with
    the hold frequency per bound kind.

    Failed trials are dropped from the rows and from frequency
    denominators but counted in the summary.
    """
    root = SeedPolicy(config.seed)
    family = build_family(config.family, config.environment.d_raw, root.child(0))
    base_learner = make_base_learner(config.learner, config.bound.rho, config.bound.b)
    expected = estimate_expected_complexities(config, family, base_learner, root.child(2))
    trials_root = SeedPolicy(root.child(1))

    def run(t: int) -> Optional[ResultRow]:
        try:
            return _run_trial(t, config, family, base_learner, expected, trials_root.child(t))
        except (ValueError, NumericError):
            return None

    if config.workers == 1:
        results = [run(t) for t in range(config.trials)]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(run, range(config.trials)))

    rows = [r for r in results if r is not None]
    failed = config.trials - len(rows)
    summary: dict = {
        "trials": config.trials,
        "failed_trials": failed,
        "expected_complexities": {
            "gamma_meta": expected.gamma_meta,
            "gamma_task": expected.gamma_task,
            "entropy_meta": expected.entropy_meta,
            "entropy_task": expected.entropy_task,
        },
    }
    if rows:
        for kind in ("vc", "gaussian", "covering", "surrogate"):
            flags = [getattr(r, f"holds_{kind}") for r in rows]
            summary[f"hold_freq_{kind}"] = sum(flags) / len(rows)
            summary[f"mean_bound_{kind}"] = float(np.mean([getattr(r, f"bound_{kind}") for r in rows]))
        summary["vacuous_freq_vc"] = sum(r.vacuous_vc for r in rows) / len(rows)
        summary["mean_avg_empirical_loss"] = float(np.mean([r.avg_empirical_loss for r in rows]))
        summary["mean_transfer_risk"] = float(np.mean([r.transfer_risk for r in rows]))
        summary["mean_test_accuracy"] = float(np.mean([r.test_accuracy for r in rows]))
        summary["test_accuracy_se"] = (
            float(np.std([r.test_accuracy for r in rows], ddof=1) / math.sqrt(len(rows)))
            if len(rows) > 1 else 0.0
        )
    return rows, summary


def write_result_rows(rows: Sequence[ResultRow], path: str) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(CSV_HEADER + "\n")
        for row in rows:
            handle.write(row.to_csv_line() + "\n")


def read_result_rows(path: str) -> list[ResultRow]:
    with open(path, "r", newline="") as handle:
        header = handle.readline().strip()
        if header != CSV_HEADER:
            raise ValueError("unexpected results CSV header")
        return [ResultRow.from_csv_line(line) for line in handle if line.strip()]


def _apply_axis(config: ExperimentConfig, axis: str, value: float) -> ExperimentConfig:
    if axis == "n":
        n = int(value)
        if n != value or n < 1:
            raise ValueError(f"axis n needs a positive integer, got {value}")
        return replace(config, bound=BoundInputs.from_json({**config.bound.to_json(), "n": n}))
    if axis == "m":
        m = int(value)
        if m != value or m < 1:
            raise ValueError(f"axis m needs a positive integer, got {value}")
        if config.episode_shape is not None:
            raise ValueError("axis m requires unsplit episodes; sweep s instead")
        return replace(config, bound=BoundInputs.from_json({**config.bound.to_json(), "m": m}))
    if axis == "rho":
        rho = float(value)
        if rho <= 0:
            raise ValueError(f"axis rho needs a positive value, got {value}")
        return replace(config, bound=BoundInputs.from_json({**config.bound.to_json(), "rho": rho}))
    if axis == "s":
        s = int(value)
        if s != value or s < 1:
            raise ValueError(f"axis s needs a positive integer, got {value}")
        if config.episode_shape is None:
            raise ValueError("axis s requires an episode shape in the config")
        q = config.episode_shape[1]
        m = config.bound.k * (s + q)
        return replace(config, episode_shape=(s, q),
                       bound=BoundInputs.from_json({**config.bound.to_json(), "m": m}))
    raise ValueError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")


def sweep(config: ExperimentConfig, axis: str, values: Sequence[float]) -> list[dict]:
    """Run one bound-validity experiment per axis value.

    Invalid values produce a row with status "error" and the sweep
    continues. Rows come back in input order.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    if not values:
        raise ValueError("sweep needs at least one value")
    out = []
    for value in values:
        row = {"axis": axis, "value": value, "status": "ok", "error": ""}
        try:
            sub_config = _apply_axis(config, axis, value)
            _, summary = bound_validity_experiment(sub_config)
            row.update({
                "trials": summary["trials"] - summary["failed_trials"],
                "mean_test_accuracy": summary.get("mean_test_accuracy", float("nan")),
                "test_accuracy_se": summary.get("test_accuracy_se", float("nan")),
                "mean_avg_empirical_loss": summary.get("mean_avg_empirical_loss", float("nan")),
                "mean_bound_vc": summary.get("mean_bound_vc", float("nan")),
                "mean_bound_gaussian": summary.get("mean_bound_gaussian", float("nan")),
                "mean_bound_covering": summary.get("mean_bound_covering", float("nan")),
                "mean_bound_surrogate": summary.get("mean_bound_surrogate", float("nan")),
                "hold_freq_vc": summary.get("hold_freq_vc", float("nan")),
                "hold_freq_gaussian": summary.get("hold_freq_gaussian", float("nan")),
                "hold_freq_covering": summary.get("hold_freq_covering", float("nan")),
                "hold_freq_surrogate": summary.get("hold_freq_surrogate", float("nan")),
            })
        except (ValueError, NumericError) as exc:
            row["status"] = "error"
            row["error"] = str(exc)
        out.append(row)
    return out


def write_sweep_rows(rows: Sequence[dict], path: str) -> None:
    numeric = (
        "mean_test_accuracy", "test_accuracy_se", "mean_avg_empirical_loss",
        "mean_bound_vc", "mean_bound_gaussian", "mean_bound_covering",
        "mean_bound_surrogate", "hold_freq_vc", "hold_freq_gaussian",
        "hold_freq_covering", "hold_freq_surrogate",
    )
    with open(path, "w", newline="") as handle:
        handle.write(SWEEP_CSV_HEADER + "\n")
        for row in rows:
            fields = [row["axis"], _fmt(row["value"]), row["status"], str(row.get("trials", 0))]
            fields += [_fmt(row[c]) if c in row else "" for c in numeric]
            fields.append(str(row.get("error", "")).replace(",", ";"))
            handle.write(",".join(fields) + "\n")
