"""Seeded group-relative training loop over toy policies.

Each batch samples a fixed-size rollout group per task, scores it with the
binary verifier rewards, normalizes rewards within the group, and then runs
several dual-clipped surrogate updates against the frozen old logprobs.
Rollouts are length-2 token sequences: the latent choice and the answer
choice. The whole loop is a pure function of (policy init, tasks, config).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict, replace
from pathlib import Path

import numpy as np

from ..grpo import ClipConfig, dual_clip_with_dratio, group_advantages
from ..vmr import McqInstance
from .estimators import ESTIMATOR_NAMES, exact_objective, reward_vector
from .policies import Policy, TaskKind, TaskSpec, ToyPolicy

TRACE_HEADER = "step,mean_reward,accuracy,param_norm"

_INT_KEYS = ("n_tasks", "n_latents", "n_answers", "group_size", "steps", "seed", "updates_per_batch")
_FLOAT_KEYS = ("learning_rate", "init_scale")
_CLIP_KEYS = ("ratio_low", "ratio_high", "dual_c", "norm_epsilon")


@dataclass(frozen=True)
class ExperimentConfig:
    """Desk-scale experiment settings.

    The learning rate here is intentionally larger than the large-scale
    default: tabular logits need steps the clip window can actually use.
    """

    estimator: str = "vmr"
    n_tasks: int = 50
    n_latents: int = 2
    n_answers: int = 2
    group_size: int = 16
    steps: int = 500
    learning_rate: float = 4.0
    seed: int = 0
    updates_per_batch: int = 16
    init_scale: float = 0.25
    clip: ClipConfig = ClipConfig()

    def __post_init__(self):
        if self.estimator not in ESTIMATOR_NAMES:
            raise ValueError(f"estimator must be one of {ESTIMATOR_NAMES}, got {self.estimator!r}")
        if self.estimator == "vmr" and self.n_answers != 2:
            raise ValueError("vmr experiments need exactly 2 answers")
        if self.group_size < 2:
            raise ValueError("group_size must be at least 2")
        if self.steps < 1 or self.updates_per_batch < 1:
            raise ValueError("steps and updates_per_batch must be positive")
        if self.learning_rate < 0.0:
            raise ValueError("learning_rate must be nonnegative")

    def to_dict(self) -> dict:
        flat = asdict(self)
        flat.update(flat.pop("clip"))
        return flat

    @classmethod
    def from_dict(cls, overrides: dict) -> "ExperimentConfig":
        """Build from string-or-typed key=value overrides."""
        kwargs: dict = {}
        clip_kwargs: dict = {}
        for key, value in overrides.items():
            if key in _INT_KEYS:
                kwargs[key] = int(value)
            elif key in _FLOAT_KEYS:
                kwargs[key] = float(value)
            elif key in _CLIP_KEYS:
                clip_kwargs[key] = float(value)
            elif key == "estimator":
                kwargs[key] = str(value)
            else:
                raise ValueError(f"unknown experiment config key {key!r}")
        if clip_kwargs:
            kwargs["clip"] = replace(ClipConfig(), **clip_kwargs)
        return cls(**kwargs)


@dataclass(frozen=True)
class TraceRecord:
    step: int
    mean_reward: float
    accuracy: float
    param_norm: float


class TrainingTrace:
    """Per-step training log with strictly increasing step indices."""

    def __init__(self, records: list[TraceRecord] | None = None):
        self.records: list[TraceRecord] = []
        for record in records or []:
            self.append(record)

    def append(self, record: TraceRecord) -> None:
        if self.records and record.step <= self.records[-1].step:
            raise ValueError(
                f"steps must increase strictly: {record.step} after {self.records[-1].step}"
            )
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __eq__(self, other) -> bool:
        return isinstance(other, TrainingTrace) and self.records == other.records

    @property
    def final(self) -> TraceRecord:
        if not self.records:
            raise ValueError("empty trace")
        return self.records[-1]

    def to_csv(self, path: str | Path) -> None:
        lines = [TRACE_HEADER]
        for r in self.records:
            lines.append(f"{r.step},{r.mean_reward!r},{r.accuracy!r},{r.param_norm!r}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def from_csv(cls, path: str | Path) -> "TrainingTrace":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or lines[0] != TRACE_HEADER:
            raise ValueError(f"expected header {TRACE_HEADER!r}")
        trace = cls()
        for line in lines[1:]:
            if not line:
                continue
            step, mean_reward, accuracy, param_norm = line.split(",")
            trace.append(
                TraceRecord(int(step), float(mean_reward), float(accuracy), float(param_norm))
            )
        return trace


def make_mcq_tasks(n_tasks: int, rng: np.random.Generator) -> list[TaskSpec]:
    """Abstract two-option tasks with fair random correct slots."""
    labels = ("A", "B")
    return [
        TaskSpec(kind=TaskKind.MCQ, context=i, correct_label=labels[int(rng.integers(2))])
        for i in range(n_tasks)
    ]


def make_closed_tasks(n_tasks: int, n_answers: int, rng: np.random.Generator) -> list[TaskSpec]:
    return [
        TaskSpec(
            kind=TaskKind.CLOSED_ANSWER,
            context=i,
            reference=int(rng.integers(n_answers)),
        )
        for i in range(n_tasks)
    ]


def tasks_from_instances(instances: list[McqInstance]) -> list[TaskSpec]:
    """Two-option tasks carrying real option texts for feature-based policies."""
    return [
        TaskSpec(
            kind=TaskKind.MCQ,
            context=i,
            correct_label=inst.correct_label,
            option_texts=(inst.option_a, inst.option_b),
            query=inst.query,
        )
        for i, inst in enumerate(instances)
    ]


def _task_rng(seed: int, batch_idx: int, task_idx: int) -> np.random.Generator:
    # Per-(batch, task) streams make the sampling order reproducible and
    # shard-independent.
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, batch_idx, task_idx))))


def _mean_accuracy(policy: Policy, tasks: list[TaskSpec]) -> float:
    return float(np.mean([exact_objective(policy, task) for task in tasks]))


def train_policy(policy: Policy, tasks: list[TaskSpec], config: ExperimentConfig) -> TrainingTrace:
    """Run group-relative training and return the per-step trace.

    mean_reward is the sampled batch mean; accuracy is the exact expected
    reward under the current parameters, recomputed by enumeration after
    every update, so it stays flat whenever the parameters do.
    """
    expected_kind = TaskKind.MCQ if config.estimator == "vmr" else TaskKind.CLOSED_ANSWER
    for task in tasks:
        if task.kind != expected_kind:
            raise ValueError(
                f"estimator {config.estimator!r} needs {expected_kind.value} tasks, "
                f"got {task.kind.value}"
            )
    trace = TrainingTrace()
    step = 0
    batch_idx = 0
    group_size = config.group_size
    while step < config.steps:
        groups = []
        reward_total = 0.0
        for task_idx, task in enumerate(tasks):
            rng = _task_rng(config.seed, batch_idx, task_idx)
            n_latents = policy.n_latents()
            n_answers = policy.n_answers(task)
            pz = policy.z_probs(task)
            zs = [int(z) for z in rng.choice(n_latents, size=group_size, p=pz)]
            y_rows = {z: policy.y_probs(task, z) for z in sorted(set(zs))}
            if config.estimator == "verifree":
                target = task.target_index
                ys = [target] * group_size
                rewards = np.array([y_rows[z][target] for z in zs])
            else:
                rv = reward_vector(task, n_answers)
                ys = [int(rng.choice(n_answers, p=y_rows[z])) for z in zs]
                rewards = rv[ys]
            old_logprobs = np.stack(
                [np.log([pz[z], y_rows[z][y]]) for z, y in zip(zs, ys)]
            )
            advantages = group_advantages(rewards, config.clip)
            groups.append((task, zs, ys, advantages, old_logprobs))
            reward_total += float(rewards.sum())
        mean_reward = reward_total / (len(tasks) * group_size)
        n_rollouts = len(tasks) * group_size
        for _ in range(config.updates_per_batch):
            if step >= config.steps:
                break
            grad = np.zeros(policy.n_params())
            for task, zs, ys, advantages, old_logprobs in groups:
                pz_new = policy.z_probs(task)
                y_rows_new = {z: policy.y_probs(task, z) for z in sorted(set(zs))}
                for i, (z, y) in enumerate(zip(zs, ys)):
                    advantage = float(advantages[i])
                    if advantage == 0.0:
                        continue
                    new_logprobs = np.log([pz_new[z], y_rows_new[z][y]])
                    ratios = np.exp(new_logprobs - old_logprobs[i])
                    _, slopes = dual_clip_with_dratio(ratios, advantage, config.clip)
                    # loss = -(1/n) sum_rollouts mean_tokens(objective), so each
                    # token contributes -slope*ratio/(n*2) through its logprob
                    coef = -(slopes * ratios) / (n_rollouts * 2.0)
                    if coef[0] != 0.0:
                        grad += coef[0] * policy.grad_log_z(task, z)
                    if coef[1] != 0.0:
                        grad += coef[1] * policy.grad_log_y(task, z, y)
            params = policy.get_params() - config.learning_rate * grad
            policy.set_params(params)
            step += 1
            trace.append(
                TraceRecord(
                    step=step,
                    mean_reward=mean_reward,
                    accuracy=_mean_accuracy(policy, tasks),
                    param_norm=float(np.linalg.norm(params)),
                )
            )
        batch_idx += 1
    return trace


def run_experiment(config: ExperimentConfig) -> tuple[ToyPolicy, list[TaskSpec], TrainingTrace]:
    """Build seeded tasks and a random tabular policy, then train."""
    rng_tasks = np.random.Generator(np.random.PCG64(np.random.SeedSequence((config.seed, 101))))
    rng_init = np.random.Generator(np.random.PCG64(np.random.SeedSequence((config.seed, 202))))
    if config.estimator == "vmr":
        tasks = make_mcq_tasks(config.n_tasks, rng_tasks)
    else:
        tasks = make_closed_tasks(config.n_tasks, config.n_answers, rng_tasks)
    policy = ToyPolicy.random(
        config.n_tasks, config.n_latents, config.n_answers, rng_init, scale=config.init_scale
    )
    trace = train_policy(policy, tasks, config)
    return policy, tasks, trace
