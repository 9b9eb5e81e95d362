"""Exactly enumerable toy policies for validating policy-gradient estimators.

The lab provides two-stage softmax policies small enough to enumerate every
(latent, answer) outcome, three gradient estimators checked against exact
enumeration and finite differences, and a seeded group-relative training
loop that exercises the same clipping and aggregation numerics used at
scale.
"""

from .policies import (
    Policy,
    TaskKind,
    TaskSpec,
    ToyPolicy,
    LinearOptionPolicy,
    label_index,
    sample_rollout,
)
from .estimators import (
    ESTIMATOR_NAMES,
    GradEstimate,
    exact_objective,
    finite_diff,
    finite_diff_grad,
    grad_rlvr,
    grad_verifree,
    grad_vmr,
    reward_vector,
)
from .training import (
    ExperimentConfig,
    TraceRecord,
    TrainingTrace,
    make_closed_tasks,
    make_mcq_tasks,
    tasks_from_instances,
    train_policy,
    run_experiment,
)

__all__ = [
    "Policy",
    "TaskKind",
    "TaskSpec",
    "ToyPolicy",
    "LinearOptionPolicy",
    "label_index",
    "sample_rollout",
    "ESTIMATOR_NAMES",
    "GradEstimate",
    "exact_objective",
    "finite_diff",
    "finite_diff_grad",
    "grad_rlvr",
    "grad_verifree",
    "grad_vmr",
    "reward_vector",
    "ExperimentConfig",
    "TraceRecord",
    "TrainingTrace",
    "make_closed_tasks",
    "make_mcq_tasks",
    "tasks_from_instances",
    "train_policy",
    "run_experiment",
]
