"""Three policy-gradient estimators with exact and sampled evaluation modes.

All three target binary-reward objectives of the form
J = sum_z pi(z|x) sum_y pi(y|x,z) R(y):

- rlvr scores a sampled answer against a closed-form reference,
- verifree never samples the answer; it weights each latent by the
  probability mass the policy puts on the reference answer, which makes it
  the exact gradient of sum_z pi(z|x) pi(y*|x,z),
- vmr scores a sampled answer against the correct slot of a two-option
  instance, which reduces to rlvr with the slot label as reference.

Exact enumeration sums over every (latent, answer) outcome. Monte Carlo
draws outcome counts for n_samples rollouts and returns the sample mean of
the same integrand, with per-coordinate standard errors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..verifier import score_exact, score_label
from .policies import Policy, TaskKind, TaskSpec

EXACT_ENUM = "exact_enum"
MONTE_CARLO = "monte_carlo"
FINITE_DIFF = "finite_diff"

ESTIMATOR_NAMES = ("rlvr", "verifree", "vmr")

_LABELS = ("A", "B")

FD_STEP = 1e-5


@dataclass(frozen=True)
class GradEstimate:
    values: np.ndarray
    method: str
    n_samples: int | None = None
    stderr: np.ndarray | None = None

    def __post_init__(self):
        if self.method not in (EXACT_ENUM, MONTE_CARLO, FINITE_DIFF):
            raise ValueError(f"unknown method {self.method!r}")


def reward_vector(task: TaskSpec, n_answers: int) -> np.ndarray:
    """Binary reward for every answer index, routed through the verifier."""
    if task.kind == TaskKind.CLOSED_ANSWER:
        if task.reference >= n_answers:
            raise ValueError(f"reference {task.reference} outside {n_answers} answers")
        return np.array(
            [float(score_exact(str(y), str(task.reference))) for y in range(n_answers)]
        )
    if n_answers != 2:
        raise ValueError(f"two-option task needs exactly 2 answers, got {n_answers}")
    return np.array(
        [float(score_label(_LABELS[y], task.correct_label)) for y in range(2)]
    )


def _tables(policy: Policy, task: TaskSpec):
    n_latents = policy.n_latents()
    n_answers = policy.n_answers(task)
    pz = policy.z_probs(task)
    py = np.stack([policy.y_probs(task, z) for z in range(n_latents)])
    glz = np.stack([policy.grad_log_z(task, z) for z in range(n_latents)])
    gly = np.stack(
        [[policy.grad_log_y(task, z, y) for y in range(n_answers)] for z in range(n_latents)]
    )
    return pz, py, glz, gly


def exact_objective(policy: Policy, task: TaskSpec) -> float:
    """Expected reward by full enumeration over (latent, answer) pairs."""
    n_latents = policy.n_latents()
    rewards = reward_vector(task, policy.n_answers(task))
    pz = policy.z_probs(task)
    total = 0.0
    for z in range(n_latents):
        total += pz[z] * float(policy.y_probs(task, z) @ rewards)
    return total


def _mc_from_counts(counts: np.ndarray, vectors: np.ndarray, n_samples: int):
    """Sample mean and standard error of per-sample vectors drawn with `counts`."""
    mean = counts @ vectors / n_samples
    second = counts @ (vectors**2) / n_samples
    var = np.maximum(second - mean**2, 0.0)
    if n_samples > 1:
        var = var * (n_samples / (n_samples - 1))
    return mean, np.sqrt(var / n_samples)


def _sampled_pair_grad(
    policy: Policy,
    task: TaskSpec,
    mode: str,
    n_samples: int | None,
    rng: np.random.Generator | None,
) -> GradEstimate:
    """Shared core for the two estimators that sample (latent, answer) pairs."""
    pz, py, glz, gly = _tables(policy, task)
    rewards = reward_vector(task, py.shape[1])
    integrand = rewards[None, :, None] * (glz[:, None, :] + gly)
    if mode == EXACT_ENUM:
        weights = pz[:, None] * py
        values = np.einsum("zy,zyp->p", weights, integrand)
        return GradEstimate(values=values, method=EXACT_ENUM)
    if mode == MONTE_CARLO:
        if not n_samples or n_samples < 1 or rng is None:
            raise ValueError("monte_carlo mode needs n_samples >= 1 and an rng")
        joint = (pz[:, None] * py).ravel()
        joint = joint / joint.sum()
        counts = rng.multinomial(n_samples, joint)
        flat = integrand.reshape(len(joint), -1)
        mean, stderr = _mc_from_counts(counts, flat, n_samples)
        return GradEstimate(values=mean, method=MONTE_CARLO, n_samples=n_samples, stderr=stderr)
    raise ValueError(f"unknown mode {mode!r}")


def grad_rlvr(
    policy: Policy,
    task: TaskSpec,
    mode: str = EXACT_ENUM,
    n_samples: int | None = None,
    rng: np.random.Generator | None = None,
) -> GradEstimate:
    """Score-function gradient with sampled answers checked against a reference."""
    if task.kind != TaskKind.CLOSED_ANSWER:
        raise ValueError("rlvr estimator needs a closed_answer task")
    return _sampled_pair_grad(policy, task, mode, n_samples, rng)


def grad_vmr(
    policy: Policy,
    task: TaskSpec,
    mode: str = EXACT_ENUM,
    n_samples: int | None = None,
    rng: np.random.Generator | None = None,
) -> GradEstimate:
    """Score-function gradient with sampled answers checked against the correct slot."""
    if task.kind != TaskKind.MCQ:
        raise ValueError("vmr estimator needs an mcq task")
    return _sampled_pair_grad(policy, task, mode, n_samples, rng)


def grad_verifree(
    policy: Policy,
    task: TaskSpec,
    mode: str = EXACT_ENUM,
    n_samples: int | None = None,
    rng: np.random.Generator | None = None,
) -> GradEstimate:
    """Answer-marginalized gradient: latents are weighted by reference mass."""
    if task.kind != TaskKind.CLOSED_ANSWER:
        raise ValueError("verifree estimator needs a closed_answer task")
    pz, py, glz, gly = _tables(policy, task)
    target = task.target_index
    if target >= py.shape[1]:
        raise ValueError(f"reference {target} outside {py.shape[1]} answers")
    per_latent = py[:, target, None] * (glz + gly[:, target, :])
    if mode == EXACT_ENUM:
        values = pz @ per_latent
        return GradEstimate(values=values, method=EXACT_ENUM)
    if mode == MONTE_CARLO:
        if not n_samples or n_samples < 1 or rng is None:
            raise ValueError("monte_carlo mode needs n_samples >= 1 and an rng")
        counts = rng.multinomial(n_samples, pz / pz.sum())
        mean, stderr = _mc_from_counts(counts, per_latent, n_samples)
        return GradEstimate(values=mean, method=MONTE_CARLO, n_samples=n_samples, stderr=stderr)
    raise ValueError(f"unknown mode {mode!r}")


def finite_diff(policy: Policy, objective_fn, h: float = FD_STEP) -> np.ndarray:
    """Central finite differences of `objective_fn(policy)` over every parameter."""
    base = policy.get_params()
    grad = np.zeros_like(base)
    try:
        for i in range(base.size):
            perturbed = base.copy()
            perturbed[i] = base[i] + h
            policy.set_params(perturbed)
            plus = objective_fn(policy)
            perturbed[i] = base[i] - h
            policy.set_params(perturbed)
            minus = objective_fn(policy)
            grad[i] = (plus - minus) / (2.0 * h)
    finally:
        policy.set_params(base)
    return grad


def finite_diff_grad(policy: Policy, task: TaskSpec, h: float = FD_STEP) -> GradEstimate:
    """Finite-difference gradient of the exact expected reward."""
    values = finite_diff(policy, lambda p: exact_objective(p, task), h)
    return GradEstimate(values=values, method=FINITE_DIFF)
