"""Group-relative policy optimization numerics.

Pure functions over arrays: group-normalized advantages, the dual-clipped
surrogate objective, importance ratios, and sequence-mean-token-mean loss
aggregation. No model, tokenizer, or optimizer state lives here.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, asdict, field

import numpy as np

# Keeps normalization well-defined without visibly perturbing the
# advantages of ordinary mixed groups.
DEFAULT_NORM_EPSILON = 1e-12


@dataclass(frozen=True)
class ClipConfig:
    ratio_low: float = 0.8
    ratio_high: float = 1.24
    dual_c: float = 10.0
    norm_epsilon: float = DEFAULT_NORM_EPSILON

    def __post_init__(self):
        if not (0.0 < self.ratio_low < 1.0 < self.ratio_high < self.dual_c):
            raise ValueError(
                "clip bounds must satisfy 0 < ratio_low < 1 < ratio_high < dual_c, got "
                f"low={self.ratio_low} high={self.ratio_high} dual_c={self.dual_c}"
            )
        if self.norm_epsilon <= 0.0:
            raise ValueError(f"norm_epsilon must be positive, got {self.norm_epsilon}")


@dataclass(frozen=True)
class GrpoConfig:
    """Full training-side configuration with flat key=value fields.

    kl_coef and entropy_coef are visible for completeness but regularized
    variants are unsupported: both must stay 0.0.
    """

    ratio_low: float = 0.8
    ratio_high: float = 1.24
    dual_c: float = 10.0
    norm_epsilon: float = DEFAULT_NORM_EPSILON
    group_size: int = 16
    prompts_per_batch: int = 512
    updates_per_batch: int = 16
    learning_rate: float = 1e-6
    kl_coef: float = 0.0
    entropy_coef: float = 0.0

    def __post_init__(self):
        self.clip()  # validates the clip bounds
        if self.group_size < 2:
            raise ValueError(f"group_size must be at least 2, got {self.group_size}")
        if self.prompts_per_batch < 1 or self.updates_per_batch < 1:
            raise ValueError("prompts_per_batch and updates_per_batch must be positive")
        if self.kl_coef != 0.0 or self.entropy_coef != 0.0:
            raise ValueError("kl_coef and entropy_coef must be 0.0; regularized variants are unsupported")

    def clip(self) -> ClipConfig:
        return ClipConfig(
            ratio_low=self.ratio_low,
            ratio_high=self.ratio_high,
            dual_c=self.dual_c,
            norm_epsilon=self.norm_epsilon,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, overrides: dict) -> "GrpoConfig":
        known = {f for f in cls.__dataclass_fields__}
        bad = sorted(set(overrides) - known)
        if bad:
            raise ValueError(f"unknown config keys: {', '.join(bad)}")
        return cls(**overrides)


@dataclass(frozen=True)
class RolloutGroup:
    """All rollouts for one prompt, with per-token logprobs and masks."""

    prompt_id: str
    rewards: np.ndarray
    old_logprobs: list[np.ndarray] = field(default_factory=list)
    new_logprobs: list[np.ndarray] = field(default_factory=list)
    token_masks: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        rewards = np.asarray(self.rewards, dtype=float)
        object.__setattr__(self, "rewards", rewards)
        if not np.all(np.isin(rewards, (0.0, 1.0))):
            raise ValueError("rewards must be binary")
        n = len(rewards)
        for name in ("old_logprobs", "new_logprobs", "token_masks"):
            seq = getattr(self, name)
            if seq and len(seq) != n:
                raise ValueError(f"{name} must have one vector per rollout")
        for old, new, mask in zip(self.old_logprobs, self.new_logprobs, self.token_masks):
            if not (old.shape == new.shape == mask.shape):
                raise ValueError("per-rollout logprob and mask vectors must share shape")


def group_advantages(rewards, config: ClipConfig = ClipConfig()) -> np.ndarray:
    """Center and scale rewards within one group.

    advantage[i] = (r[i] - mean(r)) / (population std(r) + norm_epsilon).
    A zero-variance group yields all-zero advantages; adding a constant to
    every reward leaves the result unchanged.
    """
    rewards = np.asarray(rewards, dtype=float)
    if rewards.ndim != 1 or len(rewards) < 2:
        raise ValueError(f"need a flat group of at least 2 rewards, got shape {rewards.shape}")
    if not np.all(np.isfinite(rewards)):
        raise ValueError("rewards must be finite")
    centered = rewards - rewards.mean()
    std = float(np.sqrt(np.mean(centered**2)))
    if std == 0.0:
        return np.zeros_like(rewards)
    return centered / (std + config.norm_epsilon)


def dual_clip_objective(ratio: float, advantage: float, config: ClipConfig = ClipConfig()) -> float:
    """Per-token dual-clipped surrogate.

    For nonnegative advantages this is the standard clipped surrogate
    min(ratio*A, clip(ratio)*A). For negative advantages the result is
    additionally floored at dual_c*A so a huge ratio cannot produce an
    unbounded penalty.
    """
    if not (np.isfinite(ratio) and np.isfinite(advantage)):
        raise ValueError(f"ratio and advantage must be finite, got {ratio}, {advantage}")
    clipped = min(max(ratio, config.ratio_low), config.ratio_high)
    inner = min(ratio * advantage, clipped * advantage)
    if advantage >= 0.0:
        return inner
    return max(inner, config.dual_c * advantage)


def dual_clip_with_dratio(
    ratios: np.ndarray, advantage: float, config: ClipConfig = ClipConfig()
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized dual-clip values plus derivative with respect to the ratio.

    The derivative is the active-branch slope: for A >= 0 it is A on
    ratio <= ratio_high and 0 beyond; for A < 0 it is A on
    ratio_low <= ratio <= dual_c and 0 outside.
    """
    ratios = np.asarray(ratios, dtype=float)
    if not (np.all(np.isfinite(ratios)) and np.isfinite(advantage)):
        raise ValueError("ratios and advantage must be finite")
    clipped = np.clip(ratios, config.ratio_low, config.ratio_high)
    inner = np.minimum(ratios * advantage, clipped * advantage)
    if advantage >= 0.0:
        values = inner
        slopes = np.where(ratios <= config.ratio_high, advantage, 0.0)
    else:
        values = np.maximum(inner, config.dual_c * advantage)
        active = (ratios >= config.ratio_low) & (ratios <= config.dual_c)
        slopes = np.where(active, advantage, 0.0)
    return values, slopes


def importance_ratios(
    new_logprobs: np.ndarray, old_logprobs: np.ndarray
) -> np.ndarray:
    """exp(new - old) per token. Logprobs must be finite."""
    new_logprobs = np.asarray(new_logprobs, dtype=float)
    old_logprobs = np.asarray(old_logprobs, dtype=float)
    if new_logprobs.shape != old_logprobs.shape:
        raise ValueError("logprob vectors must share shape")
    if not (np.all(np.isfinite(new_logprobs)) and np.all(np.isfinite(old_logprobs))):
        raise ValueError("logprobs must be finite")
    return np.exp(new_logprobs - old_logprobs)


def aggregate_loss(
    per_token_objectives: list[np.ndarray], token_masks: list[np.ndarray]
) -> float:
    """Sequence-mean-token-mean loss.

    Each rollout contributes the mean objective over its unmasked tokens;
    the loss is the negated mean of those contributions. Rollouts with no
    unmasked tokens are excluded with a warning.
    """
    if len(per_token_objectives) != len(token_masks):
        raise ValueError("need one mask vector per objective vector")
    per_rollout: list[float] = []
    n_excluded = 0
    for objectives, mask in zip(per_token_objectives, token_masks):
        objectives = np.asarray(objectives, dtype=float)
        mask = np.asarray(mask, dtype=bool)
        if objectives.shape != mask.shape:
            raise ValueError("objective and mask vectors must share shape")
        if not mask.any():
            n_excluded += 1
            continue
        per_rollout.append(float(objectives[mask].mean()))
    if n_excluded:
        warnings.warn(
            f"excluded {n_excluded} rollout(s) with no unmasked tokens from the loss",
            stacklevel=2,
        )
    if not per_rollout:
        raise ValueError("no rollout has unmasked tokens")
    return -float(np.mean(per_rollout))
