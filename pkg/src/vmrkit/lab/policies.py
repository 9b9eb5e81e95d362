"""Two-stage softmax toy policies over (latent, answer) pairs.

A policy first draws a latent "reasoning path" z given the task, then an
answer y given the latent. Both policies expose flat parameter vectors and
score-function gradients so estimators and the trainer stay policy-agnostic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Protocol

import numpy as np

MAX_TABLE_DIM = 16

_LABELS = ("A", "B")


class TaskKind(str, Enum):
    CLOSED_ANSWER = "closed_answer"
    MCQ = "mcq"


def label_index(label: str) -> int:
    if label not in _LABELS:
        raise ValueError(f"label must be 'A' or 'B', got {label!r}")
    return _LABELS.index(label)


@dataclass(frozen=True)
class TaskSpec:
    """One toy task: a context plus what counts as the right answer.

    Closed-answer tasks name a reference answer index; two-option tasks name
    the correct slot label and may carry the option texts and query so
    feature-based policies can score them.
    """

    kind: TaskKind
    context: int = 0
    reference: int | None = None
    correct_label: str | None = None
    option_texts: tuple[str, str] | None = None
    query: str = ""

    def __post_init__(self):
        if self.kind == TaskKind.CLOSED_ANSWER:
            if self.reference is None or self.reference < 0:
                raise ValueError("closed_answer task needs a nonnegative reference index")
        elif self.kind == TaskKind.MCQ:
            if self.correct_label not in _LABELS:
                raise ValueError("mcq task needs correct_label 'A' or 'B'")
        else:
            raise ValueError(f"unknown task kind {self.kind!r}")

    @property
    def target_index(self) -> int:
        """Index of the rewarded answer."""
        if self.kind == TaskKind.CLOSED_ANSWER:
            return int(self.reference)
        return label_index(self.correct_label)


class Policy(Protocol):
    """What estimators and the trainer need from a policy."""

    def n_params(self) -> int: ...
    def get_params(self) -> np.ndarray: ...
    def set_params(self, flat: np.ndarray) -> None: ...
    def n_latents(self) -> int: ...
    def n_answers(self, task: TaskSpec) -> int: ...
    def z_probs(self, task: TaskSpec) -> np.ndarray: ...
    def y_probs(self, task: TaskSpec, z: int) -> np.ndarray: ...
    def grad_log_z(self, task: TaskSpec, z: int) -> np.ndarray: ...
    def grad_log_y(self, task: TaskSpec, z: int, y: int) -> np.ndarray: ...


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    return exp / exp.sum()


class ToyPolicy:
    """Tabular policy: one latent row per context, one answer row per (context, latent)."""

    def __init__(self, z_logits: np.ndarray, y_logits: np.ndarray):
        z_logits = np.asarray(z_logits, dtype=float)
        y_logits = np.asarray(y_logits, dtype=float)
        if z_logits.ndim != 2 or y_logits.ndim != 3:
            raise ValueError("z_logits must be (contexts, latents), y_logits (contexts, latents, answers)")
        n_contexts, n_latents = z_logits.shape
        if y_logits.shape[:2] != (n_contexts, n_latents):
            raise ValueError("y_logits leading dims must match z_logits")
        if max(n_latents, y_logits.shape[2]) > MAX_TABLE_DIM:
            raise ValueError(f"table dims must stay at or below {MAX_TABLE_DIM}")
        self.z_logits = z_logits
        self.y_logits = y_logits

    @classmethod
    def uniform(cls, n_contexts: int, n_latents: int, n_answers: int) -> "ToyPolicy":
        return cls(np.zeros((n_contexts, n_latents)), np.zeros((n_contexts, n_latents, n_answers)))

    @classmethod
    def random(
        cls,
        n_contexts: int,
        n_latents: int,
        n_answers: int,
        rng: np.random.Generator,
        scale: float = 1.0,
    ) -> "ToyPolicy":
        return cls(
            rng.normal(0.0, scale, size=(n_contexts, n_latents)),
            rng.normal(0.0, scale, size=(n_contexts, n_latents, n_answers)),
        )

    def n_params(self) -> int:
        return self.z_logits.size + self.y_logits.size

    def get_params(self) -> np.ndarray:
        return np.concatenate([self.z_logits.ravel(), self.y_logits.ravel()])

    def set_params(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.n_params(),):
            raise ValueError(f"expected {self.n_params()} params, got shape {flat.shape}")
        split = self.z_logits.size
        self.z_logits = flat[:split].reshape(self.z_logits.shape).copy()
        self.y_logits = flat[split:].reshape(self.y_logits.shape).copy()

    def n_latents(self) -> int:
        return self.z_logits.shape[1]

    def n_answers(self, task: TaskSpec) -> int:
        return self.y_logits.shape[2]

    def z_probs(self, task: TaskSpec) -> np.ndarray:
        return softmax(self.z_logits[task.context])

    def y_probs(self, task: TaskSpec, z: int) -> np.ndarray:
        return softmax(self.y_logits[task.context, z])

    def grad_log_z(self, task: TaskSpec, z: int) -> np.ndarray:
        grad = np.zeros(self.n_params())
        n_latents = self.z_logits.shape[1]
        row = task.context * n_latents
        block = -self.z_probs(task)
        block[z] += 1.0
        grad[row : row + n_latents] = block
        return grad

    def grad_log_y(self, task: TaskSpec, z: int, y: int) -> np.ndarray:
        grad = np.zeros(self.n_params())
        _, n_latents, n_answers = self.y_logits.shape
        row = self.z_logits.size + (task.context * n_latents + z) * n_answers
        block = -self.y_probs(task, z)
        block[y] += 1.0
        grad[row : row + n_answers] = block
        return grad


_WORD_RE = re.compile(r"[^\W\d_]+", re.UNICODE)


def option_features(option_text: str, query: str) -> np.ndarray:
    """Position-blind features for one option: bias, scaled length, query-term overlap."""
    query_terms = {w.lower() for w in _WORD_RE.findall(query) if len(w) >= 4}
    option_terms = {w.lower() for w in _WORD_RE.findall(option_text)}
    overlap = len(query_terms & option_terms) / max(1, len(query_terms))
    return np.array([1.0, len(option_text.split()) / 100.0, overlap])


@lru_cache(maxsize=8192)
def _cached_feature_rows(option_texts: tuple[str, str], query: str) -> np.ndarray:
    rows = np.stack([option_features(text, query) for text in option_texts])
    rows.setflags(write=False)
    return rows


N_FEATURES = 3


class LinearOptionPolicy:
    """Feature-scoring policy for two-option tasks.

    Latent weights are shared across all tasks, so learning generalizes
    across prompts instead of memorizing per-context tables, and scoring
    depends only on option text, never on slot position.
    """

    def __init__(self, z_logits: np.ndarray, weights: np.ndarray):
        z_logits = np.asarray(z_logits, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if z_logits.ndim != 1 or weights.shape != (z_logits.size, N_FEATURES):
            raise ValueError("need z_logits (latents,) and weights (latents, features)")
        if z_logits.size > MAX_TABLE_DIM:
            raise ValueError(f"latent count must stay at or below {MAX_TABLE_DIM}")
        self.z_logits = z_logits
        self.weights = weights

    @classmethod
    def zeros(cls, n_latents: int) -> "LinearOptionPolicy":
        return cls(np.zeros(n_latents), np.zeros((n_latents, N_FEATURES)))

    def n_params(self) -> int:
        return self.z_logits.size + self.weights.size

    def get_params(self) -> np.ndarray:
        return np.concatenate([self.z_logits, self.weights.ravel()])

    def set_params(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.n_params(),):
            raise ValueError(f"expected {self.n_params()} params, got shape {flat.shape}")
        split = self.z_logits.size
        self.z_logits = flat[:split].copy()
        self.weights = flat[split:].reshape(self.weights.shape).copy()

    def n_latents(self) -> int:
        return self.z_logits.size

    def n_answers(self, task: TaskSpec) -> int:
        return 2

    def _features(self, task: TaskSpec) -> np.ndarray:
        if task.option_texts is None:
            raise ValueError("LinearOptionPolicy needs tasks with option_texts")
        return _cached_feature_rows(task.option_texts, task.query)

    def z_probs(self, task: TaskSpec) -> np.ndarray:
        return softmax(self.z_logits)

    def y_probs(self, task: TaskSpec, z: int) -> np.ndarray:
        return softmax(self._features(task) @ self.weights[z])

    def grad_log_z(self, task: TaskSpec, z: int) -> np.ndarray:
        grad = np.zeros(self.n_params())
        block = -self.z_probs(task)
        block[z] += 1.0
        grad[: self.z_logits.size] = block
        return grad

    def grad_log_y(self, task: TaskSpec, z: int, y: int) -> np.ndarray:
        grad = np.zeros(self.n_params())
        features = self._features(task)
        probs = self.y_probs(task, z)
        block = features[y] - probs @ features
        row = self.z_logits.size + z * N_FEATURES
        grad[row : row + N_FEATURES] = block
        return grad


def sample_rollout(policy: Policy, task: TaskSpec, rng: np.random.Generator) -> tuple[int, int]:
    """Draw one (latent, answer) pair from the policy."""
    z = int(rng.choice(policy.n_latents(), p=policy.z_probs(task)))
    y = int(rng.choice(policy.n_answers(task), p=policy.y_probs(task, z)))
    return z, y
