"""Rollout metrics: word counts, repeated-evaluation averages, and
reasoning density over think parts.

Reasoning density is steps per word. Steps come either from a rule-based
segmenter (paragraph breaks plus a fixed discourse-marker lexicon at
sentence starts) or from an external sidecar of pre-counted steps.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .verifier import ParsedRollout

# Sentence-initial markers that open a new reasoning step. Matching is
# case-sensitive: these words mark steps only when they start a sentence.
STEP_MARKERS = ("First", "Next", "Then", "Finally", "Also", "So")

_PARAGRAPH_RE = re.compile(r"\n\s*\n")
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")
_MARKER_RE = re.compile(r"^(?:%s)\b" % "|".join(STEP_MARKERS))


def word_count(text: str) -> int:
    """Number of maximal nonempty runs separated by Unicode whitespace."""
    return len(text.split())


@dataclass(frozen=True)
class AvgAtK:
    k: int
    values: tuple[float, ...]
    mean: float


def avg_at_k(values: list[float]) -> AvgAtK:
    """Arithmetic mean over k repeated evaluation runs.

    Summation is exact, so any permutation of the inputs gives the
    bit-identical mean.
    """
    if not values:
        raise ValueError("avg_at_k needs at least one value")
    values = [float(v) for v in values]
    return AvgAtK(k=len(values), values=tuple(values), mean=math.fsum(values) / len(values))


def segment_steps(text: str) -> list[str]:
    """Split think text into reasoning steps.

    A new step starts at every paragraph break and at every sentence that
    begins with a step marker. Empty segments are merged away.
    """
    steps: list[str] = []
    for paragraph in _PARAGRAPH_RE.split(text):
        if not paragraph.strip():
            continue
        current: list[str] = []
        for sentence in _SENTENCE_SPLIT_RE.split(paragraph):
            if not sentence.strip():
                continue
            if current and _MARKER_RE.match(sentence.strip()):
                steps.append(" ".join(current))
                current = []
            current.append(sentence.strip())
        if current:
            steps.append(" ".join(current))
    return steps


def reasoning_density(n_steps: int, n_words: int) -> float:
    """Steps per word. Undefined on empty text."""
    if n_words < 1:
        raise ValueError(f"n_words must be at least 1, got {n_words}")
    if n_steps < 0:
        raise ValueError(f"n_steps must be nonnegative, got {n_steps}")
    return n_steps / n_words


def read_step_counts(path: str | Path) -> dict[str, int]:
    """Load an external step-count sidecar: one {prompt_id, n_steps} per line."""
    counts: dict[str, int] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                prompt_id = record["prompt_id"]
                n_steps = record["n_steps"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"bad sidecar record at line {line_number}: {exc}") from exc
            if not isinstance(n_steps, int) or n_steps < 0:
                raise ValueError(f"bad n_steps at line {line_number}: {n_steps!r}")
            counts[prompt_id] = n_steps
    return counts


def resolve_step_counts(prompt_ids: list[str], counts: dict[str, int]) -> list[int]:
    """Look up one count per rollout id; any missing id is an error."""
    missing = sorted({pid for pid in prompt_ids if pid not in counts})
    if missing:
        raise ValueError(f"sidecar missing step counts for: {', '.join(missing)}")
    return [counts[pid] for pid in prompt_ids]


@dataclass(frozen=True)
class LengthStats:
    n: int
    mean_think_words: float
    mean_response_words: float


def compute_length_stats(parsed: list[ParsedRollout]) -> LengthStats:
    if not parsed:
        raise ValueError("no rollouts")
    think = [word_count(p.think) for p in parsed]
    response = [word_count(p.response) for p in parsed]
    return LengthStats(
        n=len(parsed),
        mean_think_words=math.fsum(think) / len(parsed),
        mean_response_words=math.fsum(response) / len(parsed),
    )


def rollout_densities(
    parsed: list[ParsedRollout], step_counts: list[int] | None = None
) -> tuple[list[float], int]:
    """Per-rollout density over think parts.

    Rollouts with empty think parts have undefined density and are counted
    separately. With step_counts given (one per rollout) the rule-based
    segmenter is bypassed.
    """
    if step_counts is not None and len(step_counts) != len(parsed):
        raise ValueError("need one step count per rollout")
    densities: list[float] = []
    n_undefined = 0
    for i, p in enumerate(parsed):
        words = word_count(p.think)
        if words == 0:
            n_undefined += 1
            continue
        steps = step_counts[i] if step_counts is not None else len(segment_steps(p.think))
        densities.append(reasoning_density(steps, words))
    return densities, n_undefined


def density_summary(densities: list[float], n_undefined: int = 0) -> dict:
    summary: dict = {"n": len(densities), "n_undefined": n_undefined}
    if densities:
        arr = np.asarray(densities)
        summary.update(
            mean=float(arr.mean()),
            median=float(np.median(arr)),
            p90=float(np.percentile(arr, 90)),
        )
    else:
        summary.update(mean=None, median=None, p90=None)
    return summary


def metrics_report(
    parsed: list[ParsedRollout],
    per_rep_accuracies: list[float] | None = None,
    step_counts: list[int] | None = None,
) -> dict:
    """Assemble the metrics report: lengths, density summary, Avg@k table."""
    lengths = compute_length_stats(parsed)
    densities, n_undefined = rollout_densities(parsed, step_counts)
    report = {
        "length_stats": {
            "n": lengths.n,
            "mean_think_words": lengths.mean_think_words,
            "mean_response_words": lengths.mean_response_words,
        },
        "density": density_summary(densities, n_undefined),
        "avg_at_k": None,
    }
    if per_rep_accuracies:
        avg = avg_at_k(per_rep_accuracies)
        report["avg_at_k"] = {"k": avg.k, "values": list(avg.values), "mean": avg.mean}
    return report


def write_metrics_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
