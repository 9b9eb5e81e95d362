"""Accuracy-band filtering of prompts from grouped verdicts.

Prompts whose rollout accuracy falls outside a closed band are dropped so
training keeps only prompts that are neither hopeless nor saturated. Both
band edges are inclusive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .verifier import Verdict

STATS_HEADER = "prompt_id,n_rollouts,n_correct,accuracy"


@dataclass(frozen=True)
class AccuracyBand:
    lo: float = 0.0
    hi: float = 0.85

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise ValueError(f"need 0 <= lo <= hi <= 1, got lo={self.lo} hi={self.hi}")

    def contains(self, accuracy: float) -> bool:
        return self.lo <= accuracy <= self.hi


@dataclass(frozen=True)
class PromptStats:
    prompt_id: str
    n_rollouts: int
    n_correct: int
    accuracy: float


def compute_stats(verdicts: list[Verdict]) -> list[PromptStats]:
    """Per-prompt rollout counts and accuracy, sorted by prompt id."""
    counts: dict[str, list[int]] = {}
    for verdict in verdicts:
        bucket = counts.setdefault(verdict.prompt_id, [0, 0])
        bucket[0] += 1
        bucket[1] += verdict.reward
    return [
        PromptStats(
            prompt_id=prompt_id,
            n_rollouts=n_rollouts,
            n_correct=n_correct,
            accuracy=n_correct / n_rollouts,
        )
        for prompt_id, (n_rollouts, n_correct) in sorted(counts.items())
    ]


def filter_prompts(
    stats: list[PromptStats], band: AccuracyBand = AccuracyBand()
) -> tuple[list[PromptStats], list[PromptStats]]:
    """Partition stats into (kept, dropped), preserving input order."""
    kept = [s for s in stats if band.contains(s.accuracy)]
    dropped = [s for s in stats if not band.contains(s.accuracy)]
    return kept, dropped


def write_stats_csv(stats: list[PromptStats], path: str | Path) -> None:
    lines = [STATS_HEADER]
    for s in stats:
        lines.append(f"{s.prompt_id},{s.n_rollouts},{s.n_correct},{s.accuracy!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_filter_report(
    band: AccuracyBand,
    kept: list[PromptStats],
    dropped: list[PromptStats],
    path: str | Path,
) -> None:
    report = {
        "band": {"lo": band.lo, "hi": band.hi},
        "n_kept": len(kept),
        "n_dropped": len(dropped),
        "dropped_ids": [s.prompt_id for s in dropped],
    }
    Path(path).write_text(
        json.dumps(report, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def read_filter_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
