"""Synthetic preference corpora and scripted responders for pipeline tests.

Each synthetic query names a set of required keywords. The chosen response
always covers strictly more of them than the rejected one, which gives the
corpus a hidden quality oracle that is independent of response length or
slot position. Scripted responders turn instances into rollout texts with
known behavior so every downstream stage can be exercised deterministically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .triples import PreferenceTriple
from .verifier import Rollout
from .vmr import McqInstance

# Filler and keyword stock, disjoint from the query template words so that
# query-term overlap measures required-keyword coverage and nothing else.
DEFAULT_VOCABULARY = (
    "anchor", "basil", "beacon", "bridge", "candle", "canyon", "carbon",
    "cedar", "circuit", "citrus", "cobalt", "comet", "coral", "crystal",
    "dahlia", "delta", "ember", "falcon", "fennel", "fjord", "garnet",
    "geyser", "ginger", "glacier", "granite", "harbor", "hazel", "indigo",
    "iris", "jasper", "juniper", "kestrel", "lagoon", "lantern", "lichen",
    "linden", "lotus", "magnet", "mango", "maple", "marble", "meadow",
    "mesa", "mineral", "monsoon", "mosaic", "moss", "nickel", "nutmeg",
    "obsidian", "onyx", "opal", "orchid", "osprey", "otter", "pebble",
    "pelican", "peony", "pine", "plateau", "prairie", "quartz", "raven",
    "reef", "ridge", "saffron", "sage", "salmon", "sandal", "sapphire",
    "sequoia", "sienna", "spruce", "summit", "sundial", "tidal", "topaz",
    "trellis", "tulip", "tundra", "velvet", "violet", "walnut", "willow",
    "zephyr",
)

RESPONDER_NAMES = ("always_a", "always_correct", "p_correct", "mixed", "malformed_box")

_WORD_RE = re.compile(r"[^\W\d_]+", re.UNICODE)

_THINK_SNIPPETS = (
    "First, read the query and note the requested terms. Then, scan each "
    "response for them. Finally, pick the fuller one.",
    "First, check coverage of the requested points. Also, ignore padding. "
    "So the stronger response stands out.",
    "Next, weigh completeness against clutter. Then, settle the call.",
    "Both responses address the query, but one covers more of the requested "
    "terms than the other.",
)

_MALFORMED_VARIANTS = (
    "No boxed answer appears anywhere in this text.",
    "<think>First, compare. Then, decide.</think>The answer is \\boxed{C}.",
    "<think>I lean toward \\boxed{A} here.</think>See my reasoning above.",
    "<think>unfinished reasoning that never closes or answers",
    "\\boxed{A or B}",
    "",
)


@dataclass(frozen=True)
class SyntheticSpec:
    n_triples: int
    n_required_keywords: int = 3
    seed: int = 0
    vocabulary: tuple[str, ...] = DEFAULT_VOCABULARY

    def __post_init__(self):
        if self.n_triples < 1:
            raise ValueError(f"n_triples must be positive, got {self.n_triples}")
        if self.n_required_keywords < 1:
            raise ValueError("n_required_keywords must be positive")
        if len(set(self.vocabulary)) != len(self.vocabulary):
            raise ValueError("vocabulary must not contain duplicates")
        # Keywords and fillers are drawn disjointly, so the vocabulary must
        # exceed the keyword demand with room for fillers.
        if len(self.vocabulary) < self.n_required_keywords + 4:
            raise ValueError(
                "infeasible synthetic spec: vocabulary of "
                f"{len(self.vocabulary)} cannot support {self.n_required_keywords} "
                "required keywords plus fillers"
            )


def keyword_coverage(text: str, keywords: list[str]) -> int:
    """How many of the keywords appear in the text as whole word tokens."""
    tokens = {match.group(0).lower() for match in _WORD_RE.finditer(text)}
    return sum(1 for kw in keywords if kw.lower() in tokens)


def _phrase(words: list[str]) -> str:
    if len(words) == 1:
        return words[0]
    return ", ".join(words[:-1]) + " and " + words[-1]


def synth_triples(spec: SyntheticSpec) -> list[PreferenceTriple]:
    """Generate the corpus. Same ``SyntheticSpec`` in, same triples out."""
    triples = []
    vocab = list(spec.vocabulary)
    k = spec.n_required_keywords
    for i in range(spec.n_triples):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((spec.seed, i))))
        picks = rng.choice(len(vocab), size=k + 4, replace=False)
        required = [vocab[j] for j in picks[:k]]
        fillers = [vocab[j] for j in picks[k:]]
        query = f"Write a short reply that mentions: {', '.join(required)}."
        n_covered = int(rng.integers(0, k))
        covered = [required[j] for j in sorted(rng.choice(k, size=n_covered, replace=False))]
        chosen_extra = fillers[: int(rng.integers(0, 3))]
        rejected_extra = fillers[2 : 2 + int(rng.integers(0, 3))]
        chosen = f"Here you go: the reply brings in {_phrase(required)}"
        if chosen_extra:
            chosen += f", set against {_phrase(chosen_extra)}"
        chosen += " as asked."
        if covered:
            rejected = f"Sure: this touches {_phrase(covered)}"
        else:
            rejected = "Sure: this keeps things general"
        if rejected_extra:
            rejected += f" and wanders into {_phrase(rejected_extra)}"
        rejected += ", more or less."
        triples.append(
            PreferenceTriple(
                id=f"synth-{i:05d}", query=query, chosen=chosen, rejected=rejected
            )
        )
    return triples


def _boxed_answer(label: str, snippet: str) -> str:
    return f"<think>{snippet}</think>The better response is \\boxed{{{label}}}."


def _flip(label: str) -> str:
    return "B" if label == "A" else "A"


def scripted_rollouts(
    instances: list[McqInstance],
    responder: str,
    group_size: int,
    seed: int,
    p: float = 0.75,
) -> list[Rollout]:
    """Produce group_size rollouts per instance with scripted behavior.

    always_a ignores the prompt and answers A; always_correct reads the
    correct slot; p_correct answers correctly with probability p;
    mixed draws a per-prompt correctness rate uniformly so accuracies
    spread over [0, 1]; malformed_box cycles through pathological outputs.
    """
    if responder not in RESPONDER_NAMES:
        raise ValueError(f"unknown responder {responder!r}, pick one of {RESPONDER_NAMES}")
    if group_size < 1:
        raise ValueError("group_size must be positive")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rollouts = []
    for i, inst in enumerate(instances):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, i))))
        prompt_rate = float(rng.random()) if responder == "mixed" else p
        for _ in range(group_size):
            snippet = _THINK_SNIPPETS[int(rng.integers(len(_THINK_SNIPPETS)))]
            if responder == "always_a":
                text = _boxed_answer("A", snippet)
            elif responder == "always_correct":
                text = _boxed_answer(inst.correct_label, snippet)
            elif responder in ("p_correct", "mixed"):
                correct = bool(rng.random() < prompt_rate)
                label = inst.correct_label if correct else _flip(inst.correct_label)
                text = _boxed_answer(label, snippet)
            else:
                text = _MALFORMED_VARIANTS[int(rng.integers(len(_MALFORMED_VARIANTS)))]
            rollouts.append(Rollout(prompt_id=inst.triple_id, raw_text=text))
    return rollouts
