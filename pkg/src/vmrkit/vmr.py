"""Build verifiable two-option instances from preference triples.

Each triple becomes a multiple-choice instance: the chosen and rejected
responses are placed into slots A and B in a seeded random order, and the
slot holding the chosen response becomes the correct label. The evaluator
prompt is rendered from a golden template whose whitespace is normative;
option bodies are substituted verbatim, never rewritten.
"""

from __future__ import annotations

import importlib.resources
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict, field
from pathlib import Path

from .seeding import coin, derive_seed
from .triples import PreferenceTriple

PROMPT_TEMPLATE = (
    importlib.resources.files("vmrkit.data")
    .joinpath("vmr_prompt_template.txt")
    .read_text(encoding="utf-8")
)

SECTION_MARKERS = (
    "[Response A Start]",
    "[Response A End]",
    "[Response B Start]",
    "[Response B End]",
)

# Word-count proxy for the evaluator context budget; no tokenizer is used,
# so the check is advisory and nothing is ever truncated.
DEFAULT_LENGTH_BUDGET_WORDS = 16384

_PLACEHOLDER_RE = re.compile(r"\{(query|option_a|option_b)\}")


@dataclass(frozen=True)
class McqInstance:
    triple_id: str
    query: str
    option_a: str
    option_b: str
    correct_label: str
    order_seed: int

    def __post_init__(self):
        if self.correct_label not in ("A", "B"):
            raise ValueError(f"correct_label must be 'A' or 'B', got {self.correct_label!r}")

    @property
    def chosen_text(self) -> str:
        return self.option_a if self.correct_label == "A" else self.option_b

    @property
    def rejected_text(self) -> str:
        return self.option_b if self.correct_label == "A" else self.option_a


@dataclass(frozen=True)
class PromptText:
    instance_ref: str
    text: str
    marker_collisions: tuple[str, ...] = field(default=())


def assign_order(triple: PreferenceTriple, order_seed: int) -> McqInstance:
    """Place chosen/rejected into slots A/B by a fair seeded coin.

    Coin 0 puts the chosen response first (correct label A), coin 1 puts it
    second. Pure function: the same (triple, order_seed) always reproduces
    the identical instance.
    """
    if coin(order_seed) == 0:
        option_a, option_b, correct = triple.chosen, triple.rejected, "A"
    else:
        option_a, option_b, correct = triple.rejected, triple.chosen, "B"
    return McqInstance(
        triple_id=triple.id,
        query=triple.query,
        option_a=option_a,
        option_b=option_b,
        correct_label=correct,
        order_seed=order_seed,
    )


def batch_build(
    triples: list[PreferenceTriple], master_seed: int, workers: int = 1
) -> list[McqInstance]:
    """Build one instance per triple, preserving input order.

    Per-instance seeds are derived from (master_seed, index) with a fixed
    mixing function, so shard boundaries and worker count cannot change the
    output.
    """
    seeds = [derive_seed(master_seed, i) for i in range(len(triples))]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(assign_order, triples, seeds))
    return [assign_order(t, s) for t, s in zip(triples, seeds)]


def find_marker_collisions(instance: McqInstance) -> tuple[str, ...]:
    """Section markers that appear inside the query or either option body."""
    bodies = (instance.query, instance.option_a, instance.option_b)
    return tuple(m for m in SECTION_MARKERS if any(m in body for body in bodies))


def render_prompt(instance: McqInstance) -> PromptText:
    """Render the evaluator prompt for an instance.

    Substitution is simultaneous and verbatim. If an option body contains a
    section marker the render still succeeds, with the colliding markers
    attached so callers can flag the instance.
    """
    values = {
        "query": instance.query,
        "option_a": instance.option_a,
        "option_b": instance.option_b,
    }
    text = _PLACEHOLDER_RE.sub(lambda m: values[m.group(1)], PROMPT_TEMPLATE)
    return PromptText(
        instance_ref=instance.triple_id,
        text=text,
        marker_collisions=find_marker_collisions(instance),
    )


_PARSE_RE = re.compile(
    re.escape(PROMPT_TEMPLATE)
    .replace(re.escape("{query}"), "(?P<query>.*?)")
    .replace(re.escape("{option_a}"), "(?P<option_a>.*?)")
    .replace(re.escape("{option_b}"), "(?P<option_b>.*?)"),
    re.DOTALL,
)


def parse_prompt(text: str) -> tuple[str, str, str]:
    """Invert render_prompt: recover (query, option_a, option_b).

    Exact for any instance free of marker collisions; with collisions the
    leftmost-shortest reading wins.
    """
    match = _PARSE_RE.fullmatch(text)
    if match is None:
        raise ValueError("text does not match the evaluator prompt template")
    return match.group("query"), match.group("option_a"), match.group("option_b")


def exceeds_length_budget(
    prompt: PromptText, budget_words: int = DEFAULT_LENGTH_BUDGET_WORDS
) -> bool:
    """True when the rendered prompt's word count exceeds the budget."""
    return len(prompt.text.split()) > budget_words


def position_balance(instances: list[McqInstance]) -> float:
    """Fraction of instances whose correct label is A."""
    if not instances:
        raise ValueError("no instances")
    return sum(1 for inst in instances if inst.correct_label == "A") / len(instances)


def balance_tolerance(n: int) -> float:
    """Three-sigma binomial half-width around 0.5 for n fair draws."""
    return 3.0 * (0.25 / n) ** 0.5


def write_instances(instances: list[McqInstance], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(json.dumps(asdict(inst), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def read_instances(path: str | Path) -> list[McqInstance]:
    instances = []
    with Path(path).open(encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                instances.append(McqInstance(**record))
            except (json.JSONDecodeError, TypeError, ValueError) as exc:
                raise ValueError(f"bad instance record at line {line_number}: {exc}") from exc
    return instances
