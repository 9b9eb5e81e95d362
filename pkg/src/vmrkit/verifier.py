"""Rule-based binary scoring of rollouts.

A rollout is split into a think part and a response part on literal
<think>/</think> markers, the final boxed answer is extracted from the
response part only, and the reward is 1 exactly when that answer names the
slot holding the chosen response. Unparseable or off-menu answers score 0;
scoring never raises on arbitrary text.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, asdict
from enum import Enum
from pathlib import Path

from .vmr import McqInstance

THINK_OPEN = "<think>"
THINK_CLOSE = "</think>"

_BOX_RE = re.compile(r"\\boxed\{([^}]*)\}")


class ParseStatus(str, Enum):
    OK_A = "ok_A"
    OK_B = "ok_B"
    UNPARSEABLE = "unparseable"
    AMBIGUOUS_CONTENT = "ambiguous_content"


@dataclass(frozen=True)
class Rollout:
    prompt_id: str
    raw_text: str


@dataclass(frozen=True)
class ParsedRollout:
    think: str
    response: str
    malformed_think: bool = False


@dataclass(frozen=True)
class Verdict:
    prompt_id: str
    reward: int
    parse_status: ParseStatus
    extracted: str | None

    def __post_init__(self):
        if self.reward not in (0, 1):
            raise ValueError(f"reward must be 0 or 1, got {self.reward!r}")


def split_think_response(raw_text: str) -> ParsedRollout:
    """Split raw text on the first <think>...</think> pair.

    Without markers the whole text is the response. An opening marker with
    no closing marker is flagged malformed and the whole text stays in the
    response so a stray boxed answer inside it cannot score.
    """
    open_at = raw_text.find(THINK_OPEN)
    if open_at == -1:
        return ParsedRollout(think="", response=raw_text)
    close_at = raw_text.find(THINK_CLOSE, open_at + len(THINK_OPEN))
    if close_at == -1:
        return ParsedRollout(think="", response=raw_text, malformed_think=True)
    think = raw_text[open_at + len(THINK_OPEN) : close_at]
    response = raw_text[close_at + len(THINK_CLOSE) :]
    return ParsedRollout(think=think, response=response)


def extract_choice(response_text: str) -> tuple[str | None, ParseStatus]:
    """Pull the answer out of the last \\boxed{...} in the response part.

    Box content runs to the first closing brace and is whitespace-trimmed;
    the comparison against A/B is exact and case-sensitive. No box at all is
    unparseable; a box holding anything other than A or B is ambiguous.
    """
    matches = _BOX_RE.findall(response_text)
    if not matches:
        return None, ParseStatus.UNPARSEABLE
    content = matches[-1].strip()
    if content == "A":
        return "A", ParseStatus.OK_A
    if content == "B":
        return "B", ParseStatus.OK_B
    return content, ParseStatus.AMBIGUOUS_CONTENT


def score(instance: McqInstance, rollout: Rollout) -> Verdict:
    """Score one rollout against its instance.

    The rollout must reference the instance it is scored against; a mismatch
    is a hard error, not a zero reward.
    """
    if rollout.prompt_id != instance.triple_id:
        raise ValueError(
            f"rollout prompt_id {rollout.prompt_id!r} does not match "
            f"instance triple_id {instance.triple_id!r}"
        )
    parsed = split_think_response(rollout.raw_text)
    label, status = extract_choice(parsed.response)
    reward = 1 if status in (ParseStatus.OK_A, ParseStatus.OK_B) and label == instance.correct_label else 0
    return Verdict(
        prompt_id=rollout.prompt_id,
        reward=reward,
        parse_status=status,
        extracted=label,
    )


def score_batch(instances: list[McqInstance], rollouts: list[Rollout]) -> list[Verdict]:
    """Score rollouts in input order. Unknown prompt ids are hard errors."""
    by_id = {inst.triple_id: inst for inst in instances}
    verdicts = []
    for rollout in rollouts:
        inst = by_id.get(rollout.prompt_id)
        if inst is None:
            raise ValueError(f"rollout references unknown prompt_id {rollout.prompt_id!r}")
        verdicts.append(score(inst, rollout))
    return verdicts


def score_exact(answer_text: str, reference_text: str) -> int:
    """Binary exact-match reward on whitespace-trimmed text."""
    return 1 if answer_text.strip() == reference_text.strip() else 0


def score_label(label: str, correct_label: str) -> int:
    """Binary choice reward on option labels: 1 iff `label` is the correct slot."""
    if correct_label not in ("A", "B"):
        raise ValueError(f"correct_label must be 'A' or 'B', got {correct_label!r}")
    return 1 if label == correct_label else 0


def write_rollouts(rollouts: list[Rollout], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rollout in rollouts:
            fh.write(json.dumps(asdict(rollout), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def read_rollouts(path: str | Path) -> list[Rollout]:
    rollouts = []
    with Path(path).open(encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                rollouts.append(Rollout(prompt_id=record["prompt_id"], raw_text=record["raw_text"]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"bad rollout record at line {line_number}: {exc}") from exc
    return rollouts


def write_verdicts(verdicts: list[Verdict], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for verdict in verdicts:
            record = asdict(verdict)
            record["parse_status"] = verdict.parse_status.value
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def read_verdicts(path: str | Path) -> list[Verdict]:
    verdicts = []
    with Path(path).open(encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                verdicts.append(
                    Verdict(
                        prompt_id=record["prompt_id"],
                        reward=record["reward"],
                        parse_status=ParseStatus(record["parse_status"]),
                        extracted=record["extracted"],
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"bad verdict record at line {line_number}: {exc}") from exc
    return verdicts
