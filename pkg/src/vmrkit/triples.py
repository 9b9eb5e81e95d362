"""Load, validate, and persist preference triples.

A triple pairs one query with a preferred response (`chosen`) and a
dispreferred one (`rejected`). Input is JSONL, one record per line with
fields id/query/chosen/rejected. Validation is strict: a bad record is
rejected with its line number and a closed-enum reason, never repaired.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from enum import Enum
from pathlib import Path

SCHEMA_VERSION = 1

_FIELDS = ("id", "query", "chosen", "rejected")


class RejectionReason(str, Enum):
    MISSING_FIELD = "missing_field"
    EMPTY_FIELD = "empty_field"
    DUPLICATE_RESPONSES = "duplicate_responses"
    DUPLICATE_ID = "duplicate_id"
    INVALID_JSON = "invalid_json"


@dataclass(frozen=True)
class PreferenceTriple:
    id: str
    query: str
    chosen: str
    rejected: str


@dataclass
class DatasetManifest:
    source_path: str
    n_triples: int
    n_rejected_records: int
    schema_version: int = SCHEMA_VERSION


@dataclass(frozen=True)
class RejectedRecord:
    line_number: int
    reason: RejectionReason


def validate_triple(
    record: object, seen_ids: set[str] | None = None
) -> PreferenceTriple | RejectionReason:
    """Validate one raw record. Returns a triple or the rejection reason.

    Field values must be strings; a present-but-wrong-type field counts as
    missing. Whitespace-only strings count as empty. `chosen` and `rejected`
    must differ byte for byte, and `id` must be unused in `seen_ids`.
    """
    if not isinstance(record, dict):
        return RejectionReason.MISSING_FIELD
    for field in _FIELDS:
        value = record.get(field)
        if not isinstance(value, str):
            return RejectionReason.MISSING_FIELD
        if not value.strip():
            return RejectionReason.EMPTY_FIELD
    if record["chosen"] == record["rejected"]:
        return RejectionReason.DUPLICATE_RESPONSES
    if seen_ids is not None and record["id"] in seen_ids:
        return RejectionReason.DUPLICATE_ID
    return PreferenceTriple(
        id=record["id"],
        query=record["query"],
        chosen=record["chosen"],
        rejected=record["rejected"],
    )


def load_triples(
    path: str | Path,
) -> tuple[list[PreferenceTriple], DatasetManifest, list[RejectedRecord]]:
    """Read a JSONL file of triples.

    Returns accepted triples in input order, a manifest whose counts
    partition the input records, and the per-line rejection log. Blank
    lines are ignored and do not count as records.
    """
    path = Path(path)
    triples: list[PreferenceTriple] = []
    rejected: list[RejectedRecord] = []
    seen_ids: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                rejected.append(RejectedRecord(line_number, RejectionReason.INVALID_JSON))
                continue
            result = validate_triple(record, seen_ids)
            if isinstance(result, RejectionReason):
                rejected.append(RejectedRecord(line_number, result))
                continue
            seen_ids.add(result.id)
            triples.append(result)
    manifest = DatasetManifest(
        source_path=str(path),
        n_triples=len(triples),
        n_rejected_records=len(rejected),
    )
    return triples, manifest, rejected


def write_triples(triples: list[PreferenceTriple], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for triple in triples:
            fh.write(json.dumps(asdict(triple), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(asdict(manifest), ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
