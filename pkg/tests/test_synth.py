from __future__ import annotations

import re

import numpy as np
import pytest

from vmrkit.synth import (
    DEFAULT_VOCABULARY,
    RESPONDER_NAMES,
    SyntheticSpec,
    keyword_coverage,
    scripted_rollouts,
    synth_triples,
)
from vmrkit.triples import validate_triple, PreferenceTriple
from vmrkit.verifier import ParseStatus, score_batch
from vmrkit.vmr import batch_build


def _oracle_coverage(text: str, keywords: list[str]) -> int:
    # local recount with its own tokenizer
    tokens = {t.lower() for t in re.findall(r"[A-Za-z]+", text)}
    return sum(kw.lower() in tokens for kw in keywords)


def _required_keywords(query: str) -> list[str]:
    head, _, tail = query.partition(": ")
    assert tail.endswith(".")
    return [w.strip() for w in tail[:-1].split(",")]


def _instances(n=12, seed=5, spec_seed=3):
    triples = synth_triples(SyntheticSpec(n_triples=n, seed=spec_seed))
    return batch_build(triples, master_seed=seed)


# ------------------------------------------------------------------ corpus

def test_synth_is_deterministic():
    spec = SyntheticSpec(n_triples=20, seed=9)
    assert synth_triples(spec) == synth_triples(spec)
    other = synth_triples(SyntheticSpec(n_triples=20, seed=10))
    assert other != synth_triples(spec)


def test_synth_prefix_stability():
    long = synth_triples(SyntheticSpec(n_triples=30, seed=4))
    short = synth_triples(SyntheticSpec(n_triples=10, seed=4))
    assert long[:10] == short


def test_chosen_always_covers_strictly_more_keywords():
    for spec_seed in (0, 1, 2):
        for triple in synth_triples(SyntheticSpec(n_triples=40, seed=spec_seed)):
            keywords = _required_keywords(triple.query)
            assert len(keywords) == 3
            chosen_cov = keyword_coverage(triple.chosen, keywords)
            rejected_cov = keyword_coverage(triple.rejected, keywords)
            assert chosen_cov == len(keywords)
            assert rejected_cov < chosen_cov
            # independent recount agrees
            assert chosen_cov == _oracle_coverage(triple.chosen, keywords)
            assert rejected_cov == _oracle_coverage(triple.rejected, keywords)


def test_synth_triples_pass_validation():
    seen: set[str] = set()
    for triple in synth_triples(SyntheticSpec(n_triples=60, seed=6)):
        record = {
            "id": triple.id,
            "query": triple.query,
            "chosen": triple.chosen,
            "rejected": triple.rejected,
        }
        result = validate_triple(record, seen_ids=seen)
        assert isinstance(result, PreferenceTriple)
        seen.add(triple.id)


def test_keyword_coverage_is_whole_word():
    assert keyword_coverage("the candlestick burns", ["candle"]) == 0
    assert keyword_coverage("the candle burns", ["candle"]) == 1
    assert keyword_coverage("Candle, yes", ["candle"]) == 1
    assert keyword_coverage("", ["candle"]) == 0


def test_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(n_triples=0)
    with pytest.raises(ValueError):
        SyntheticSpec(n_triples=5, n_required_keywords=0)
    with pytest.raises(ValueError, match="infeasible"):
        SyntheticSpec(n_triples=5, n_required_keywords=3, vocabulary=("a", "b", "c", "d", "e"))
    with pytest.raises(ValueError, match="duplicates"):
        SyntheticSpec(n_triples=5, vocabulary=("dawn",) * 10)
    assert len(DEFAULT_VOCABULARY) == len(set(DEFAULT_VOCABULARY))


# -------------------------------------------------------------- responders

def test_always_correct_scores_all_ones():
    instances = _instances()
    rollouts = scripted_rollouts(instances, "always_correct", group_size=4, seed=1)
    verdicts = score_batch(instances, rollouts)
    assert len(verdicts) == len(instances) * 4
    assert all(v.reward == 1 for v in verdicts)


def test_always_a_reward_tracks_slot_assignment():
    instances = _instances(n=30)
    rollouts = scripted_rollouts(instances, "always_a", group_size=2, seed=1)
    verdicts = score_batch(instances, rollouts)
    by_id = {inst.triple_id: inst for inst in instances}
    for v in verdicts:
        assert v.reward == (1 if by_id[v.prompt_id].correct_label == "A" else 0)
    rewards = {v.reward for v in verdicts}
    assert rewards == {0, 1}  # both slots occur over 30 instances


def test_malformed_box_never_earns_reward():
    instances = _instances(n=20)
    rollouts = scripted_rollouts(instances, "malformed_box", group_size=6, seed=2)
    verdicts = score_batch(instances, rollouts)
    assert all(v.reward == 0 for v in verdicts)
    statuses = {v.parse_status for v in verdicts}
    assert ParseStatus.UNPARSEABLE in statuses
    assert ParseStatus.AMBIGUOUS_CONTENT in statuses


def test_p_correct_matches_rate_roughly():
    instances = _instances(n=25)
    for p, lo, hi in ((1.0, 1.0, 1.0), (0.0, 0.0, 0.0), (0.75, 0.65, 0.85)):
        rollouts = scripted_rollouts(instances, "p_correct", group_size=32, seed=3, p=p)
        verdicts = score_batch(instances, rollouts)
        mean = sum(v.reward for v in verdicts) / len(verdicts)
        assert lo <= mean <= hi


def test_mixed_spreads_per_prompt_accuracy():
    instances = _instances(n=40)
    rollouts = scripted_rollouts(instances, "mixed", group_size=16, seed=4)
    verdicts = score_batch(instances, rollouts)
    per_prompt: dict[str, list[int]] = {}
    for v in verdicts:
        per_prompt.setdefault(v.prompt_id, []).append(v.reward)
    accuracies = [sum(r) / len(r) for r in per_prompt.values()]
    assert min(accuracies) < 0.2
    assert max(accuracies) > 0.8
    assert len({round(a, 3) for a in accuracies}) > 5


def test_scripted_rollouts_deterministic_and_grouped():
    instances = _instances(n=6)
    a = scripted_rollouts(instances, "mixed", group_size=3, seed=11)
    b = scripted_rollouts(instances, "mixed", group_size=3, seed=11)
    assert a == b
    assert [r.prompt_id for r in a] == [i.triple_id for i in instances for _ in range(3)]
    c = scripted_rollouts(instances, "mixed", group_size=3, seed=12)
    assert c != a


def test_scripted_rollouts_validation():
    instances = _instances(n=2)
    with pytest.raises(ValueError, match="unknown responder"):
        scripted_rollouts(instances, "oracle", group_size=2, seed=0)
    with pytest.raises(ValueError):
        scripted_rollouts(instances, "mixed", group_size=0, seed=0)
    with pytest.raises(ValueError):
        scripted_rollouts(instances, "p_correct", group_size=2, seed=0, p=1.5)
    assert set(RESPONDER_NAMES) == {
        "always_a", "always_correct", "p_correct", "mixed", "malformed_box"
    }


def test_rollout_texts_have_think_sections_for_scoreable_responders():
    instances = _instances(n=4)
    for responder in ("always_a", "always_correct", "p_correct", "mixed"):
        for rollout in scripted_rollouts(instances, responder, group_size=2, seed=5):
            assert rollout.raw_text.startswith("<think>")
            assert "</think>" in rollout.raw_text
            assert "\\boxed{" in rollout.raw_text
