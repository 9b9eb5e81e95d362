from __future__ import annotations

import numpy as np
import pytest

from vmrkit.filtering import (
    STATS_HEADER,
    AccuracyBand,
    PromptStats,
    compute_stats,
    filter_prompts,
    read_filter_report,
    write_filter_report,
    write_stats_csv,
)
from vmrkit.verifier import ParseStatus, Verdict


def _verdicts(prompt_id: str, rewards: list[int]) -> list[Verdict]:
    return [
        Verdict(
            prompt_id=prompt_id,
            reward=r,
            parse_status=ParseStatus.OK_A if r else ParseStatus.OK_B,
            extracted="A" if r else "B",
        )
        for r in rewards
    ]


def _stats(prompt_id: str, n: int, k: int) -> PromptStats:
    return PromptStats(prompt_id=prompt_id, n_rollouts=n, n_correct=k, accuracy=k / n)


# ------------------------------------------------------------------- band

def test_band_default_and_validation():
    band = AccuracyBand()
    assert (band.lo, band.hi) == (0.0, 0.85)
    with pytest.raises(ValueError):
        AccuracyBand(lo=0.9, hi=0.5)
    with pytest.raises(ValueError):
        AccuracyBand(lo=-0.1)
    with pytest.raises(ValueError):
        AccuracyBand(hi=1.5)


def test_band_edges_are_inclusive():
    band = AccuracyBand(lo=0.25, hi=0.75)
    assert band.contains(0.25)
    assert band.contains(0.75)
    assert not band.contains(0.25 - 1e-9)
    assert not band.contains(0.75 + 1e-9)


def test_default_band_keeps_and_drops_reference_points():
    stats = [_stats("p-9000", 20, 18), _stats("p-8500", 20, 17), _stats("p-0000", 20, 0)]
    kept, dropped = filter_prompts(stats)
    kept_ids = [s.prompt_id for s in kept]
    assert "p-8500" in kept_ids  # 0.85 sits on the inclusive edge
    assert "p-0000" in kept_ids  # all-wrong prompts stay under the default floor of 0
    assert [s.prompt_id for s in dropped] == ["p-9000"]  # 0.90 exceeds the cap


# ------------------------------------------------------------------ stats

def test_compute_stats_counts_and_sorts():
    verdicts = (
        _verdicts("p-b", [1, 0, 1, 1])
        + _verdicts("p-a", [0, 0])
        + _verdicts("p-c", [1])
    )
    stats = compute_stats(verdicts)
    assert [s.prompt_id for s in stats] == ["p-a", "p-b", "p-c"]
    assert stats[0] == _stats("p-a", 2, 0)
    assert stats[1] == _stats("p-b", 4, 3)
    assert stats[2] == _stats("p-c", 1, 1)


def test_compute_stats_interleaved_matches_oracle_counts():
    rng = np.random.default_rng(7)
    verdicts = []
    oracle: dict[str, list[int]] = {}
    for _ in range(500):
        pid = f"p-{int(rng.integers(12)):02d}"
        reward = int(rng.integers(2))
        verdicts.extend(_verdicts(pid, [reward]))
        bucket = oracle.setdefault(pid, [0, 0])
        bucket[0] += 1
        bucket[1] += reward
    for s in compute_stats(verdicts):
        n, k = oracle[s.prompt_id]
        assert (s.n_rollouts, s.n_correct) == (n, k)
        assert s.accuracy == k / n
    assert len(compute_stats(verdicts)) == len(oracle)


def test_compute_stats_empty():
    assert compute_stats([]) == []


# ------------------------------------------------------------------ filter

def test_filter_partitions_and_preserves_order():
    stats = [_stats(f"p-{i}", 10, i) for i in range(11)]
    band = AccuracyBand(lo=0.2, hi=0.7)
    kept, dropped = filter_prompts(stats, band)
    assert [s.prompt_id for s in kept] == [f"p-{i}" for i in range(2, 8)]
    assert [s.prompt_id for s in dropped] == ["p-0", "p-1", "p-8", "p-9", "p-10"]
    assert sorted(kept + dropped, key=lambda s: stats.index(s)) == stats


def test_nested_bands_keep_nested_subsets():
    rng = np.random.default_rng(13)
    stats = [
        _stats(f"p-{i}", int(n), int(rng.integers(0, n + 1)))
        for i, n in enumerate(rng.integers(1, 30, size=300))
    ]
    for _ in range(50):
        edges = np.sort(rng.random(4))
        inner = AccuracyBand(lo=float(edges[1]), hi=float(edges[2]))
        outer = AccuracyBand(lo=float(edges[0]), hi=float(edges[3]))
        kept_inner = {s.prompt_id for s in filter_prompts(stats, inner)[0]}
        kept_outer = {s.prompt_id for s in filter_prompts(stats, outer)[0]}
        assert kept_inner <= kept_outer


def test_full_band_keeps_everything():
    stats = [_stats(f"p-{i}", 4, i % 5) for i in range(20)]
    kept, dropped = filter_prompts(stats, AccuracyBand(lo=0.0, hi=1.0))
    assert kept == stats
    assert dropped == []


# -------------------------------------------------------------- artifacts

def test_stats_csv_layout(tmp_path):
    path = tmp_path / "stats.csv"
    write_stats_csv([_stats("p-1", 3, 1), _stats("p-2", 4, 4)], path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == STATS_HEADER
    assert lines[1] == f"p-1,3,1,{(1 / 3)!r}"
    assert lines[2] == "p-2,4,4,1.0"
    assert len(lines) == 3


def test_filter_report_round_trip(tmp_path):
    band = AccuracyBand(lo=0.1, hi=0.8)
    stats = [_stats("p-keep", 10, 5), _stats("p-hi", 10, 9), _stats("p-lo", 10, 0)]
    kept, dropped = filter_prompts(stats, band)
    path = tmp_path / "report.json"
    write_filter_report(band, kept, dropped, path)
    report = read_filter_report(path)
    assert report["band"] == {"lo": 0.1, "hi": 0.8}
    assert report["n_kept"] == 1
    assert report["n_dropped"] == 2
    assert report["dropped_ids"] == ["p-hi", "p-lo"]


def test_filter_report_bytes_are_deterministic(tmp_path):
    band = AccuracyBand()
    stats = [_stats("p-x", 8, 8), _stats("p-y", 8, 2)]
    kept, dropped = filter_prompts(stats, band)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    write_filter_report(band, kept, dropped, a)
    write_filter_report(band, kept, dropped, b)
    assert a.read_bytes() == b.read_bytes()
