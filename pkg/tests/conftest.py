from __future__ import annotations

import pytest

from vmrkit.triples import PreferenceTriple


@pytest.fixture
def fixture_triple() -> PreferenceTriple:
    return PreferenceTriple(
        id="t-001",
        query="Summarize the plan in one sentence.",
        chosen="The plan ships the feature behind a flag, then widens rollout weekly.",
        rejected="Plans are important and should be made carefully.",
    )
