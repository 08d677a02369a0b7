"""Shared test helpers (importable under a collision-free module name)."""

import json
import os

from bonmt.scoring import MetricId, ScoreSet

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def load_fixture_json(name: str):
    with open(fixture_path(name), encoding="utf-8") as fh:
        return json.load(fh)


QE = MetricId(name="qe-sim", kind="qe", role_tags=frozenset({"selection"}))
EVAL = MetricId(name="eval-sim", kind="qe")


def make_scoreset(scores: dict[int, float], metric: MetricId = QE, seg_id: str = "s0") -> ScoreSet:
    return ScoreSet(seg_id=seg_id, metric=metric, scores=scores)
