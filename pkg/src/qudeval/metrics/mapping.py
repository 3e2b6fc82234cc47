"""Score-to-label mapping functions.

A mapping converts a raw metric score into one of a criterion's ordinal
labels via strictly decreasing thresholds. Convention: a score equal to a
threshold falls into the *better* band (inclusive upper bound), so with
labels (fully, partially, not_grounded) and thresholds (80, 20) a score of
80 maps to "fully" and 20 to "partially".
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence


class ScoreOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class MappingFunction:
    criterion: str
    labels: tuple[str, ...]  # best -> worst
    thresholds: tuple[float, ...]  # strictly decreasing, len(labels) - 1
    score_range: tuple[float, float]
    mapping_id: str = "unnamed"

    def __post_init__(self):
        if len(self.thresholds) != len(self.labels) - 1:
            raise ValueError("need exactly |labels| - 1 thresholds")
        lo, hi = self.score_range
        if lo >= hi:
            raise ValueError("empty score range")
        previous = None
        for t in self.thresholds:
            if not lo <= t <= hi:
                raise ValueError(f"threshold {t} outside score range [{lo}, {hi}]")
            if previous is not None and t >= previous:
                raise ValueError("thresholds must be strictly decreasing")
            previous = t

    def label_for(self, score: float) -> str:
        lo, hi = self.score_range
        if not lo <= score <= hi:
            raise ScoreOutOfRange(f"score {score} outside [{lo}, {hi}]")
        for label, threshold in zip(self.labels, self.thresholds):
            if score >= threshold:
                return label
        return self.labels[-1]

    def to_json(self) -> dict:
        return {
            "criterion": self.criterion,
            "labels": list(self.labels),
            "thresholds": list(self.thresholds),
            "score_range": list(self.score_range),
            "mapping_id": self.mapping_id,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MappingFunction":
        return cls(
            criterion=obj["criterion"],
            labels=tuple(obj["labels"]),
            thresholds=tuple(obj["thresholds"]),
            score_range=tuple(obj["score_range"]),
            mapping_id=obj.get("mapping_id", "unnamed"),
        )

    @classmethod
    def load(cls, path: Path | str) -> "MappingFunction":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))

    def save(self, path: Path | str) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")


def score_to_label(score: float, mapping: MappingFunction) -> str:
    return mapping.label_for(score)


# Default judge-score mappings on the 1..100 scale. The comp bands are
# disjoint by construction: >80 direct, 60..80 unfocused, <60 not_answered
# (scores are integers, so the 81 threshold realises "over 80").
DEFAULT_COMP_SCORE_MAPPING = MappingFunction(
    criterion="comp",
    labels=("direct", "unfocused", "not_answered"),
    thresholds=(81.0, 60.0),
    score_range=(1.0, 100.0),
    mapping_id="comp-score-default",
)

DEFAULT_RELV_SCORE_MAPPING = MappingFunction(
    criterion="relv",
    labels=("fully", "partially", "not_grounded"),
    thresholds=(80.0, 20.0),
    score_range=(1.0, 100.0),
    mapping_id="relv-score-default",
)

DEFAULT_SCORE_MAPPINGS = {
    "comp": DEFAULT_COMP_SCORE_MAPPING,
    "relv": DEFAULT_RELV_SCORE_MAPPING,
}


def uniform_mapping(criterion: str, labels: Sequence[str], lo: float, hi: float, mapping_id: str) -> MappingFunction:
    """Evenly spaced thresholds; the uncalibrated starting point."""
    k = len(labels)
    step = (hi - lo) / k
    thresholds = tuple(hi - step * i for i in range(1, k))
    return MappingFunction(criterion, tuple(labels), thresholds, (lo, hi), mapping_id)
