"""Metric verdicts and their JSONL serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from ..corpus import LABELS, SKIPPED


@dataclass(frozen=True)
class MetricVerdict:
    edge_id: str
    metric_id: str
    criterion: str  # comp | givn | relv
    predicted_label: str
    raw_score: Optional[float] = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        allowed = LABELS[self.criterion] + (SKIPPED,)
        if self.predicted_label not in allowed:
            raise ValueError(f"label {self.predicted_label!r} not valid for criterion {self.criterion}")

    def to_json(self) -> dict:
        return {
            "edge_id": self.edge_id,
            "metric_id": self.metric_id,
            "criterion": self.criterion,
            "label": self.predicted_label,
            "raw_score": self.raw_score,
            "provenance": self.provenance,
        }


def write_verdicts(verdicts: Iterable[MetricVerdict], path: Path | str) -> int:
    count = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for v in verdicts:
            fh.write(json.dumps(v.to_json(), ensure_ascii=False) + "\n")
            count += 1
    return count


def read_verdicts(path: Path | str) -> list[MetricVerdict]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            out.append(
                MetricVerdict(
                    edge_id=obj["edge_id"],
                    metric_id=obj["metric_id"],
                    criterion=obj["criterion"],
                    predicted_label=obj["label"],
                    raw_score=obj.get("raw_score"),
                    provenance=obj.get("provenance", {}),
                )
            )
    return out
