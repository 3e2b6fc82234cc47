"""Canonical data model for documents, QUD edges, labels and annotations.

Storage is line-delimited JSON, one record per line, UTF-8, with a stable
field order so that load -> write round-trips byte-identically. The loader
validates every structural invariant up front; after that the corpus is
immutable and safe to share across workers.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional

CRITERIA = ("lang", "comp", "givn", "relv")

# Label sets per criterion, ordered best -> worst (the ordinal order used by
# mapping functions and ordinal agreement). "skipped" is valid everywhere.
LABELS = {
    "lang": ("pass", "fail"),
    "comp": ("direct", "unfocused", "not_answered"),
    "givn": ("no_new", "answer_leak", "hallucination"),
    "relv": ("fully", "partially", "not_grounded"),
}
SKIPPED = "skipped"

SYSTEMS = ("ko-etal", "chatgpt", "alpaca", "gpt4", "dcqa-human")
SPLIT_TAGS = ("validation", "test", "train-held-out", "unassigned")

# Reserved annotator id carrying the adjudicated/final label of an edge.
GOLD_ANNOTATOR = "gold"

_TIMESTAMP_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(?:\.\d+)?(?:Z|\+00:00)$")


class CorpusError(ValueError):
    """Schema or invariant violation; carries file and line when known."""

    def __init__(self, message: str, source: Optional[str] = None, line: Optional[int] = None):
        where = f"{source}:{line}: " if source else ""
        super().__init__(where + message)
        self.source = source
        self.line = line


def valid_system(system: str) -> bool:
    return system in SYSTEMS or system.startswith("custom:")


@dataclass(frozen=True)
class SentenceRecord:
    index: int  # 1-based
    text: str


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[SentenceRecord, ...]
    split_tag: str = "unassigned"

    @property
    def n(self) -> int:
        return len(self.sentences)

    def sentence(self, index: int) -> str:
        if not 1 <= index <= self.n:
            raise CorpusError(f"sentence index {index} out of range 1..{self.n} in {self.doc_id}")
        return self.sentences[index - 1].text

    def context_of(self, k: int) -> list[str]:
        """Sentences 1..k — the common ground available at the anchor."""
        if not 1 <= k <= self.n:
            raise CorpusError(f"context index {k} out of range 1..{self.n} in {self.doc_id}")
        return [s.text for s in self.sentences[:k]]


@dataclass(frozen=True)
class QudEdge:
    edge_id: str
    doc_id: str
    question: str
    anchor_idx: int
    answer_idx: int
    system: str

    @property
    def well_formed(self) -> bool:
        return self.anchor_idx < self.answer_idx


@dataclass(frozen=True)
class CriteriaLabels:
    lang: str
    comp: str
    givn: str
    relv: str

    @classmethod
    def all_skipped(cls) -> "CriteriaLabels":
        return cls(SKIPPED, SKIPPED, SKIPPED, SKIPPED)

    def get(self, criterion: str) -> str:
        return getattr(self, criterion)

    def validate(self) -> None:
        for criterion in CRITERIA:
            value = self.get(criterion)
            if value != SKIPPED and value not in LABELS[criterion]:
                raise CorpusError(f"unknown {criterion} label {value!r}")
        if self.lang == "fail" and not (self.comp == self.givn == self.relv == SKIPPED):
            raise CorpusError("lang=fail requires comp/givn/relv to be skipped")


@dataclass(frozen=True)
class AnnotationRecord:
    edge_id: str
    annotator_id: str
    labels: CriteriaLabels
    comment: str = ""
    timestamp: str = "1970-01-01T00:00:00Z"


@dataclass(frozen=True)
class SimilarityRecord:
    edge_id: str
    reference_question: str
    annotator_id: str
    score: float


@dataclass
class Corpus:
    documents: dict[str, Document] = field(default_factory=dict)
    edges: dict[str, QudEdge] = field(default_factory=dict)
    annotations: list[AnnotationRecord] = field(default_factory=list)
    similarity: list[SimilarityRecord] = field(default_factory=list)

    # -- lookups --

    def document_of(self, edge: QudEdge) -> Document:
        return self.documents[edge.doc_id]

    def _annotation_index(self) -> dict[str, list[AnnotationRecord]]:
        cache = getattr(self, "_ann_cache", None)
        if cache is None or cache[0] != len(self.annotations):
            index: dict[str, list[AnnotationRecord]] = {}
            for a in self.annotations:
                index.setdefault(a.edge_id, []).append(a)
            cache = (len(self.annotations), index)
            object.__setattr__(self, "_ann_cache", cache)
        return cache[1]

    def annotations_for(self, edge_id: str) -> list[AnnotationRecord]:
        return list(self._annotation_index().get(edge_id, []))

    def gold_labels(self, edge_id: str) -> Optional[CriteriaLabels]:
        """Final label of an edge: the 'gold' annotator if present, else the
        single raw annotation, else None (multiply-annotated, unadjudicated)."""
        records = self.annotations_for(edge_id)
        for rec in records:
            if rec.annotator_id == GOLD_ANNOTATOR:
                return rec.labels
        if len(records) == 1:
            return records[0].labels
        return None

    def edges_for_system(self, system: str) -> list[QudEdge]:
        return [e for e in self.edges.values() if e.system == system]

    def systems(self) -> list[str]:
        seen: list[str] = []
        for e in self.edges.values():
            if e.system not in seen:
                seen.append(e.system)
        return seen

    def reference_question_for(self, edge: QudEdge) -> Optional[str]:
        """Human reference question: the dcqa-human edge sharing this edge's
        document and answer sentence, when one exists."""
        if edge.system == "dcqa-human":
            return None
        cache = getattr(self, "_ref_cache", None)
        if cache is None or cache[0] != len(self.edges):
            index = {
                (e.doc_id, e.answer_idx): e.question
                for e in self.edges.values()
                if e.system == "dcqa-human"
            }
            cache = (len(self.edges), index)
            object.__setattr__(self, "_ref_cache", cache)
        return cache[1].get((edge.doc_id, edge.answer_idx))

    def summary(self) -> dict:
        per_system: dict[str, int] = {}
        for e in self.edges.values():
            per_system[e.system] = per_system.get(e.system, 0) + 1
        return {
            "documents": len(self.documents),
            "edges": len(self.edges),
            "edges_per_system": dict(sorted(per_system.items())),
            "annotations": len(self.annotations),
            "similarity_records": len(self.similarity),
            "ill_formed_edges": sum(1 for e in self.edges.values() if not e.well_formed),
        }


# --- loading ----------------------------------------------------------------

def _read_jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"invalid JSON ({exc.msg})", str(path), lineno) from exc
            if not isinstance(obj, dict):
                raise CorpusError("record is not an object", str(path), lineno)
            yield lineno, obj


def _require(obj: dict, key: str, source: str, lineno: int):
    if key not in obj:
        raise CorpusError(f"missing field {key!r}", source, lineno)
    return obj[key]


def _parse_document(obj: dict, source: str, lineno: int) -> Document:
    doc_id = _require(obj, "doc_id", source, lineno)
    split_tag = obj.get("split_tag", "unassigned")
    if split_tag not in SPLIT_TAGS:
        raise CorpusError(f"unknown split_tag {split_tag!r}", source, lineno)
    sentences = []
    for s in _require(obj, "sentences", source, lineno):
        idx, text = _require(s, "index", source, lineno), _require(s, "text", source, lineno)
        if not isinstance(idx, int) or idx < 1:
            raise CorpusError(f"sentence index must be a positive integer, got {idx!r}", source, lineno)
        if not isinstance(text, str) or not text.strip():
            raise CorpusError(f"sentence {idx} of {doc_id} has empty text", source, lineno)
        sentences.append(SentenceRecord(idx, text))
    if len(sentences) < 2:
        raise CorpusError(f"document {doc_id} needs at least 2 sentences", source, lineno)
    expected = list(range(1, len(sentences) + 1))
    if [s.index for s in sentences] != expected:
        raise CorpusError(f"document {doc_id} sentence indices must be contiguous 1..n", source, lineno)
    return Document(doc_id, tuple(sentences), split_tag)


def _parse_edge(obj: dict, source: str, lineno: int) -> QudEdge:
    edge = QudEdge(
        edge_id=_require(obj, "edge_id", source, lineno),
        doc_id=_require(obj, "doc_id", source, lineno),
        question=_require(obj, "question", source, lineno),
        anchor_idx=_require(obj, "anchor_idx", source, lineno),
        answer_idx=_require(obj, "answer_idx", source, lineno),
        system=_require(obj, "system", source, lineno),
    )
    if not isinstance(edge.anchor_idx, int) or not isinstance(edge.answer_idx, int):
        raise CorpusError("anchor_idx/answer_idx must be integers", source, lineno)
    if not valid_system(edge.system):
        raise CorpusError(f"unknown system {edge.system!r}", source, lineno)
    if not isinstance(edge.question, str) or not edge.question.strip():
        raise CorpusError(f"edge {edge.edge_id} has an empty question", source, lineno)
    return edge


def load_corpus(path: Path | str) -> Corpus:
    """Load and validate a corpus directory.

    Expects documents.jsonl and edges.jsonl; labels.jsonl and
    similarity.jsonl are optional. Violations raise CorpusError naming the
    offending file and line. Labels on ill-formed edges (anchor >= answer)
    are coerced to all-skipped, mirroring the annotator protocol.
    """
    root = Path(path)
    corpus = Corpus()

    doc_file = root / "documents.jsonl"
    if not doc_file.exists():
        raise CorpusError(f"missing {doc_file}")
    for lineno, obj in _read_jsonl(doc_file):
        doc = _parse_document(obj, str(doc_file), lineno)
        if doc.doc_id in corpus.documents:
            raise CorpusError(f"duplicate doc_id {doc.doc_id!r}", str(doc_file), lineno)
        corpus.documents[doc.doc_id] = doc

    edge_file = root / "edges.jsonl"
    if not edge_file.exists():
        raise CorpusError(f"missing {edge_file}")
    for lineno, obj in _read_jsonl(edge_file):
        edge = _parse_edge(obj, str(edge_file), lineno)
        if edge.edge_id in corpus.edges:
            raise CorpusError(f"duplicate edge_id {edge.edge_id!r}", str(edge_file), lineno)
        doc = corpus.documents.get(edge.doc_id)
        if doc is None:
            raise CorpusError(f"edge {edge.edge_id} references unknown doc {edge.doc_id!r}", str(edge_file), lineno)
        if not 1 <= edge.anchor_idx <= doc.n:
            raise CorpusError(f"edge {edge.edge_id} anchor_idx {edge.anchor_idx} out of range 1..{doc.n}", str(edge_file), lineno)
        if not 2 <= edge.answer_idx <= doc.n:
            raise CorpusError(f"edge {edge.edge_id} answer_idx {edge.answer_idx} out of range 2..{doc.n}", str(edge_file), lineno)
        corpus.edges[edge.edge_id] = edge

    label_file = root / "labels.jsonl"
    if label_file.exists():
        seen: set[tuple[str, str]] = set()
        for lineno, obj in _read_jsonl(label_file):
            edge_id = _require(obj, "edge_id", source=str(label_file), lineno=lineno)
            annotator = _require(obj, "annotator_id", source=str(label_file), lineno=lineno)
            if edge_id not in corpus.edges:
                raise CorpusError(f"label references unknown edge {edge_id!r}", str(label_file), lineno)
            if (edge_id, annotator) in seen:
                raise CorpusError(f"duplicate annotation for ({edge_id}, {annotator})", str(label_file), lineno)
            seen.add((edge_id, annotator))
            labels = CriteriaLabels(
                lang=_require(obj, "lang", str(label_file), lineno),
                comp=_require(obj, "comp", str(label_file), lineno),
                givn=_require(obj, "givn", str(label_file), lineno),
                relv=_require(obj, "relv", str(label_file), lineno),
            )
            if not corpus.edges[edge_id].well_formed:
                labels = CriteriaLabels.all_skipped()
            try:
                labels.validate()
            except CorpusError as exc:
                raise CorpusError(str(exc), str(label_file), lineno) from exc
            timestamp = obj.get("timestamp", "1970-01-01T00:00:00Z")
            if not _TIMESTAMP_RE.match(timestamp):
                raise CorpusError(f"timestamp {timestamp!r} is not a UTC instant", str(label_file), lineno)
            corpus.annotations.append(
                AnnotationRecord(edge_id, annotator, labels, obj.get("comment", ""), timestamp)
            )

    sim_file = root / "similarity.jsonl"
    if sim_file.exists():
        for lineno, obj in _read_jsonl(sim_file):
            edge_id = _require(obj, "edge_id", str(sim_file), lineno)
            if edge_id not in corpus.edges:
                raise CorpusError(f"similarity record references unknown edge {edge_id!r}", str(sim_file), lineno)
            score = _require(obj, "score", str(sim_file), lineno)
            if not isinstance(score, (int, float)) or not 1 <= score <= 5:
                raise CorpusError(f"similarity score {score!r} outside [1,5]", str(sim_file), lineno)
            corpus.similarity.append(
                SimilarityRecord(
                    edge_id,
                    _require(obj, "reference_question", str(sim_file), lineno),
                    _require(obj, "annotator_id", str(sim_file), lineno),
                    float(score),
                )
            )

    return corpus


# --- writing ----------------------------------------------------------------

def _dump(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False)


def write_corpus(corpus: Corpus, path: Path | str) -> None:
    """Write the canonical four files with stable field order."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    with (root / "documents.jsonl").open("w", encoding="utf-8") as fh:
        for doc in corpus.documents.values():
            fh.write(_dump({
                "doc_id": doc.doc_id,
                "sentences": [{"index": s.index, "text": s.text} for s in doc.sentences],
                "split_tag": doc.split_tag,
            }) + "\n")
    with (root / "edges.jsonl").open("w", encoding="utf-8") as fh:
        for edge in corpus.edges.values():
            fh.write(_dump({
                "edge_id": edge.edge_id,
                "doc_id": edge.doc_id,
                "question": edge.question,
                "anchor_idx": edge.anchor_idx,
                "answer_idx": edge.answer_idx,
                "system": edge.system,
            }) + "\n")
    with (root / "labels.jsonl").open("w", encoding="utf-8") as fh:
        for rec in corpus.annotations:
            fh.write(_dump({
                "edge_id": rec.edge_id,
                "annotator_id": rec.annotator_id,
                "lang": rec.labels.lang,
                "comp": rec.labels.comp,
                "givn": rec.labels.givn,
                "relv": rec.labels.relv,
                "comment": rec.comment,
                "timestamp": rec.timestamp,
            }) + "\n")
    with (root / "similarity.jsonl").open("w", encoding="utf-8") as fh:
        for rec in corpus.similarity:
            fh.write(_dump({
                "edge_id": rec.edge_id,
                "reference_question": rec.reference_question,
                "annotator_id": rec.annotator_id,
                "score": rec.score,
            }) + "\n")


# --- splitting ---------------------------------------------------------------

def split_validation(corpus: Corpus, article_ids: Iterable[str]) -> tuple[Corpus, Corpus]:
    """Partition by article: edges (with their labels and similarity records)
    of the named articles form the validation corpus, the rest the test one.
    Documents referenced from both sides are carried into both."""
    ids = list(article_ids)
    unknown = [d for d in ids if d not in corpus.documents]
    if unknown:
        raise CorpusError(f"unknown article ids: {unknown}")
    chosen = set(ids)

    def build(predicate) -> Corpus:
        sub = Corpus()
        sub.edges = {eid: e for eid, e in corpus.edges.items() if predicate(e.doc_id)}
        kept_docs = {e.doc_id for e in sub.edges.values()}
        sub.documents = {
            d: replace(doc, split_tag=("validation" if d in chosen else doc.split_tag))
            for d, doc in corpus.documents.items()
            if d in kept_docs
        }
        sub.annotations = [a for a in corpus.annotations if a.edge_id in sub.edges]
        sub.similarity = [s for s in corpus.similarity if s.edge_id in sub.edges]
        return sub

    return build(lambda d: d in chosen), build(lambda d: d not in chosen)
