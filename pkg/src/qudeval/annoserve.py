"""HTTP annotation service.

Persistence is an append-only JSONL journal: every accepted submission is
fsynced before the 201 goes out, resubmissions append a new version (full
audit trail), and the current state is the last record per (edge,
annotator). Reads serve from an in-memory snapshot that is swapped under the
writer lock, so request handlers never block each other on disk.

Task assignment is static: an annotator -> edge list map supplied at startup
(defaulting to every edge for every registered annotator).
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .assess import InsufficientAnnotators, agreement_report
from .corpus import (
    CRITERIA,
    Corpus,
    CriteriaLabels,
    CorpusError,
    GOLD_ANNOTATOR,
    LABELS,
    SKIPPED,
    AnnotationRecord,
)

CRITERION_OPTIONS = {criterion: list(LABELS[criterion]) + [SKIPPED] for criterion in CRITERIA}


class AnnotationIn(BaseModel):
    edge_id: str
    annotator_id: str
    lang: str
    comp: str
    givn: str
    relv: str
    comment: str = ""
    timestamp: str = "1970-01-01T00:00:00Z"


class AnnotationStore:
    """Journal-backed store of annotation submissions."""

    def __init__(self, journal_path: Path | str):
        self.journal_path = Path(journal_path)
        self._lock = threading.Lock()
        self._current: dict[tuple[str, str], AnnotationRecord] = {}
        self._versions = 0
        if self.journal_path.exists():
            self._replay()

    def _replay(self) -> None:
        with self.journal_path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                rec = AnnotationRecord(
                    edge_id=obj["edge_id"],
                    annotator_id=obj["annotator_id"],
                    labels=CriteriaLabels(obj["lang"], obj["comp"], obj["givn"], obj["relv"]),
                    comment=obj.get("comment", ""),
                    timestamp=obj.get("timestamp", "1970-01-01T00:00:00Z"),
                )
                self._current[(rec.edge_id, rec.annotator_id)] = rec
                self._versions += 1

    def append(self, rec: AnnotationRecord) -> None:
        """Durable append: the record is on disk before this returns.
        Later submissions for the same (edge, annotator) win; every version
        stays in the journal."""
        line = json.dumps(
            {
                "edge_id": rec.edge_id,
                "annotator_id": rec.annotator_id,
                "lang": rec.labels.lang,
                "comp": rec.labels.comp,
                "givn": rec.labels.givn,
                "relv": rec.labels.relv,
                "comment": rec.comment,
                "timestamp": rec.timestamp,
            },
            ensure_ascii=False,
        )
        with self._lock:
            self.journal_path.parent.mkdir(parents=True, exist_ok=True)
            with self.journal_path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._current[(rec.edge_id, rec.annotator_id)] = rec
            self._versions += 1

    def snapshot(self) -> list[AnnotationRecord]:
        with self._lock:
            return sorted(self._current.values(), key=lambda r: (r.edge_id, r.annotator_id))

    def completed_by(self, annotator_id: str) -> set[str]:
        with self._lock:
            return {e for (e, a) in self._current if a == annotator_id}

    def version_count(self) -> int:
        with self._lock:
            return self._versions

    def compact(self) -> None:
        """Rewrite the journal keeping only current versions."""
        with self._lock:
            tmp = self.journal_path.with_suffix(".compacting")
            with tmp.open("w", encoding="utf-8") as fh:
                for rec in sorted(self._current.values(), key=lambda r: (r.edge_id, r.annotator_id)):
                    fh.write(
                        json.dumps(
                            {
                                "edge_id": rec.edge_id,
                                "annotator_id": rec.annotator_id,
                                "lang": rec.labels.lang,
                                "comp": rec.labels.comp,
                                "givn": rec.labels.givn,
                                "relv": rec.labels.relv,
                                "comment": rec.comment,
                                "timestamp": rec.timestamp,
                            },
                            ensure_ascii=False,
                        )
                        + "\n"
                    )
                fh.flush()
                os.fsync(fh.fileno())
            tmp.replace(self.journal_path)
            self._versions = len(self._current)


def export_lines(store: AnnotationStore) -> str:
    """Byte-stable labels.jsonl payload for the current store state."""
    lines = []
    for rec in store.snapshot():
        lines.append(
            json.dumps(
                {
                    "edge_id": rec.edge_id,
                    "annotator_id": rec.annotator_id,
                    "lang": rec.labels.lang,
                    "comp": rec.labels.comp,
                    "givn": rec.labels.givn,
                    "relv": rec.labels.relv,
                    "comment": rec.comment,
                    "timestamp": rec.timestamp,
                },
                ensure_ascii=False,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def survey_code(annotator_id: str, edge_ids: list[str]) -> str:
    digest = hashlib.sha256((annotator_id + "|" + "|".join(sorted(edge_ids))).encode("utf-8")).hexdigest()
    return digest[:10].upper()


def _task_view(corpus: Corpus, edge_id: str, ordinal: int, total: int, done: int) -> dict:
    edge = corpus.edges[edge_id]
    doc = corpus.documents[edge.doc_id]
    sentences = []
    for s in doc.sentences:
        roles = []
        if s.index == edge.answer_idx:
            roles.append("answer")
        if s.index == edge.anchor_idx:
            roles.append("anchor")
        if s.index <= edge.anchor_idx:
            roles.append("prior-context")
        if not roles:
            roles.append("post-context")
        sentences.append({"index": s.index, "text": s.text, "roles": roles})
    return {
        "edge_id": edge.edge_id,
        "question": edge.question,
        "ordinal": ordinal,
        "sentences": sentences,
        "anchor_idx": edge.anchor_idx,
        "answer_idx": edge.answer_idx,
        "forced_skip": not edge.well_formed,
        "options": CRITERION_OPTIONS,
        "progress": {"completed": done, "total": total},
    }


def create_app(
    corpus: Corpus,
    store: AnnotationStore,
    assignments: Optional[dict[str, list[str]]] = None,
    static_dir: Optional[Path] = None,
) -> FastAPI:
    if assignments is None:
        all_edges = sorted(corpus.edges)
        assignments = {"default": all_edges}
    for annotator, edge_ids in assignments.items():
        unknown = [e for e in edge_ids if e not in corpus.edges]
        if unknown:
            raise CorpusError(f"assignment for {annotator} references unknown edges: {unknown[:3]}")

    app = FastAPI(title="qudeval annotation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/tasks/next")
    def next_task(annotator: str = Query(...)):
        queue = assignments.get(annotator)
        if queue is None:
            return JSONResponse({"error": f"unknown annotator {annotator!r}"}, status_code=404)
        done = store.completed_by(annotator)
        for ordinal, edge_id in enumerate(queue, start=1):
            if edge_id not in done:
                return _task_view(corpus, edge_id, ordinal, len(queue), len(done & set(queue)))
        return Response(status_code=204)

    @app.post("/api/annotations", status_code=201)
    def submit(payload: AnnotationIn):
        if payload.edge_id not in corpus.edges:
            return JSONResponse({"error": f"unknown edge {payload.edge_id!r}"}, status_code=404)
        labels = CriteriaLabels(payload.lang, payload.comp, payload.givn, payload.relv)
        edge = corpus.edges[payload.edge_id]
        if not edge.well_formed and labels != CriteriaLabels.all_skipped():
            return JSONResponse(
                {"error": "ill-formed edge: all four criteria must be skipped"},
                status_code=422,
            )
        try:
            labels.validate()
        except CorpusError as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        rec = AnnotationRecord(
            edge_id=payload.edge_id,
            annotator_id=payload.annotator_id,
            labels=labels,
            comment=payload.comment,
            timestamp=payload.timestamp,
        )
        store.append(rec)
        return {"status": "stored", "edge_id": rec.edge_id, "annotator_id": rec.annotator_id}

    @app.get("/api/export")
    def export():
        return PlainTextResponse(export_lines(store), media_type="application/jsonl")

    @app.get("/api/agreement")
    def agreement():
        working = Corpus(
            documents=corpus.documents,
            edges=corpus.edges,
            annotations=[r for r in store.snapshot() if r.annotator_id != GOLD_ANNOTATOR],
        )
        try:
            report = agreement_report(working)
        except InsufficientAnnotators as exc:
            return {"status": "insufficient annotators", "detail": str(exc)}
        return {"status": "ok", "report": report.to_json()}

    @app.get("/api/progress")
    def progress(annotator: str = Query(...)):
        queue = assignments.get(annotator)
        if queue is None:
            return JSONResponse({"error": f"unknown annotator {annotator!r}"}, status_code=404)
        done = store.completed_by(annotator) & set(queue)
        flags = [{"edge_id": e, "completed": e in done} for e in queue]
        payload: dict = {"completed": len(done), "total": len(queue), "tasks": flags}
        if len(done) == len(queue) and queue:
            payload["survey_code"] = survey_code(annotator, queue)
        return payload

    @app.get("/api/annotations")
    def list_annotations(annotator: str = Query(...)):
        records = [r for r in store.snapshot() if r.annotator_id == annotator]
        return [
            {
                "edge_id": r.edge_id,
                "lang": r.labels.lang,
                "comp": r.labels.comp,
                "givn": r.labels.givn,
                "relv": r.labels.relv,
                "comment": r.comment,
            }
            for r in records
        ]

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
