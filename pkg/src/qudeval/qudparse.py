"""Prompt-based QUD dependency parsing.

Two steps per answer sentence: generate the question given the article and
the target answer, then ask for the anchor sentence and map the free-text
reply back onto a sentence index. Anchor replies are matched exactly when
possible and by highest unigram overlap otherwise, preferring indices below
the answer; when the model insists on the answer sentence itself and nothing
else overlaps, the edge is kept with anchor == answer and flagged ill-formed
downstream, which is exactly how annotators treat such parses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import textkit
from .assess import normalized_question
from .corpus import Document, QudEdge
from .llmgate import LlmGateway, render_prompt


class EmptyCompletion(RuntimeError):
    pass


class NoAnchorMatch(RuntimeError):
    pass


@dataclass
class ParseRun:
    doc_id: str
    model: str
    edges: list[QudEdge] = field(default_factory=list)
    errors: dict[int, str] = field(default_factory=dict)  # answer_idx -> message
    prompt_template_ids: tuple[str, str] = ("qud-generate-fewshot", "qud-anchor-fewshot")

    def stats(self) -> dict:
        questions = [e.question for e in self.edges]
        distinct = len({normalized_question(q) for q in questions})
        duplicates = len(questions) - distinct
        lengths = [
            sum(1 for t in textkit.tokenize(q) if not t.has("punct"))
            for q in questions
        ]
        return {
            "duplicates": duplicates,
            "duplicate_pct": (100.0 * duplicates / len(questions)) if questions else 0.0,
            "avg_len": (sum(lengths) / len(lengths)) if lengths else 0.0,
            "ill_formed": sum(1 for e in self.edges if not e.well_formed),
            "errors": len(self.errors),
        }


def _article_text(document: Document) -> str:
    return " ".join(s.text for s in document.sentences)


def generate_question(gateway: LlmGateway, document: Document, answer_idx: int) -> str:
    """First non-empty completion line, with any 'Question:' prefix removed."""
    if not 2 <= answer_idx <= document.n:
        raise ValueError(f"answer_idx {answer_idx} out of range 2..{document.n}")
    prompt = render_prompt(
        "qud-generate-fewshot",
        {"context": _article_text(document), "target_answer": document.sentence(answer_idx)},
    )
    response = gateway.complete(gateway.request_for(prompt, max_tokens=96))
    for line in response.text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.lower().startswith("question:"):
            line = line[len("question:"):].strip()
        if line:
            return line
    raise EmptyCompletion(f"empty question completion for {document.doc_id} answer {answer_idx}")


def _overlap(a: str, b: str) -> int:
    ta = {t.lower for t in textkit.tokenize(a) if not t.has("punct")}
    tb = {t.lower for t in textkit.tokenize(b) if not t.has("punct")}
    return len(ta & tb)


def select_anchor(gateway: LlmGateway, document: Document, answer_idx: int, question: str) -> int:
    """Ask for the anchor sentence and resolve it to an index.

    Exact (whitespace/case normalized) matches win; otherwise the highest
    unigram-overlap sentence with index < answer_idx. The answer sentence is
    only returned when no other sentence overlaps the reply at all.
    """
    if not question.strip():
        raise ValueError("question must be non-empty")
    prompt = render_prompt(
        "qud-anchor-fewshot",
        {"context": _article_text(document), "question": question},
    )
    response = gateway.complete(gateway.request_for(prompt, max_tokens=96))
    reply = response.text.strip()
    if reply.lower().startswith("anchor sentence:"):
        reply = reply[len("anchor sentence:"):].strip()
    if not reply:
        raise NoAnchorMatch(f"empty anchor completion for {document.doc_id} answer {answer_idx}")

    normalized = " ".join(reply.split()).casefold()
    preferred = [i for i in range(1, document.n + 1) if i < answer_idx]
    others = [i for i in range(1, document.n + 1) if i > answer_idx]
    for i in preferred + others:
        if " ".join(document.sentence(i).split()).casefold() == normalized:
            return i

    for pool in (preferred, others):
        best_idx, best_overlap = None, 0
        for i in pool:
            overlap = _overlap(reply, document.sentence(i))
            if overlap > best_overlap:
                best_idx, best_overlap = i, overlap
        if best_idx is not None:
            return best_idx

    # Nothing but the answer sentence overlaps: keep the parse, it will be
    # flagged ill-formed (anchor == answer).
    if _overlap(reply, document.sentence(answer_idx)) > 0:
        return answer_idx
    raise NoAnchorMatch(f"anchor reply matches no sentence of {document.doc_id}: {reply!r}")


def parse_document(
    gateway: LlmGateway,
    document: Document,
    answer_indices: Sequence[int],
    system: Optional[str] = None,
) -> ParseRun:
    """Run both steps for every requested answer index. Per-edge failures are
    collected in run.errors without aborting the rest of the run."""
    run = ParseRun(doc_id=document.doc_id, model=gateway.config.model)
    tag = system or f"custom:{gateway.config.model}"
    for answer_idx in answer_indices:
        if not 2 <= answer_idx <= document.n:
            raise ValueError(f"answer_idx {answer_idx} out of range 2..{document.n}")
        try:
            question = generate_question(gateway, document, answer_idx)
            anchor_idx = select_anchor(gateway, document, answer_idx, question)
        except Exception as exc:  # noqa: BLE001 - aggregated per edge
            run.errors[answer_idx] = f"{type(exc).__name__}: {exc}"
            continue
        run.edges.append(
            QudEdge(
                edge_id=f"{document.doc_id}-a{answer_idx}-{tag}",
                doc_id=document.doc_id,
                question=question,
                anchor_idx=anchor_idx,
                answer_idx=answer_idx,
                system=tag,
            )
        )
    return run
