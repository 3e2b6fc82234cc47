#!/usr/bin/env python3
"""Build the small demo corpus plus the recorded LLM fixtures that make
every judge metric and the parser runnable fully offline (replay mode).

Run from the repository root:  python3 tools/make_demo_fixtures.py
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from qudeval.corpus import (
    AnnotationRecord,
    Corpus,
    CriteriaLabels,
    Document,
    QudEdge,
    SentenceRecord,
    SimilarityRecord,
    write_corpus,
)
from qudeval.llmgate import LlmRequest, record_fixture, render_prompt
from qudeval.metrics.reffree import article_text, numbered_context
from qudeval.prompts import STRICT_REPROMPT_SUFFIX

OUT_DIR = Path(__file__).resolve().parent.parent / "data" / "demo"
MODEL = "gpt-4"

NUCLEAR = Document(
    "nuclear",
    tuple(
        SentenceRecord(i, text)
        for i, text in enumerate(
            [
                "U.S. exports of nuclear material cannot be adequately traced, according to a congressional report.",
                "Lawmakers requested the study two years ago.",
                "Investigators visited four processing sites.",
                "Agencies shared shipment records with the panel.",
                "The report says hundreds of tons of plutonium have accumulated worldwide.",
                "Auditors say tracking data is missing for many shipments.",
            ],
            start=1,
        )
    ),
    "test",
)

FLOOD = Document(
    "flood",
    tuple(
        SentenceRecord(i, text)
        for i, text in enumerate(
            [
                "Rivers crossed the valley after heavy storms.",
                "Farmers watched the water rise overnight.",
                "Officials opened the emergency shelters.",
                "Villages moved cattle to higher ground.",
            ],
            start=1,
        )
    ),
    "test",
)

EDGES = [
    QudEdge("demo-1", "nuclear", "What is missing in the report?", 1, 6, "chatgpt"),
    QudEdge("demo-2", "nuclear", "What does the report say is the reason for the export ban?", 1, 5, "chatgpt"),
    QudEdge("demo-3", "nuclear", "What report traces the exports?", 1, 5, "ko-etal"),
    QudEdge("demo-4", "flood", "What rose overnight?", 1, 2, "alpaca"),
    QudEdge("demo-5", "flood", "What did officials open?", 2, 3, "alpaca"),
    QudEdge("demo-6", "flood", "Where did the cattle go?", 3, 4, "ko-etal"),
    QudEdge("demo-ref-1", "flood", "What happened to the water level?", 1, 2, "dcqa-human"),
]

GOLD = {
    "demo-1": CriteriaLabels("pass", "direct", "answer_leak", "partially"),
    "demo-2": CriteriaLabels("pass", "not_answered", "hallucination", "partially"),
    "demo-3": CriteriaLabels("pass", "direct", "no_new", "fully"),
    "demo-4": CriteriaLabels("pass", "direct", "no_new", "fully"),
    "demo-5": CriteriaLabels("pass", "direct", "answer_leak", "partially"),
    "demo-6": CriteriaLabels("pass", "unfocused", "no_new", "not_grounded"),
    "demo-ref-1": CriteriaLabels("pass", "direct", "no_new", "fully"),
}

DOCS = {"nuclear": NUCLEAR, "flood": FLOOD}


def record(fixtures: Path, prompt: str, text: str, max_tokens: int) -> None:
    record_fixture(fixtures, LlmRequest(model=MODEL, prompt=prompt, max_tokens=max_tokens), text)


def seed_judge_fixtures(fixtures: Path) -> None:
    cls_responses = {
        "demo-1": ("[2: Answer leakage]", "[2: Some parts of the question are grounded in the anchor sentence.]"),
        "demo-2": ("[3: Hallucination]", "2"),
        "demo-3": ("1: No new concepts", "[1: The question is fully grounded in the anchor sentence.]"),
        "demo-4": ("[1: No new concepts]", "1"),
        "demo-5": ("I think option 2 fits best", "[2: Some parts of the question are grounded in the anchor sentence.]"),
        "demo-6": ("[1: No new concepts]", "[3: The question is not grounded at all in the anchor sentence.]"),
        "demo-ref-1": ("[1: No new concepts]", "[1: The question is fully grounded in the anchor sentence.]"),
    }
    scr_responses = {
        "demo-1": ("88", "45"),
        "demo-2": ("Score: 35", "30"),
        "demo-3": ("92", "85"),
        "demo-4": ("90", "95"),
        "demo-5": ("75", "40"),
        "demo-6": ("68", "12"),
        "demo-ref-1": ("96", "90"),
    }
    ans_responses = {
        "demo-1": ("Tracking data is missing for many shipments.", 6),
        "demo-2": ("The report does not state a reason for an export ban.", 1),
        "demo-3": ("The congressional report traces nuclear exports.", 1),
        "demo-4": ("The water rose overnight.", 2),
        "demo-5": ("Officials opened the emergency shelters.", 3),
        "demo-6": ("Villages moved cattle to higher ground.", 4),
        "demo-ref-1": ("Farmers watched the water rise overnight.", 2),
    }
    for edge in EDGES:
        doc = DOCS[edge.doc_id]
        givn_reply, relv_reply = cls_responses[edge.edge_id]
        for shots in ("zs", "fs"):
            prompt = render_prompt(
                f"givn-cls-{shots}",
                {
                    "context": numbered_context(doc, edge.anchor_idx),
                    "question": edge.question,
                    "answer": doc.sentence(edge.answer_idx),
                },
            )
            record(fixtures, prompt, givn_reply, 64)
            if givn_reply == "I think option 2 fits best":
                record(fixtures, prompt + STRICT_REPROMPT_SUFFIX, "[2: Answer leakage]", 64)
            prompt = render_prompt(
                f"relv-cls-{shots}",
                {"question": edge.question, "anchor": doc.sentence(edge.anchor_idx)},
            )
            record(fixtures, prompt, relv_reply, 64)
        comp_score, relv_score = scr_responses[edge.edge_id]
        record(
            fixtures,
            render_prompt(
                "comp-score",
                {
                    "article": article_text(doc),
                    "question": edge.question,
                    "answer": doc.sentence(edge.answer_idx),
                },
            ),
            comp_score,
            16,
        )
        record(
            fixtures,
            render_prompt(
                "relv-score",
                {"question": edge.question, "anchor": doc.sentence(edge.anchor_idx)},
            ),
            relv_score,
            16,
        )
        generated, _closest_idx = ans_responses[edge.edge_id]
        record(
            fixtures,
            render_prompt(
                "comp-answer-generate",
                {
                    "article": article_text(doc),
                    "question": edge.question,
                    "anchor": doc.sentence(edge.anchor_idx),
                },
            ),
            generated,
            128,
        )
        record(
            fixtures,
            render_prompt(
                "comp-answer-closest",
                {"article": article_text(doc), "generated_answer": generated},
            ),
            generated,
            128,
        )
        reference = "What happened to the water level?" if edge.doc_id == "flood" else None
        if reference and edge.system != "dcqa-human":
            record(
                fixtures,
                render_prompt(
                    "similarity-score",
                    {
                        "context": article_text(doc),
                        "reference_question": reference,
                        "candidate_question": edge.question,
                    },
                ),
                "Score: 3.5",
                16,
            )


def seed_parser_fixtures(fixtures: Path) -> None:
    questions = {
        2: "What rose overnight?",
        3: "What did officials open?",
        4: "Where did the cattle go?",
    }
    anchors = {
        "What rose overnight?": FLOOD.sentence(1),
        "What did officials open?": "the farmers watched the rising water overnight",
        "Where did the cattle go?": FLOOD.sentence(3),
    }
    article = article_text(FLOOD)
    for answer_idx, question in questions.items():
        prompt = render_prompt(
            "qud-generate-fewshot",
            {"context": article, "target_answer": FLOOD.sentence(answer_idx)},
        )
        record(fixtures, prompt, f"Question: {question}", 96)
        prompt = render_prompt("qud-anchor-fewshot", {"context": article, "question": question})
        record(fixtures, prompt, anchors[question], 96)


def main() -> None:
    corpus = Corpus()
    for doc in (NUCLEAR, FLOOD):
        corpus.documents[doc.doc_id] = doc
    for edge in EDGES:
        corpus.edges[edge.edge_id] = edge
    for i, (edge_id, labels) in enumerate(GOLD.items()):
        corpus.annotations.append(
            AnnotationRecord(edge_id, "gold", labels, "", f"2023-08-01T00:{i:02d}:00Z")
        )
    corpus.similarity.append(SimilarityRecord("demo-4", "What happened to the water level?", "sim-a", 4.0))
    corpus.similarity.append(SimilarityRecord("demo-4", "What happened to the water level?", "sim-b", 5.0))
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    write_corpus(corpus, OUT_DIR)
    fixtures = OUT_DIR / "fixtures"
    seed_judge_fixtures(fixtures)
    seed_parser_fixtures(fixtures)
    count = sum(1 for _ in fixtures.rglob("*.json"))
    print(f"demo corpus written to {OUT_DIR} with {count} fixtures")


if __name__ == "__main__":
    main()
