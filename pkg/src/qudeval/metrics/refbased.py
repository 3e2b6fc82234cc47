"""Reference-based similarity metrics between a generated question and a
gold human question. All lexical metrics run on lowercased tokens from
textkit and return scores in [0, 1]; the judge similarity score lives in
[1, 5]. Conversion to criterion labels goes through MappingFunction.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .. import textkit
from ..llmgate import LlmGateway, parse_score, render_prompt
from .embeddings import EmbeddingProvider, cosine


@dataclass(frozen=True)
class QuestionPair:
    edge_id: str
    candidate: str  # generated question
    reference: str  # gold human question

    def __post_init__(self):
        if not self.candidate.strip() or not self.reference.strip():
            raise ValueError("candidate and reference must be non-empty")


def _tokens(text: str) -> list[str]:
    return [t.lower for t in textkit.tokenize(text)]


def bleu1_score(candidate_tokens: Sequence[str], reference_tokens: Sequence[str]) -> float:
    """Unigram clipped precision times brevity penalty exp(1 - r/c) for c < r."""
    c, r = len(candidate_tokens), len(reference_tokens)
    if c == 0 or r == 0:
        return 0.0
    cand_counts = Counter(candidate_tokens)
    ref_counts = Counter(reference_tokens)
    clipped = sum(min(count, ref_counts[tok]) for tok, count in cand_counts.items())
    p1 = clipped / c
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return p1 * bp


def bleu1(pair: QuestionPair) -> float:
    return bleu1_score(_tokens(pair.candidate), _tokens(pair.reference))


def rouge1_f1(pair: QuestionPair) -> float:
    cand, ref = _tokens(pair.candidate), _tokens(pair.reference)
    if not cand or not ref:
        return 0.0
    cand_counts, ref_counts = Counter(cand), Counter(ref)
    overlap = sum(min(count, ref_counts[tok]) for tok, count in cand_counts.items())
    p = overlap / len(cand)
    r = overlap / len(ref)
    if p + r == 0.0:
        return 0.0
    return 2 * p * r / (p + r)


def _align(cand: list[str], ref: list[str], key) -> list[tuple[int, int]]:
    """Greedy left-to-right stage alignment on unmatched positions."""
    pairs = []
    used_ref: set[int] = set()
    for i, tok in enumerate(cand):
        for j, rtok in enumerate(ref):
            if j in used_ref:
                continue
            if key(tok) == key(rtok):
                pairs.append((i, j))
                used_ref.add(j)
                break
    return pairs


def meteor_lite(pair: QuestionPair, synonyms: Optional[dict[str, str]] = None) -> float:
    """Staged unigram alignment (exact, lemma, optional synonym table) scored
    with the classic constants: F_mean = 10PR/(R + 9P), chunk penalty
    0.5 * (chunks / matches)^3."""
    cand, ref = _tokens(pair.candidate), _tokens(pair.reference)
    if not cand or not ref:
        return 0.0

    matched_cand: dict[int, int] = {}
    stages = [lambda t: t, lambda t: textkit.lemma_of(t)]
    if synonyms:
        table = synonyms

        def syn_key(t: str) -> str:
            lemma = textkit.lemma_of(t)
            return table.get(lemma, lemma)

        stages.append(syn_key)

    used_ref: set[int] = set()
    for key in stages:
        remaining_cand = [i for i in range(len(cand)) if i not in matched_cand]
        for i in remaining_cand:
            for j in range(len(ref)):
                if j in used_ref:
                    continue
                if key(cand[i]) == key(ref[j]):
                    matched_cand[i] = j
                    used_ref.add(j)
                    break

    m = len(matched_cand)
    if m == 0:
        return 0.0
    precision = m / len(cand)
    recall = m / len(ref)
    f_mean = 10 * precision * recall / (recall + 9 * precision)

    # Chunks: maximal runs of matches adjacent on both sides.
    pairs = sorted(matched_cand.items())
    chunks = 1
    for (ci, ri), (cj, rj) in zip(pairs, pairs[1:]):
        if cj != ci + 1 or rj != ri + 1:
            chunks += 1
    penalty = 0.5 * (chunks / m) ** 3
    return f_mean * (1.0 - penalty)


_WH_CLASS = {
    "who": "who", "whom": "who", "whose": "who",
    "what": "what", "whatever": "what",
    "when": "when", "whenever": "when",
    "where": "where", "wherever": "where",
    "why": "why",
    "how": "how",
    "which": "which", "whichever": "which",
}


def question_class(question: str) -> str:
    """Coarse taxonomy: first wh-word wins, anything else is yesno."""
    for tok in textkit.tokenize(question):
        cls = _WH_CLASS.get(tok.lower)
        if cls:
            return cls
    return "yesno"


def _jaccard(a: set, b: set, both_empty: float = 1.0) -> float:
    if not a and not b:
        return both_empty
    union = a | b
    return len(a & b) / len(union) if union else both_empty


def qsts_arith(pair: QuestionPair, provider: Optional[EmbeddingProvider] = None) -> float:
    """Arithmetic mean of three sub-scores: question-class agreement, named
    entity Jaccard (1.0 when neither side has entities), and content-token
    similarity (embedding cosine mean when a provider is given, else Jaccard
    over content lemmas). The arithmetic mean keeps entity-free pairs from
    collapsing to zero, unlike a harmonic combination."""
    class_score = 1.0 if question_class(pair.candidate) == question_class(pair.reference) else 0.0

    cand_tokens = textkit.tokenize(pair.candidate)
    ref_tokens = textkit.tokenize(pair.reference)
    cand_names = {t.lower for t in cand_tokens if t.has("name")}
    ref_names = {t.lower for t in ref_tokens if t.has("name")}
    entity_score = _jaccard(cand_names, ref_names)

    cand_content = [t.lemma for t in cand_tokens if t.has("content")]
    ref_content = [t.lemma for t in ref_tokens if t.has("content")]
    if provider is not None and cand_content and ref_content:
        cand_vecs = provider.embed(cand_content)
        ref_vecs = provider.embed(ref_content)
        sims = [max(cosine(cv, rv) for rv in ref_vecs) for cv in cand_vecs]
        content_score = max(0.0, sum(sims) / len(sims))
    else:
        content_score = _jaccard(set(cand_content), set(ref_content))

    return (class_score + entity_score + content_score) / 3.0


def embed_f1(
    pair: QuestionPair,
    provider: EmbeddingProvider,
    rescale_baseline: Optional[float] = None,
) -> float:
    """Greedy max-cosine token matching in both directions, F1 of the two
    means. Optional affine rescale (score - b) / (1 - b), clipped at 0."""
    cand = [t.lower for t in textkit.tokenize(pair.candidate) if not t.has("punct")]
    ref = [t.lower for t in textkit.tokenize(pair.reference) if not t.has("punct")]
    if not cand or not ref:
        return 0.0
    cand_vecs = provider.embed(cand)
    ref_vecs = provider.embed(ref)
    sim = [[cosine(cv, rv) for rv in ref_vecs] for cv in cand_vecs]
    precision = sum(max(row) for row in sim) / len(cand)
    recall = sum(max(sim[i][j] for i in range(len(cand))) for j in range(len(ref))) / len(ref)
    if precision + recall == 0.0:
        return 0.0
    score = 2 * precision * recall / (precision + recall)
    if rescale_baseline is not None:
        score = max(0.0, (score - rescale_baseline) / (1.0 - rescale_baseline))
    return score


def llm_similarity(gateway: LlmGateway, pair: QuestionPair, context: str) -> float:
    """Judge similarity on the 1..5 scale, parsed from the first number in
    the response ("Score: 3.5" included)."""
    prompt = render_prompt(
        "similarity-score",
        {
            "context": context,
            "reference_question": pair.reference,
            "candidate_question": pair.candidate,
        },
    )
    response = gateway.complete(gateway.request_for(prompt, max_tokens=16))
    return parse_score(response.text, 1.0, 5.0)


LEXICAL_METRICS = {
    "bleu1": bleu1,
    "rouge1": rouge1_f1,
    "meteor": meteor_lite,
    "qsts": qsts_arith,
}
