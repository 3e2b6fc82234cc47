"""Reference-free metric classifiers: label an edge from the document alone.

Every metric here is a classifier f(answer sentence, anchor sentence,
question, question context) -> label. Rule metrics are pure functions of the
text plus the lexicon bundle; judge metrics go through the LLM gateway and
record their cache key so replay runs are reproducible. Ill-formed edges
(anchor >= answer) receive "skipped" from every metric, mirroring the
annotator protocol.
"""

from __future__ import annotations

from typing import Callable, Optional

from .. import textkit
from ..corpus import Document, QudEdge, SKIPPED
from ..llmgate import LlmGateway, UnparseableResponse, parse_option, parse_score, render_prompt
from ..prompts import GIVN_OPTIONS, RELV_OPTIONS, STRICT_REPROMPT_SUFFIX
from .mapping import DEFAULT_SCORE_MAPPINGS, MappingFunction
from .refbased import bleu1_score
from .verdicts import MetricVerdict


class NoSentenceMatch(ValueError):
    pass


def _skipped(edge: QudEdge, metric_id: str, criterion: str, provenance: dict) -> MetricVerdict:
    return MetricVerdict(edge.edge_id, metric_id, criterion, SKIPPED, None, provenance)


def _context_lemmas(document: Document, k: int, lexicons: textkit.LexiconBundle) -> set[str]:
    lemmas: set[str] = set()
    for sentence in document.context_of(k):
        lemmas.update(textkit.content_lemmas(sentence, lexicons))
    return lemmas


def givenness_rule(
    edge: QudEdge,
    document: Document,
    lexicons: Optional[textkit.LexiconBundle] = None,
) -> MetricVerdict:
    """New content lemmas in the question decide the label: none -> no_new;
    all new ones inside the answer sentence -> answer_leak; else hallucination."""
    lex = lexicons or textkit.default_lexicons()
    provenance = {"lexicon_hash": lex.version_hash}
    if not edge.well_formed:
        return _skipped(edge, "givenness-rule", "givn", provenance)
    question_lemmas = set(textkit.content_lemmas(edge.question, lex))
    context = _context_lemmas(document, edge.anchor_idx, lex)
    new = question_lemmas - context
    if not new:
        label = "no_new"
    else:
        answer_lemmas = set(textkit.content_lemmas(document.sentence(edge.answer_idx), lex))
        label = "answer_leak" if new <= answer_lemmas else "hallucination"
    return MetricVerdict(edge.edge_id, "givenness-rule", "givn", label, None, provenance)


def relevance_rule(
    edge: QudEdge,
    document: Document,
    lexicons: Optional[textkit.LexiconBundle] = None,
) -> MetricVerdict:
    """Focus lemmas (maximal NP of the question, all content lemmas as the
    fallback) checked against the anchor sentence: all present -> fully, none
    -> not_grounded, otherwise partially. An empty focus set degenerates to
    partially."""
    lex = lexicons or textkit.default_lexicons()
    provenance = {"lexicon_hash": lex.version_hash}
    if not edge.well_formed:
        return _skipped(edge, "relevance-rule", "relv", provenance)
    try:
        focus = set(textkit.max_np(edge.question, lex).content_lemmas())
        provenance["focus_source"] = "max_np"
    except textkit.NoNounPhrase:
        focus = set(textkit.content_lemmas(edge.question, lex))
        provenance["focus_source"] = "content_fallback"
    if not focus:
        label = "partially"
    else:
        anchor = set(textkit.content_lemmas(document.sentence(edge.anchor_idx), lex))
        hits = len(focus & anchor)
        if hits == len(focus):
            label = "fully"
        elif hits == 0:
            label = "not_grounded"
        else:
            label = "partially"
    return MetricVerdict(edge.edge_id, "relevance-rule", "relv", label, None, provenance)


# Band edges are inclusive on the partially side: > 0.05 fully,
# 0.01 <= s <= 0.05 partially, < 0.01 not grounded.
BLEU1_SIM_FULL = 0.05
BLEU1_SIM_PARTIAL = 0.01


def bleu1_sim_relevance(edge: QudEdge, document: Document) -> MetricVerdict:
    provenance: dict = {"bands": [BLEU1_SIM_PARTIAL, BLEU1_SIM_FULL]}
    if not edge.well_formed:
        return _skipped(edge, "bleu1-sim", "relv", provenance)
    cand = [t.lower for t in textkit.tokenize(edge.question)]
    ref = [t.lower for t in textkit.tokenize(document.sentence(edge.anchor_idx))]
    score = bleu1_score(cand, ref)
    if score > BLEU1_SIM_FULL:
        label = "fully"
    elif score >= BLEU1_SIM_PARTIAL:
        label = "partially"
    else:
        label = "not_grounded"
    return MetricVerdict(edge.edge_id, "bleu1-sim", "relv", label, score, provenance)


# --- judge metrics -----------------------------------------------------------

def numbered_context(document: Document, k: int) -> str:
    return "\n".join(f"{i} {text}" for i, text in enumerate(document.context_of(k), start=1))


def article_text(document: Document) -> str:
    return " ".join(s.text for s in document.sentences)


_GIVN_LABELS = dict(zip(GIVN_OPTIONS, ("no_new", "answer_leak", "hallucination")))
_RELV_LABELS = dict(zip(RELV_OPTIONS, ("fully", "partially", "not_grounded")))


def _classify(gateway: LlmGateway, prompt: str, options: tuple[str, ...]) -> tuple[str, str]:
    request = gateway.request_for(prompt, max_tokens=64)
    response = gateway.complete(request)
    try:
        return parse_option(response.text, options), request.cache_key()
    except UnparseableResponse:
        retry = gateway.request_for(prompt + STRICT_REPROMPT_SUFFIX, max_tokens=64)
        response = gateway.complete(retry)
        return parse_option(response.text, options), retry.cache_key()


def llm_classify(
    gateway: LlmGateway,
    edge: QudEdge,
    document: Document,
    criterion: str,
    shots: str = "zero",
) -> MetricVerdict:
    """Zero- or few-shot judge classification for givenness or relevance."""
    if shots not in ("zero", "few"):
        raise ValueError("shots must be 'zero' or 'few'")
    suffix = "zs" if shots == "zero" else "fs"
    metric_id = f"gpt-cls-{suffix}"
    if not edge.well_formed:
        return _skipped(edge, metric_id, criterion, {})
    if criterion == "givn":
        prompt = render_prompt(
            f"givn-cls-{suffix}",
            {
                "context": numbered_context(document, edge.anchor_idx),
                "question": edge.question,
                "answer": document.sentence(edge.answer_idx),
            },
        )
        options, labels = GIVN_OPTIONS, _GIVN_LABELS
    elif criterion == "relv":
        prompt = render_prompt(
            f"relv-cls-{suffix}",
            {"question": edge.question, "anchor": document.sentence(edge.anchor_idx)},
        )
        options, labels = RELV_OPTIONS, _RELV_LABELS
    else:
        raise ValueError(f"no classifier prompt for criterion {criterion!r}")
    option, cache_key = _classify(gateway, prompt, options)
    return MetricVerdict(edge.edge_id, metric_id, criterion, labels[option], None, {"cache_key": cache_key})


def llm_score(
    gateway: LlmGateway,
    edge: QudEdge,
    document: Document,
    criterion: str,
    mapping: Optional[MappingFunction] = None,
) -> MetricVerdict:
    """Judge scoring on 1..100 followed by a mapping-function lookup.
    Out-of-range numbers are clamped into the scale."""
    mapping = mapping or DEFAULT_SCORE_MAPPINGS.get(criterion)
    if mapping is None:
        raise ValueError(f"no score mapping for criterion {criterion!r}")
    if not edge.well_formed:
        return _skipped(edge, "gpt-scr", criterion, {"mapping_id": mapping.mapping_id})
    if criterion == "comp":
        prompt = render_prompt(
            "comp-score",
            {
                "article": article_text(document),
                "question": edge.question,
                "answer": document.sentence(edge.answer_idx),
            },
        )
    elif criterion == "relv":
        prompt = render_prompt(
            "relv-score",
            {"question": edge.question, "anchor": document.sentence(edge.anchor_idx)},
        )
    else:
        raise ValueError(f"no scoring prompt for criterion {criterion!r}")
    request = gateway.request_for(prompt, max_tokens=16)
    response = gateway.complete(request)
    score = parse_score(response.text, *mapping.score_range)
    label = mapping.label_for(score)
    return MetricVerdict(
        edge.edge_id,
        "gpt-scr",
        criterion,
        label,
        score,
        {"cache_key": request.cache_key(), "mapping_id": mapping.mapping_id},
    )


def _match_sentence(document: Document, text: str, exclude: Optional[int] = None) -> int:
    """Map free text back onto a sentence index: exact normalized match
    first, then highest unigram overlap. Raises NoSentenceMatch when nothing
    overlaps at all."""
    normalized = " ".join(text.split()).strip().lower()
    candidates = [i for i in range(1, document.n + 1) if i != exclude]
    for i in candidates:
        if " ".join(document.sentence(i).split()).strip().lower() == normalized:
            return i
    text_tokens = {t.lower for t in textkit.tokenize(text) if not t.has("punct")}
    best_idx, best_overlap = None, 0
    for i in candidates:
        sent_tokens = {t.lower for t in textkit.tokenize(document.sentence(i)) if not t.has("punct")}
        overlap = len(text_tokens & sent_tokens)
        if overlap > best_overlap:
            best_idx, best_overlap = i, overlap
    if best_idx is None:
        raise NoSentenceMatch(f"no sentence overlaps with {text!r}")
    return best_idx


def gpt_ans_compatibility(gateway: LlmGateway, edge: QudEdge, document: Document) -> MetricVerdict:
    """Two-step answer probe: generate an answer to the question, then ask
    which article sentence is closest to it. Matching the annotated answer
    index counts as answered (reported as "direct"; the probe cannot tell
    direct from unfocused), anything else as not_answered."""
    if not edge.well_formed:
        return _skipped(edge, "gpt-ans", "comp", {})
    article = article_text(document)
    gen_prompt = render_prompt(
        "comp-answer-generate",
        {
            "article": article,
            "question": edge.question,
            "anchor": document.sentence(edge.anchor_idx),
        },
    )
    gen_request = gateway.request_for(gen_prompt, max_tokens=128)
    generated = gateway.complete(gen_request).text.strip()
    closest_prompt = render_prompt(
        "comp-answer-closest",
        {"article": article, "generated_answer": generated},
    )
    closest_request = gateway.request_for(closest_prompt, max_tokens=128)
    closest = gateway.complete(closest_request).text.strip()
    index = _match_sentence(document, closest)
    label = "direct" if index == edge.answer_idx else "not_answered"
    return MetricVerdict(
        edge.edge_id,
        "gpt-ans",
        "comp",
        label,
        None,
        {
            "cache_key": closest_request.cache_key(),
            "generated_answer_key": gen_request.cache_key(),
            "matched_index": index,
        },
    )


# Pluggable information-status provider: edge -> mention label map using the
# top-level classes {new, old, mediated}. old and mediated are merged (both
# are accessible to the reader), and the leftover "new" mentions run through
# the same leak-vs-hallucination split as the rule metric.
InformationStatusProvider = Callable[[QudEdge, Document], dict[str, str]]


def information_status_givenness(
    edge: QudEdge,
    document: Document,
    provider: InformationStatusProvider,
    lexicons: Optional[textkit.LexiconBundle] = None,
) -> MetricVerdict:
    lex = lexicons or textkit.default_lexicons()
    if not edge.well_formed:
        return _skipped(edge, "info-status", "givn", {})
    statuses = provider(edge, document)
    new_mentions = {m for m, status in statuses.items() if status == "new"}
    if not new_mentions:
        label = "no_new"
    else:
        answer_lemmas = set(textkit.content_lemmas(document.sentence(edge.answer_idx), lex))
        new_lemmas = {textkit.lemma_of(m, lex) for m in new_mentions}
        label = "answer_leak" if new_lemmas <= answer_lemmas else "hallucination"
    return MetricVerdict(edge.edge_id, "info-status", "givn", label, None, {"provider": "external"})
