"""End-to-end evaluation flows shared by the CLI and the acceptance suite:
run metrics over a corpus, calibrate reference-based mappings on the
validation split, assess against gold labels, and build the standard
reports.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from . import assess, textkit
from .corpus import Corpus, LABELS, QudEdge, SKIPPED
from .llmgate import LlmGateway
from .metrics import (
    MappingFunction,
    MetricVerdict,
    QuestionPair,
    bleu1,
    bleu1_sim_relevance,
    givenness_rule,
    gpt_ans_compatibility,
    llm_classify,
    llm_score,
    meteor_lite,
    qsts_arith,
    relevance_rule,
    rouge1_f1,
)

RULE_METRICS = ("givenness-rule", "relevance-rule", "bleu1-sim")
REFBASED_METRICS = {"bleu1": bleu1, "rouge1": rouge1_f1, "meteor": meteor_lite, "qsts": qsts_arith}
METRIC_CRITERION = {"givenness-rule": "givn", "relevance-rule": "relv", "bleu1-sim": "relv"}


def run_rule_metric(corpus: Corpus, metric_id: str) -> list[MetricVerdict]:
    lex = textkit.default_lexicons()
    verdicts = []
    for edge in corpus.edges.values():
        doc = corpus.document_of(edge)
        if metric_id == "givenness-rule":
            verdicts.append(givenness_rule(edge, doc, lex))
        elif metric_id == "relevance-rule":
            verdicts.append(relevance_rule(edge, doc, lex))
        elif metric_id == "bleu1-sim":
            verdicts.append(bleu1_sim_relevance(edge, doc))
        else:
            raise ValueError(f"unknown rule metric {metric_id!r}")
    return verdicts


def run_llm_metric(
    corpus: Corpus,
    metric_id: str,
    gateway: LlmGateway,
    criterion: Optional[str] = None,
    mapping: Optional[MappingFunction] = None,
) -> list[MetricVerdict]:
    verdicts = []
    for edge in corpus.edges.values():
        doc = corpus.document_of(edge)
        if metric_id in ("gpt-cls-zs", "gpt-cls-fs"):
            if criterion is None:
                raise ValueError(f"{metric_id} needs --criterion givn or relv")
            shots = "zero" if metric_id.endswith("zs") else "few"
            verdicts.append(llm_classify(gateway, edge, doc, criterion, shots))
        elif metric_id == "gpt-scr":
            if criterion is None:
                raise ValueError("gpt-scr needs --criterion comp or relv")
            verdicts.append(llm_score(gateway, edge, doc, criterion, mapping))
        elif metric_id == "gpt-ans":
            verdicts.append(gpt_ans_compatibility(gateway, edge, doc))
        else:
            raise ValueError(f"unknown llm metric {metric_id!r}")
    return verdicts


# --- reference-based scoring ---------------------------------------------------

@dataclass(frozen=True)
class ScoredPair:
    edge: QudEdge
    pair: QuestionPair
    score: float


def refbased_pairs(corpus: Corpus, flt: Optional[assess.AssessmentFilter] = None) -> list[tuple[QudEdge, QuestionPair]]:
    """Machine edges that have a human reference question for the same
    (document, answer sentence). dcqa-human edges are skipped: the candidate
    would be its own reference."""
    flt = flt or assess.AssessmentFilter(exclude_validation_articles=False)
    out = []
    for edge in corpus.edges.values():
        if edge.system == "dcqa-human" or not edge.well_formed:
            continue
        if edge.system in flt.exclude_systems:
            continue
        reference = corpus.reference_question_for(edge)
        if reference is None:
            continue
        out.append((edge, QuestionPair(edge.edge_id, edge.question, reference)))
    return out


def score_pairs(pairs: Sequence[tuple[QudEdge, QuestionPair]], metric_id: str) -> list[ScoredPair]:
    fn = REFBASED_METRICS.get(metric_id)
    if fn is None:
        raise ValueError(f"unknown reference-based metric {metric_id!r}")
    return [ScoredPair(edge, pair, fn(pair)) for edge, pair in pairs]


def calibrate_refbased(
    corpus: Corpus,
    metric_id: str,
    criterion: str,
    validation_articles: Optional[Sequence[str]] = None,
) -> MappingFunction:
    """Tune the score -> label thresholds for one metric and criterion on the
    validation split (articles tagged validation unless given explicitly)."""
    if validation_articles is None:
        validation_articles = [d for d, doc in corpus.documents.items() if doc.split_tag == "validation"]
    chosen = set(validation_articles)
    if not chosen:
        raise assess.EmptyValidation("no validation articles tagged or supplied")
    scored = []
    for scored_pair in score_pairs(refbased_pairs(corpus), metric_id):
        if scored_pair.edge.doc_id not in chosen:
            continue
        gold = corpus.gold_labels(scored_pair.edge.edge_id)
        if gold is None or gold.lang != "pass" or gold.get(criterion) == SKIPPED:
            continue
        scored.append((scored_pair.score, gold.get(criterion)))
    return assess.calibrate_mapping(
        scored,
        LABELS[criterion],
        (0.0, 1.0),
        criterion,
        step=0.01,
        mapping_id=f"{metric_id}-{criterion}-validation",
    )


def refbased_verdicts(
    corpus: Corpus,
    metric_id: str,
    criterion: str,
    mapping: MappingFunction,
) -> list[MetricVerdict]:
    """Score every reference-covered edge and map to labels; raw_score is
    always present for reference-based metrics."""
    verdicts = []
    for scored_pair in score_pairs(refbased_pairs(corpus, assess.AssessmentFilter(exclude_systems=())), metric_id):
        verdicts.append(
            MetricVerdict(
                scored_pair.edge.edge_id,
                metric_id,
                criterion,
                mapping.label_for(scored_pair.score),
                scored_pair.score,
                {"mapping_id": mapping.mapping_id},
            )
        )
    return verdicts


def assess_refbased(
    corpus: Corpus,
    metric_id: str,
    criterion: str,
    mapping: MappingFunction,
    flt: Optional[assess.AssessmentFilter] = None,
) -> dict:
    """Apply a calibrated mapping on the assessment set and report F1."""
    flt = flt or assess.AssessmentFilter()
    eligible = {e.edge_id: gold for e, gold in assess.assessment_edges(corpus, criterion, flt)}
    gold_labels, predicted = [], []
    for scored_pair in score_pairs(refbased_pairs(corpus, flt), metric_id):
        gold = eligible.get(scored_pair.edge.edge_id)
        if gold is None:
            continue
        gold_labels.append(gold)
        predicted.append(mapping.label_for(scored_pair.score))
    report = assess.f1_report(predicted, gold_labels, LABELS[criterion])
    report["metric"] = metric_id
    report["criterion"] = criterion
    report["mapping"] = mapping.to_json()
    return report


def assess_verdicts(
    corpus: Corpus,
    verdicts: Sequence[MetricVerdict],
    criterion: str,
    flt: Optional[assess.AssessmentFilter] = None,
) -> dict:
    """F1 of stored verdicts against gold labels on the assessment set."""
    flt = flt or assess.AssessmentFilter()
    eligible = {e.edge_id: gold for e, gold in assess.assessment_edges(corpus, criterion, flt)}
    by_edge = {v.edge_id: v for v in verdicts if v.criterion == criterion}
    gold_labels, predicted = [], []
    for edge_id, gold in eligible.items():
        verdict = by_edge.get(edge_id)
        if verdict is None or verdict.predicted_label == SKIPPED:
            continue
        gold_labels.append(gold)
        predicted.append(verdict.predicted_label)
    report = assess.f1_report(predicted, gold_labels, LABELS[criterion])
    report["criterion"] = criterion
    if verdicts:
        report["metric"] = verdicts[0].metric_id
    return report


# --- standard reports ------------------------------------------------------------

MACHINE_SYSTEMS = ("ko-etal", "chatgpt", "alpaca", "gpt4")


def significance_report(corpus: Corpus) -> dict:
    """Pairwise chi-square over the gold label distributions of the machine
    systems, per downstream criterion."""
    rows = []
    for criterion in ("comp", "givn", "relv"):
        counts: dict[str, list[int]] = {}
        for system in MACHINE_SYSTEMS:
            tally = Counter()
            for edge in corpus.edges_for_system(system):
                gold = corpus.gold_labels(edge.edge_id)
                if gold is None or gold.lang != "pass" or gold.get(criterion) == SKIPPED:
                    continue
                tally[gold.get(criterion)] += 1
            counts[system] = [tally.get(label, 0) for label in LABELS[criterion]]
        systems = [s for s in MACHINE_SYSTEMS if sum(counts[s]) > 0]
        for i, sys_a in enumerate(systems):
            for sys_b in systems[i + 1:]:
                result = assess.chi_square_independence(counts[sys_a], counts[sys_b], LABELS[criterion])
                rows.append({
                    "criterion": criterion,
                    "system_a": sys_a,
                    "system_b": sys_b,
                    **result.to_json(),
                })
    return {"kind": "significance", "rows": rows}


def correlation_report(corpus: Corpus) -> dict:
    """Spearman correlation of each lexical metric with the mean annotated
    question similarity."""
    by_edge: dict[str, list[float]] = {}
    reference: dict[str, str] = {}
    for rec in corpus.similarity:
        by_edge.setdefault(rec.edge_id, []).append(rec.score)
        reference[rec.edge_id] = rec.reference_question
    if not by_edge:
        return {"kind": "correlation", "rows": {}, "n": 0}
    edge_ids = sorted(by_edge)
    mean_similarity = [sum(by_edge[e]) / len(by_edge[e]) for e in edge_ids]
    rows = {}
    for metric_id, fn in REFBASED_METRICS.items():
        scores = []
        for edge_id in edge_ids:
            edge = corpus.edges[edge_id]
            scores.append(fn(QuestionPair(edge_id, edge.question, reference[edge_id])))
        rows[metric_id] = {
            "rho": assess.spearman_rho(scores, mean_similarity),
            "n": len(edge_ids),
        }
    return {"kind": "correlation", "rows": rows, "n": len(edge_ids)}


def distribution_report_json(corpus: Corpus) -> dict:
    report = assess.system_distribution_report(corpus)
    return {"kind": "distributions", "rows": report.rows}


def dupstats_report_json(corpus: Corpus) -> dict:
    return {"kind": "dupstats", "rows": assess.duplicate_stats(corpus)}


def agreement_report_json(corpus: Corpus) -> dict:
    report = assess.agreement_report(corpus)
    return {"kind": "agreement", "report": report.to_json()}
