"""Assessment statistics: calibration, F1 reports, random baselines,
inter-annotator agreement, significance tests, correlation, and the
distribution/duplicate summaries reported by the toolkit.

Conventions baked in here (all documented where they apply):
  * Metric assessment is restricted to edges whose gold language-quality
    label is "pass"; skipped gold labels are never scored.
  * GPT-4-generated edges are excluded from metric assessment by default.
  * Validation-split articles are held out of assessment (they are the
    calibration set for mapping functions).
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import textkit
from .corpus import CRITERIA, Corpus, GOLD_ANNOTATOR, LABELS, QudEdge, SKIPPED
from .metrics.mapping import MappingFunction


class EmptyValidation(ValueError):
    pass


class DegenerateData(ValueError):
    pass


class InsufficientAnnotators(ValueError):
    pass


# --- confusion matrix and F1 --------------------------------------------------

@dataclass
class ConfusionMatrix:
    labels: tuple[str, ...]
    counts: list[list[int]]  # rows = gold, cols = predicted

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]], labels: Sequence[str]) -> "ConfusionMatrix":
        index = {label: i for i, label in enumerate(labels)}
        counts = [[0] * len(labels) for _ in labels]
        for gold, pred in pairs:
            if gold not in index:
                raise ValueError(f"gold label {gold!r} outside label order {labels}")
            if pred not in index:
                raise ValueError(f"predicted label {pred!r} outside label order {labels}")
            counts[index[gold]][index[pred]] += 1
        return cls(tuple(labels), counts)

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def f1_per_class(self) -> dict[str, float]:
        out = {}
        for i, label in enumerate(self.labels):
            tp = self.counts[i][i]
            fp = sum(self.counts[r][i] for r in range(len(self.labels))) - tp
            fn = sum(self.counts[i]) - tp
            denom = 2 * tp + fp + fn
            out[label] = (2 * tp / denom) if denom else 0.0
        return out

    def macro_f1(self) -> float:
        per_class = self.f1_per_class()
        return sum(per_class.values()) / len(per_class) if per_class else 0.0

    def to_json(self) -> dict:
        return {"labels": list(self.labels), "counts": self.counts}


def f1_report(
    predicted: Sequence[str],
    gold: Sequence[str],
    label_order: Sequence[str],
) -> dict:
    """Per-class and macro F1 plus the confusion matrix. Callers are expected
    to have filtered skipped gold labels already; any remaining skipped pair
    is dropped here as a safety net."""
    if len(predicted) != len(gold):
        raise ValueError("predicted and gold must have equal length")
    pairs = [(g, p) for g, p in zip(gold, predicted) if g != SKIPPED and p != SKIPPED]
    matrix = ConfusionMatrix.from_pairs(pairs, label_order)
    per_class = matrix.f1_per_class()
    return {
        "per_class_f1": per_class,
        "macro_f1": matrix.macro_f1(),
        "confusion": matrix.to_json(),
        "n": matrix.total,
    }


# --- random baseline -----------------------------------------------------------

def random_baseline(distribution: Mapping[str, float]) -> dict:
    """Expected F1 of a classifier sampling labels from the gold distribution
    itself: precision = recall = g_c in expectation, so E[F1_c] ~= g_c and the
    macro is the mean gold proportion."""
    total = sum(distribution.values())
    if not math.isclose(total, 1.0, abs_tol=1e-6):
        raise ValueError(f"distribution sums to {total}, expected 1")
    per_class = {label: g for label, g in distribution.items()}
    return {
        "per_class_f1": per_class,
        "macro_f1": sum(per_class.values()) / len(per_class),
    }


def simulate_random_baseline(distribution: Mapping[str, float], draws: int = 1_000_000, seed: int = 7) -> dict:
    """Monte-carlo check of the closed form: draw (gold, predicted) pairs
    i.i.d. from the distribution and measure realised per-class F1."""
    labels = list(distribution.keys())
    probs = np.array([distribution[l] for l in labels], dtype=float)
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    gold = rng.choice(len(labels), size=draws, p=probs)
    pred = rng.choice(len(labels), size=draws, p=probs)
    per_class = {}
    for i, label in enumerate(labels):
        tp = int(np.sum((gold == i) & (pred == i)))
        fp = int(np.sum((gold != i) & (pred == i)))
        fn = int(np.sum((gold == i) & (pred != i)))
        denom = 2 * tp + fp + fn
        per_class[label] = (2 * tp / denom) if denom else 0.0
    return {
        "per_class_f1": per_class,
        "macro_f1": sum(per_class.values()) / len(per_class),
    }


# --- calibration ----------------------------------------------------------------

def calibrate_mapping(
    scored: Sequence[tuple[float, str]],
    label_order: Sequence[str],
    score_range: tuple[float, float],
    criterion: str,
    step: Optional[float] = None,
    mapping_id: Optional[str] = None,
) -> MappingFunction:
    """Grid search over monotone threshold tuples maximising macro-F1 on the
    given (score, gold label) sample. Step defaults to 1 on the 1..100 scale
    and 0.01 on [0, 1]. Ties prefer the widest middle band, then the lowest
    thresholds, making the result deterministic."""
    if not scored:
        raise EmptyValidation("no scored examples to calibrate on")
    labels = tuple(label_order)
    k = len(labels)
    lo, hi = score_range
    if step is None:
        step = 1.0 if hi - lo > 2 else 0.01
    missing = [l for l in labels if l not in {g for _, g in scored}]
    if missing:
        import warnings

        warnings.warn(f"calibration sample has no gold examples for: {missing}", stacklevel=2)

    grid = []
    v = lo
    while v <= hi + 1e-9:
        grid.append(round(v, 10))
        v += step

    scores = [s for s, _ in scored]
    gold = [g for _, g in scored]
    for s in scores:
        if not lo <= s <= hi:
            raise ValueError(f"score {s} outside declared range [{lo}, {hi}]")

    best: Optional[tuple] = None
    best_thresholds: Optional[tuple[float, ...]] = None
    for combo in itertools.combinations(sorted(grid, reverse=True), k - 1):
        mapping = MappingFunction(criterion, labels, combo, score_range, "grid")
        predicted = [mapping.label_for(s) for s in scores]
        macro = ConfusionMatrix.from_pairs(list(zip(gold, predicted)), labels).macro_f1()
        if k >= 3:
            middle_width = combo[0] - combo[-1]
        else:
            middle_width = 0.0
        key = (macro, middle_width, tuple(-t for t in combo))
        if best is None or key > best:
            best = key
            best_thresholds = combo
    assert best_thresholds is not None
    return MappingFunction(
        criterion,
        labels,
        best_thresholds,
        score_range,
        mapping_id or f"calibrated-{criterion}",
    )


# --- Krippendorff's alpha --------------------------------------------------------

def krippendorff_alpha(
    ratings: Sequence[Sequence[Optional[str]]],
    level: str,
    label_order: Sequence[str],
) -> float:
    """Alpha from the coincidence matrix. ``ratings`` is annotators x items
    with None for missing; only items with at least two codings pair up.
    nominal distance: 1[c != k]; ordinal distance: squared difference of
    cumulative coincidence-marginal sums over the declared label order."""
    if level not in ("nominal", "ordinal"):
        raise ValueError(f"unknown level {level!r}")
    labels = list(label_order)
    index = {label: i for i, label in enumerate(labels)}
    n_labels = len(labels)

    coincidence = [[0.0] * n_labels for _ in range(n_labels)]
    n_items = len(ratings[0]) if ratings else 0
    pairable_items = 0
    for item in range(n_items):
        values = [row[item] for row in ratings if row[item] is not None]
        m = len(values)
        if m < 2:
            continue
        pairable_items += 1
        for i, a in enumerate(values):
            for j, b in enumerate(values):
                if i == j:
                    continue
                coincidence[index[a]][index[b]] += 1.0 / (m - 1)
    if pairable_items == 0:
        raise DegenerateData("no item has two or more codings")

    marginals = [sum(coincidence[c]) for c in range(n_labels)]
    n = sum(marginals)

    if level == "nominal":
        def delta(c: int, k: int) -> float:
            return 0.0 if c == k else 1.0
    else:
        def delta(c: int, k: int) -> float:
            if c == k:
                return 0.0
            lo_i, hi_i = min(c, k), max(c, k)
            span = sum(marginals[g] for g in range(lo_i, hi_i + 1))
            return (span - (marginals[c] + marginals[k]) / 2.0) ** 2

    d_o = sum(
        coincidence[c][k] * delta(c, k)
        for c in range(n_labels)
        for k in range(n_labels)
    ) / n
    d_e = sum(
        marginals[c] * marginals[k] * delta(c, k)
        for c in range(n_labels)
        for k in range(n_labels)
    ) / (n * (n - 1))
    if d_o == 0.0:
        return 1.0
    if d_e == 0.0:
        raise DegenerateData("expected disagreement is zero but observed is not")
    return 1.0 - d_o / d_e


# --- pairwise F1 and unanimity ---------------------------------------------------

def pairwise_f1(by_item: Mapping[str, Mapping[str, str]]) -> float:
    """Macro-F1 between every ordered annotator pair (first annotator as
    reference), averaged over pairs. Items lacking either annotator are
    dropped per pair; labels absent from both sides of a pair do not dilute
    its macro average."""
    annotators = sorted({a for labels in by_item.values() for a in labels})
    if len(annotators) < 2:
        raise InsufficientAnnotators("pairwise F1 needs at least 2 annotators")
    pair_scores = []
    for ref, hyp in itertools.permutations(annotators, 2):
        pairs = [
            (labels[ref], labels[hyp])
            for labels in by_item.values()
            if ref in labels and hyp in labels
        ]
        if not pairs:
            continue
        observed = sorted({g for g, _ in pairs} | {p for _, p in pairs})
        matrix = ConfusionMatrix.from_pairs(pairs, observed)
        pair_scores.append(matrix.macro_f1())
    if not pair_scores:
        raise InsufficientAnnotators("no annotator pair shares any item")
    return sum(pair_scores) / len(pair_scores)


def unanimity_rate(by_item: Mapping[str, Mapping[str, str]], n_annotators: Optional[int] = None) -> float:
    """Share of items, among those coded by all annotators, where every
    annotator chose the same label."""
    annotators = sorted({a for labels in by_item.values() for a in labels})
    needed = n_annotators or len(annotators)
    full = [labels for labels in by_item.values() if len(labels) >= needed]
    if not full:
        return 0.0
    agreed = sum(1 for labels in full if len(set(labels.values())) == 1)
    return agreed / len(full)


@dataclass
class AgreementReport:
    alpha: dict[str, float]
    alpha_level: dict[str, str]
    unanimity: dict[str, float]
    pairwise_f1: dict[str, float]
    items: dict[str, int]

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "alpha_level": self.alpha_level,
            "unanimity": self.unanimity,
            "pairwise_f1": self.pairwise_f1,
            "items": self.items,
        }


AGREEMENT_LEVELS = {"lang": "nominal", "comp": "ordinal", "givn": "nominal", "relv": "ordinal"}


def agreement_report(corpus: Corpus, min_annotators: int = 2) -> AgreementReport:
    """Agreement over raw (non-gold) annotations on edges with >= 2 coders.
    Skipped labels count as missing for the downstream criteria."""
    raw = [a for a in corpus.annotations if a.annotator_id != GOLD_ANNOTATOR]
    by_edge: dict[str, dict[str, object]] = {}
    for rec in raw:
        by_edge.setdefault(rec.edge_id, {})[rec.annotator_id] = rec.labels
    multi = {e: anns for e, anns in by_edge.items() if len(anns) >= min_annotators}
    if not multi:
        raise InsufficientAnnotators("no edge has two or more raw annotations")

    annotators = sorted({a for anns in multi.values() for a in anns})
    items = sorted(multi)
    alpha, unanimity, pw, counts = {}, {}, {}, {}
    for criterion in CRITERIA:
        matrix: list[list[Optional[str]]] = []
        for annotator in annotators:
            row: list[Optional[str]] = []
            for item in items:
                labels = multi[item].get(annotator)
                value = labels.get(criterion) if labels else None
                row.append(None if value in (None, SKIPPED) else value)
            matrix.append(row)
        pairable = [
            i for i in range(len(items))
            if sum(1 for row in matrix if row[i] is not None) >= 2
        ]
        counts[criterion] = len(pairable)
        if not pairable:
            alpha[criterion] = float("nan")
            unanimity[criterion] = float("nan")
            pw[criterion] = float("nan")
            continue
        alpha[criterion] = krippendorff_alpha(matrix, AGREEMENT_LEVELS[criterion], LABELS[criterion])
        by_item: dict[str, dict[str, str]] = {}
        for idx in pairable:
            labels_here = {
                annotators[r]: matrix[r][idx]
                for r in range(len(annotators))
                if matrix[r][idx] is not None
            }
            by_item[items[idx]] = labels_here
        unanimity[criterion] = unanimity_rate(by_item, n_annotators=len(annotators))
        pw[criterion] = pairwise_f1(by_item)
    return AgreementReport(alpha, dict(AGREEMENT_LEVELS), unanimity, pw, counts)


# --- chi-square -------------------------------------------------------------------

# Upper critical values of the chi-square distribution.
_CHI2_CRITICAL = {
    1: (3.841, 6.635, 10.828),
    2: (5.991, 9.210, 13.816),
    3: (7.815, 11.345, 16.266),
    4: (9.488, 13.277, 18.467),
    5: (11.070, 15.086, 20.515),
    6: (12.592, 16.812, 22.458),
    7: (14.067, 18.475, 24.322),
    8: (15.507, 20.090, 26.125),
    9: (16.919, 21.666, 27.877),
    10: (18.307, 23.209, 29.588),
    11: (19.675, 24.725, 31.264),
    12: (21.026, 26.217, 32.910),
    13: (22.362, 27.688, 34.528),
    14: (23.685, 29.141, 36.123),
    15: (24.996, 30.578, 37.697),
    16: (26.296, 32.000, 39.252),
    17: (27.587, 33.409, 40.790),
    18: (28.869, 34.805, 42.312),
    19: (30.144, 36.191, 43.820),
    20: (31.410, 37.566, 45.315),
}


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    df: int
    p_bracket: str
    significant_05: bool
    merged_labels: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "statistic": self.statistic,
            "df": self.df,
            "p_bracket": self.p_bracket,
            "significant_05": self.significant_05,
            "merged_labels": list(self.merged_labels),
        }


def chi_square_independence(
    counts_a: Sequence[int],
    counts_b: Sequence[int],
    labels: Optional[Sequence[str]] = None,
) -> ChiSquareResult:
    """Pearson statistic over the 2 x L contingency table. Classes whose
    column total is zero contribute nothing and are dropped (reported via
    merged_labels); the p value is bracketed against embedded critical
    values at alpha in {0.05, 0.01, 0.001}."""
    if len(counts_a) != len(counts_b):
        raise ValueError("count vectors must share the label order")
    labels = list(labels) if labels else [f"c{i}" for i in range(len(counts_a))]
    keep = [i for i in range(len(counts_a)) if counts_a[i] + counts_b[i] > 0]
    dropped = tuple(labels[i] for i in range(len(counts_a)) if i not in keep)
    a = [counts_a[i] for i in keep]
    b = [counts_b[i] for i in keep]
    if len(a) < 2:
        raise DegenerateData("need at least two non-empty classes")
    row_a, row_b = sum(a), sum(b)
    total = row_a + row_b
    if row_a == 0 or row_b == 0:
        raise DegenerateData("one distribution is empty")
    statistic = 0.0
    for i in range(len(a)):
        col = a[i] + b[i]
        for observed, row in ((a[i], row_a), (b[i], row_b)):
            expected = row * col / total
            statistic += (observed - expected) ** 2 / expected
    df = len(a) - 1
    critical = _CHI2_CRITICAL.get(df)
    if critical is None:
        raise ValueError(f"no critical values embedded for df={df}")
    c05, c01, c001 = critical
    if statistic >= c001:
        bracket = "p<0.001"
    elif statistic >= c01:
        bracket = "p<0.01"
    elif statistic >= c05:
        bracket = "p<0.05"
    else:
        bracket = "p>=0.05"
    return ChiSquareResult(statistic, df, bracket, statistic >= c05, dropped)


# --- Spearman ------------------------------------------------------------------------

def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def spearman_rho(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Rank with mid-rank ties, then Pearson on the ranks."""
    if len(xs) != len(ys):
        raise ValueError("length mismatch")
    if len(xs) < 3:
        raise ValueError("need at least 3 points")
    rx, ry = _midranks(xs), _midranks(ys)
    mx = sum(rx) / len(rx)
    my = sum(ry) / len(ry)
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    if vx == 0.0 or vy == 0.0:
        raise DegenerateData("constant series has no rank correlation")
    return cov / math.sqrt(vx * vy)


# --- distribution and duplicate reports ------------------------------------------------

@dataclass
class DistributionReport:
    rows: dict[str, dict]  # system -> {"n", "lang_passed", criterion -> {label -> pct}}

    def to_json(self) -> dict:
        return {"rows": self.rows}


def system_distribution_report(corpus: Corpus) -> DistributionReport:
    """Label distribution per system. Language percentages are over all
    questions with a non-skipped gold lang label; comp/givn/relv percentages
    are over the questions that passed language quality."""
    rows: dict[str, dict] = {}
    for system in corpus.systems():
        edges = corpus.edges_for_system(system)
        gold = [(e, corpus.gold_labels(e.edge_id)) for e in edges]
        gold = [(e, g) for e, g in gold if g is not None]
        lang_counted = [g for _, g in gold if g.lang != SKIPPED]
        lang_passed = [g for _, g in gold if g.lang == "pass"]
        row: dict = {
            "n": len(edges),
            "labelled": len(gold),
            "lang_denominator": len(lang_counted),
            "lang_passed": len(lang_passed),
        }
        lang_counts = Counter(g.lang for g in lang_counted)
        row["lang"] = {
            label: (100.0 * lang_counts.get(label, 0) / len(lang_counted)) if lang_counted else None
            for label in LABELS["lang"]
        }
        for criterion in ("comp", "givn", "relv"):
            values = [g.get(criterion) for g in lang_passed if g.get(criterion) != SKIPPED]
            counts = Counter(values)
            row[criterion] = {
                label: (100.0 * counts.get(label, 0) / len(values)) if values else None
                for label in LABELS[criterion]
            }
            row[f"{criterion}_denominator"] = len(values)
        rows[system] = row
    return DistributionReport(rows)


def normalized_question(question: str) -> str:
    return " ".join(question.split()).casefold()


def duplicate_stats(corpus: Corpus, lexicons: Optional[textkit.LexiconBundle] = None) -> dict[str, dict]:
    """Per system: duplicate count (total minus distinct after whitespace
    normalization and case folding), duplicate percentage, and mean token
    length (punctuation tokens excluded)."""
    lex = lexicons or textkit.default_lexicons()
    out: dict[str, dict] = {}
    for system in corpus.systems():
        edges = corpus.edges_for_system(system)
        questions = [e.question for e in edges]
        distinct = len({normalized_question(q) for q in questions})
        duplicates = len(questions) - distinct
        lengths = [
            sum(1 for t in textkit.tokenize(q, lex) if not t.has("punct"))
            for q in questions
        ]
        out[system] = {
            "n": len(questions),
            "duplicates": duplicates,
            "duplicate_pct": (100.0 * duplicates / len(questions)) if questions else 0.0,
            "avg_token_length": (sum(lengths) / len(lengths)) if lengths else 0.0,
        }
    return out


# --- assessment-set selection -----------------------------------------------------------

@dataclass(frozen=True)
class AssessmentFilter:
    exclude_systems: tuple[str, ...] = ("gpt4",)
    exclude_validation_articles: bool = True
    include_dcqa: bool = True

    def admits(self, corpus: Corpus, edge: QudEdge) -> bool:
        if edge.system in self.exclude_systems:
            return False
        if not self.include_dcqa and edge.system == "dcqa-human":
            return False
        if self.exclude_validation_articles:
            if corpus.documents[edge.doc_id].split_tag == "validation":
                return False
        return True


def assessment_edges(
    corpus: Corpus,
    criterion: str,
    flt: Optional[AssessmentFilter] = None,
) -> list[tuple[QudEdge, str]]:
    """Edges eligible for metric assessment on a criterion, paired with their
    gold label: well-formed, admitted by the filter, gold lang = pass, and a
    non-skipped gold label on the criterion."""
    flt = flt or AssessmentFilter()
    out = []
    for edge in corpus.edges.values():
        if not edge.well_formed or not flt.admits(corpus, edge):
            continue
        gold = corpus.gold_labels(edge.edge_id)
        if gold is None or gold.lang != "pass":
            continue
        value = gold.get(criterion)
        if value == SKIPPED:
            continue
        out.append((edge, value))
    return out


def gold_distribution(corpus: Corpus, criterion: str, flt: Optional[AssessmentFilter] = None) -> dict[str, float]:
    pairs = assessment_edges(corpus, criterion, flt)
    counts = Counter(label for _, label in pairs)
    total = sum(counts.values())
    if total == 0:
        raise EmptyValidation(f"no gold labels for criterion {criterion}")
    return {label: counts.get(label, 0) / total for label in LABELS[criterion]}
