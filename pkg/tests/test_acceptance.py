"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with the measured values at its stated tolerance.

Criteria 1-8 run against the released evaluation data under data/release/;
criterion 9 uses the demo corpus and its recorded fixtures under data/demo/;
criterion 10 bundles the cross-module property requirements.
"""

import itertools
import json
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

from qudeval import assess, pipeline, textkit
from qudeval.corpus import LABELS, QudEdge, load_corpus
from qudeval.llmgate import GatewayConfig, LlmGateway, LlmRequest, parse_option, render_prompt
from qudeval.metrics import (
    MappingFunction,
    QuestionPair,
    bleu1,
    meteor_lite,
    qsts_arith,
    rouge1_f1,
)
from qudeval.prompts import GIVN_OPTIONS, TEMPLATES

from test_assess import alpha_oracle, exhaustive_calibration_oracle

RELEASE_DIR = Path(__file__).parent.parent / "data" / "release"
DEMO_DIR = Path(__file__).parent.parent / "data" / "demo"
GOLDEN_DIR = Path(__file__).parent / "goldens"


def report(line: str, ok: bool) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {line}")
    assert ok, line


@pytest.fixture(scope="module")
def release():
    return load_corpus(RELEASE_DIR)


@pytest.fixture(scope="module")
def demo():
    return load_corpus(DEMO_DIR)


class TestCriterion1Distributions:
    TARGETS = {
        "ko-etal": {"lang": (92.5, 7.5), "comp": (52.5, 11.0, 36.5), "givn": (75.6, 12.1, 12.3), "relv": (70.1, 19.3, 10.6)},
        "chatgpt": {"lang": (96.1, 3.9), "comp": (82.4, 8.8, 8.8), "givn": (64.9, 31.2, 3.9), "relv": (56.7, 31.6, 11.6)},
        "alpaca": {"lang": (93.9, 6.1), "comp": (43.2, 16.9, 39.9), "givn": (61.2, 30.7, 8.1), "relv": (46.3, 25.5, 28.2)},
        "gpt4": {"lang": (100.0, 0.0), "comp": (90.6, 3.9, 5.5), "givn": (61.8, 34.3, 3.9), "relv": (54.1, 35.5, 10.4)},
        "dcqa-human": {"lang": (98.0, 2.0), "comp": (71.4, 16.4, 12.2), "givn": (85.7, 10.9, 3.4), "relv": (80.3, 17.7, 2.0)},
    }

    def test_distribution_reproduction(self, release):
        started = time.monotonic()
        rows = assess.system_distribution_report(release).rows
        elapsed = time.monotonic() - started
        worst = 0.0
        for system, spec in self.TARGETS.items():
            for label, target in zip(("pass", "fail"), spec["lang"]):
                worst = max(worst, abs(rows[system]["lang"][label] - target))
            for criterion in ("comp", "givn", "relv"):
                for label, target in zip(LABELS[criterion], spec[criterion]):
                    worst = max(worst, abs(rows[system][criterion][label] - target))
        report(
            f"criterion 1: every release distribution within +/-0.2 of its released value "
            f"(worst {worst:.3f}pp, {elapsed:.2f}s)",
            worst <= 0.2 and elapsed < 10.0,
        )
        spot = rows["ko-etal"]["lang"]["pass"], rows["gpt4"]["lang"]["pass"], rows["gpt4"]["comp"]["direct"]
        report(
            f"criterion 1 spot checks: ko lang {spot[0]:.1f} (92.5), gpt4 lang {spot[1]:.1f} (100.0), "
            f"gpt4 direct {spot[2]:.1f} (90.6)",
            abs(spot[0] - 92.5) <= 0.2 and abs(spot[1] - 100.0) <= 0.2 and abs(spot[2] - 90.6) <= 0.2,
        )


class TestCriterion2Duplicates:
    def test_duplicate_and_length_stats(self, release):
        started = time.monotonic()
        stats = assess.duplicate_stats(release)
        elapsed = time.monotonic() - started
        expected = {"ko-etal": (5, 13.11), "chatgpt": (19, 16.88), "alpaca": (104, 11.45), "gpt4": (16, 15.09)}
        lines = []
        ok = elapsed < 10.0
        for system, (dupes, avg_len) in expected.items():
            got = stats[system]
            ok = ok and got["duplicates"] == dupes and abs(got["avg_token_length"] - avg_len) <= 1.0
            lines.append(f"{system} {got['duplicates']}/{got['avg_token_length']:.2f}")
        report(
            f"criterion 2: duplicates exact and lengths within +/-1.0 ({', '.join(lines)}; {elapsed:.2f}s)",
            ok,
        )


class TestCriterion3RuleMetrics:
    def test_rule_based_assessment(self, release):
        targets = {"givenness-rule": ("givn", 0.37, 0.08), "relevance-rule": ("relv", 0.34, 0.08), "bleu1-sim": ("relv", 0.35, 0.05)}
        ok = True
        parts = []
        for metric_id, (criterion, target, tolerance) in targets.items():
            verdicts = pipeline.run_rule_metric(release, metric_id)
            row = pipeline.assess_verdicts(release, verdicts, criterion)
            ok = ok and abs(row["macro_f1"] - target) <= tolerance
            parts.append(f"{metric_id} {row['macro_f1']:.3f} (target {target}+/-{tolerance})")
        report("criterion 3: " + "; ".join(parts), ok)


class TestCriterion4RandomBaseline:
    def test_analytic_and_simulated(self, release):
        targets = {"comp": 0.35, "givn": 0.32, "relv": 0.34}
        ok = True
        parts = []
        for criterion, target in targets.items():
            dist = assess.gold_distribution(release, criterion)
            closed = assess.random_baseline(dist)
            simulated = assess.simulate_random_baseline(dist, draws=1_000_000, seed=17)
            gap = abs(closed["macro_f1"] - simulated["macro_f1"])
            per_class_gap = max(
                abs(closed["per_class_f1"][l] - simulated["per_class_f1"][l]) for l in dist
            )
            ok = ok and abs(closed["macro_f1"] - target) <= 0.02 and gap < 0.005 and per_class_gap < 0.005
            parts.append(f"{criterion} {closed['macro_f1']:.3f} (target {target}, sim gap {gap:.4f})")
        report("criterion 4: " + "; ".join(parts), ok)


class TestCriterion5ReferenceBased:
    def test_calibrated_reference_metrics(self, release):
        targets = {
            ("bleu1", "comp"): 0.32, ("bleu1", "givn"): 0.32, ("bleu1", "relv"): 0.32,
            ("rouge1", "comp"): 0.34, ("rouge1", "givn"): 0.32, ("rouge1", "relv"): 0.34,
        }
        ok = True
        parts = []
        for (metric_id, criterion), target in targets.items():
            mapping = pipeline.calibrate_refbased(release, metric_id, criterion)
            row = pipeline.assess_refbased(release, metric_id, criterion, mapping)
            ok = ok and abs(row["macro_f1"] - target) <= 0.05
            parts.append(f"{metric_id}/{criterion} {row['macro_f1']:.3f}")
        report(
            "criterion 5: calibrated BLEU-1/ROUGE macro-F1 within +/-0.05 of the released rows "
            f"({'; '.join(parts)}); embedding-F1 rows exempt (property-tested)",
            ok,
        )


class TestCriterion6Agreement:
    def test_release_agreement(self, release):
        table = {
            "lang": (0.56, 0.91, 0.78),
            "comp": (0.52, 0.58, 0.61),
            "givn": (0.48, 0.64, 0.60),
            "relv": (0.51, 0.57, 0.60),
        }
        result = assess.agreement_report(release)
        ok = True
        parts = []
        for criterion, (alpha_t, unanimity_t, pairwise_t) in table.items():
            ok = ok and abs(result.alpha[criterion] - alpha_t) <= 0.02
            ok = ok and abs(result.unanimity[criterion] - unanimity_t) <= 0.02
            ok = ok and abs(result.pairwise_f1[criterion] - pairwise_t) <= 0.02
            parts.append(
                f"{criterion} a={result.alpha[criterion]:.3f}/u={result.unanimity[criterion]:.3f}/f={result.pairwise_f1[criterion]:.3f}"
            )
        report("criterion 6: agreement within +/-0.02 of the released values (" + "; ".join(parts) + ")", ok)

    def test_alpha_oracle_and_perfect_agreement(self):
        rng = random.Random(90125)
        labels = ("x", "y", "z")
        checked = 0
        worst = 0.0
        while checked < 100:
            ratings = [
                [rng.choice(labels) if rng.random() > 0.25 else None for _ in range(12)]
                for _ in range(3)
            ]
            level = rng.choice(["nominal", "ordinal"])
            try:
                ours = assess.krippendorff_alpha(ratings, level, labels)
            except assess.DegenerateData:
                continue
            worst = max(worst, abs(ours - alpha_oracle(ratings, level, labels)))
            checked += 1
        perfect = assess.krippendorff_alpha([["x", "y"], ["x", "y"]], "nominal", labels)
        report(
            f"criterion 6: alpha matches brute-force oracle on 100 random matrices "
            f"(worst |diff| {worst:.2e}) and perfect agreement = {perfect}",
            worst < 1e-9 and perfect == 1.0,
        )


class TestCriterion7Significance:
    def test_pairwise_chi_square_pattern(self, release):
        rows = pipeline.significance_report(release)["rows"]
        exceptions = {("chatgpt", "gpt4", "givn"), ("chatgpt", "gpt4", "relv")}
        ok = True
        wrong = []
        for row in rows:
            key = (row["system_a"], row["system_b"], row["criterion"])
            expected = key not in exceptions
            if row["significant_05"] != expected:
                ok = False
                wrong.append(key)
        report(
            f"criterion 7: all cross-system pairs significant at p<0.05 except chatgpt-gpt4 on givn/relv "
            f"({len(rows)} pairs{'; wrong: ' + str(wrong) if wrong else ''})",
            ok,
        )


class TestCriterion8Correlation:
    def test_spearman_oracle(self):
        def oracle(xs, ys):
            def midrank(values):
                out = []
                for v in values:
                    below = sum(1 for w in values if w < v)
                    equal = sum(1 for w in values if w == v)
                    out.append(below + (equal + 1) / 2)
                return out

            rx, ry = midrank(xs), midrank(ys)
            mx, my = sum(rx) / len(rx), sum(ry) / len(ry)
            cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
            vx = sum((a - mx) ** 2 for a in rx)
            vy = sum((b - my) ** 2 for b in ry)
            return cov / (vx * vy) ** 0.5

        rng = random.Random(411)
        checked = 0
        worst = 0.0
        while checked < 100:
            n = rng.randint(3, 20)
            xs = [rng.randint(0, 8) for _ in range(n)]  # ties guaranteed over runs
            ys = [rng.randint(0, 8) for _ in range(n)]
            if len(set(xs)) < 2 or len(set(ys)) < 2:
                continue
            worst = max(worst, abs(assess.spearman_rho(xs, ys) - oracle(xs, ys)))
            checked += 1
        report(f"criterion 8: spearman matches brute-force rank oracle on 100 series (worst {worst:.2e})", worst < 1e-12)

    def test_release_similarity_correlations(self, release):
        targets = {"bleu1": 0.12, "rouge1": 0.19, "meteor": 0.21, "qsts": 0.23}
        rows = pipeline.correlation_report(release)["rows"]
        ok = True
        parts = []
        for metric_id, target in targets.items():
            rho = rows[metric_id]["rho"]
            ok = ok and abs(rho - target) <= 0.05
            parts.append(f"{metric_id} {rho:.3f} (target {target})")
        report("criterion 8: similarity correlations within +/-0.05 (" + "; ".join(parts) + ")", ok)

    def test_llm_similarity_replay_determinism(self, demo, no_network):
        gateway = LlmGateway(GatewayConfig(mode="replay", model="gpt-4", fixture_dir=DEMO_DIR / "fixtures"))
        from qudeval.metrics import llm_similarity
        from qudeval.metrics.reffree import article_text

        edge = demo.edges["demo-4"]
        doc = demo.document_of(edge)
        pair = QuestionPair(edge.edge_id, edge.question, "What happened to the water level?")
        first = llm_similarity(gateway, pair, article_text(doc))
        second = llm_similarity(gateway, pair, article_text(doc))
        report(
            f"criterion 8: judge similarity rows covered by replay fixtures (score {first} deterministic)",
            first == second == 3.5,
        )


class TestCriterion9LlmPipeline:
    SAMPLE_SLOTS = {
        "context": "1 Rivers crossed the valley. 2 Farmers watched the water rise.",
        "target_answer": "Farmers watched the water rise.",
        "question": "What did farmers watch?",
        "answer": "Farmers watched the water rise.",
        "anchor": "Rivers crossed the valley.",
        "article": "Rivers crossed the valley. Farmers watched the water rise.",
        "generated_answer": "The farmers watched the rising water.",
        "reference_question": "What rose in the valley?",
        "candidate_question": "What did farmers watch?",
    }

    def test_prompt_goldens_byte_exact(self):
        mismatches = []
        for template_id, template in sorted(TEMPLATES.items()):
            slots = {name: self.SAMPLE_SLOTS[name] for name in template.required_slots}
            rendered = render_prompt(template_id, slots)
            golden = (GOLDEN_DIR / f"{template_id}.txt").read_text(encoding="utf-8")
            if rendered != golden:
                mismatches.append(template_id)
        report(
            f"criterion 9: {len(TEMPLATES)} prompt templates round-trip byte-exact against goldens",
            not mismatches,
        )

    def test_parse_option_formats(self):
        bracket = parse_option("[3: Hallucination]", GIVN_OPTIONS)
        bare = parse_option("2", GIVN_OPTIONS)
        report(
            "criterion 9: parse_option handles '[n: label]' and bare numbers",
            bracket == "Hallucination" and bare == "Answer leakage",
        )

    def test_replay_evaluate_byte_deterministic_offline(self, tmp_path, no_network):
        argv = [
            "evaluate", "--corpus", str(DEMO_DIR),
            "--metric", "gpt-cls-zs", "--criterion", "givn",
            "--mode", "replay", "--fixtures", str(DEMO_DIR / "fixtures"),
        ]
        from qudeval.cli import main

        outputs = []
        for run in ("a", "b"):
            out = tmp_path / run
            code = main(argv + ["--out", str(out)])
            assert code == 0
            outputs.append((out / "verdicts.jsonl").read_bytes())
        report(
            "criterion 9: replay-mode evaluate is byte-deterministic with zero network activity",
            outputs[0] == outputs[1] and len(outputs[0]) > 0,
        )

    def test_replay_parse_deterministic_offline(self, demo, no_network):
        from qudeval.qudparse import parse_document

        gateway = LlmGateway(GatewayConfig(mode="replay", model="gpt-4", fixture_dir=DEMO_DIR / "fixtures"))
        runs = [parse_document(gateway, demo.documents["flood"], [2, 3, 4]) for _ in range(2)]
        identical = [e.__dict__ for e in runs[0].edges] == [e.__dict__ for e in runs[1].edges]
        report(
            f"criterion 9: replay-mode parse is deterministic ({len(runs[0].edges)} edges, stats {runs[0].stats()['duplicates']} dup)",
            identical and runs[0].stats() == runs[1].stats(),
        )

    def test_temperature_always_zero(self, demo, no_network):
        gateway = LlmGateway(GatewayConfig(mode="replay", model="gpt-4", fixture_dir=DEMO_DIR / "fixtures"))
        seen: list[float] = []
        original = gateway.complete

        def recording(request: LlmRequest):
            seen.append(request.temperature)
            return original(request)

        gateway.complete = recording
        for metric_id, criterion in (("gpt-cls-zs", "givn"), ("gpt-cls-fs", "relv"), ("gpt-scr", "comp"), ("gpt-ans", None)):
            pipeline.run_llm_metric(demo, metric_id, gateway, criterion)
        with pytest.raises(ValueError):
            LlmRequest(model="gpt-4", prompt="x", temperature=0.5)
        report(
            f"criterion 9: temperature is 0 in every emitted request ({len(seen)} requests inspected)",
            len(seen) > 20 and all(t == 0.0 for t in seen),
        )


class TestCriterion10Properties:
    def test_lemmatizer_idempotent(self):
        rng = random.Random(5150)
        words = ["".join(rng.choice("abcdefghilmnoprstuvy") for _ in range(rng.randint(2, 11))) for _ in range(500)]
        lex = textkit.default_lexicons()
        words += sorted(lex.verbs | lex.adjectives)
        bad = [w for w in words if textkit.lemma_of(textkit.lemma_of(w)) != textkit.lemma_of(w)]
        report(f"criterion 10: lemmatizer idempotent on {len(words)} words", not bad)

    def test_metric_identity_and_disjoint_closed_forms(self):
        identical = QuestionPair("e", "a b c d e", "a b c d e")
        disjoint = QuestionPair("e", "alpha beta gamma", "delta epsilon zeta")
        meteor_identity = 1.0 * (1 - 0.5 * (1 / 5) ** 3)
        ok = (
            bleu1(identical) == 1.0
            and rouge1_f1(identical) == 1.0
            and abs(meteor_lite(identical) - meteor_identity) < 1e-12
            and bleu1(disjoint) == 0.0
            and rouge1_f1(disjoint) == 0.0
            and meteor_lite(disjoint) == 0.0
        )
        report("criterion 10: BLEU-1/ROUGE/METEOR identity and disjoint closed forms", ok)

    def test_qsts_positive_on_entity_disjoint_same_class_pairs(self):
        pairs = [
            QuestionPair("e", "What did Alvarez trace?", "What did Navarro keep?"),
            QuestionPair("e", "Why did Brooks leave?", "Why did Kendrick arrive?"),
        ]
        scores = [qsts_arith(p) for p in pairs]
        report(
            f"criterion 10: QSTS arithmetic variant strictly positive on entity-disjoint same-class pairs {['%.3f' % s for s in scores]}",
            all(s > 0.0 for s in scores),
        )

    def test_mapping_monotone(self):
        mapping = MappingFunction("relv", ("fully", "partially", "not_grounded"), (0.6, 0.2), (0.0, 1.0), "t")
        rng = random.Random(2)
        ok = True
        for _ in range(500):
            low, high = sorted((rng.random(), rng.random()))
            ok = ok and mapping.labels.index(mapping.label_for(high)) <= mapping.labels.index(mapping.label_for(low))
        report("criterion 10: mapping monotonicity over 500 random score pairs", ok)

    def test_calibration_matches_exhaustive_oracle(self):
        rng = random.Random(77)
        ok = True
        for _ in range(4):
            scored = [
                (round(rng.uniform(0, 1), 2), rng.choice(["fully", "partially", "not_grounded"]))
                for _ in range(rng.randint(8, 20))
            ]
            mapping = assess.calibrate_mapping(scored, ("fully", "partially", "not_grounded"), (0.0, 1.0), "relv", step=0.05)
            predicted = [mapping.label_for(s) for s, _ in scored]
            achieved = assess.ConfusionMatrix.from_pairs(
                list(zip([g for _, g in scored], predicted)), ("fully", "partially", "not_grounded")
            ).macro_f1()
            oracle = exhaustive_calibration_oracle(scored, ("fully", "partially", "not_grounded"), 0.0, 1.0, 0.05)
            ok = ok and abs(achieved - oracle) < 1e-12
        report("criterion 10: calibration grid search equals the exhaustive oracle on <=20-point sets", ok)

    def test_skip_propagation_end_to_end(self, release, tmp_path):
        # loader: release data holds no record violating skip propagation
        loader_ok = True
        for record in release.annotations:
            if record.labels.lang == "fail":
                loader_ok = loader_ok and record.labels.comp == record.labels.givn == record.labels.relv == "skipped"
        # metrics: an ill-formed edge is skipped by every rule metric
        doc = release.documents["art03"]
        bad_edge = QudEdge("tmp-ill", "art03", "What happened?", 5, 5, "alpaca")
        from qudeval.metrics import bleu1_sim_relevance, givenness_rule, relevance_rule

        metric_ok = all(
            fn(bad_edge, doc).predicted_label == "skipped"
            for fn in (givenness_rule, relevance_rule, bleu1_sim_relevance)
        )
        # server: a violating submission is rejected with 422
        from fastapi.testclient import TestClient

        from qudeval.annoserve import AnnotationStore, create_app

        app = create_app(release, AnnotationStore(tmp_path / "journal.jsonl"), {"a1": [next(iter(release.edges))]})
        client = TestClient(app)
        response = client.post("/api/annotations", json={
            "edge_id": next(iter(release.edges)),
            "annotator_id": "a1",
            "lang": "fail", "comp": "direct", "givn": "skipped", "relv": "skipped",
        })
        server_ok = response.status_code == 422
        report(
            "criterion 10: skip propagation enforced end-to-end (loader, metrics, server)",
            loader_ok and metric_ok and server_ok,
        )
