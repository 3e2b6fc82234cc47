import math

import pytest

from qudeval.corpus import QudEdge
from qudeval.llmgate import GatewayConfig, LlmGateway, LlmRequest, record_fixture
from qudeval.metrics import (
    DEFAULT_COMP_SCORE_MAPPING,
    DEFAULT_RELV_SCORE_MAPPING,
    bleu1_sim_relevance,
    givenness_rule,
    gpt_ans_compatibility,
    llm_classify,
    llm_score,
    relevance_rule,
)
from qudeval.metrics.reffree import NoSentenceMatch, _match_sentence, numbered_context
from qudeval.prompts import GIVN_OPTIONS
from qudeval.llmgate import render_prompt

from conftest import make_document

# A miniature article with carefully planted vocabulary. Sentence 1
# establishes "report" and "exports"; "missing" appears only in sentence 6.
ARTICLE = make_document(
    "nuclear",
    [
        "U.S. exports of nuclear material cannot be adequately traced, according to a congressional report.",
        "Lawmakers requested the study two years ago.",
        "Investigators visited four processing sites.",
        "Agencies shared shipment records with the panel.",
        "The report says hundreds of tons of plutonium have accumulated worldwide.",
        "Auditors say tracking data is missing for many shipments.",
    ],
)


def edge(question: str, anchor=1, answer=6, system="chatgpt") -> QudEdge:
    return QudEdge("e1", ARTICLE.doc_id, question, anchor, answer, system)


class TestGivennessRule:
    def test_answer_leak(self):
        # "missing" is absent from S1 but present in the answer sentence
        verdict = givenness_rule(edge("What is missing in the report?"), ARTICLE)
        assert verdict.predicted_label == "answer_leak"

    def test_no_new(self):
        verdict = givenness_rule(edge("What report traces the exports?"), ARTICLE)
        assert verdict.predicted_label == "no_new"

    def test_hallucination(self):
        # "ban" and "reason" appear in neither the context nor the answer
        verdict = givenness_rule(
            edge("What does the report say is the reason for the export ban?", anchor=1, answer=5),
            ARTICLE,
        )
        assert verdict.predicted_label == "hallucination"

    def test_ill_formed_edge_skipped(self):
        verdict = givenness_rule(edge("What is missing?", anchor=6, answer=6), ARTICLE)
        assert verdict.predicted_label == "skipped"

    def test_never_hallucination_when_lemmas_covered(self):
        # every content lemma is in context or answer: label is never hallucination
        verdict = givenness_rule(edge("What shipments have missing tracking?", anchor=4, answer=6), ARTICLE)
        assert verdict.predicted_label in ("no_new", "answer_leak")

    def test_provenance_carries_lexicon_hash(self):
        verdict = givenness_rule(edge("What is missing in the report?"), ARTICLE)
        assert "lexicon_hash" in verdict.provenance


class TestRelevanceRule:
    def test_fully(self):
        verdict = relevance_rule(edge("What happened to the nuclear exports?", anchor=1, answer=5), ARTICLE)
        assert verdict.predicted_label == "fully"

    def test_not_grounded(self):
        verdict = relevance_rule(edge("Who visited the processing sites?", anchor=1, answer=5), ARTICLE)
        assert verdict.predicted_label == "not_grounded"

    def test_partially(self):
        # max NP "the report shipments": "report" in anchor 1, "shipments" not
        verdict = relevance_rule(edge("What did auditors find about the report shipments?", anchor=1, answer=6), ARTICLE)
        assert verdict.predicted_label == "partially"

    def test_fallback_on_no_noun_phrase(self):
        verdict = relevance_rule(edge("What was requested?", anchor=2, answer=3), ARTICLE)
        # fallback to content lemmas: "request" is in anchor 2
        assert verdict.predicted_label == "fully"
        assert verdict.provenance["focus_source"] == "content_fallback"

    def test_empty_focus_degenerates_to_partially(self):
        verdict = relevance_rule(edge("Who did what to whom?", anchor=1, answer=5), ARTICLE)
        assert verdict.predicted_label == "partially"


class TestBleu1Sim:
    def test_identity_fully(self):
        question = ARTICLE.sentence(2)
        verdict = bleu1_sim_relevance(edge(question, anchor=2, answer=3), ARTICLE)
        assert verdict.predicted_label == "fully"
        assert verdict.raw_score == pytest.approx(1.0)

    def test_zero_overlap_not_grounded(self):
        verdict = bleu1_sim_relevance(edge("Why do whales migrate?", anchor=3, answer=4), ARTICLE)
        assert verdict.predicted_label == "not_grounded"
        assert verdict.raw_score == 0.0

    def test_hand_computed_band(self):
        # 10-token question, 3 matches against a 20-token anchor:
        # p1 = 3/10, BP = exp(1 - 20/10) -> 0.1104 > 0.05 -> fully
        doc = make_document(
            "toy",
            [
                "alpha beta gamma one two three four five six seven eight nine ten eleven twelve thirteen fourteen fifteen sixteen seventeen",
                "closing sentence here.",
            ],
        )
        e = QudEdge("t", "toy", "alpha beta gamma u v w x y z q", 1, 2, "alpaca")
        verdict = bleu1_sim_relevance(e, doc)
        assert verdict.raw_score == pytest.approx(0.3 * math.exp(-1.0), abs=1e-12)
        assert verdict.predicted_label == "fully"

    def test_partial_band_inclusive_edges(self):
        # one match in ten tokens with BP ~ 0.3679: s ~ 0.0368, inside [0.01, 0.05]
        doc = make_document(
            "toy2",
            [
                "alpha one two three four five six seven eight nine ten eleven twelve thirteen fourteen fifteen sixteen seventeen eighteen nineteen",
                "closing sentence here.",
            ],
        )
        e = QudEdge("t", "toy2", "alpha b c d e f g h i j", 1, 2, "alpaca")
        verdict = bleu1_sim_relevance(e, doc)
        assert 0.01 <= verdict.raw_score <= 0.05
        assert verdict.predicted_label == "partially"


@pytest.fixture
def replay_gateway(tmp_path):
    config = GatewayConfig(mode="replay", model="gpt-4", fixture_dir=tmp_path / "fixtures")

    def canned(prompt: str, text: str, max_tokens: int = 64):
        record_fixture(config.fixture_dir, LlmRequest(model="gpt-4", prompt=prompt, max_tokens=max_tokens), text)

    return LlmGateway(config), canned


class TestLlmClassify:
    def test_bracket_option_parse(self, replay_gateway, no_network):
        gateway, canned = replay_gateway
        e = edge("What does the report say is the reason for the export ban?", anchor=1, answer=5)
        prompt = render_prompt(
            "givn-cls-zs",
            {
                "context": numbered_context(ARTICLE, 1),
                "question": e.question,
                "answer": ARTICLE.sentence(5),
            },
        )
        canned(prompt, "Selected option:\n[3: Hallucination]")
        verdict = llm_classify(gateway, e, ARTICLE, "givn", shots="zero")
        assert verdict.predicted_label == "hallucination"

    def test_bare_number(self, replay_gateway, no_network):
        gateway, canned = replay_gateway
        e = edge("What report covers the exports?", anchor=1, answer=5)
        prompt = render_prompt(
            "givn-cls-zs",
            {
                "context": numbered_context(ARTICLE, 1),
                "question": e.question,
                "answer": ARTICLE.sentence(5),
            },
        )
        canned(prompt, "1")
        verdict = llm_classify(gateway, e, ARTICLE, "givn", shots="zero")
        assert verdict.predicted_label == "no_new"

    def test_lenient_option_number_scan(self, replay_gateway, no_network):
        gateway, canned = replay_gateway
        e = edge("What is missing in the report?", anchor=1, answer=6)
        prompt = render_prompt(
            "givn-cls-zs",
            {
                "context": numbered_context(ARTICLE, 1),
                "question": e.question,
                "answer": ARTICLE.sentence(6),
            },
        )
        canned(prompt, "I think option 2 fits best")
        verdict = llm_classify(gateway, e, ARTICLE, "givn", shots="zero")
        assert verdict.predicted_label == "answer_leak"

    def test_reprompt_after_unparseable(self, replay_gateway, no_network):
        from qudeval.prompts import STRICT_REPROMPT_SUFFIX

        gateway, canned = replay_gateway
        e = edge("What report covers the exports?", anchor=1, answer=5)
        prompt = render_prompt(
            "relv-cls-zs",
            {"question": e.question, "anchor": ARTICLE.sentence(1)},
        )
        canned(prompt, "neither applies")
        canned(prompt + STRICT_REPROMPT_SUFFIX, "[2: Some parts of the question are grounded in the anchor sentence.]")
        verdict = llm_classify(gateway, e, ARTICLE, "relv", shots="zero")
        assert verdict.predicted_label == "partially"


class TestLlmScore:
    def _prompt(self, e, criterion):
        if criterion == "comp":
            return render_prompt(
                "comp-score",
                {
                    "article": " ".join(s.text for s in ARTICLE.sentences),
                    "question": e.question,
                    "answer": ARTICLE.sentence(e.answer_idx),
                },
            )
        return render_prompt(
            "relv-score",
            {"question": e.question, "anchor": ARTICLE.sentence(e.anchor_idx)},
        )

    def test_relv_band_edges(self, replay_gateway, no_network):
        gateway, canned = replay_gateway
        e = edge("What report covers the exports?", anchor=1, answer=5)
        canned(self._prompt(e, "relv"), "85", max_tokens=16)
        verdict = llm_score(gateway, e, ARTICLE, "relv")
        assert verdict.predicted_label == "fully"
        assert verdict.raw_score == 85.0

    def test_comp_defaults(self, replay_gateway, no_network):
        gateway, canned = replay_gateway
        e = edge("What report covers the exports?", anchor=1, answer=5)
        canned(self._prompt(e, "comp"), "Score: 70", max_tokens=16)
        verdict = llm_score(gateway, e, ARTICLE, "comp")
        assert verdict.predicted_label == "unfocused"

    def test_comp_top_of_range(self, replay_gateway, no_network):
        gateway, canned = replay_gateway
        e = edge("What happened to the exports?", anchor=1, answer=5)
        canned(self._prompt(e, "comp"), "100", max_tokens=16)
        verdict = llm_score(gateway, e, ARTICLE, "comp")
        assert verdict.predicted_label == "direct"

    def test_out_of_range_clamped(self, replay_gateway, no_network):
        gateway, canned = replay_gateway
        e = edge("What happened to the report?", anchor=1, answer=5)
        canned(self._prompt(e, "comp"), "150", max_tokens=16)
        verdict = llm_score(gateway, e, ARTICLE, "comp")
        assert verdict.raw_score == 100.0
        assert verdict.predicted_label == "direct"

    def test_default_mapping_boundaries(self):
        assert DEFAULT_COMP_SCORE_MAPPING.label_for(80) == "unfocused"
        assert DEFAULT_COMP_SCORE_MAPPING.label_for(81) == "direct"
        assert DEFAULT_COMP_SCORE_MAPPING.label_for(59) == "not_answered"
        assert DEFAULT_RELV_SCORE_MAPPING.label_for(80) == "fully"
        assert DEFAULT_RELV_SCORE_MAPPING.label_for(20) == "partially"
        assert DEFAULT_RELV_SCORE_MAPPING.label_for(19) == "not_grounded"


class TestGptAns:
    def test_answered_when_closest_is_answer(self, replay_gateway, no_network):
        gateway, canned = replay_gateway
        e = edge("What does the report say about plutonium?", anchor=1, answer=5)
        article = " ".join(s.text for s in ARTICLE.sentences)
        gen_prompt = render_prompt(
            "comp-answer-generate",
            {"article": article, "question": e.question, "anchor": ARTICLE.sentence(1)},
        )
        canned(gen_prompt, "Hundreds of tons of plutonium have accumulated worldwide.", max_tokens=128)
        closest_prompt = render_prompt(
            "comp-answer-closest",
            {"article": article, "generated_answer": "Hundreds of tons of plutonium have accumulated worldwide."},
        )
        canned(closest_prompt, ARTICLE.sentence(5), max_tokens=128)
        verdict = gpt_ans_compatibility(gateway, e, ARTICLE)
        assert verdict.predicted_label == "direct"
        assert verdict.provenance["matched_index"] == 5

    def test_not_answered_on_index_mismatch(self, replay_gateway, no_network):
        gateway, canned = replay_gateway
        e = edge("What does the report say about plutonium?", anchor=1, answer=6)
        article = " ".join(s.text for s in ARTICLE.sentences)
        gen_prompt = render_prompt(
            "comp-answer-generate",
            {"article": article, "question": e.question, "anchor": ARTICLE.sentence(1)},
        )
        canned(gen_prompt, "Plutonium has accumulated worldwide.", max_tokens=128)
        closest_prompt = render_prompt(
            "comp-answer-closest",
            {"article": article, "generated_answer": "Plutonium has accumulated worldwide."},
        )
        canned(closest_prompt, ARTICLE.sentence(5), max_tokens=128)
        verdict = gpt_ans_compatibility(gateway, e, ARTICLE)
        assert verdict.predicted_label == "not_answered"


class TestSentenceMatching:
    def test_exact_match(self):
        assert _match_sentence(ARTICLE, ARTICLE.sentence(3)) == 3

    def test_overlap_fallback(self):
        assert _match_sentence(ARTICLE, "the plutonium report accumulated tons worldwide") == 5

    def test_no_overlap_raises(self):
        with pytest.raises(NoSentenceMatch):
            _match_sentence(ARTICLE, "zzz qqq")


class TestGivennessProperty:
    def test_never_hallucination_when_covered(self):
        # any question drawn only from context-or-answer vocabulary can be
        # no_new or answer_leak, never hallucination
        import random

        rng = random.Random(8)
        vocab = []
        for idx in range(1, ARTICLE.n + 1):
            from qudeval import textkit

            vocab.extend(textkit.content_lemmas(ARTICLE.sentence(idx)))
        for _ in range(50):
            k = rng.randint(1, 4)
            a = rng.randint(k + 1, ARTICLE.n)
            allowed = []
            for idx in list(range(1, k + 1)) + [a]:
                from qudeval import textkit

                allowed.extend(textkit.content_lemmas(ARTICLE.sentence(idx)))
            words = rng.sample(allowed, min(4, len(allowed)))
            question = "What did the " + " ".join(words) + "?"
            verdict = givenness_rule(edge(question, anchor=k, answer=a), ARTICLE)
            assert verdict.predicted_label in ("no_new", "answer_leak"), (question, verdict.predicted_label)
