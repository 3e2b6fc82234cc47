import pytest

from qudeval.llmgate import GatewayConfig, LlmGateway, LlmRequest, record_fixture, render_prompt
from qudeval.qudparse import EmptyCompletion, generate_question, parse_document, select_anchor

from conftest import make_document

DOC = make_document(
    "flood",
    [
        "Rivers crossed the valley after heavy storms.",
        "Farmers watched the water rise overnight.",
        "Officials opened the emergency shelters.",
        "Villages moved cattle to higher ground.",
    ],
)

ARTICLE_TEXT = " ".join(s.text for s in DOC.sentences)


@pytest.fixture
def gateway(tmp_path):
    config = GatewayConfig(mode="replay", model="gpt-4", fixture_dir=tmp_path / "fixtures")

    def canned(prompt: str, text: str, max_tokens: int = 96):
        record_fixture(config.fixture_dir, LlmRequest(model="gpt-4", prompt=prompt, max_tokens=max_tokens), text)

    return LlmGateway(config), canned


def generation_prompt(answer_idx: int) -> str:
    return render_prompt(
        "qud-generate-fewshot",
        {"context": ARTICLE_TEXT, "target_answer": DOC.sentence(answer_idx)},
    )


def anchor_prompt(question: str) -> str:
    return render_prompt("qud-anchor-fewshot", {"context": ARTICLE_TEXT, "question": question})


class TestGenerateQuestion:
    def test_question_prefix_stripped(self, gateway, no_network):
        gw, canned = gateway
        canned(generation_prompt(2), "Question: Why did X?\n")
        assert generate_question(gw, DOC, 2) == "Why did X?"

    def test_first_non_empty_line(self, gateway, no_network):
        gw, canned = gateway
        canned(generation_prompt(3), "\n\nWhat did officials open?\nExtra commentary.")
        assert generate_question(gw, DOC, 3) == "What did officials open?"

    def test_empty_completion(self, gateway, no_network):
        gw, canned = gateway
        canned(generation_prompt(4), "\n  \n")
        with pytest.raises(EmptyCompletion):
            generate_question(gw, DOC, 4)

    def test_answer_idx_bounds(self, gateway):
        gw, _ = gateway
        with pytest.raises(ValueError):
            generate_question(gw, DOC, 1)


class TestSelectAnchor:
    def test_exact_echo(self, gateway, no_network):
        gw, canned = gateway
        canned(anchor_prompt("What rose?"), DOC.sentence(1))
        assert select_anchor(gw, DOC, 3, "What rose?") == 1

    def test_paraphrase_overlap(self, gateway, no_network):
        gw, canned = gateway
        canned(anchor_prompt("Why shelters?"), "the farmers watched the rising water overnight")
        assert select_anchor(gw, DOC, 3, "Why shelters?") == 2

    def test_lower_indices_preferred(self, gateway, no_network):
        gw, canned = gateway
        # reply overlaps sentence 4 strongly but sentence 1 weakly; answer is 3
        canned(anchor_prompt("Where did cattle go?"), "the valley cattle moved higher ground villages")
        # preferred pool is {1, 2}: "valley" hits sentence 1
        assert select_anchor(gw, DOC, 3, "Where did cattle go?") == 1

    def test_answer_sentence_only_when_nothing_else_overlaps(self, gateway, no_network):
        gw, canned = gateway
        canned(anchor_prompt("Who opened shelters?"), "emergency shelters")
        # answer is 3; the reply only overlaps sentence 3 itself
        assert select_anchor(gw, DOC, 3, "Who opened shelters?") == 3

    def test_anchor_prefix_stripped(self, gateway, no_network):
        gw, canned = gateway
        canned(anchor_prompt("What crossed?"), "Anchor Sentence: " + DOC.sentence(1))
        assert select_anchor(gw, DOC, 4, "What crossed?") == 1


class TestParseDocument:
    def _seed_run(self, canned, questions: dict[int, str], anchors: dict[str, str]):
        for answer_idx, question in questions.items():
            canned(generation_prompt(answer_idx), question)
        for question, anchor_reply in anchors.items():
            canned(anchor_prompt(question), anchor_reply)

    def test_one_edge_per_answer_index(self, gateway, no_network):
        gw, canned = gateway
        self._seed_run(
            canned,
            {2: "What rose?", 3: "What did officials open?", 4: "Where did cattle go?"},
            {
                "What rose?": DOC.sentence(1),
                "What did officials open?": DOC.sentence(2),
                "Where did cattle go?": DOC.sentence(3),
            },
        )
        run = parse_document(gw, DOC, [2, 3, 4])
        assert len(run.edges) == 3
        assert [e.answer_idx for e in run.edges] == [2, 3, 4]
        assert all(e.well_formed for e in run.edges)
        assert run.stats()["duplicates"] == 0

    def test_all_identical_questions_duplicate_count(self, gateway, no_network):
        gw, canned = gateway
        self._seed_run(
            canned,
            {2: "What happened?", 3: "What happened?", 4: "What happened?"},
            {"What happened?": DOC.sentence(1)},
        )
        run = parse_document(gw, DOC, [2, 3, 4])
        assert run.stats()["duplicates"] == 2  # 3 questions, 1 distinct

    def test_replay_is_deterministic(self, gateway, no_network):
        gw, canned = gateway
        self._seed_run(
            canned,
            {2: "What rose?", 3: "What did officials open?"},
            {"What rose?": DOC.sentence(1), "What did officials open?": DOC.sentence(2)},
        )
        run1 = parse_document(gw, DOC, [2, 3])
        run2 = parse_document(gw, DOC, [2, 3])
        assert [e.__dict__ for e in run1.edges] == [e.__dict__ for e in run2.edges]
        assert run1.stats() == run2.stats()

    def test_errors_aggregated_without_aborting(self, gateway, no_network):
        gw, canned = gateway
        self._seed_run(
            canned,
            {2: "What rose?"},
            {"What rose?": DOC.sentence(1)},
        )
        # no fixture at all for answer 3: FixtureMiss is captured per edge
        run = parse_document(gw, DOC, [2, 3])
        assert len(run.edges) == 1
        assert 3 in run.errors and "FixtureMiss" in run.errors[3]

    def test_stats_match_brute_force(self, gateway, no_network):
        gw, canned = gateway
        self._seed_run(
            canned,
            {2: "What  HAPPENED?", 3: "what happened?", 4: "Why move cattle?"},
            {
                "What  HAPPENED?": DOC.sentence(1),
                "what happened?": DOC.sentence(1),
                "Why move cattle?": DOC.sentence(3),
            },
        )
        run = parse_document(gw, DOC, [2, 3, 4])
        normalized = [" ".join(e.question.split()).casefold() for e in run.edges]
        brute = sum(
            1
            for i, q in enumerate(normalized)
            if any(normalized[j] == q for j in range(i))
        )
        assert run.stats()["duplicates"] == brute == 1
