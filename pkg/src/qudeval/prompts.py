"""Prompt templates used by the judge metrics and the parser.

Bodies are data, not code: slots use {{name}} placeholders and rendering is
byte-exact substitution, checked against golden files in the test suite.
Few-shot templates ship the documented exemplar for each task; extra
in-context examples can be appended through the exemplar slot mechanism.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    body: str
    required_slots: frozenset[str]
    source: str  # provenance tag recorded in verdicts


_GENERATION_EXEMPLAR_CONTEXT = (
    "The stock market's woes spooked currency traders but prompted a quiet little party among bond "
    "investors. Prices of long-term Treasury bonds moved inversely to the stock market as investors "
    "sought safety amid growing evidence the economy is weakening. But the shaky economic outlook and "
    "the volatile stock market forced the dollar lower against major currencies. The bond market got "
    "an early boost from the opening-hour sell-off in stocks. That rout was triggered by UAL Corp.'s "
    "announcement late Monday that the proposed management-labor buy-out had collapsed. The 80-point "
    "decline in the Dow Jones Industrial Average during the morning trading session touched off a "
    "flight to safety that saw investors shifting assets from stocks to Treasury bonds."
)

QUD_GENERATE = PromptTemplate(
    template_id="qud-generate-fewshot",
    body=(
        "Examples for this question generation are:\n"
        "\n"
        f"Context: {_GENERATION_EXEMPLAR_CONTEXT}\n"
        "Target Answer: At its strongest, the Treasury's benchmark 30-year bond rose more than a point, "
        "or more than $10 for each $1,000 face amount.\n"
        "Question: How much did the prices of long-term Treasury bonds increase?\n"
        "\n"
        "By reading the context, generate a question that indicates how the Target Answer elaborates on "
        "earlier sentences. The Target Answer given should be the answer to the generated question. The "
        "question should reflect the main purpose of the Target Answer. It should not use information "
        "first introduced in the Target Answer and shouldn’t copy-paste phrases newly introduced in the "
        "Target Answer.\n"
        "\n"
        "Context: {{context}}\n"
        "Target Answer: {{target_answer}}\n"
        "Question:"
    ),
    required_slots=frozenset({"context", "target_answer"}),
    source="builtin:qud-generate-fewshot",
)

QUD_ANCHOR = PromptTemplate(
    template_id="qud-anchor-fewshot",
    body=(
        "Examples for this anchor selection are:\n"
        "\n"
        f"Context: {_GENERATION_EXEMPLAR_CONTEXT}\n"
        "Question: How much did the prices of long-term Treasury bonds increase?\n"
        "Anchor Sentence: Prices of long-term Treasury bonds moved inversely to the stock market as "
        "investors sought safety amid growing evidence the economy is weakening\n"
        "\n"
        "By reading the Context, pick a sentence from the Context such that the above Question arises "
        "from it. An Anchor Sentence is a sentence from the Context that the Question is most related "
        "to. The words and concepts from the Anchor Sentence are used to generate the Question.The "
        "Target Answer cannot be the Anchor Sentence.\n"
        "\n"
        "Context: {{context}}\n"
        "Question: {{question}}\n"
        "Anchor Sentence:"
    ),
    required_slots=frozenset({"context", "question"}),
    source="builtin:qud-anchor-fewshot",
)

COMP_SCORE = PromptTemplate(
    template_id="comp-score",
    body=(
        "article: {{article}}\n"
        "question: {{question}}\n"
        "answer: {{answer}}\n"
        "score:\n"
        "\n"
        "For the above article, give a score between 1 to 100 for how well the answer actually answers "
        "the question."
    ),
    required_slots=frozenset({"article", "question", "answer"}),
    source="builtin:comp-score",
)

COMP_ANSWER_GENERATE = PromptTemplate(
    template_id="comp-answer-generate",
    body=(
        "article: {{article}}\n"
        "question: {{question}}\n"
        "anchor sentence: {{anchor}}\n"
        "Answer the question using only information from the article. The answer should follow from "
        "the anchor sentence and be stated in one sentence.\n"
        "A:"
    ),
    required_slots=frozenset({"article", "question", "anchor"}),
    source="builtin:comp-answer-generate",
)

COMP_ANSWER_CLOSEST = PromptTemplate(
    template_id="comp-answer-closest",
    body=(
        "article: {{article}}\n"
        "Which sentence in the article is closest to the sentence: '{{generated_answer}}'\n"
        "A:"
    ),
    required_slots=frozenset({"article", "generated_answer"}),
    source="builtin:comp-answer-closest",
)

_GIVN_INSTRUCTION = (
    "Does the question contain new concepts that a reader would be hard to come up with? (By \"new "
    "concepts\", I mean concepts that cannot be easily inferred by world knowledge from existing ones). "
    "There are several possibilities here as well:\n"
    "This question does not contain new concepts.\n"
    "Answer leakage: The question contains new concepts that are in the answer sentence AND not in the "
    "context.\n"
    "Hallucination: The question contains new concepts. This includes:\n"
    "Concepts not in the article.\n"
    "The question contains new concepts that are not in the context, but can be found later in the "
    "document.\n"
    "\n"
    "Given the Context, Question, and Answer, select one of the following options on the basis of your "
    "understanding of the instructions.\n"
    "1: No new concepts\n"
    "2: Answer leakage\n"
    "3: Hallucination"
)

GIVN_CLS_ZS = PromptTemplate(
    template_id="givn-cls-zs",
    body=(
        "Context:\n{{context}}\n"
        "Question:\n{{question}}\n"
        "Answer:\n{{answer}}\n"
        + _GIVN_INSTRUCTION
    ),
    required_slots=frozenset({"context", "question", "answer"}),
    source="builtin:givn-cls-zs",
)

GIVN_CLS_FS = PromptTemplate(
    template_id="givn-cls-fs",
    body=(
        "Here are a few examples for all cases:\n"
        "Example 1:\n"
        "Context:\n"
        "1 U.S. exports of nuclear material cannot be adequately traced from country to country, "
        "according to a congressional report.\n"
        "Question:\n"
        "What does the report say is the reason for the export ban?\n"
        "Answer Sentence:\n"
        "The report says hundreds of tons of plutonium and highly enriched uranium have accumulated "
        "worldwide, mostly from nuclear power generation.\n"
        "Selected option:\n"
        "[3: Hallucination]\n"
        "\n"
        "Context:\n{{context}}\n"
        "Question:\n{{question}}\n"
        "Answer:\n{{answer}}\n"
        + _GIVN_INSTRUCTION
    ),
    required_slots=frozenset({"context", "question", "answer"}),
    source="builtin:givn-cls-fs",
)

_RELV_INSTRUCTION = (
    "Is the question well-grounded in the anchor sentence? Please evaluate using the following scale:\n"
    "1: The question is fully grounded in the anchor sentence.\n"
    "2: Some parts of the question are grounded in the anchor sentence.\n"
    "3: The question is not grounded at all in the anchor sentence.\n"
    "\n"
    "Based on the question and the anchor, please choose one of the above options. If the question "
    "refers to the same entity as the anchor, we consider the question to be grounded."
)

RELV_CLS_ZS = PromptTemplate(
    template_id="relv-cls-zs",
    body=(
        "Question:\n{{question}}\n"
        "Anchor Sentence:\n{{anchor}}\n"
        + _RELV_INSTRUCTION
    ),
    required_slots=frozenset({"question", "anchor"}),
    source="builtin:relv-cls-zs",
)

RELV_CLS_FS = PromptTemplate(
    template_id="relv-cls-fs",
    body=(
        "Here are a few examples for all cases:\n"
        "Example 1:\n"
        "Question: What do lawmakers think about this issue?\n"
        "Anchor Sentence: U.S. exports of nuclear material cannot be adequately traced from country to "
        "country, according to a congressional report.\n"
        "Result: [1: The question is fully grounded in the anchor sentence.]\n"
        "\n"
        "Question:\n{{question}}\n"
        "Anchor Sentence:\n{{anchor}}\n"
        + _RELV_INSTRUCTION
    ),
    required_slots=frozenset({"question", "anchor"}),
    source="builtin:relv-cls-fs",
)

RELV_SCORE = PromptTemplate(
    template_id="relv-score",
    body=(
        "Question: {{question}}\n"
        "Anchor Sentence: {{anchor}}\n"
        "Based on the question and the anchor, give a score between 1 to 100 for how confident you are "
        "about the question is grounded in anchor sentence. If the question refers to the same entity "
        "as the anchor, we consider the question to be grounded."
    ),
    required_slots=frozenset({"question", "anchor"}),
    source="builtin:relv-score",
)

SIMILARITY_SCORE = PromptTemplate(
    template_id="similarity-score",
    body=(
        "Context: {{context}}\n"
        "Reference Question: {{reference_question}}\n"
        "Candidate Question: {{candidate_question}}\n"
        "Score:\n"
        "\n"
        "Given the Context, score the above Candidate Question for similarity with respect to the "
        "Reference Question on a continuous scale from 1 to 5, where a score of 1 means 'no similarity' "
        "and a score of 5 means 'similar intent and phrasing'"
    ),
    required_slots=frozenset({"context", "reference_question", "candidate_question"}),
    source="builtin:similarity-score",
)

STRICT_REPROMPT_SUFFIX = (
    "\n\nAnswer with the option number only, formatted exactly as [<number>: <option name>]."
)

TEMPLATES: dict[str, PromptTemplate] = {
    t.template_id: t
    for t in (
        QUD_GENERATE,
        QUD_ANCHOR,
        COMP_SCORE,
        COMP_ANSWER_GENERATE,
        COMP_ANSWER_CLOSEST,
        GIVN_CLS_ZS,
        GIVN_CLS_FS,
        RELV_CLS_ZS,
        RELV_CLS_FS,
        RELV_SCORE,
        SIMILARITY_SCORE,
    )
}

GIVN_OPTIONS = ("No new concepts", "Answer leakage", "Hallucination")
RELV_OPTIONS = (
    "The question is fully grounded in the anchor sentence.",
    "Some parts of the question are grounded in the anchor sentence.",
    "The question is not grounded at all in the anchor sentence.",
)
