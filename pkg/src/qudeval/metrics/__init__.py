from .embeddings import EmbeddingProvider, HashEmbeddingProvider, StaticEmbeddingProvider, cosine
from .mapping import (
    DEFAULT_COMP_SCORE_MAPPING,
    DEFAULT_RELV_SCORE_MAPPING,
    DEFAULT_SCORE_MAPPINGS,
    MappingFunction,
    ScoreOutOfRange,
    score_to_label,
    uniform_mapping,
)
from .refbased import (
    LEXICAL_METRICS,
    QuestionPair,
    bleu1,
    bleu1_score,
    embed_f1,
    llm_similarity,
    meteor_lite,
    qsts_arith,
    question_class,
    rouge1_f1,
)
from .reffree import (
    BLEU1_SIM_FULL,
    BLEU1_SIM_PARTIAL,
    NoSentenceMatch,
    bleu1_sim_relevance,
    givenness_rule,
    gpt_ans_compatibility,
    information_status_givenness,
    llm_classify,
    llm_score,
    relevance_rule,
)
from .verdicts import MetricVerdict, read_verdicts, write_verdicts

__all__ = [
    "BLEU1_SIM_FULL",
    "BLEU1_SIM_PARTIAL",
    "DEFAULT_COMP_SCORE_MAPPING",
    "DEFAULT_RELV_SCORE_MAPPING",
    "DEFAULT_SCORE_MAPPINGS",
    "EmbeddingProvider",
    "HashEmbeddingProvider",
    "LEXICAL_METRICS",
    "MappingFunction",
    "MetricVerdict",
    "NoSentenceMatch",
    "QuestionPair",
    "ScoreOutOfRange",
    "StaticEmbeddingProvider",
    "bleu1",
    "bleu1_score",
    "bleu1_sim_relevance",
    "cosine",
    "embed_f1",
    "givenness_rule",
    "gpt_ans_compatibility",
    "information_status_givenness",
    "llm_classify",
    "llm_score",
    "llm_similarity",
    "meteor_lite",
    "qsts_arith",
    "question_class",
    "read_verdicts",
    "relevance_rule",
    "rouge1_f1",
    "score_to_label",
    "uniform_mapping",
    "write_verdicts",
]
