"""Deterministic, dependency-free text processing.

Everything downstream (rule metrics, duplicate statistics, overlap-based
sentence matching) is built on this module, so the hard requirement is
reproducibility: identical input plus identical lexicon files must produce
identical output on any platform. No statistical tagger, no external NLP
models — a whitespace tokenizer, an ordered-rewrite lemmatizer, and a
closed-class POS-lite scheme are enough for the rule metrics implemented
here, and their behaviour is fully pinned by tests.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional, Sequence

_DATA_DIR = Path(__file__).parent / "data"

# Characters peeled off token edges. Internal hyphens/apostrophes survive.
_PUNCT_CHARS = set("!\"#$%&'()*+,./:;<=>?@[\\]^_`{|}~") | set("‘’“”–—…")

_NUMBER_RE = re.compile(r"^[+-]?\d[\d,]*(?:\.\d+)?%?$")


class NoNounPhrase(Exception):
    """Raised by max_np when the pattern DET? ADJ* NOUN+ never matches."""


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str
    lower: str
    char_span: tuple[int, int]
    tags: frozenset[str]

    def has(self, tag: str) -> bool:
        return tag in self.tags


class LexiconBundle:
    """Word lists and rewrite rules loaded from the packaged data files.

    The bundle is versioned: ``version_hash`` is a SHA-256 over the raw file
    bytes (sorted by file name) and is embedded in metric verdicts so that a
    result can always be traced back to the exact lexicons that produced it.
    """

    _FILES = (
        "stopwords.txt",
        "wh_words.txt",
        "pronouns.txt",
        "determiners.txt",
        "verbs.txt",
        "adjectives.txt",
        "irregular_lemmas.tsv",
    )

    def __init__(self, data_dir: Path = _DATA_DIR):
        self.data_dir = Path(data_dir)
        self.stopwords = self._load_words("stopwords.txt")
        self.wh_words = self._load_words("wh_words.txt")
        self.pronouns = self._load_words("pronouns.txt")
        self.determiners = self._load_words("determiners.txt")
        self.verbs = self._load_words("verbs.txt")
        self.adjectives = self._load_words("adjectives.txt")
        self.irregular_lemmas = self._load_irregulars("irregular_lemmas.tsv")
        self.version_hash = self._hash_files()

        overlap = (self.stopwords & self.wh_words) | (self.stopwords & self.pronouns) | (self.wh_words & self.pronouns)
        if overlap:
            raise ValueError(f"stopword/wh/pronoun lexicons must be disjoint, shared: {sorted(overlap)}")

    def _load_words(self, name: str) -> frozenset[str]:
        words = set()
        for line in (self.data_dir / name).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line.lower())
        return frozenset(words)

    def _load_irregulars(self, name: str) -> dict[str, str]:
        table: dict[str, str] = {}
        for line in (self.data_dir / name).read_text(encoding="utf-8").splitlines():
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            surface, lemma = line.split("\t")
            table[surface.lower()] = lemma.lower()
        return table

    def _hash_files(self) -> str:
        h = hashlib.sha256()
        for name in sorted(self._FILES):
            h.update(name.encode("utf-8"))
            h.update((self.data_dir / name).read_bytes())
        return h.hexdigest()[:16]


@lru_cache(maxsize=1)
def default_lexicons() -> LexiconBundle:
    return LexiconBundle()


# --- lemmatizer -------------------------------------------------------------

_VOWELS = set("aeiou")

# Ordered suffix rewrites: (suffix, replacement, min stem length). The first
# applicable rule wins; anything left untouched is its own lemma.
_PLURAL_RULES = (
    ("ies", "y", 2),
    ("sses", "ss", 2),
    ("shes", "sh", 2),
    ("ches", "ch", 2),
    ("xes", "x", 2),
    ("zes", "z", 2),
    ("oes", "o", 2),
    ("s", "", 3),
)

def _ends_cvc(stem: str) -> bool:
    # consonant-vowel-consonant, final consonant not w/x/y: "mov" -> restore e.
    if len(stem) < 3:
        return False
    c1, v, c2 = stem[-3], stem[-2], stem[-1]
    return c1 not in _VOWELS and v in _VOWELS and c2 not in _VOWELS and c2 not in "wxy"


def _measure(stem: str) -> int:
    # number of vowel->consonant transitions; single-syllable stems ("mov")
    # get their silent e back, longer ones ("happen") do not.
    count = 0
    previous_vowel = False
    for ch in stem:
        is_vowel = ch in _VOWELS
        if previous_vowel and not is_vowel:
            count += 1
        previous_vowel = is_vowel
    return count


def _strip_verb_suffix(lower: str) -> Optional[str]:
    if lower.endswith("ied") and len(lower) > 4:
        return lower[:-3] + "y"
    if lower.endswith("eed"):
        return lower[:-1] if len(lower) > 4 else None
    for suffix in ("ed", "ing"):
        if lower.endswith(suffix) and len(lower) - len(suffix) >= 2:
            stem = lower[: -len(suffix)]
            if not any(ch in _VOWELS for ch in stem):
                return None
            if len(stem) >= 4 and stem[-1] == stem[-2] and stem[-1] not in _VOWELS and stem[-1] not in "lsz":
                return stem[:-1]
            if _ends_cvc(stem) and _measure(stem) == 1:
                return stem + "e"
            return stem
    return None


def _lemma_pass(lower: str, lex: LexiconBundle) -> str:
    if lower in lex.irregular_lemmas:
        return lex.irregular_lemmas[lower]
    stripped = _strip_verb_suffix(lower)
    if stripped is not None and len(stripped) >= 2:
        return stripped
    for suffix, repl, min_stem in _PLURAL_RULES:
        if lower.endswith(suffix) and len(lower) - len(suffix) >= min_stem:
            if suffix == "s" and (lower.endswith("ss") or lower.endswith("us") or lower.endswith("is")):
                continue
            return lower[: -len(suffix)] + repl
    return lower


def lemma_of(word: str, lexicons: Optional[LexiconBundle] = None) -> str:
    """Map one surface form to its lemma.

    Lookup order per pass: irregular table, verb-suffix rules (-ied/-ed/-ing
    with consonant undoubling and measured e-restoration), plural rules,
    identity. Passes repeat until a fixed point, so the function is
    idempotent for any input; in practice one pass almost always suffices.
    """
    lex = lexicons or default_lexicons()
    current = word.lower()
    for _ in range(5):
        after = _lemma_pass(current, lex)
        if after == current:
            return current
        current = after
    return current


# --- tokenizer --------------------------------------------------------------

def _chunk_spans(text: str) -> Iterable[tuple[int, int]]:
    start = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if start is not None:
                yield start, i
                start = None
        elif start is None:
            start = i
    if start is not None:
        yield start, len(text)


def _split_punct(text: str, start: int, end: int) -> list[tuple[int, int, bool]]:
    """Split one whitespace chunk into (start, end, is_punct) pieces."""
    pieces: list[tuple[int, int, bool]] = []
    left, right = start, end
    head: list[tuple[int, int, bool]] = []
    while left < right and text[left] in _PUNCT_CHARS:
        head.append((left, left + 1, True))
        left += 1
    tail: list[tuple[int, int, bool]] = []
    while right > left and text[right - 1] in _PUNCT_CHARS:
        tail.append((right - 1, right, True))
        right -= 1
    pieces.extend(head)
    if left < right:
        pieces.append((left, right, False))
    pieces.extend(reversed(tail))
    return pieces


def tokenize(text: str, lexicons: Optional[LexiconBundle] = None, *, sentence_initial: bool = True) -> list[Token]:
    """Whitespace tokenizer with edge-punctuation peeling.

    Internal hyphens and apostrophes are preserved ("30-year", "Treasury's").
    ``sentence_initial`` states whether the text begins a sentence; it feeds
    the name heuristic, which never tags the first alphabetic token as a name
    unless the following token is itself name-tagged (multi-word proper names
    like "Marco Flagg" are still caught at sentence start).
    """
    lex = lexicons or default_lexicons()
    raw: list[tuple[int, int, bool]] = []
    for cs, ce in _chunk_spans(text):
        raw.extend(_split_punct(text, cs, ce))

    n = len(raw)
    surfaces = [text[s:e] for s, e, _ in raw]
    lowers = [s.lower() for s in surfaces]
    is_punct = [p for _, _, p in raw]

    first_word = next((i for i in range(n) if not is_punct[i]), None)

    # Name pass, right to left so "Marco Flagg" resolves via "Flagg".
    is_name = [False] * n
    for i in range(n - 1, -1, -1):
        if is_punct[i] or _NUMBER_RE.match(surfaces[i]):
            continue
        if not surfaces[i][:1].isupper():
            continue
        if lowers[i] in lex.stopwords or lowers[i] in lex.wh_words or lowers[i] in lex.pronouns:
            continue
        if i == first_word and sentence_initial:
            nxt = next((j for j in range(i + 1, n) if not is_punct[j]), None)
            is_name[i] = nxt is not None and is_name[nxt]
        else:
            is_name[i] = True

    tokens: list[Token] = []
    for i in range(n):
        tags: set[str] = set()
        if is_punct[i]:
            tags.add("punct")
        elif _NUMBER_RE.match(surfaces[i]):
            tags.add("number")
        elif lowers[i] in lex.stopwords:
            tags.add("stopword")
        elif lowers[i] in lex.wh_words:
            tags.add("wh")
        elif lowers[i] in lex.pronouns:
            tags.add("pronoun")
        elif is_name[i]:
            tags.add("name")
        else:
            tags.add("content")
        lemma = lowers[i] if ("punct" in tags or "number" in tags) else lemma_of(lowers[i], lex)
        tokens.append(Token(surfaces[i], lemma, lowers[i], (raw[i][0], raw[i][1]), frozenset(tags)))
    return tokens


def content_lemmas(text: str, lexicons: Optional[LexiconBundle] = None, *, sentence_initial: bool = True) -> list[str]:
    """Lemmas of content words: stopwords, wh-words, pronouns, punctuation,
    numbers and names are all excluded."""
    return [t.lemma for t in tokenize(text, lexicons, sentence_initial=sentence_initial) if t.has("content")]


# --- POS-lite and maximal noun phrase ---------------------------------------

_NOUN_SUFFIXES = ("tion", "sion", "ment", "ness", "ity")
_ADJ_SUFFIXES = ("ous", "ive", "al", "ful", "less")


def pos_lite(tokens: Sequence[Token], lexicons: Optional[LexiconBundle] = None) -> list[str]:
    """Context-free tag per token: DET / ADJ / NOUN / VERB / OTHER.

    Closed classes come from the lexicons; open-class words fall back on
    suffix heuristics, and anything unresolved is a NOUN (names included).
    """
    lex = lexicons or default_lexicons()
    tags = []
    for tok in tokens:
        if tok.has("punct"):
            tags.append("OTHER")
        elif tok.lower in lex.determiners:
            tags.append("DET")
        elif tok.has("wh") or tok.has("pronoun") or tok.has("stopword"):
            tags.append("OTHER")
        elif tok.has("number"):
            tags.append("ADJ")
        elif tok.lower in lex.adjectives:
            tags.append("ADJ")
        elif tok.lower in lex.verbs or tok.lemma in lex.verbs:
            tags.append("VERB")
        elif tok.lower.endswith(_ADJ_SUFFIXES):
            tags.append("ADJ")
        elif tok.lower.endswith(_NOUN_SUFFIXES):
            tags.append("NOUN")
        else:
            tags.append("NOUN")
    return tags


@dataclass(frozen=True)
class NounPhrase:
    tokens: tuple[Token, ...]
    start: int  # token index of first element
    end: int  # token index one past the last element

    @property
    def text(self) -> str:
        return " ".join(t.surface for t in self.tokens)

    def content_lemmas(self) -> list[str]:
        return [t.lemma for t in self.tokens if t.has("content")]


def max_np(question: str, lexicons: Optional[LexiconBundle] = None) -> NounPhrase:
    """Longest DET? ADJ* NOUN+ span of the question; ties go to the
    rightmost match. Raises NoNounPhrase when no NOUN exists."""
    lex = lexicons or default_lexicons()
    tokens = tokenize(question, lex)
    tags = pos_lite(tokens, lex)
    n = len(tokens)
    best: Optional[tuple[int, int]] = None  # (length, start)
    for start in range(n):
        i = start
        if i < n and tags[i] == "DET":
            i += 1
        while i < n and tags[i] == "ADJ":
            i += 1
        nouns = 0
        while i < n and tags[i] == "NOUN":
            i += 1
            nouns += 1
        if nouns == 0:
            continue
        length = i - start
        if best is None or (length, start) >= best:
            best = (length, start)
    if best is None:
        raise NoNounPhrase(f"no noun phrase in {question!r}")
    length, start = best
    return NounPhrase(tuple(tokens[start : start + length]), start, start + length)
