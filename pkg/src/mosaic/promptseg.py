"""Prompt segmentation: free-form text to ordered (object, style) pairs.

A prompt is split into clauses on connectives ("and", ",", ";"); each clause
must match exactly one style-marker pattern:

    <object> in <style> style
    <object> in the style of <style>
    <object> as <style>
    <object> styled like <style>

Position descriptions ("tree on the left in watercolor style") stay inside
the object phrase verbatim; downstream consumers receive them unmodified.

Pairs serialize to a flat string with two reserved control tokens::

    obj0 <PAIR> sty0 <SEP> obj1 <PAIR> sty1

which is also the exchange format for external segmenter backends, whose
output is validated by round-tripping through :func:`deserialize_pairs`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    AmbiguousClause,
    EmptyPrompt,
    IllegalPhrase,
    MalformedSequence,
    NoPairsFound,
    UnknownToken,
)

PAIR_TOKEN = "<PAIR>"
SEP_TOKEN = "<SEP>"
PAIR_TOKEN_ID = 0
SEP_TOKEN_ID = 1

_CONTROL_TOKENS = (PAIR_TOKEN, SEP_TOKEN)


@dataclass(frozen=True)
class Prompt:
    """Raw input text; must be non-empty after whitespace trimming."""

    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise EmptyPrompt("prompt is empty")


@dataclass(frozen=True)
class ObjectStylePair:
    object_phrase: str
    style_phrase: str
    ordinal: int

    def __post_init__(self):
        for name, phrase in (("object", self.object_phrase), ("style", self.style_phrase)):
            if not phrase.strip():
                raise ValueError(f"{name} phrase is empty")
            for token in _CONTROL_TOKENS:
                if token in phrase:
                    raise IllegalPhrase(f"{name} phrase {phrase!r} contains {token}")
        if self.ordinal < 0:
            raise ValueError(f"ordinal must be non-negative, got {self.ordinal}")


@dataclass(frozen=True)
class SegmentedPrompt:
    """Ordered object/style pairs parsed from one prompt."""

    pairs: tuple[ObjectStylePair, ...]

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("a segmented prompt needs at least one pair")
        for i, pair in enumerate(self.pairs):
            if pair.ordinal != i:
                raise ValueError(f"pair ordinals must be consecutive from 0, got {pair.ordinal} at {i}")

    @classmethod
    def from_phrases(cls, phrases: Iterable[tuple[str, str]]) -> "SegmentedPrompt":
        return cls(tuple(ObjectStylePair(o, s, i) for i, (o, s) in enumerate(phrases)))

    @property
    def objects(self) -> tuple[str, ...]:
        return tuple(p.object_phrase for p in self.pairs)

    @property
    def styles(self) -> tuple[str, ...]:
        return tuple(p.style_phrase for p in self.pairs)

    def phrases(self) -> list[tuple[str, str]]:
        return [(p.object_phrase, p.style_phrase) for p in self.pairs]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


# --- grammar ---

_DEFAULT_MARKERS = (
    ("in-the-style-of", r"^(?P<obj>.+?)\s+in\s+the\s+style\s+of\s+(?P<sty>.+)$"),
    ("in-style", r"^(?P<obj>.+?)\s+in\s+(?P<sty>.+)\s+style$"),
    ("as", r"^(?P<obj>.+?)\s+as\s+(?P<sty>.+)$"),
    ("styled-like", r"^(?P<obj>.+?)\s+styled\s+like\s+(?P<sty>.+)$"),
)

# A comma or semicolon may swallow a following "and" ("..., and sky ...").
_DEFAULT_CONNECTIVES = r"\s*[;,]\s*(?:and\s+)?|\s+and\s+"


@dataclass(frozen=True)
class GrammarConfig:
    """Connective splitter and style-marker patterns, case-insensitive."""

    connective_pattern: str = _DEFAULT_CONNECTIVES
    markers: tuple[tuple[str, str], ...] = _DEFAULT_MARKERS

    @property
    def connective_re(self) -> re.Pattern:
        return re.compile(self.connective_pattern, re.IGNORECASE)

    def marker_res(self) -> list[tuple[str, re.Pattern]]:
        return [(name, re.compile(rx, re.IGNORECASE)) for name, rx in self.markers]


DEFAULT_GRAMMAR = GrammarConfig()


def split_clauses(text: str, grammar: GrammarConfig = DEFAULT_GRAMMAR) -> list[tuple[int, str]]:
    """Connective-delimited clauses as (character offset, clause text).

    Whitespace-only fragments (e.g. between ", and") are dropped.
    """
    clauses: list[tuple[int, str]] = []
    pos = 0
    for m in grammar.connective_re.finditer(text):
        fragment = text[pos : m.start()]
        if fragment.strip():
            clauses.append((pos, fragment))
        pos = m.end()
    tail = text[pos:]
    if tail.strip():
        clauses.append((pos, tail))
    return clauses


def _match_clause(clause: str, grammar: GrammarConfig) -> tuple[str, str] | None:
    """Best (object, style) reading of one clause, or None.

    The leftmost marker wins; two markers starting at the same offset is an
    ambiguity and raises AmbiguousClause with both readings.
    """
    candidates: list[tuple[int, str, str]] = []
    for _, rx in grammar.marker_res():
        m = rx.match(clause)
        if m:
            candidates.append((m.end("obj"), m.group("obj"), m.group("sty")))
    if not candidates:
        return None
    candidates.sort(key=lambda c: c[0])
    best_pos = candidates[0][0]
    tied = [(obj, sty) for pos, obj, sty in candidates if pos == best_pos]
    if len(tied) > 1:
        raise AmbiguousClause(clause.strip(), tied)
    return tied[0]


def parse_prompt(prompt: Prompt | str, grammar: GrammarConfig = DEFAULT_GRAMMAR) -> SegmentedPrompt:
    """Parse a prompt into ordered object/style pairs.

    Every clause must match a marker; clauses without one are reported in
    a NoPairsFound error rather than silently skipped.
    """
    if isinstance(prompt, str):
        prompt = Prompt(prompt)
    clauses = split_clauses(prompt.text, grammar)
    if not clauses:
        raise NoPairsFound(f"no clauses in prompt {prompt.text!r}")
    phrases: list[tuple[str, str]] = []
    unmatched: list[str] = []
    for _, clause in clauses:
        reading = _match_clause(clause.strip(), grammar)
        if reading is None:
            unmatched.append(clause.strip())
        else:
            phrases.append(reading)
    if unmatched:
        raise NoPairsFound(f"no style marker in clause(s): {unmatched!r}")
    return SegmentedPrompt.from_phrases(phrases)


def parse_with_segmenter(prompt: Prompt | str, segmenter: Callable[[str], str]) -> SegmentedPrompt:
    """Run an external segmenter backend and validate its output.

    ``segmenter`` maps raw prompt text to the control-token serialization;
    malformed output surfaces as MalformedSequence.
    """
    if isinstance(prompt, str):
        prompt = Prompt(prompt)
    return deserialize_pairs(segmenter(prompt.text))


# --- control-token serialization ---

def serialize_pairs(sp: SegmentedPrompt) -> str:
    """Flat layout ``obj0 <PAIR> sty0 <SEP> obj1 <PAIR> sty1 ...``."""
    parts = []
    for pair in sp.pairs:
        for phrase in (pair.object_phrase, pair.style_phrase):
            for token in _CONTROL_TOKENS:
                if token in phrase:
                    raise IllegalPhrase(f"phrase {phrase!r} contains {token}")
        parts.append(f"{pair.object_phrase} {PAIR_TOKEN} {pair.style_phrase}")
    return f" {SEP_TOKEN} ".join(parts)


def deserialize_pairs(s: str) -> SegmentedPrompt:
    """Inverse of :func:`serialize_pairs` on its image.

    Walks space-separated tokens through the phrase/control alternation;
    any structural violation (empty phrase, dangling separator, missing
    pair split) raises MalformedSequence.
    """
    if not s:
        raise MalformedSequence("empty serialization")
    segments: list[list[str]] = [[]]  # phrase-level split on <SEP>
    for token in s.split(" "):
        if token == SEP_TOKEN:
            segments.append([])
        else:
            segments[-1].append(token)
    phrases: list[tuple[str, str]] = []
    for seg in segments:
        sides: list[list[str]] = [[]]
        for token in seg:
            if token == PAIR_TOKEN:
                sides.append([])
            else:
                sides[-1].append(token)
        if len(sides) != 2:
            raise MalformedSequence(
                f"pair segment must contain exactly one {PAIR_TOKEN}, got {len(sides) - 1}"
            )
        obj, sty = (" ".join(side) for side in sides)
        if not obj.strip() or not sty.strip():
            raise MalformedSequence(f"empty phrase in segment {' '.join(seg)!r}")
        phrases.append((obj, sty))
    try:
        return SegmentedPrompt.from_phrases(phrases)
    except (ValueError, IllegalPhrase) as exc:
        raise MalformedSequence(str(exc)) from exc


# --- token sequences and cross-entropy scoring ---

@dataclass(frozen=True)
class TokenSeq:
    """Vocabulary token ids; ids 0 and 1 are reserved for the control tokens."""

    tokens: tuple[int, ...]
    vocab_size: int

    def __post_init__(self):
        if self.vocab_size < 2:
            raise ValueError("vocab_size must cover the two reserved control tokens")
        for t in self.tokens:
            if not 0 <= t < self.vocab_size:
                raise ValueError(f"token id {t} outside [0, {self.vocab_size})")


class Vocabulary:
    """Word-level vocabulary with fixed control-token ids (PAIR=0, SEP=1)."""

    def __init__(self, words: Iterable[str] = ()):
        self._word_to_id: dict[str, int] = {PAIR_TOKEN: PAIR_TOKEN_ID, SEP_TOKEN: SEP_TOKEN_ID}
        self._id_to_word: list[str] = [PAIR_TOKEN, SEP_TOKEN]
        for word in words:
            self.add(word)

    def add(self, word: str) -> int:
        if word in self._word_to_id:
            return self._word_to_id[word]
        idx = len(self._id_to_word)
        self._word_to_id[word] = idx
        self._id_to_word.append(word)
        return idx

    @property
    def size(self) -> int:
        return len(self._id_to_word)

    def encode(self, serialized: str) -> TokenSeq:
        ids = []
        for word in serialized.split():
            if word not in self._word_to_id:
                raise UnknownToken(f"word {word!r} not in vocabulary")
            ids.append(self._word_to_id[word])
        return TokenSeq(tokens=tuple(ids), vocab_size=self.size)

    def decode(self, seq: TokenSeq) -> str:
        if seq.vocab_size > self.size:
            raise UnknownToken(f"sequence vocab size {seq.vocab_size} exceeds {self.size}")
        return " ".join(self._id_to_word[t] for t in seq.tokens)


@dataclass(frozen=True)
class TokenDistribution:
    """Per-position probability vectors plus the gold token ids."""

    probs: tuple[tuple[float, ...], ...]
    gold: tuple[int, ...]

    def __post_init__(self):
        if len(self.probs) != len(self.gold):
            raise ValueError(f"{len(self.probs)} probability vectors vs {len(self.gold)} gold ids")
        if not self.probs:
            raise ValueError("distribution needs at least one position")
        for i, (vec, g) in enumerate(zip(self.probs, self.gold)):
            if not 0 <= g < len(vec):
                raise ValueError(f"gold id {g} outside vector of size {len(vec)} at position {i}")
            if any(p < 0 for p in vec):
                raise ValueError(f"negative probability at position {i}")
            total = math.fsum(vec)
            if abs(total - 1.0) > 1e-6:
                raise ValueError(f"probabilities at position {i} sum to {total}, expected 1")

    @classmethod
    def from_lists(cls, probs: Sequence[Sequence[float]], gold: Sequence[int]) -> "TokenDistribution":
        return cls(tuple(tuple(float(p) for p in vec) for vec in probs), tuple(int(g) for g in gold))


def token_cross_entropy(td: TokenDistribution) -> float:
    """Mean over positions of -ln(probability at the gold index).

    Returns math.inf when any gold index has probability zero; the infinite
    sentinel marks a candidate incompatible with the gold sequence and is
    the only way the result can be non-finite.
    """
    gold_probs = np.array([td.probs[i][g] for i, g in enumerate(td.gold)], dtype=np.float64)
    if np.any(gold_probs == 0.0):
        return math.inf
    return float(np.mean(-np.log(gold_probs)))
