"""Deterministic lexicon-based sentiment scorer.

Each token carries a valence in [-1, 1]. A token contributes positive mass
``max(v, 0)``, negative mass ``max(-v, 0)`` and neutral mass ``1 - |v|``;
negators contribute one unit of neutral mass and flip the sign of the next
nonzero-valence token within the following three tokens. The accumulated
masses are normalized so that positive + negative + neutral = 1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DuplicateToken, MalformedRow, ValenceOutOfRange

NEGATION_WINDOW = 3

_TOKEN_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class SentimentScore:
    positive: float
    negative: float
    neutral: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.positive, self.negative, self.neutral)

    @classmethod
    def from_pos_neg(cls, positive: float, negative: float) -> "SentimentScore":
        """Build a score from stored positive/negative columns."""
        return cls(positive, negative, max(0.0, 1.0 - positive - negative))


NEUTRAL = SentimentScore(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class SentimentLexicon:
    entries: dict[str, float]
    negators: frozenset[str] = field(default_factory=frozenset)
    source_path: str = ""

    def __post_init__(self):
        for tok, v in self.entries.items():
            if not tok or tok != tok.lower() or any(c.isspace() for c in tok):
                raise ValueError(f"bad lexicon token {tok!r}")
            if not -1.0 <= v <= 1.0:
                raise ValueError(f"valence {v} for {tok!r} outside [-1, 1]")
        for tok in self.negators:
            if self.entries.get(tok, 0.0) != 0.0:
                raise ValueError(f"negator {tok!r} has nonzero valence")

    def valence(self, token: str) -> float:
        return self.entries.get(token, 0.0)


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it on runs of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def load_lexicon(path: str | Path) -> SentimentLexicon:
    """Read a ``token<TAB>valence[<TAB>NEG]`` file.

    Blank lines and lines starting with ``#`` are skipped.
    """
    entries: dict[str, float] = {}
    negators: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) not in (2, 3):
                raise MalformedRow(lineno, "expected token<TAB>valence[<TAB>NEG]")
            token = cols[0].strip().lower()
            if not token or any(c.isspace() for c in token):
                raise MalformedRow(lineno, f"bad token {cols[0]!r}")
            try:
                valence = float(cols[1])
            except ValueError:
                raise MalformedRow(lineno, f"bad valence {cols[1]!r}") from None
            if not -1.0 <= valence <= 1.0:  # also rejects nan
                raise ValenceOutOfRange(lineno, f"{valence} not in [-1, 1]")
            if len(cols) == 3:
                if cols[2].strip() != "NEG":
                    raise MalformedRow(lineno, f"unknown flag {cols[2]!r}")
                if valence != 0.0:
                    raise MalformedRow(lineno, "negators must have valence 0")
                negators.add(token)
            if token in entries:
                raise DuplicateToken(token)
            entries[token] = valence
    return SentimentLexicon(entries, frozenset(negators), str(path))


def score_tokens(tokens: list[str], lexicon: SentimentLexicon) -> SentimentScore:
    if not tokens:
        return NEUTRAL
    pos = neg = neu = 0.0
    # positions of negators whose flip has not been consumed yet
    pending: list[int] = []
    for i, tok in enumerate(tokens):
        if tok in lexicon.negators:
            neu += 1.0
            pending.append(i)
            continue
        v = lexicon.valence(tok)
        if v != 0.0:
            live = [p for p in pending if i - p <= NEGATION_WINDOW]
            if len(live) % 2:
                v = -v
            pending.clear()
        if v > 0:
            pos += v
        else:
            neg -= v
        neu += 1.0 - abs(v)
    total = pos + neg + neu
    return SentimentScore(pos / total, neg / total, neu / total)


def score_text(text: str, lexicon: SentimentLexicon) -> SentimentScore:
    """Score ``text`` as a normalized (positive, negative, neutral) triple."""
    return score_tokens(tokenize(text), lexicon)
