"""Corpus parsing, per-post timelines and bin-mean featurization."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ._io import atomic_write, fmt_float
from .errors import (
    BadHeader,
    EmptyHorizon,
    LexiconRequired,
    MalformedRow,
    NegativeOffset,
    ScoreOutOfRange,
)
from .sentiment import SentimentLexicon, SentimentScore, score_text

logger = logging.getLogger(__name__)

CORPUS_HEADER = ["Datetime", "Topic", "Post", "Comment", "Positive", "Negative"]
CHANNELS = ("positive", "negative")
DEFAULT_BINS = 20
DEFAULT_BIN_WIDTH = 1500
# slack for the positive + negative <= 1 check on stored scores
_SUM_TOL = 1e-9


@dataclass(frozen=True)
class CorpusRow:
    datetime_s: int
    topic: str
    post: str
    comment: str
    positive: float | None = None
    negative: float | None = None
    line: int = 0

    @property
    def has_scores(self) -> bool:
        return self.positive is not None and self.negative is not None


@dataclass
class PostTimeline:
    post_id: str
    scored: list[tuple[int, SentimentScore]]

    def channel(self, channel: str) -> list[tuple[int, float]]:
        return [(t, getattr(s, channel)) for t, s in self.scored]


@dataclass(frozen=True)
class FeatureVector:
    post_id: str
    channel: str
    values: tuple[float, ...]
    bin_width_s: int = DEFAULT_BIN_WIDTH

    @property
    def horizon_s(self) -> int:
        return len(self.values) * self.bin_width_s


def normalize_channel(channel: str) -> str:
    aliases = {"pos": "positive", "neg": "negative"}
    channel = aliases.get(channel, channel)
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}")
    return channel


def _parse_score(text: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedRow(line, f"bad score {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise ScoreOutOfRange(line, f"{value} not in [0, 1]")
    return value


def read_corpus_rows(path: str | Path) -> list[CorpusRow]:
    """Parse a corpus CSV in file order.

    The Positive/Negative columns may be omitted from the header entirely, or
    left empty on individual rows; such rows carry no scores.
    """
    rows: list[CorpusRow] = []
    with open(path, encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise BadHeader("empty corpus file")
        header = [h.strip() for h in header]
        if header not in (CORPUS_HEADER, CORPUS_HEADER[:4]):
            raise BadHeader(f"expected {','.join(CORPUS_HEADER)}, got {','.join(header)}")
        width = len(header)
        for rec in reader:
            line = reader.line_num
            if not rec:
                continue
            if len(rec) != width:
                raise MalformedRow(line, f"expected {width} fields, got {len(rec)}")
            try:
                offset = int(rec[0])
            except ValueError:
                raise MalformedRow(line, f"Datetime {rec[0]!r} is not an integer") from None
            if offset < 0:
                raise NegativeOffset(line, f"Datetime {offset} < 0")
            pos = neg = None
            if width == 6 and (rec[4].strip() or rec[5].strip()):
                if not (rec[4].strip() and rec[5].strip()):
                    raise MalformedRow(line, "Positive and Negative must both be set or both empty")
                pos = _parse_score(rec[4], line)
                neg = _parse_score(rec[5], line)
                if pos + neg > 1.0 + _SUM_TOL:
                    raise ScoreOutOfRange(line, f"Positive + Negative = {pos + neg} > 1")
            rows.append(CorpusRow(offset, rec[1], rec[2], rec[3], pos, neg, line))
    return rows


def row_score(row: CorpusRow, lexicon: SentimentLexicon | None, rescore: bool = False) -> SentimentScore:
    if row.has_scores and not rescore:
        return SentimentScore.from_pos_neg(row.positive, row.negative)
    if lexicon is None:
        raise LexiconRequired(f"line {row.line}: no stored scores and no lexicon given")
    return score_text(row.comment, lexicon)


def build_timelines(
    rows: Iterable[CorpusRow], lexicon: SentimentLexicon | None = None, rescore: bool = False
) -> list[PostTimeline]:
    """Group rows by post title (first-appearance order), sorted by offset."""
    grouped: dict[str, list[tuple[int, SentimentScore]]] = {}
    for row in rows:
        grouped.setdefault(row.post, []).append((row.datetime_s, row_score(row, lexicon, rescore)))
    return [
        PostTimeline(post, sorted(points, key=lambda p: p[0]))
        for post, points in grouped.items()
    ]


def load_corpus(
    path: str | Path, lexicon: SentimentLexicon | None = None, rescore: bool = False
) -> list[PostTimeline]:
    return build_timelines(read_corpus_rows(path), lexicon, rescore)


def _mean(xs: list[float]) -> float:
    # offset by the minimum so a bin of identical scores averages to exactly that score
    lo = min(xs)
    return lo + math.fsum(x - lo for x in xs) / len(xs)


def featurize(
    timeline: PostTimeline,
    channel: str,
    bins: int = DEFAULT_BINS,
    bin_width_s: int = DEFAULT_BIN_WIDTH,
) -> FeatureVector:
    """Average one channel over ``bins`` equal bins of ``bin_width_s`` seconds.

    Bin j covers ``[j * width, (j + 1) * width)``. Empty bins take the value
    of the nearest earlier nonempty bin; leading empty bins take the first
    nonempty one. Comments at or past ``bins * bin_width_s`` are ignored.
    """
    channel = normalize_channel(channel)
    if bins < 1 or bin_width_s < 1:
        raise ValueError("bins and bin_width_s must be positive")
    horizon = bins * bin_width_s
    buckets: list[list[float]] = [[] for _ in range(bins)]
    for offset, score in timeline.scored:
        if 0 <= offset < horizon:
            buckets[offset // bin_width_s].append(getattr(score, channel))
    means = [_mean(b) if b else None for b in buckets]
    first = next((m for m in means if m is not None), None)
    if first is None:
        raise EmptyHorizon(f"post {timeline.post_id!r} has no comments before {horizon} s")
    values = []
    last = first
    for m in means:
        if m is not None:
            last = m
        values.append(last)
    return FeatureVector(timeline.post_id, channel, tuple(values), bin_width_s)


def featurize_corpus(
    timelines: Sequence[PostTimeline],
    channel: str,
    bins: int = DEFAULT_BINS,
    bin_width_s: int = DEFAULT_BIN_WIDTH,
) -> tuple[list[FeatureVector], list[str]]:
    """Featurize every timeline; returns (vectors, ids of skipped posts)."""
    vectors, skipped = [], []
    for tl in timelines:
        try:
            vectors.append(featurize(tl, channel, bins, bin_width_s))
        except EmptyHorizon:
            skipped.append(tl.post_id)
    if skipped:
        logger.info("skipped %d post(s) with no comments inside the horizon", len(skipped))
    return vectors, skipped


def write_features(path: str | Path, vectors: Sequence[FeatureVector]) -> None:
    n = len(vectors[0].values) if vectors else DEFAULT_BINS
    with atomic_write(path, newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["post_id", "channel"] + [f"v{i}" for i in range(1, n + 1)])
        for v in vectors:
            if len(v.values) != n:
                raise ValueError("all feature vectors must have the same length")
            w.writerow([v.post_id, v.channel] + [fmt_float(x) for x in v.values])


def read_features(path: str | Path, bin_width_s: int = DEFAULT_BIN_WIDTH) -> list[FeatureVector]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["post_id", "channel"] or len(header) < 3:
            raise BadHeader("expected post_id,channel,v1..vN")
        n = len(header) - 2
        if header[2:] != [f"v{i}" for i in range(1, n + 1)]:
            raise BadHeader("value columns must be v1..vN")
        for rec in reader:
            if not rec:
                continue
            line = reader.line_num
            if len(rec) != n + 2:
                raise MalformedRow(line, f"expected {n + 2} fields")
            try:
                values = tuple(float(x) for x in rec[2:])
                channel = normalize_channel(rec[1])
            except ValueError as exc:
                raise MalformedRow(line, str(exc)) from None
            if not all(0.0 <= x <= 1.0 for x in values):
                raise ScoreOutOfRange(line, "feature values must lie in [0, 1]")
            out.append(FeatureVector(rec[0], channel, values, bin_width_s))
    return out
