"""Speed layer: poll a replayed comment source, diff against a cache, turn
new comments into events and keep a running-mean dashboard series per post.

A :class:`ReplaySource` stands in for a live comment feed. It exposes the
comments whose offset is at or before its simulated clock. Each poll moves
the clock forward by ``poll_interval_s * speedup`` post-seconds; in instant
mode the clock moves by ``poll_interval_s`` per poll and no real time passes.
Polls that would see nothing new are skipped in one jump, which is
observationally equivalent because empty polls emit no events.
"""

from __future__ import annotations

import bisect
import csv
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Sequence

from ._io import atomic_write, fmt_float
from .batch import CorpusRow, read_corpus_rows
from .errors import (
    BadHeader,
    EmptySeries,
    LexiconRequired,
    MalformedRecord,
    MalformedRow,
    SourceClosed,
)
from .sentiment import SentimentLexicon, SentimentScore, score_text

logger = logging.getLogger(__name__)

NEW_COMMENTS = "NewComments"
SERIES_UPDATED = "SeriesUpdated"
CROSSING_TRIGGER = "CrossingTrigger"
POS_OVER_NEG = "pos-over-neg"
NEG_OVER_POS = "neg-over-pos"

DASHBOARD_HEADER = ["post_id", "offset_s", "positive", "negative"]


@dataclass(frozen=True)
class Comment:
    comment_id: str
    post_id: str
    offset_s: int
    text: str
    # stored score from the corpus; None means score the text
    score: SentimentScore | None = None


@dataclass(frozen=True)
class StreamConfig:
    poll_interval_s: float = 0.1
    speedup: float = 1.0
    horizon_s: int = 30000

    def __post_init__(self):
        if not self.poll_interval_s > 0:
            raise ValueError("poll_interval_s must be > 0")
        if not self.speedup > 0:
            raise ValueError("speedup must be > 0")
        if self.horizon_s <= 0:
            raise ValueError("horizon_s must be > 0")

    @property
    def instant(self) -> bool:
        return math.isinf(self.speedup)

    @property
    def step_s(self) -> float:
        """Post-seconds the replay clock advances per poll."""
        return self.poll_interval_s if self.instant else self.poll_interval_s * self.speedup


@dataclass(frozen=True)
class StreamEvent:
    kind: str
    at_offset_s: int
    post_id: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "post_id": self.post_id, "at_offset_s": self.at_offset_s, "payload": self.payload},
            ensure_ascii=False,
        )


class DashboardPoint(NamedTuple):
    offset_s: int
    positive: float
    negative: float


@dataclass
class DashboardSeries:
    post_id: str
    points: list[DashboardPoint] = field(default_factory=list)


@dataclass
class PostStreamState:
    post_id: str
    count: int = 0
    sum_positive: float = 0.0
    sum_negative: float = 0.0
    points: list[DashboardPoint] = field(default_factory=list)
    # sign of (positive - negative) at the last point where it was nonzero
    last_sign: int = 0

    @property
    def series(self) -> DashboardSeries:
        return DashboardSeries(self.post_id, list(self.points))


class ReplaySource:
    """Comments ordered by offset, revealed as the replay clock advances."""

    def __init__(self, comments: Iterable[Comment]):
        self._records = sorted(comments, key=lambda c: c.offset_s)
        self._offsets = [c.offset_s for c in self._records]
        self.clock_s = -math.inf
        self.closed = False

    def __len__(self) -> int:
        return len(self._records)

    def advance_to(self, clock_s: float) -> None:
        self.clock_s = max(self.clock_s, clock_s)

    def offset_at(self, position: int) -> int:
        return self._offsets[position]

    def visible(self) -> int:
        """Number of records with offset at or before the clock."""
        return bisect.bisect_right(self._offsets, self.clock_s)

    def record(self, position: int) -> Comment:
        return self._records[position]

    def close(self) -> None:
        self.closed = True


def poll_source(source: ReplaySource, cursor: int) -> tuple[list[Comment], int]:
    """Return records after ``cursor`` that the clock has revealed, and the new cursor.

    ``cursor`` counts the records already delivered.
    """
    if source.closed:
        raise SourceClosed("poll on a closed source")
    end = max(cursor, source.visible())
    batch = []
    for pos in range(cursor, end):
        c = source.record(pos)
        if not isinstance(c.offset_s, int) or c.offset_s < 0:
            raise MalformedRecord(pos, f"offset {c.offset_s!r}")
        batch.append(c)
    return batch, end


def diff_against_cache(batch: Sequence[Comment], cache: set[str]) -> list[Comment]:
    """Comments in ``batch`` not yet in ``cache``; ``cache`` gains their ids."""
    delta = []
    for c in batch:
        if c.comment_id not in cache:
            cache.add(c.comment_id)
            delta.append(c)
    return delta


def comment_score(c: Comment, lexicon: SentimentLexicon | None, rescore: bool = False) -> SentimentScore:
    if c.score is not None and not rescore:
        return c.score
    if lexicon is None:
        raise LexiconRequired(f"comment {c.comment_id} has no stored score and no lexicon was given")
    return score_text(c.text, lexicon)


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def step(
    state: PostStreamState,
    delta: Sequence[Comment],
    lexicon: SentimentLexicon | None,
    rescore: bool = False,
) -> tuple[PostStreamState, list[StreamEvent]]:
    """Fold ``delta`` into ``state`` and return the events it triggers."""
    if not delta:
        return state, []
    at = max(c.offset_s for c in delta)
    for c in delta:
        s = comment_score(c, lexicon, rescore)
        state.count += 1
        state.sum_positive += s.positive
        state.sum_negative += s.negative
    point = DashboardPoint(at, state.sum_positive / state.count, state.sum_negative / state.count)
    if state.points and state.points[-1].offset_s >= at:
        # keep offsets strictly increasing
        point = point._replace(offset_s=state.points[-1].offset_s)
        state.points[-1] = point
    else:
        state.points.append(point)
    pid = state.post_id
    events = [
        StreamEvent(NEW_COMMENTS, at, pid, {"comment_ids": [c.comment_id for c in delta]}),
        StreamEvent(
            SERIES_UPDATED,
            at,
            pid,
            {
                "index": len(state.points) - 1,
                "offset_s": point.offset_s,
                "positive": point.positive,
                "negative": point.negative,
            },
        ),
    ]
    sign = _sign(point.positive - point.negative)
    if sign:
        if state.last_sign and sign != state.last_sign:
            direction = POS_OVER_NEG if sign > 0 else NEG_OVER_POS
            events.append(StreamEvent(CROSSING_TRIGGER, at, pid, {"direction": direction}))
        state.last_sign = sign
    return state, events


class Observer:
    """Receives events in emission order and the final series at the end."""

    def on_event(self, event: StreamEvent) -> None:
        pass

    def on_finish(self, series: Sequence[DashboardSeries]) -> None:
        pass

    def on_abort(self) -> None:
        pass


class EventLog(Observer):
    def __init__(self):
        self.events: list[StreamEvent] = []
        self.series: list[DashboardSeries] = []

    def on_event(self, event):
        self.events.append(event)

    def on_finish(self, series):
        self.series = list(series)


class JsonlEventSink(Observer):
    """Buffers events and writes them as JSON Lines when the run finishes."""

    def __init__(self, path: str | Path):
        self.path = path
        self._lines: list[str] = []

    def on_event(self, event):
        self._lines.append(event.to_json())

    def on_finish(self, series):
        with atomic_write(self.path) as fh:
            for line in self._lines:
                fh.write(line + "\n")


class DashboardCsvSink(Observer):
    def __init__(self, path: str | Path):
        self.path = path

    def on_finish(self, series):
        write_dashboard(self.path, series)


@dataclass(frozen=True)
class ReplaySummary:
    comments: int
    events: int
    polls: int
    series: tuple[DashboardSeries, ...] = ()


def comments_from_rows(rows: Iterable[CorpusRow]) -> list[Comment]:
    """Comment ids are ``L<line>`` from the corpus file, unique per corpus."""
    out = []
    for r in rows:
        score = SentimentScore.from_pos_neg(r.positive, r.negative) if r.has_scores else None
        out.append(Comment(f"L{r.line}", r.post, r.datetime_s, r.comment, score))
    return out


def load_comments(path: str | Path) -> list[Comment]:
    return comments_from_rows(read_corpus_rows(path))


def run_replay(
    config: StreamConfig,
    corpus: ReplaySource | Iterable[Comment] | str | Path,
    lexicon: SentimentLexicon | None,
    observers: Sequence[Observer] = (),
    rescore: bool = False,
    sleep: Callable[[float], None] = time.sleep,
) -> ReplaySummary:
    """Drive poll -> diff -> step until the corpus or the horizon is exhausted.

    Observers are notified in registration order. If the run fails, each
    observer's ``on_abort`` is called and nothing is finalized.
    """
    try:
        if isinstance(corpus, (str, Path)):
            corpus = load_comments(corpus)
        source = corpus if isinstance(corpus, ReplaySource) else ReplaySource(corpus)
        summary = _replay(config, source, lexicon, observers, rescore, sleep)
    except BaseException:
        for obs in observers:
            obs.on_abort()
        raise
    for obs in observers:
        obs.on_finish(summary.series)
    return summary


def _replay(config, source, lexicon, observers, rescore, sleep) -> ReplaySummary:
    step_s = config.step_s
    states: dict[str, PostStreamState] = {}
    caches: dict[str, set[str]] = {}
    tick = 0
    cursor = 0
    n_comments = n_events = n_polls = 0
    while cursor < len(source):
        next_off = source.offset_at(cursor)
        if next_off >= config.horizon_s:
            break
        target = max(tick + 1, math.floor(next_off / step_s))
        while target * step_s < next_off:
            target += 1
        if not config.instant:
            sleep((target - tick) * config.poll_interval_s)
        tick = target
        source.advance_to(tick * step_s)
        batch, cursor = poll_source(source, cursor)
        n_polls += 1
        batch = [c for c in batch if c.offset_s < config.horizon_s]
        by_post: dict[str, list[Comment]] = {}
        for c in batch:
            by_post.setdefault(c.post_id, []).append(c)
        for pid, comments in by_post.items():
            delta = diff_against_cache(comments, caches.setdefault(pid, set()))
            state = states.setdefault(pid, PostStreamState(pid))
            _, events = step(state, delta, lexicon, rescore)
            n_comments += len(delta)
            for ev in events:
                n_events += 1
                for obs in observers:
                    obs.on_event(ev)
    logger.debug("replay: %d polls, %d comments, %d events", n_polls, n_comments, n_events)
    return ReplaySummary(n_comments, n_events, n_polls, tuple(s.series for s in states.values()))


def write_dashboard(path: str | Path, series: Sequence[DashboardSeries]) -> None:
    with atomic_write(path, newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DASHBOARD_HEADER)
        for s in series:
            for p in s.points:
                w.writerow([s.post_id, p.offset_s, fmt_float(p.positive), fmt_float(p.negative)])


def read_dashboard(path: str | Path) -> list[DashboardSeries]:
    series: dict[str, DashboardSeries] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != DASHBOARD_HEADER:
            raise BadHeader("expected " + ",".join(DASHBOARD_HEADER))
        for rec in reader:
            if not rec:
                continue
            try:
                pid, off, pos, neg = rec
                point = DashboardPoint(int(off), float(pos), float(neg))
            except ValueError:
                raise MalformedRow(reader.line_num, "bad dashboard row") from None
            series.setdefault(pid, DashboardSeries(pid)).points.append(point)
    if not series:
        raise EmptySeries("dashboard file has no points")
    return list(series.values())


def read_events(path: str | Path) -> list[StreamEvent]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                d = json.loads(line)
                out.append(StreamEvent(d["kind"], d["at_offset_s"], d["post_id"], d["payload"]))
    return out
