"""Standalone SVG line charts for dashboard and feature series.

Positive series are stroked green, negative series red. The y axis is
fixed to [0, 1]. Output bytes depend only on the input values.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape, quoteattr

from ._io import atomic_write
from .batch import read_features
from .errors import EmptySeries
from .stream import DASHBOARD_HEADER, read_dashboard

WIDTH = 640
HEIGHT = 320
MARGIN = 40
COLORS = {"positive": "green", "negative": "red"}


def _x(x: float, lo: float, hi: float) -> float:
    span = hi - lo
    frac = (x - lo) / span if span else 0.5
    return MARGIN + frac * (WIDTH - 2 * MARGIN)


def _y(v: float) -> float:
    return HEIGHT - MARGIN - v * (HEIGHT - 2 * MARGIN)


def y_to_value(y: float) -> float:
    """Invert the y mapping; used to read values back from a chart."""
    return (HEIGHT - MARGIN - y) / (HEIGHT - 2 * MARGIN)


def render_svg(
    lines: Sequence[tuple[str, str, Sequence[tuple[float, float]]]],
    title: str = "",
    x_label: str = "",
) -> str:
    """Render ``(name, channel, [(x, y), ...])`` lines to SVG text."""
    lines = [ln for ln in lines if ln[2]]
    if not lines:
        raise EmptySeries("nothing to plot")
    xs = [x for _, _, pts in lines for x, _ in pts]
    lo, hi = min(xs), max(xs)
    left, right = MARGIN, WIDTH - MARGIN
    top, bottom = MARGIN, HEIGHT - MARGIN
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:g}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>')
    for v in (0.0, 0.5, 1.0):
        out.append(
            f'<text x="{left - 6}" y="{_y(v) + 4:.3f}" text-anchor="end" font-size="10">{v:g}</text>'
        )
    out.append(f'<text x="{left}" y="{bottom + 16}" font-size="10">{lo:g}</text>')
    out.append(f'<text x="{right}" y="{bottom + 16}" text-anchor="end" font-size="10">{hi:g}</text>')
    if x_label:
        out.append(f'<text x="{WIDTH / 2:g}" y="{HEIGHT - 8}" text-anchor="middle" font-size="11">{escape(x_label)}</text>')
    for name, channel, pts in lines:
        coords = " ".join(f"{_x(x, lo, hi):.3f},{_y(y):.3f}" for x, y in pts)
        out.append(
            f'<polyline data-series={quoteattr(name)} data-channel="{channel}" fill="none" '
            f'stroke="{COLORS[channel]}" stroke-width="1.5" points="{coords}"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _header(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8", newline="") as fh:
        return next(csv.reader(fh), [])


def plot_file(series_path: str | Path, out: str | Path, post_id: str | None = None) -> None:
    """Plot a dashboard CSV (one post) or a feature CSV (one line per row)."""
    header = _header(series_path)
    if header == DASHBOARD_HEADER:
        all_series = read_dashboard(series_path)
        if post_id is None:
            s = all_series[0]
        else:
            matches = [s for s in all_series if s.post_id == post_id]
            if not matches:
                raise EmptySeries(f"no dashboard points for post {post_id!r}")
            s = matches[0]
        lines = [
            (s.post_id, "negative", [(p.offset_s, p.negative) for p in s.points]),
            (s.post_id, "positive", [(p.offset_s, p.positive) for p in s.points]),
        ]
        svg = render_svg(lines, title=s.post_id, x_label="seconds since post")
    else:
        vectors = read_features(series_path)
        if post_id is not None:
            vectors = [v for v in vectors if v.post_id == post_id]
        lines = [(v.post_id, v.channel, list(enumerate(v.values, start=1))) for v in vectors]
        svg = render_svg(lines, x_label="bin")
    with atomic_write(out) as fh:
        fh.write(svg)
