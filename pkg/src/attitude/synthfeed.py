"""Synthetic comment corpora following three attitude archetypes.

* decay: high start, steep fall through bin 3, floor of 0.3 * base from bin 5
* stable: flat at base
* surge: starts at 0.3 * base, peaks at base in bin 2, settles 10% lower
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ._io import atomic_write, fmt_float
from .batch import CORPUS_HEADER, DEFAULT_BIN_WIDTH, DEFAULT_BINS

ARCHETYPES = ("decay", "stable", "surge")
DEFAULT_BASE = {"decay": 0.8, "stable": 0.5, "surge": 0.8}

# share of the total decay drop reached at bins 1..5
_DECAY_PROGRESS = (0.0, 0.5, 0.85, 0.95, 1.0)


@dataclass(frozen=True)
class ArchetypeSpec:
    kind: str
    base: float
    noise_sigma: float = 0.0
    comments_per_bin: int = 1

    def __post_init__(self):
        if self.kind not in ARCHETYPES:
            raise ValueError(f"unknown archetype {self.kind!r}")
        if not 0.0 <= self.base <= 1.0:
            raise ValueError("base must lie in [0, 1]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.comments_per_bin < 1:
            raise ValueError("comments_per_bin must be >= 1")


def archetype_curve(kind: str, base: float, bins: int = DEFAULT_BINS) -> list[float]:
    if kind == "stable":
        curve = [base] * bins
    elif kind == "decay":
        floor = 0.3 * base
        curve = [floor if f == 1.0 else base - f * (base - floor) for f in _DECAY_PROGRESS]
        curve += [floor] * (bins - len(curve))
    elif kind == "surge":
        curve = [0.3 * base, base] + [0.9 * base] * (bins - 2)
    else:
        raise ValueError(f"unknown archetype {kind!r}")
    return [min(1.0, max(0.0, x)) for x in curve[:bins]]


def generate_corpus(
    specs: Sequence[tuple[ArchetypeSpec, int]],
    seed: int,
    corpus_path: str | Path,
    labels_path: str | Path,
    bins: int = DEFAULT_BINS,
    bin_width_s: int = DEFAULT_BIN_WIDTH,
    topic: str = "synthetic",
) -> list[tuple[str, str]]:
    """Write a corpus CSV and a ``post_id,archetype`` label file.

    Posts are numbered in the order of ``specs``. Each post draws from its own child
    stream of ``seed`` so adding posts never perturbs earlier ones.
    Returns the (post_id, archetype) labels.
    """
    total = sum(count for _, count in specs)
    if total < 1:
        raise ValueError("need at least one post")
    children = np.random.SeedSequence(seed).spawn(total)
    width = len(str(total - 1))
    labels: list[tuple[str, str]] = []
    rows: list[list[str]] = []
    idx = 0
    for spec, count in specs:
        curve = archetype_curve(spec.kind, spec.base, bins)
        for _ in range(count):
            rng = np.random.default_rng(children[idx])
            post_id = f"post-{idx:0{width}d}"
            labels.append((post_id, spec.kind))
            n = 0
            for b in range(bins):
                lo = b * bin_width_s
                offsets = np.sort(rng.integers(lo, lo + bin_width_s, size=spec.comments_per_bin))
                noise = rng.normal(0.0, spec.noise_sigma, size=spec.comments_per_bin)
                for t, eps in zip(offsets, noise):
                    pos = min(1.0, max(0.0, curve[b] + float(eps))) if spec.noise_sigma else curve[b]
                    neg = (1.0 - pos) * 0.5
                    text = f"comment {n} on {post_id}: {spec.kind} reaction"
                    rows.append([str(int(t)), topic, post_id, text, fmt_float(pos), fmt_float(neg)])
                    n += 1
            idx += 1
    with atomic_write(corpus_path, newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CORPUS_HEADER)
        w.writerows(rows)
    write_labels(labels_path, labels, seed)
    return labels


def write_labels(path: str | Path, labels: Sequence[tuple[str, str]], seed: int) -> None:
    with atomic_write(path, newline="") as fh:
        fh.write(f"# seed={seed}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["post_id", "archetype"])
        w.writerows(labels)


def read_labels(path: str | Path) -> dict[str, str]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    return {row["post_id"]: row["archetype"] for row in reader}
