"""Two-step trend prediction: match a cluster by prefix, then copy the
continuation of the nearest training series inside that cluster."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ._io import atomic_write, fmt_float
from .batch import FeatureVector
from .clustering import ClusterModel, fit, nearest
from .errors import DimensionMismatch, EmptyCluster, LengthMismatch, TooFewVectors

DEFAULT_PREFIX_LEN = 5


@dataclass(frozen=True)
class Forecast:
    target_post_id: str
    prefix_len: int
    matched_cluster: int
    donor_post_id: str
    predicted: tuple[float, ...]
    actual: tuple[float, ...] | None = None
    mae: float | None = None


@dataclass(frozen=True)
class EvalReport:
    folds: int
    seed: int
    per_fold_mae: tuple[float, ...]
    avg_mae: float

    def lines(self) -> list[str]:
        out = [f"fold,{i},{fmt_float(m)}" for i, m in enumerate(self.per_fold_mae)]
        out.append(f"avg,{fmt_float(self.avg_mae)}")
        return out


def mae(actual: Sequence[float], predicted: Sequence[float]) -> float:
    """Mean absolute error between the actual and predicted continuation."""
    if len(actual) != len(predicted):
        raise LengthMismatch(f"{len(actual)} actual vs {len(predicted)} predicted values")
    if not actual:
        raise LengthMismatch("empty series")
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    return float(np.abs(a - p).sum() / len(a))


def _prefix(prefix: Sequence[float], dim: int) -> np.ndarray:
    x = np.asarray(prefix, dtype=float)
    if x.ndim != 1 or not 1 <= x.size <= dim:
        raise DimensionMismatch(f"prefix of length {x.size} for {dim}-component vectors")
    return x


def match_cluster(prefix: Sequence[float], model: ClusterModel) -> int:
    """Cluster whose centroid's leading components are nearest to ``prefix``."""
    x = _prefix(prefix, model.dim)
    return nearest(x, model.centroids[:, : x.size])


def predict(
    prefix: Sequence[float],
    model: ClusterModel,
    training_vectors: Sequence[FeatureVector],
    target_post_id: str = "",
    actual: Sequence[float] | None = None,
    exclude: frozenset[str] | set[str] = frozenset(),
) -> Forecast:
    """Forecast the bins after ``prefix``.

    Training vectors absent from ``model.assignments`` are assigned to their
    nearest centroid. Donor ties go to the lexicographically smallest post id.
    """
    x = _prefix(prefix, model.dim)
    p = x.size
    cluster = match_cluster(x, model)
    best_id: str | None = None
    best_d = np.inf
    best_values: tuple[float, ...] = ()
    for v in training_vectors:
        if v.post_id in exclude:
            continue
        if len(v.values) != model.dim:
            raise DimensionMismatch(f"training vector {v.post_id!r} has {len(v.values)} components")
        j = model.assignments.get(v.post_id)
        if j is None:
            j = nearest(np.asarray(v.values), model.centroids)
        if j != cluster:
            continue
        diff = np.asarray(v.values[:p]) - x
        d = float(diff @ diff)
        if d < best_d or (d == best_d and v.post_id < best_id):
            best_id, best_d, best_values = v.post_id, d, v.values
    if best_id is None:
        raise EmptyCluster(f"cluster {cluster} has no training members")
    predicted = tuple(best_values[p:])
    err = None
    if actual is not None:
        actual = tuple(float(a) for a in actual)
        err = mae(actual, predicted)
    return Forecast(target_post_id, p, cluster, best_id, predicted, actual, err)


def fold_indices(n: int, folds: int, seed: int) -> list[np.ndarray]:
    order = np.random.default_rng(seed).permutation(n)
    return np.array_split(order, folds)


def cross_validate(
    vectors: Sequence[FeatureVector],
    folds: int = 10,
    k: int = 3,
    seed: int = 0,
    prefix_len: int = DEFAULT_PREFIX_LEN,
    algorithm: str = "kmeans",
) -> EvalReport:
    """k-fold evaluation with the cluster model refit on each training split.

    ``k`` is lowered to the number of distinct training vectors when a split
    has fewer.
    """
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if len(vectors) < folds:
        raise TooFewVectors(f"{len(vectors)} vectors for {folds} folds")
    per_fold = []
    for held in fold_indices(len(vectors), folds, seed):
        held_set = set(held.tolist())
        train = [v for i, v in enumerate(vectors) if i not in held_set]
        distinct = len({v.values for v in train})
        model = fit(train, min(k, distinct), seed, algorithm)
        errors = []
        for i in held:
            v = vectors[i]
            fc = predict(v.values[:prefix_len], model, train, v.post_id, v.values[prefix_len:])
            errors.append(fc.mae)
        per_fold.append(float(np.mean(errors)))
    return EvalReport(folds, seed, tuple(per_fold), float(np.mean(per_fold)))


def write_forecasts(path: str | Path, forecasts: Sequence[Forecast]) -> None:
    with atomic_write(path, newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["target_post_id", "matched_cluster", "donor_post_id", "j", "predicted", "actual", "abs_err"])
        for fc in forecasts:
            for i, pred in enumerate(fc.predicted):
                j = fc.prefix_len + i + 1
                if fc.actual is None:
                    act = err = ""
                else:
                    act = fmt_float(fc.actual[i])
                    err = fmt_float(abs(fc.actual[i] - pred))
                w.writerow([fc.target_post_id, fc.matched_cluster, fc.donor_post_id, j, fmt_float(pred), act, err])
