"""k-means and mini-batch k-means over feature vectors."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._io import atomic_write
from .batch import DEFAULT_BIN_WIDTH, FeatureVector
from .errors import DataError, DegenerateInput, DimensionMismatch, TooFewPoints


@dataclass
class ClusterModel:
    k: int
    centroids: np.ndarray
    assignments: dict[str, int]
    algorithm: str
    seed: int
    inertia: float
    bin_width_s: int = DEFAULT_BIN_WIDTH
    channel: str = "positive"
    # inertia after each assignment step (kmeans only)
    inertia_history: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    def to_json(self) -> str:
        doc = {
            "k": self.k,
            "algorithm": self.algorithm,
            "seed": self.seed,
            "bin_width_s": self.bin_width_s,
            "channel": self.channel,
            "centroids": [[float(x) for x in row] for row in self.centroids],
            "assignments": {pid: int(i) for pid, i in self.assignments.items()},
            "inertia": float(self.inertia),
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ClusterModel":
        try:
            doc = json.loads(text)
            centroids = np.asarray(doc["centroids"], dtype=float)
            model = cls(
                k=int(doc["k"]),
                centroids=centroids,
                assignments={str(p): int(i) for p, i in doc["assignments"].items()},
                algorithm=str(doc["algorithm"]),
                seed=int(doc["seed"]),
                inertia=float(doc["inertia"]),
                bin_width_s=int(doc.get("bin_width_s", DEFAULT_BIN_WIDTH)),
                channel=str(doc.get("channel", "positive")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"bad model file: {exc}") from None
        if centroids.ndim != 2 or centroids.shape[0] != model.k or not np.all(np.isfinite(centroids)):
            raise DataError("bad model file: centroids must be k finite vectors")
        if any(not 0 <= i < model.k for i in model.assignments.values()):
            raise DataError("bad model file: assignment index out of range")
        return model

    def save(self, path: str | Path) -> None:
        with atomic_write(path) as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "ClusterModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _as_matrix(vectors: Sequence[FeatureVector]) -> np.ndarray:
    if not vectors:
        raise TooFewPoints("no vectors to cluster")
    lengths = {len(v.values) for v in vectors}
    if len(lengths) != 1:
        raise DimensionMismatch("feature vectors differ in length")
    return np.array([v.values for v in vectors], dtype=float)


def _check_k(X: np.ndarray, k: int) -> None:
    if k < 1:
        raise ValueError("k must be >= 1")
    distinct = len(np.unique(X, axis=0))
    if distinct == 1 and k > 1:
        raise DegenerateInput(f"all {len(X)} points are identical; cannot form {k} clusters")
    if distinct < k:
        raise TooFewPoints(f"{distinct} distinct points for k={k}")


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - C[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def kmeans_plusplus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    centers = [X[rng.integers(n)]]
    closest = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        # total > 0 is guaranteed by the distinct-points check
        idx = int(rng.choice(n, p=closest / total))
        centers.append(X[idx])
        closest = np.minimum(closest, ((X - X[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def kmeans(
    vectors: Sequence[FeatureVector],
    k: int,
    seed: int,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> ClusterModel:
    """Lloyd's algorithm from a seeded k-means++ start.

    Empty clusters are re-seeded with the point farthest from its centroid.
    """
    X = _as_matrix(vectors)
    _check_k(X, k)
    rng = np.random.default_rng(seed)
    C = kmeans_plusplus(X, k, rng)
    history: list[float] = []
    for _ in range(max_iter):
        d = _sq_dists(X, C)
        labels = d.argmin(axis=1)
        point_d = d[np.arange(len(X)), labels]
        history.append(float(point_d.sum()))
        new_C = C.copy()
        for j in range(k):
            members = labels == j
            if members.any():
                new_C[j] = X[members].mean(axis=0)
        for j in range(k):
            if not (labels == j).any():
                far = int(point_d.argmax())
                new_C[j] = X[far]
                point_d[far] = 0.0
        shift = np.sqrt(((new_C - C) ** 2).sum(axis=1)).max()
        C = new_C
        if shift < tol:
            break
    d = _sq_dists(X, C)
    labels = d.argmin(axis=1)
    inertia = float(d[np.arange(len(X)), labels].sum())
    history.append(inertia)
    return ClusterModel(
        k=k,
        centroids=C,
        assignments={v.post_id: int(j) for v, j in zip(vectors, labels)},
        algorithm="kmeans",
        seed=seed,
        inertia=inertia,
        bin_width_s=vectors[0].bin_width_s,
        channel=vectors[0].channel,
        inertia_history=history,
    )


def minibatch_kmeans(
    vectors: Sequence[FeatureVector],
    k: int,
    seed: int,
    batch_size: int = 32,
    iterations: int = 200,
) -> ClusterModel:
    """Mini-batch k-means with per-center 1/count learning rates."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    X = _as_matrix(vectors)
    _check_k(X, k)
    rng = np.random.default_rng(seed)
    C = kmeans_plusplus(X, k, rng)
    counts = np.zeros(k)
    n = len(X)
    m = min(batch_size, n)
    for _ in range(iterations):
        batch = X[rng.choice(n, size=m, replace=False)] if m < n else X
        labels = _sq_dists(batch, C).argmin(axis=1)
        for j in range(k):
            members = batch[labels == j]
            if len(members):
                # equivalent to sequential per-sample updates with eta = 1/count
                counts[j] += len(members)
                C[j] += (members.sum(axis=0) - len(members) * C[j]) / counts[j]
    d = _sq_dists(X, C)
    labels = d.argmin(axis=1)
    inertia = float(d[np.arange(n), labels].sum())
    return ClusterModel(
        k=k,
        centroids=C,
        assignments={v.post_id: int(j) for v, j in zip(vectors, labels)},
        algorithm="minibatch",
        seed=seed,
        inertia=inertia,
        bin_width_s=vectors[0].bin_width_s,
        channel=vectors[0].channel,
    )


def fit(vectors: Sequence[FeatureVector], k: int, seed: int, algorithm: str = "kmeans", **kwargs) -> ClusterModel:
    if algorithm == "kmeans":
        return kmeans(vectors, k, seed, **kwargs)
    if algorithm == "minibatch":
        return minibatch_kmeans(vectors, k, seed, **kwargs)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def nearest(point: np.ndarray, centers: np.ndarray) -> int:
    """Index of the nearest center; ties go to the lowest index."""
    d = ((centers - point) ** 2).sum(axis=1)
    return int(d.argmin())


def assign(vector: FeatureVector | Sequence[float], model: ClusterModel) -> int:
    values = vector.values if isinstance(vector, FeatureVector) else vector
    x = np.asarray(values, dtype=float)
    if x.shape != (model.dim,):
        raise DimensionMismatch(f"vector has {x.size} components, model expects {model.dim}")
    return nearest(x, model.centroids)


@dataclass(frozen=True)
class ClusterProfile:
    index: int
    size: int
    centroid: tuple[float, ...]
    label: str


def label_trajectory(c: Sequence[float], threshold: float = 0.1) -> str:
    """Heuristic archetype name for a centroid: decay, surge or stable."""
    if c[0] - c[-1] > threshold:
        return "decay"
    if len(c) > 1 and c[1] - c[0] > threshold:
        peak = max(c)
        if all(peak - x <= threshold for x in c[2:]):
            return "surge"
    return "stable"


def describe_clusters(
    model: ClusterModel, vectors: Sequence[FeatureVector], threshold: float = 0.1
) -> list[ClusterProfile]:
    sizes = [0] * model.k
    for v in vectors:
        j = model.assignments.get(v.post_id)
        if j is None:
            j = assign(v, model)
        sizes[j] += 1
    return [
        ClusterProfile(j, sizes[j], tuple(float(x) for x in c), label_trajectory(c, threshold))
        for j, c in enumerate(model.centroids)
    ]
