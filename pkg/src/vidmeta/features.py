"""Numeric feature vectors over metadata-string collections.

A vocabulary fixes one position per distinct node-presence string, one
per distinct discrete key-value string, and one per continuous key (a
path+key whose numeric value is carried directly instead of being
counted).  Vectors are dense float arrays; presence and discrete
positions hold occurrence counts, continuous positions hold the value
itself (0 when absent, last occurrence wins).

Feature selection decorrelates those positions: the clamped Pearson
correlation matrix acts as an affinity, it is cut into ``n_clusters``
groups by normalized spectral clustering, and oversized groups are
thinned to one randomly chosen representative.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .strings import KEY_VALUE, NODE_PRESENCE, MetadataString

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ContinuousKeyList:
    """Which keys carry their numeric value directly.

    A pattern is either ``@key`` (that key under any path) or
    ``path/@key`` (that exact position).  Matching is on escaped text.
    """

    patterns: frozenset[str] = frozenset()

    def __post_init__(self):
        keys = frozenset(
            p[1:] if p.startswith("@") else p
            for p in self.patterns
            if "/@" not in p
        )
        fulls = frozenset(p for p in self.patterns if "/@" in p)
        object.__setattr__(self, "_keys", keys)
        object.__setattr__(self, "_fulls", fulls)

    def is_continuous(self, path_text: str, key: str) -> bool:
        return key in self._keys or f"{path_text}/@{key}" in self._fulls


DEFAULT_CONTINUOUS = ContinuousKeyList(
    frozenset(
        {
            "@duration",
            "@timescale",
            "@width",
            "@height",
            "@avgBitrate",
            "@maxBitrate",
            "@creation_time",
            "@modification_time",
            "@entry_count",
        }
    )
)


class Vocabulary:
    """Deterministic positions for every known string or continuous key.

    Positions are contiguous: presence strings first, then discrete
    key-value strings, then continuous keys, each block lexicographic.
    """

    def __init__(
        self,
        presence: Iterable[str],
        discrete: Iterable[str],
        continuous: Iterable[str],
        continuous_rule: ContinuousKeyList = DEFAULT_CONTINUOUS,
    ):
        self.presence = tuple(sorted(presence))
        self.discrete = tuple(sorted(discrete))
        self.continuous = tuple(sorted(continuous))
        self.continuous_rule = continuous_rule
        self._presence_pos = {s: i for i, s in enumerate(self.presence)}
        base = len(self.presence)
        self._discrete_pos = {s: base + i for i, s in enumerate(self.discrete)}
        base += len(self.discrete)
        self._continuous_pos = {s: base + i for i, s in enumerate(self.continuous)}

    @property
    def dim(self) -> int:
        return len(self.presence) + len(self.discrete) + len(self.continuous)

    def position_ranges(self) -> dict[str, range]:
        n1, n2 = len(self.presence), len(self.discrete)
        return {
            "presence": range(0, n1),
            "discrete": range(n1, n1 + n2),
            "continuous": range(n1 + n2, self.dim),
        }

    def entry_texts(self) -> tuple[str, ...]:
        """Every position's canonical text, in position order."""
        return self.presence + self.discrete + self.continuous

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Vocabulary)
            and self.presence == other.presence
            and self.discrete == other.discrete
            and self.continuous == other.continuous
        )

    def __repr__(self) -> str:
        return (
            f"Vocabulary(presence={len(self.presence)}, "
            f"discrete={len(self.discrete)}, continuous={len(self.continuous)})"
        )

    def to_json_dict(self) -> dict:
        return {
            "presence": list(self.presence),
            "discrete": list(self.discrete),
            "continuous": list(self.continuous),
            "continuous_patterns": sorted(self.continuous_rule.patterns),
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "Vocabulary":
        return Vocabulary(
            doc["presence"],
            doc["discrete"],
            doc["continuous"],
            ContinuousKeyList(frozenset(doc.get("continuous_patterns", ()))),
        )


def build_vocabulary(
    corpus: Iterable[Sequence[MetadataString]],
    continuous: ContinuousKeyList = DEFAULT_CONTINUOUS,
) -> Vocabulary:
    """Collect the distinct strings of a corpus into a vocabulary."""
    presence: set[str] = set()
    discrete: set[str] = set()
    cont: set[str] = set()
    for collection in corpus:
        for ms in collection:
            if ms.category == NODE_PRESENCE:
                presence.add(ms.text)
            elif ms.category == KEY_VALUE:
                path_text = "/".join(ms.path)
                if continuous.is_continuous(path_text, ms.key):
                    cont.add(f"{path_text}/@{ms.key}")
                else:
                    discrete.add(ms.text)
            else:
                raise ValueError(f"unknown string category {ms.category!r}")
    return Vocabulary(presence, discrete, cont, continuous)


def vectorize(collection: Sequence[MetadataString], vocab: Vocabulary) -> np.ndarray:
    """Map one string collection onto the vocabulary's positions.

    Strings absent from the vocabulary are ignored; a continuous value
    that does not parse as a finite number contributes nothing and is
    logged.
    """
    v = np.zeros(vocab.dim, dtype=np.float64)
    rule = vocab.continuous_rule
    for ms in collection:
        if ms.category == NODE_PRESENCE:
            pos = vocab._presence_pos.get(ms.text)
            if pos is not None:
                v[pos] += 1.0
            continue
        path_text = "/".join(ms.path)
        if rule.is_continuous(path_text, ms.key):
            pos = vocab._continuous_pos.get(f"{path_text}/@{ms.key}")
            if pos is None:
                continue
            try:
                value = float(ms.value_text)
            except (TypeError, ValueError):
                value = math.nan
            if math.isfinite(value):
                v[pos] = value  # last occurrence wins
            else:
                log.warning(
                    "non-numeric continuous value %r for %s ignored",
                    ms.value_text,
                    f"{path_text}/@{ms.key}",
                )
        else:
            pos = vocab._discrete_pos.get(ms.text)
            if pos is not None:
                v[pos] += 1.0
    return v


def vectorize_corpus(
    corpus: Iterable[Sequence[MetadataString]], vocab: Vocabulary
) -> np.ndarray:
    return np.stack([vectorize(c, vocab) for c in corpus])


# ---------------------------------------------------------------------------
# correlation and selection


def correlation_matrix(vectors: Sequence[np.ndarray] | np.ndarray) -> np.ndarray:
    """Pearson correlation between feature positions.

    Zero-variance features correlate 0 with everything else and 1 with
    themselves.  The result is symmetric with entries clipped to
    [-1, 1] against floating-point overshoot.
    """
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need at least two vectors of equal length")
    centered = X - X.mean(axis=0)
    sd = np.sqrt(np.einsum("ij,ij->j", centered, centered))
    cov = centered.T @ centered
    denom = np.outer(sd, sd)
    nonzero = denom > 0
    R = np.zeros_like(cov)
    R[nonzero] = cov[nonzero] / denom[nonzero]
    R = (R + R.T) / 2.0
    np.clip(R, -1.0, 1.0, out=R)
    np.fill_diagonal(R, 1.0)
    return R


def clamp_positive(R: np.ndarray) -> np.ndarray:
    """Elementwise max(R, 0): negative correlation is treated as none."""
    return np.maximum(np.asarray(R, dtype=np.float64), 0.0)


def _kmeans_seeded(
    points: np.ndarray, k: int, rng: np.random.Generator, restarts: int = 10, max_iter: int = 300
) -> np.ndarray:
    """Plain k-means, squared-distance objective, greedy seeding.

    Initial centers are drawn k-means++-style (first uniformly, the
    rest proportional to squared distance from the chosen set), which
    cannot place two centers on coincident points while distinct ones
    remain.  Best of ``restarts`` runs by objective; fully
    deterministic for a given generator state.
    """
    n = len(points)
    best_labels: np.ndarray | None = None
    best_objective = math.inf
    for _ in range(restarts):
        centers = np.empty((k, points.shape[1]))
        first = int(rng.integers(n))
        centers[0] = points[first]
        chosen = [first]
        d2 = np.sum((points - centers[0]) ** 2, axis=1)
        for j in range(1, k):
            total = float(d2.sum())
            if total > 0:
                idx = int(rng.choice(n, p=d2 / total))
            else:
                idx = next(i for i in range(n) if i not in chosen)
            centers[j] = points[idx]
            chosen.append(idx)
            d2 = np.minimum(d2, np.sum((points - centers[j]) ** 2, axis=1))
        point_sq = np.einsum("ij,ij->i", points, points)
        labels = np.zeros(n, dtype=np.intp)
        for _ in range(max_iter):
            # |p - c|^2 = |p|^2 + |c|^2 - 2 p.c, clamped against rounding.
            center_sq = np.einsum("ij,ij->i", centers, centers)
            dist = point_sq[:, None] + center_sq[None, :] - 2.0 * (points @ centers.T)
            np.maximum(dist, 0.0, out=dist)
            new_labels = np.argmin(dist, axis=1)
            for j in range(k):
                members = points[new_labels == j]
                if len(members):
                    centers[j] = members.mean(axis=0)
                else:
                    # Re-seed an empty cluster on the farthest point.
                    far = int(np.argmax(np.min(dist, axis=1)))
                    centers[j] = points[far]
                    new_labels[far] = j
            if np.array_equal(new_labels, labels):
                labels = new_labels
                break
            labels = new_labels
        objective = float(
            np.sum((points - centers[labels]) ** 2)
        )
        if objective < best_objective:
            best_objective = objective
            best_labels = labels.copy()
    return best_labels


def spectral_cluster(affinity: np.ndarray, n_clusters: int, seed: int = 0) -> np.ndarray:
    """Group features by affinity, normalized-cuts style.

    Builds the symmetric normalized Laplacian I - D^(-1/2) A D^(-1/2),
    embeds each feature in the eigenvectors of its ``n_clusters``
    smallest eigenvalues, row-normalizes, and k-means-clusters the
    embedding with a seeded generator.  Features with zero total
    affinity are split off as singleton clusters before the
    decomposition.
    """
    A = np.asarray(affinity, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("affinity must be square")
    n = A.shape[0]
    if not 1 <= n_clusters <= n:
        raise ValueError(f"cluster count {n_clusters} outside [1, {n}]")
    if not np.allclose(A, A.T, atol=1e-9):
        raise ValueError("affinity must be symmetric")
    if A.min() < -1e-12:
        raise ValueError("affinity entries must be non-negative")

    degrees = A.sum(axis=1)
    isolated = np.flatnonzero(degrees <= 0)
    labels = np.full(n, -1, dtype=np.intp)
    next_label = 0
    for idx in isolated:
        labels[idx] = next_label
        next_label += 1
    active = np.flatnonzero(degrees > 0)
    if len(active) == 0:
        return labels
    k = max(1, n_clusters - len(isolated))
    k = min(k, len(active))

    if k == len(active):
        # One cluster per feature: the k-means optimum outright
        # (duplicates share coordinates but still take distinct centers
        # at zero cost), so skip the decomposition.
        labels[active] = np.arange(k) + next_label
        return labels

    sub = A[np.ix_(active, active)]
    d = sub.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(d)
    laplacian = np.eye(len(active)) - inv_sqrt[:, None] * sub * inv_sqrt[None, :]
    laplacian = (laplacian + laplacian.T) / 2.0
    eigvals, eigvecs = scipy.linalg.eigh(laplacian)
    embedding = eigvecs[:, :k]
    norms = np.linalg.norm(embedding, axis=1)
    safe = norms > 0
    embedding = embedding.copy()
    embedding[safe] /= norms[safe, None]

    rng = np.random.default_rng(seed)
    sub_labels = _kmeans_seeded(embedding, k, rng)
    labels[active] = sub_labels + next_label
    return labels


@dataclass(frozen=True)
class SelectionMask:
    """Which positions survive cluster thinning, and how they grouped."""

    retained: tuple[int, ...]
    cluster_labels: tuple[int, ...]
    seed: int

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X)
        idx = list(self.retained)
        return X[..., idx] if X.ndim > 1 else X[idx]

    def to_json_dict(self) -> dict:
        return {
            "retained": list(self.retained),
            "cluster_labels": list(self.cluster_labels),
            "seed": self.seed,
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "SelectionMask":
        return SelectionMask(
            tuple(doc["retained"]), tuple(doc["cluster_labels"]), int(doc["seed"])
        )


def select_features(
    cluster_labels: Sequence[int],
    size_threshold: int,
    seed: int = 0,
    small_clusters: str = "keep",
) -> SelectionMask:
    """Thin correlated clusters down to representatives.

    Clusters larger than ``size_threshold`` keep exactly one member,
    chosen by a seeded generator; smaller clusters keep all members
    (``small_clusters="drop"`` discards them instead).  The retained
    positions come back sorted.
    """
    if size_threshold < 1:
        raise ValueError("size threshold must be >= 1")
    if small_clusters not in ("keep", "drop"):
        raise ValueError("small_clusters must be 'keep' or 'drop'")
    labels = np.asarray(cluster_labels, dtype=np.intp)
    rng = np.random.default_rng(seed)
    retained: list[int] = []
    for label in np.unique(labels):
        members = np.flatnonzero(labels == label)
        if len(members) > size_threshold:
            retained.append(int(members[int(rng.integers(len(members)))]))
        elif small_clusters == "keep":
            retained.extend(int(m) for m in members)
    return SelectionMask(
        retained=tuple(sorted(retained)),
        cluster_labels=tuple(int(l) for l in labels),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# persistence


def save_vectors_csv(path, X: np.ndarray, vocab: Vocabulary) -> None:
    """Write vectors as CSV, one row per collection, header = entry texts."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(vocab.entry_texts())
        for row in X:
            writer.writerow([repr(float(x)) for x in row])


def load_vectors_csv(path) -> tuple[list[str], np.ndarray]:
    """Read back a vectors CSV; returns (header entries, array)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(cell) for cell in row] for row in reader]
    return header, np.asarray(rows, dtype=np.float64)
