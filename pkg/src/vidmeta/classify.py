"""Classifiers over selected feature vectors.

Multi-class attribution runs through a two-stage pipeline: a linear
discriminant projection to two dimensions (between-class scatter
against ridge-regularized within-class scatter), then a
distance-weighted nearest-neighbor vote in the plane.  Binary tasks are
served by a CART-style decision tree grown directly on the selected
features.  Everything here is deterministic for fixed inputs: ties
break toward the first-seen training label, split candidates are swept
in feature-then-threshold order, and eigenvector signs are
canonicalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg


class DegenerateLabels(ValueError):
    """Fewer than two classes in the training labels."""


class DimensionMismatch(ValueError):
    """Query width differs from the model's training width."""


class EmptyModel(ValueError):
    """Model holds no training points."""


class UnknownLabel(ValueError):
    """A named label does not occur in the data."""


def _first_seen_order(labels: Sequence) -> list:
    return list(dict.fromkeys(labels))


# ---------------------------------------------------------------------------
# linear discriminant projection


@dataclass
class LdaModel:
    """Projection to the two most discriminative directions."""

    projection: np.ndarray  # (dim, 2)
    mean: np.ndarray  # (dim,)
    classes: tuple
    class_means_2d: np.ndarray  # (n_classes, 2)
    ridge_scale: float


def lda_fit(X, y, ridge_scale: float = 1e-6) -> LdaModel:
    """Fit the two-axis discriminant projection.

    Solves the generalized eigenproblem of between-class scatter
    against within-class scatter regularized per feature:
    ``Sw + ridge_scale * diag(Sw) + 1e-12 * I``.  Loading each diagonal
    element in proportion to its own scatter keeps the regularizer
    scale-free, so a feature that is constant within every class stays
    maximally discriminative even when other features are orders of
    magnitude larger (counts next to raw timestamps).  With exactly two
    classes there is a single discriminative direction; the second axis
    is fixed at zero.
    """
    X = np.asarray(X, dtype=np.float64)
    y = list(y)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be (n, dim) with one label per row")
    classes = sorted(set(y))
    if len(classes) < 2:
        raise DegenerateLabels(f"need at least 2 classes, got {len(classes)}")
    dim = X.shape[1]
    y_arr = np.asarray(y, dtype=object)
    overall = X.mean(axis=0)

    Sw = np.zeros((dim, dim))
    Sb = np.zeros((dim, dim))
    class_means = np.empty((len(classes), dim))
    for i, cls in enumerate(classes):
        rows = X[y_arr == cls]
        mu = rows.mean(axis=0)
        class_means[i] = mu
        centered = rows - mu
        Sw += centered.T @ centered
        gap = (mu - overall)[:, None]
        Sb += len(rows) * (gap @ gap.T)

    # 1e-12 keeps the pencil positive definite when a feature has zero
    # within-class scatter (all-singleton classes leave Sw empty entirely).
    Sw_reg = Sw + np.diag(ridge_scale * np.diag(Sw) + 1e-12)

    eigvals, eigvecs = scipy.linalg.eigh(Sb, Sw_reg)
    order = np.argsort(eigvals)[::-1]
    n_directions = min(2, len(classes) - 1, dim)
    P = np.zeros((dim, 2))
    for col in range(n_directions):
        vec = eigvecs[:, order[col]]
        anchor = int(np.argmax(np.abs(vec)))
        if vec[anchor] < 0:
            vec = -vec
        P[:, col] = vec

    model = LdaModel(
        projection=P,
        mean=overall,
        classes=tuple(classes),
        class_means_2d=np.zeros((len(classes), 2)),
        ridge_scale=ridge_scale,
    )
    model.class_means_2d = lda_transform(model, class_means)
    return model


def lda_transform(model: LdaModel, X) -> np.ndarray:
    """Project rows into the discriminant plane."""
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != model.projection.shape[0]:
        raise DimensionMismatch(
            f"query width {X.shape[1]} != model width {model.projection.shape[0]}"
        )
    out = (X - model.mean) @ model.projection
    return out[0] if single else out


# ---------------------------------------------------------------------------
# weighted nearest neighbors


@dataclass
class KnnModel:
    """Training points in the plane plus the vote parameters."""

    points: np.ndarray  # (n, 2)
    labels: tuple
    n_neighbors: int = 5
    metric: str = "euclidean"
    weighting: str = "inverse"
    classes: tuple = field(init=False)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2:
            raise ValueError("points must be (n, 2)")
        if len(self.points) != len(self.labels):
            raise ValueError("one label per point required")
        if self.n_neighbors < 1:
            raise ValueError("neighbor count must be >= 1")
        if self.metric not in ("euclidean", "manhattan"):
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.weighting not in ("inverse", "inverse-squared"):
            raise ValueError(f"unknown weighting {self.weighting!r}")
        self.labels = tuple(self.labels)
        self.classes = tuple(_first_seen_order(self.labels))


def knn_fit(points_2d, labels, n_neighbors: int = 5, **kw) -> KnnModel:
    return KnnModel(points_2d, tuple(labels), n_neighbors, **kw)


def _distances(model: KnnModel, queries: np.ndarray) -> np.ndarray:
    diff = queries[:, None, :] - model.points[None, :, :]
    if model.metric == "manhattan":
        return np.abs(diff).sum(axis=2)
    return np.sqrt((diff**2).sum(axis=2))


def knn_predict(model: KnnModel, query_2d):
    """Label a point (or an (n, 2) batch) by weighted neighbor vote.

    The ``n_neighbors`` nearest points vote with weight 1/d (1/d^2 with
    inverse-squared weighting).  Any zero-distance neighbors
    short-circuit the vote: their majority label wins outright.  All
    ties break toward the class seen first in the training labels.
    """
    if len(model.points) == 0:
        raise EmptyModel("no training points")
    q = np.asarray(query_2d, dtype=np.float64)
    single = q.ndim == 1
    Q = np.atleast_2d(q)
    if Q.shape[1] != model.points.shape[1]:
        raise DimensionMismatch(
            f"query width {Q.shape[1]} != model width {model.points.shape[1]}"
        )
    class_index = {cls: i for i, cls in enumerate(model.classes)}
    n = len(model.points)
    k = min(model.n_neighbors, n)
    results = []
    for chunk_start in range(0, len(Q), 4096):
        chunk = Q[chunk_start : chunk_start + 4096]
        dist = _distances(model, chunk)
        for row in dist:
            zero = np.flatnonzero(row == 0.0)
            if len(zero):
                counts: dict = {}
                for idx in zero:
                    counts[model.labels[idx]] = counts.get(model.labels[idx], 0) + 1
                best = min(counts, key=lambda c: (-counts[c], class_index[c]))
                results.append(best)
                continue
            # Stable neighbor cut: distance, then training index.
            order = np.lexsort((np.arange(n), row))[:k]
            weights: dict = {}
            for idx in order:
                w = 1.0 / row[idx]
                if model.weighting == "inverse-squared":
                    w = w / row[idx]
                weights[model.labels[idx]] = weights.get(model.labels[idx], 0.0) + w
            best = min(weights, key=lambda c: (-weights[c], class_index[c]))
            results.append(best)
    if single:
        return results[0]
    return np.asarray(results, dtype=object)


# ---------------------------------------------------------------------------
# decision tree


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: int = -1
    right: int = -1
    label: object = None

    @property
    def is_leaf(self) -> bool:
        return self.left < 0


@dataclass
class TreeModel:
    nodes: list[TreeNode]
    classes: tuple
    n_features: int

    def depth(self) -> int:
        def walk(idx: int) -> int:
            node = self.nodes[idx]
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(0)


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.sum(p * p))


def _best_split(X: np.ndarray, codes: np.ndarray, n_classes: int):
    """Lowest weighted child impurity; ties keep the earliest candidate.

    Candidates are midpoints between consecutive distinct values, swept
    feature by feature in index order and threshold-ascending within a
    feature, so "first strictly better" implements the tie rule.
    """
    n, dim = X.shape
    best = None
    best_score = math.inf
    for f in range(dim):
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        sorted_vals = col[order]
        sorted_codes = codes[order]
        left_counts = np.zeros(n_classes)
        total_counts = np.bincount(sorted_codes, minlength=n_classes).astype(float)
        for i in range(n - 1):
            left_counts[sorted_codes[i]] += 1
            if sorted_vals[i] == sorted_vals[i + 1]:
                continue
            right_counts = total_counts - left_counts
            n_left = i + 1
            n_right = n - n_left
            score = (n_left * _gini(left_counts) + n_right * _gini(right_counts)) / n
            if score < best_score - 1e-15:
                best_score = score
                threshold = (sorted_vals[i] + sorted_vals[i + 1]) / 2.0
                best = (f, float(threshold))
    return best


def tree_fit(X, y) -> TreeModel:
    """Grow an unpruned binary tree on Gini impurity.

    Impure nodes split as long as any feature still varies, even at
    zero impurity gain (parity-style label patterns need those splits);
    leaves take the majority label, ties toward the first-seen class.
    """
    X = np.asarray(X, dtype=np.float64)
    y = list(y)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be (n, dim) with one label per row")
    if len(y) == 0:
        raise ValueError("empty training set")
    classes = _first_seen_order(y)
    code_of = {cls: i for i, cls in enumerate(classes)}
    codes = np.asarray([code_of[label] for label in y], dtype=np.intp)

    nodes: list[TreeNode] = []
    # (node index, row indexer) pairs; explicit stack instead of
    # recursion so degenerate chains cannot exhaust the interpreter.
    stack: list[tuple[int, np.ndarray]] = []

    def majority(idx: np.ndarray):
        counts = np.bincount(codes[idx], minlength=len(classes))
        return classes[int(np.argmax(counts))]  # argmax keeps lowest code on tie

    root_idx = np.arange(len(y))
    nodes.append(TreeNode())
    stack.append((0, root_idx))
    while stack:
        node_id, rows = stack.pop()
        sub_codes = codes[rows]
        if np.all(sub_codes == sub_codes[0]):
            nodes[node_id].label = classes[int(sub_codes[0])]
            continue
        split = _best_split(X[rows], sub_codes, len(classes))
        if split is None:
            nodes[node_id].label = majority(rows)
            continue
        feature, threshold = split
        go_left = X[rows, feature] <= threshold
        left_rows = rows[go_left]
        right_rows = rows[~go_left]
        node = nodes[node_id]
        node.feature = feature
        node.threshold = threshold
        node.left = len(nodes)
        nodes.append(TreeNode())
        node.right = len(nodes)
        nodes.append(TreeNode())
        stack.append((node.left, left_rows))
        stack.append((node.right, right_rows))
    return TreeModel(nodes=nodes, classes=tuple(classes), n_features=X.shape[1])


def tree_predict(model: TreeModel, x):
    """Route a row (or an (n, dim) batch) down the tree."""
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"query width {X.shape[1]} != model width {model.n_features}"
        )
    out = []
    for row in X:
        idx = 0
        node = model.nodes[0]
        while not node.is_leaf:
            idx = node.left if row[node.feature] <= node.threshold else node.right
            node = model.nodes[idx]
        out.append(node.label)
    if single:
        return out[0]
    return np.asarray(out, dtype=object)


# ---------------------------------------------------------------------------
# metrics


@dataclass
class Metrics:
    """Per-class F1, confusion counts, and balanced accuracy."""

    labels: tuple
    confusion: np.ndarray  # rows true, columns predicted
    per_class_f1: dict
    balanced_accuracy: float
    tpr: float | None = None
    tnr: float | None = None

    def to_json_dict(self) -> dict:
        doc = {
            "labels": list(self.labels),
            "confusion": self.confusion.astype(int).tolist(),
            "per_class_f1": {str(k): v for k, v in self.per_class_f1.items()},
            "macro_f1": float(np.mean(list(self.per_class_f1.values())))
            if self.per_class_f1
            else 0.0,
            "balanced_accuracy": self.balanced_accuracy,
        }
        if self.tpr is not None:
            doc["tpr"] = self.tpr
        if self.tnr is not None:
            doc["tnr"] = self.tnr
        return doc


def evaluate(y_true, y_pred, positive_label=None) -> Metrics:
    """Score predictions against truth.

    Balanced accuracy is the mean per-class recall over classes present
    in the truth; with a ``positive_label`` on a binary task it equals
    (TPR + TNR) / 2 and both rates are reported.
    """
    y_true = list(y_true)
    y_pred = list(y_pred)
    if len(y_true) != len(y_pred) or not y_true:
        raise ValueError("need equal-length, non-empty label sequences")
    labels = sorted(set(y_true) | set(y_pred))
    index = {label: i for i, label in enumerate(labels)}
    confusion = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        confusion[index[t], index[p]] += 1

    truth_classes = [label for label in labels if confusion[index[label]].sum() > 0]
    recalls = {}
    f1 = {}
    for label in truth_classes:
        i = index[label]
        support = confusion[i].sum()
        tp = confusion[i, i]
        predicted = confusion[:, i].sum()
        recalls[label] = tp / support
        precision = tp / predicted if predicted else 0.0
        recall = recalls[label]
        f1[label] = (
            2 * precision * recall / (precision + recall) if precision + recall else 0.0
        )
    balanced = float(np.mean(list(recalls.values())))

    tpr = tnr = None
    if positive_label is not None:
        if positive_label not in index:
            raise UnknownLabel(f"positive label {positive_label!r} not in data")
        if len(truth_classes) == 2:
            negative = next(c for c in truth_classes if c != positive_label)
            tpr = float(recalls[positive_label])
            tnr = float(recalls[negative])
    return Metrics(
        labels=tuple(labels),
        confusion=confusion,
        per_class_f1=f1,
        balanced_accuracy=balanced,
        tpr=tpr,
        tnr=tnr,
    )


# ---------------------------------------------------------------------------
# decision regions


@dataclass
class DecisionGrid:
    """Predicted label per cell of a bounded 2D raster."""

    labels: np.ndarray  # (ny, nx) object array
    bounds: tuple[float, float, float, float]  # xmin, xmax, ymin, ymax

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape


def decision_grid(model, bounds: tuple[float, float, float, float], resolution) -> DecisionGrid:
    """Evaluate a fitted 2D-input model at every cell center.

    ``resolution`` is cells per axis (int) or (nx, ny).  A 1x1 grid
    holds the label at the bounds' center.
    """
    xmin, xmax, ymin, ymax = (float(v) for v in bounds)
    if not (xmax > xmin and ymax > ymin):
        raise ValueError("bounds must span a positive area")
    if isinstance(resolution, int):
        nx = ny = resolution
    else:
        nx, ny = resolution
    if nx < 1 or ny < 1:
        raise ValueError("resolution must be >= 1")
    xs = xmin + (np.arange(nx) + 0.5) * (xmax - xmin) / nx
    ys = ymin + (np.arange(ny) + 0.5) * (ymax - ymin) / ny
    xx, yy = np.meshgrid(xs, ys)
    queries = np.column_stack([xx.ravel(), yy.ravel()])
    if isinstance(model, KnnModel):
        flat = knn_predict(model, queries)
    elif isinstance(model, TreeModel):
        flat = tree_predict(model, queries)
    else:
        raise TypeError(f"cannot rasterize {type(model).__name__}")
    return DecisionGrid(labels=np.asarray(flat, dtype=object).reshape(ny, nx), bounds=(xmin, xmax, ymin, ymax))
