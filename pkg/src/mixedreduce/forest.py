"""Random forest of CART trees, grown from scratch.

Regression trees split on variance reduction, classification trees on
Gini-impurity decrease; thresholds are midpoints between adjacent sorted
unique values.  Every tree draws its own RNG stream from the master seed
by tree index, so fitting is bit-reproducible at any thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = ["ForestParams", "DecisionTree", "ForestModel", "fit_forest", "predict", "oob_error"]

REGRESSION = "regression"
CLASSIFICATION = "classification"


@dataclass(frozen=True)
class ForestParams:
    """Hyperparameters; None fields resolve to kind-dependent defaults
    (mtry = floor(sqrt(q)), min_node_size = 5 regression / 1 classification)."""

    n_trees: int = 100
    mtry: Optional[int] = None
    min_node_size: Optional[int] = None
    max_depth: Optional[int] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.mtry is not None and self.mtry < 1:
            raise ValueError("mtry must be >= 1")
        if self.min_node_size is not None and self.min_node_size < 1:
            raise ValueError("min_node_size must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")


@dataclass
class DecisionTree:
    """Flat array representation of one CART tree.

    ``feature[i] == -1`` marks a leaf.  Regression leaves carry the mean
    response in ``leaf_value``; classification leaves carry per-class
    counts in ``leaf_counts``.
    """

    kind: str
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_value: np.ndarray
    leaf_counts: Optional[np.ndarray] = None

    def predict(self, X: np.ndarray) -> np.ndarray:
        leaves = self._descend(X)
        if self.kind == REGRESSION:
            return self.leaf_value[leaves]
        return np.argmax(self.leaf_counts[leaves], axis=1).astype(np.int64)

    def _descend(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int32)
        while True:
            feats = self.feature[node]
            active = np.flatnonzero(feats >= 0)
            if active.size == 0:
                return node
            cur = node[active]
            go_left = X[active, feats[active]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])


@dataclass
class ForestModel:
    trees: list[DecisionTree]
    kind: str
    feature_count: int
    oob_indices: list[np.ndarray]  # per-tree boolean out-of-bag row masks
    n_classes: int = 0


def _best_split_regression(col_sorted, y_sorted, total):
    m = y_sorted.size
    valid = col_sorted[:-1] < col_sorted[1:]
    if not valid.any():
        return 0.0, -1
    n_left = np.arange(1, m, dtype=np.float64)
    sum_left = np.cumsum(y_sorted)[:-1]
    score = sum_left**2 / n_left + (total - sum_left) ** 2 / (m - n_left)
    score[~valid] = -np.inf
    pos = int(np.argmax(score))
    gain = score[pos] - total * total / m
    return gain, pos


def _best_split_classification(col_sorted, y_sorted, total_counts):
    m = y_sorted.size
    valid = col_sorted[:-1] < col_sorted[1:]
    if not valid.any():
        return 0.0, -1
    n_classes = total_counts.size
    onehot = np.zeros((m, n_classes), dtype=np.float64)
    onehot[np.arange(m), y_sorted] = 1.0
    counts_left = np.cumsum(onehot, axis=0)[:-1]
    counts_right = total_counts - counts_left
    n_left = np.arange(1, m, dtype=np.float64)
    score = (counts_left**2).sum(axis=1) / n_left + (counts_right**2).sum(axis=1) / (m - n_left)
    score[~valid] = -np.inf
    pos = int(np.argmax(score))
    gain = score[pos] - (total_counts**2).sum() / m
    return gain, pos


def _grow_tree(X, y, kind, n_classes, mtry, min_node_size, max_depth, rng) -> DecisionTree:
    q = X.shape[1]
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    leaf_value: list[float] = []
    counts_rows: list[np.ndarray] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)
        leaf_value.append(np.nan)
        if kind == CLASSIFICATION:
            counts_rows.append(None)  # type: ignore[arg-type]
        return len(feature) - 1

    def finalize_leaf(slot: int, yv: np.ndarray) -> None:
        if kind == REGRESSION:
            leaf_value[slot] = float(yv.mean())
        else:
            counts_rows[slot] = np.bincount(yv, minlength=n_classes).astype(np.float64)

    root = new_node()
    stack: list[tuple[int, np.ndarray, int]] = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        slot, idx, depth = stack.pop()
        yv = y[idx]
        m = idx.size
        pure = (yv == yv[0]).all()
        if m <= min_node_size or pure or (max_depth is not None and depth >= max_depth):
            finalize_leaf(slot, yv)
            continue

        feats = np.sort(rng.choice(q, size=mtry, replace=False))
        if kind == REGRESSION:
            total = yv.sum()
        else:
            total_counts = np.bincount(yv, minlength=n_classes).astype(np.float64)

        best_gain = 0.0
        best_feat = -1
        best_thr = np.nan
        best_order = None
        best_pos = -1
        for f in feats:
            col = X[idx, f]
            order = np.argsort(col, kind="stable")
            col_sorted = col[order]
            y_sorted = yv[order]
            if kind == REGRESSION:
                gain, pos = _best_split_regression(col_sorted, y_sorted, total)
            else:
                gain, pos = _best_split_classification(col_sorted, y_sorted, total_counts)
            if pos >= 0 and gain > best_gain:
                lo, hi = col_sorted[pos], col_sorted[pos + 1]
                thr = lo + (hi - lo) / 2.0
                if thr >= hi:  # midpoint rounded up to the right value
                    thr = lo
                best_gain, best_feat, best_thr = gain, int(f), float(thr)
                best_order, best_pos = order, pos

        if best_feat < 0:
            finalize_leaf(slot, yv)
            continue

        left_idx = idx[best_order[: best_pos + 1]]
        right_idx = idx[best_order[best_pos + 1 :]]
        feature[slot] = best_feat
        threshold[slot] = best_thr
        left_slot = new_node()
        right_slot = new_node()
        left[slot] = left_slot
        right[slot] = right_slot
        # LIFO: grow the left subtree first for a deterministic RNG order.
        stack.append((right_slot, right_idx, depth + 1))
        stack.append((left_slot, left_idx, depth + 1))

    tree = DecisionTree(
        kind=kind,
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        leaf_value=np.asarray(leaf_value, dtype=np.float64),
    )
    if kind == CLASSIFICATION:
        stacked = np.zeros((len(feature), n_classes), dtype=np.float64)
        for i, row in enumerate(counts_rows):
            if row is not None:
                stacked[i] = row
        tree.leaf_counts = stacked
    return tree


def fit_forest(
    X: np.ndarray, y: np.ndarray, params: ForestParams = ForestParams(), threads: int = 1
) -> ForestModel:
    """Fit a bagged ensemble; regression for float responses,
    classification for integer class-index responses."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("X must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError("X must be fully observed and finite")
    n, q = X.shape

    y = np.asarray(y)
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected ({n},)")
    if np.issubdtype(y.dtype, np.integer):
        kind = CLASSIFICATION
        y = y.astype(np.int64)
        if y.size and y.min() < 0:
            raise ValueError("class indices must be non-negative")
        n_classes = int(y.max()) + 1
    else:
        kind = REGRESSION
        y = y.astype(np.float64)
        if not np.all(np.isfinite(y)):
            raise ValueError("y must be finite")
        n_classes = 0

    mtry = params.mtry if params.mtry is not None else max(1, int(np.sqrt(q)))
    if mtry > q:
        raise ValueError(f"mtry={mtry} exceeds feature count {q}")
    min_node = params.min_node_size
    if min_node is None:
        min_node = 5 if kind == REGRESSION else 1

    seeds = np.random.SeedSequence(params.seed).spawn(params.n_trees)

    def build(i: int) -> tuple[DecisionTree, np.ndarray]:
        rng = np.random.default_rng(seeds[i])
        inbag = rng.integers(0, n, size=n)
        oob = np.ones(n, dtype=bool)
        oob[inbag] = False
        tree = _grow_tree(
            X[inbag], y[inbag], kind, n_classes, mtry, min_node, params.max_depth, rng
        )
        return tree, oob

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            built = list(pool.map(build, range(params.n_trees)))
    else:
        built = [build(i) for i in range(params.n_trees)]

    return ForestModel(
        trees=[t for t, _ in built],
        kind=kind,
        feature_count=q,
        oob_indices=[o for _, o in built],
        n_classes=n_classes,
    )


def predict(model: ForestModel, X: np.ndarray) -> np.ndarray:
    """Ensemble prediction: mean of trees (regression) or majority vote
    with ties resolved to the lowest class index (classification)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.feature_count:
        raise ValueError(f"X must be 2-D with {model.feature_count} columns")
    if not np.all(np.isfinite(X)):
        raise ValueError("X must be finite")
    if model.kind == REGRESSION:
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for tree in model.trees:
            acc += tree.predict(X)
        return acc / len(model.trees)
    votes = np.zeros((X.shape[0], model.n_classes), dtype=np.int64)
    for tree in model.trees:
        votes[np.arange(X.shape[0]), tree.predict(X)] += 1
    return np.argmax(votes, axis=1).astype(np.int64)


def oob_error(model: ForestModel, X: np.ndarray, y: np.ndarray) -> float | None:
    """Out-of-bag error: MSE (regression) or misclassification fraction
    (classification).  None when every row was in-bag for all trees."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = X.shape[0]
    if model.kind == REGRESSION:
        acc = np.zeros(n, dtype=np.float64)
        cnt = np.zeros(n, dtype=np.int64)
        for tree, oob in zip(model.trees, model.oob_indices):
            if oob.any():
                acc[oob] += tree.predict(X[oob])
                cnt[oob] += 1
        covered = cnt > 0
        if not covered.any():
            return None
        resid = acc[covered] / cnt[covered] - np.asarray(y, dtype=np.float64)[covered]
        return float(np.mean(resid**2))

    votes = np.zeros((n, model.n_classes), dtype=np.int64)
    for tree, oob in zip(model.trees, model.oob_indices):
        if oob.any():
            votes[np.flatnonzero(oob), tree.predict(X[oob])] += 1
    covered = votes.sum(axis=1) > 0
    if not covered.any():
        return None
    pred = np.argmax(votes[covered], axis=1)
    return float(np.mean(pred != np.asarray(y)[covered]))
