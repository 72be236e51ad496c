"""Gradient-boosted tree predictor and a bagged forest for uncertainty.

Both models are regression trees grown with exact greedy splits (variance
reduction over every distinct threshold), so fitting is fully deterministic
for a given dataset. Trees are stored as flat arrays, which lets batch
prediction run as a few vectorized index hops instead of per-row recursion.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np


class ModelError(ValueError):
    pass


_LEAF = -1


class FlatTree:
    """One regression tree in structure-of-arrays form.

    feature[i] is the split feature of node i, or -1 for a leaf. Rows with
    x[feature] <= threshold go to left[i], the rest to right[i]. value[i]
    is the node's mean response (used when the node is a leaf).
    """

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        idx = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            internal = self.feature[idx] != _LEAF
            if not internal.any():
                break
            rows = np.nonzero(internal)[0]
            nodes = idx[rows]
            go_left = X[rows, self.feature[nodes]] <= self.threshold[nodes]
            idx[rows] = np.where(go_left, self.left[nodes], self.right[nodes])
        return self.value[idx]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FlatTree":
        return cls(d["feature"], d["threshold"], d["left"], d["right"], d["value"])


def _best_split(X: np.ndarray, y: np.ndarray):
    """Exact greedy split: returns (gain, feature, threshold) or None.

    Thresholds are midpoints between consecutive distinct values. Ties are
    broken toward the lowest feature index, then the lowest threshold.
    """
    n = len(y)
    total_sum = float(y.sum())
    total_sq = float((y * y).sum())
    parent_sse = total_sq - total_sum * total_sum / n
    best = None
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        ys = y[order]
        boundaries = np.nonzero(np.diff(xs) > 0)[0]
        if boundaries.size == 0:
            continue
        cum = np.cumsum(ys)
        cumsq = np.cumsum(ys * ys)
        nl = boundaries + 1.0
        nr = n - nl
        sl = cum[boundaries]
        sql = cumsq[boundaries]
        sse_left = sql - sl * sl / nl
        sse_right = (total_sq - sql) - (total_sum - sl) ** 2 / nr
        gains = parent_sse - sse_left - sse_right
        k = int(np.argmax(gains))  # first occurrence = lowest threshold on ties
        gain = float(gains[k])
        if gain > 1e-12 and (best is None or gain > best[0]):
            thr = float((xs[boundaries[k]] + xs[boundaries[k] + 1]) / 2.0)
            best = (gain, j, thr)
    return best


def grow_tree(X: np.ndarray, y: np.ndarray, max_depth: int) -> FlatTree:
    feature, threshold, left, right, value = [], [], [], [], []

    def add_node(idx: np.ndarray, depth: int) -> int:
        node = len(feature)
        feature.append(_LEAF)
        threshold.append(0.0)
        left.append(_LEAF)
        right.append(_LEAF)
        value.append(float(y[idx].mean()))
        if depth >= max_depth or len(idx) < 2:
            return node
        split = _best_split(X[idx], y[idx])
        if split is None:
            return node
        _, j, thr = split
        feature[node] = j
        threshold[node] = thr
        mask = X[idx, j] <= thr
        left[node] = add_node(idx[mask], depth + 1)
        right[node] = add_node(idx[~mask], depth + 1)
        return node

    add_node(np.arange(len(y)), 0)
    return FlatTree(feature, threshold, left, right, value)


class _StackedTrees:
    """All trees of one ensemble concatenated for batch prediction."""

    def __init__(self, trees: list[FlatTree]):
        offsets = np.cumsum([0] + [t.n_nodes for t in trees])
        self.roots = offsets[:-1]
        self.feature = np.concatenate([t.feature for t in trees])
        self.threshold = np.concatenate([t.threshold for t in trees])
        self.value = np.concatenate([t.value for t in trees])
        self.left = np.concatenate(
            [t.left + off for t, off in zip(trees, self.roots)])
        self.right = np.concatenate(
            [t.right + off for t, off in zip(trees, self.roots)])
        # child arrays keep -1 markers intact only at leaves, where they are
        # never followed; re-mark them to be safe
        leaves = self.feature == _LEAF
        self.left[leaves] = 0
        self.right[leaves] = 0

    def predict_each(self, X: np.ndarray) -> np.ndarray:
        """Every tree's prediction per row; returns (n_rows, n_trees)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        n = X.shape[0]
        idx = np.broadcast_to(self.roots, (n, len(self.roots))).copy()
        while True:
            internal = self.feature[idx] != _LEAF
            if not internal.any():
                break
            rows, cols = np.nonzero(internal)
            nodes = idx[rows, cols]
            go_left = X[rows, self.feature[nodes]] <= self.threshold[nodes]
            idx[rows, cols] = np.where(go_left, self.left[nodes], self.right[nodes])
        return self.value[idx]

    def predict_sum(self, X: np.ndarray) -> np.ndarray:
        return self.predict_each(X).sum(axis=1)


FORMAT_TAG = "boosted-trees-v1"
FOREST_TAG = "bagged-forest-v1"


class BoostedPredictor:
    """Per-target gradient-boosted trees, frozen once fitted.

    Each target gets an independent ensemble: base score is the training
    mean, every round fits one tree to the residuals and contributes
    learning_rate times its prediction. With learning_rate in (0, 2) the
    training MSE can never increase between rounds, and fitting has no
    randomness at all, so a given dataset always yields the same model.
    """

    def __init__(self, n_rounds: int = 200, max_depth: int = 4,
                 learning_rate: float = 0.1, seed: int = 0):
        if not 0 < learning_rate < 2:
            raise ModelError(f"learning_rate must be in (0, 2), got {learning_rate}")
        if n_rounds < 1 or max_depth < 1:
            raise ModelError("n_rounds and max_depth must be positive")
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.seed = seed  # kept for interface symmetry; fitting is deterministic
        self.feature_names: list[str] = []
        self.target_names: list[str] = []
        self.schema_hash = ""
        self.base_scores: np.ndarray | None = None
        self.train_mse_curve: np.ndarray | None = None  # (n_rounds + 1, k)
        self._ensembles: list[list[FlatTree]] = []
        self._stacked: list[_StackedTrees] = []
        self.fitted = False

    def fit(self, X: np.ndarray, Y: np.ndarray, feature_names=None,
            target_names=None, schema_hash: str = "") -> "BoostedPredictor":
        if self.fitted:
            raise ModelError("predictor is frozen; fit() may only be called once")
        X = np.asarray(X, dtype=np.float64)
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        if Y.shape[0] != X.shape[0]:
            Y = Y.T
        n, k = Y.shape
        if n != X.shape[0] or n < 2:
            raise ModelError(f"need at least 2 aligned rows, got X {X.shape}, Y {Y.shape}")
        self.feature_names = list(feature_names or [f"x{j}" for j in range(X.shape[1])])
        self.target_names = list(target_names or [f"y{j}" for j in range(k)])
        self.schema_hash = schema_hash
        self.base_scores = Y.mean(axis=0)
        curve = np.empty((self.n_rounds + 1, k))
        for t in range(k):
            y = Y[:, t]
            pred = np.full(n, self.base_scores[t])
            curve[0, t] = float(np.mean((y - pred) ** 2))
            trees = []
            for r in range(self.n_rounds):
                tree = grow_tree(X, y - pred, self.max_depth)
                pred = pred + self.learning_rate * tree.predict(X)
                curve[r + 1, t] = float(np.mean((y - pred) ** 2))
                trees.append(tree)
            self._ensembles.append(trees)
            self._stacked.append(_StackedTrees(trees))
        self.train_mse_curve = curve
        self.fitted = True
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Predict all targets for a batch of rows; returns (n, k)."""
        if not self.fitted:
            raise ModelError("predictor is not fitted")
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.empty((X.shape[0], len(self.target_names)))
        for t, stacked in enumerate(self._stacked):
            out[:, t] = self.base_scores[t] + self.learning_rate * stacked.predict_sum(X)
        return out

    def predict_one(self, x: np.ndarray) -> np.ndarray:
        return self.predict(np.atleast_2d(x))[0]

    def to_dict(self) -> dict:
        if not self.fitted:
            raise ModelError("cannot serialize an unfitted predictor")
        return {
            "format": FORMAT_TAG,
            "n_rounds": self.n_rounds,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
            "feature_names": self.feature_names,
            "target_names": self.target_names,
            "schema_hash": self.schema_hash,
            "base_scores": self.base_scores.tolist(),
            "targets": [{"trees": [t.to_dict() for t in trees]}
                        for trees in self._ensembles],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoostedPredictor":
        if d.get("format") != FORMAT_TAG:
            raise ModelError(f"unknown model format {d.get('format')!r}")
        model = cls(d["n_rounds"], d["max_depth"], d["learning_rate"])
        model.feature_names = list(d["feature_names"])
        model.target_names = list(d["target_names"])
        model.schema_hash = d.get("schema_hash", "")
        model.base_scores = np.asarray(d["base_scores"], dtype=np.float64)
        model._ensembles = [
            [FlatTree.from_dict(td) for td in entry["trees"]] for entry in d["targets"]
        ]
        model._stacked = [_StackedTrees(trees) for trees in model._ensembles]
        model.fitted = True
        return model

    def model_hash(self) -> str:
        doc = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(doc.encode()).hexdigest()


class UncertaintyForest:
    """Bootstrap-aggregated trees giving a spread around each prediction.

    Disagreement between trees fitted on resampled data is the uncertainty
    signal: predict_stats returns the per-row mean, the sample standard
    deviation across trees, and a mean +/- 1.96 sigma interval.
    """

    def __init__(self, n_trees: int = 100, max_depth: int = 8, seed: int = 0):
        if n_trees < 2:
            raise ModelError("forest needs at least 2 trees")
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.seed = seed
        self.target_names: list[str] = []
        self._forests: list[list[FlatTree]] = []  # per target
        self._stacked: list[_StackedTrees] = []
        self.fitted = False

    def fit(self, X: np.ndarray, Y: np.ndarray, target_names=None) -> "UncertaintyForest":
        X = np.asarray(X, dtype=np.float64)
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        if Y.shape[0] != X.shape[0]:
            Y = Y.T
        n, k = Y.shape
        self.target_names = list(target_names or [f"y{j}" for j in range(k)])
        children = np.random.SeedSequence(self.seed).spawn(self.n_trees)
        samples = [np.random.default_rng(c).integers(0, n, size=n) for c in children]
        for t in range(k):
            trees = [grow_tree(X[idx], Y[idx, t], self.max_depth) for idx in samples]
            self._forests.append(trees)
            self._stacked.append(_StackedTrees(trees))
        self.fitted = True
        return self

    def predict_stats(self, X: np.ndarray) -> dict:
        """Per-row mean, std, and 95% normal interval across trees; (n, k) each."""
        if not self.fitted:
            raise ModelError("forest is not fitted")
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        n, k = X.shape[0], len(self.target_names)
        mean = np.empty((n, k))
        std = np.empty((n, k))
        for t, stacked in enumerate(self._stacked):
            per_tree = stacked.predict_each(X)  # (n, trees)
            mean[:, t] = per_tree.mean(axis=1)
            std[:, t] = per_tree.std(axis=1, ddof=1)
        return {
            "mean": mean,
            "std": std,
            "lower": mean - 1.96 * std,
            "upper": mean + 1.96 * std,
        }

    def to_dict(self) -> dict:
        if not self.fitted:
            raise ModelError("cannot serialize an unfitted forest")
        return {
            "format": FOREST_TAG,
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "seed": self.seed,
            "target_names": self.target_names,
            "targets": [{"trees": [t.to_dict() for t in trees]}
                        for trees in self._forests],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UncertaintyForest":
        if d.get("format") != FOREST_TAG:
            raise ModelError(f"unknown forest format {d.get('format')!r}")
        forest = cls(d["n_trees"], d["max_depth"], d["seed"])
        forest.target_names = list(d["target_names"])
        forest._forests = [
            [FlatTree.from_dict(td) for td in entry["trees"]] for entry in d["targets"]
        ]
        forest._stacked = [_StackedTrees(trees) for trees in forest._forests]
        forest.fitted = True
        return forest
