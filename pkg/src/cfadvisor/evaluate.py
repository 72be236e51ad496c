"""Plausibility screening for generated candidates.

Three independent signals: an isolation forest scores how isolated a
candidate sits relative to training rows, a bagged forest turns model
disagreement into an uncertainty interval, and a 2-D projection gives the
UI something to plot candidates against the data cloud.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EULER_GAMMA = 0.5772156649015329
DEFAULT_OUTLIER_THRESHOLD = 0.6


class EvaluateError(ValueError):
    pass


def expected_path_length(m: int) -> float:
    """Average unsuccessful-search depth in a binary tree of m points."""
    if m <= 1:
        return 0.0
    return 2.0 * (math.log(m - 1) + EULER_GAMMA) - 2.0 * (m - 1) / m


class _IsoTree:
    """Flat random partition tree; leaves carry a depth correction."""

    def __init__(self, X: np.ndarray, rng: np.random.Generator, height_limit: int):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.adjust: list[float] = []

        def build(rows: np.ndarray, depth: int) -> int:
            node = len(self.feature)
            self.feature.append(-1)
            self.threshold.append(0.0)
            self.left.append(0)
            self.right.append(0)
            self.adjust.append(0.0)
            lo = X[rows].min(axis=0)
            hi = X[rows].max(axis=0)
            splittable = np.nonzero(hi > lo)[0]
            if depth >= height_limit or len(rows) <= 1 or splittable.size == 0:
                self.adjust[node] = expected_path_length(len(rows))
                return node
            j = int(rng.choice(splittable))
            split = float(rng.uniform(lo[j], hi[j]))
            self.feature[node] = j
            self.threshold[node] = split
            mask = X[rows, j] <= split
            self.left[node] = build(rows[mask], depth + 1)
            self.right[node] = build(rows[~mask], depth + 1)
            return node

        build(np.arange(X.shape[0]), 0)
        self.feature = np.asarray(self.feature, dtype=np.int64)
        self.threshold = np.asarray(self.threshold)
        self.left = np.asarray(self.left, dtype=np.int64)
        self.right = np.asarray(self.right, dtype=np.int64)
        self.adjust = np.asarray(self.adjust)

    def path_lengths(self, X: np.ndarray) -> np.ndarray:
        idx = np.zeros(X.shape[0], dtype=np.int64)
        depth = np.zeros(X.shape[0])
        while True:
            internal = self.feature[idx] != -1
            if not internal.any():
                break
            rows = np.nonzero(internal)[0]
            nodes = idx[rows]
            go_left = X[rows, self.feature[nodes]] <= self.threshold[nodes]
            idx[rows] = np.where(go_left, self.left[nodes], self.right[nodes])
            depth[rows] += 1.0
        return depth + self.adjust[idx]


class IsolationForest:
    """Anomaly score s in (0, 1); familiar points land well below 0.5."""

    def __init__(self, n_trees: int = 100, subsample: int = 256, seed: int = 0):
        if n_trees < 1:
            raise EvaluateError("n_trees must be positive")
        self.n_trees = n_trees
        self.subsample = subsample
        self.seed = seed
        self._trees: list[_IsoTree] = []
        self.psi = 0

    def fit(self, X: np.ndarray) -> "IsolationForest":
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        n = X.shape[0]
        if n < 2:
            raise EvaluateError("need at least 2 rows")
        self.psi = min(self.subsample, n)
        height_limit = math.ceil(math.log2(self.psi)) if self.psi > 1 else 1
        rng = np.random.default_rng(self.seed)
        self._trees = []
        for _ in range(self.n_trees):
            rows = rng.choice(n, size=self.psi, replace=False)
            self._trees.append(_IsoTree(X[rows], rng, height_limit))
        return self

    def scores(self, X: np.ndarray) -> np.ndarray:
        if not self._trees:
            raise EvaluateError("forest is not fitted")
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        mean_path = np.mean([t.path_lengths(X) for t in self._trees], axis=0)
        return 2.0 ** (-mean_path / expected_path_length(self.psi))


class PCAProjection:
    """Two leading principal directions of the training cloud."""

    def __init__(self):
        self.mean: np.ndarray | None = None
        self.components: np.ndarray | None = None  # (2, d)
        self.explained: np.ndarray | None = None

    def fit(self, X: np.ndarray) -> "PCAProjection":
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[0] < 2:
            raise EvaluateError("need at least 2 rows to project")
        self.mean = X.mean(axis=0)
        centered = X - self.mean
        _, svals, vt = np.linalg.svd(centered, full_matrices=False)
        k = min(2, vt.shape[0])
        comps = vt[:k]
        if k < 2:  # single feature: pad an orthogonal zero direction
            comps = np.vstack([comps, np.zeros_like(comps)])
            svals = np.append(svals, 0.0)
        # deterministic orientation: dominant loading of each axis positive
        for i in range(2):
            pivot = int(np.argmax(np.abs(comps[i])))
            if comps[i, pivot] < 0:
                comps[i] = -comps[i]
        self.components = comps
        total = float((svals ** 2).sum()) or 1.0
        self.explained = (svals[:2] ** 2) / total
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        if self.components is None:
            raise EvaluateError("projection is not fitted")
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return (X - self.mean) @ self.components.T


@dataclass
class CandidateEvaluation:
    outlier_score: float
    is_outlier: bool
    uq_mean: dict
    uq_lower: dict
    uq_upper: dict
    interval_width_rel: float
    disagreement_rel: float

    def to_dict(self) -> dict:
        return {
            "outlier_score": self.outlier_score,
            "is_outlier": self.is_outlier,
            "uq_mean": self.uq_mean,
            "uq_lower": self.uq_lower,
            "uq_upper": self.uq_upper,
            "interval_width_rel": self.interval_width_rel,
            "disagreement_rel": self.disagreement_rel,
        }


def evaluate_candidates(candidates, predictor, forest, iforest,
                        s_threshold: float = DEFAULT_OUTLIER_THRESHOLD
                        ) -> list[CandidateEvaluation]:
    """Score each candidate's plausibility; order matches the input."""
    if not candidates:
        return []
    S = np.vstack([c.x_scaled for c in candidates])
    iso = iforest.scores(S)
    stats = forest.predict_stats(S)
    preds = predictor.predict(S)
    names = predictor.target_names

    out = []
    for i, _ in enumerate(candidates):
        mean = stats["mean"][i]
        lower = stats["lower"][i]
        upper = stats["upper"][i]
        width = np.mean((upper - lower) / np.maximum(np.abs(mean), 1e-9))
        disagree = np.mean(np.abs(mean - preds[i]) / np.maximum(np.abs(preds[i]), 1e-9))
        out.append(CandidateEvaluation(
            outlier_score=float(iso[i]),
            is_outlier=bool(iso[i] > s_threshold),
            uq_mean={t: float(mean[j]) for j, t in enumerate(names)},
            uq_lower={t: float(lower[j]) for j, t in enumerate(names)},
            uq_upper={t: float(upper[j]) for j, t in enumerate(names)},
            interval_width_rel=float(width),
            disagreement_rel=float(disagree),
        ))
    return out
