"""Weighted dependency structure between features and targets.

Builds a DAG by topological convention: features are ordered (by squared
correlation with the first target, optionally refined by a hill-climb over
adjacent swaps), each feature is ridge-regressed on its predecessors, and
every target is regressed on all features as a sink. Standardized
coefficients below a threshold are pruned; what survives is an edge whose
weight is comparable across datasets, with the raw-unit slope kept
alongside.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class CausalError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    parent: str
    child: str
    weight: float        # standardized coefficient
    weight_raw: float    # slope in original units


@dataclass
class CausalGraph:
    nodes: list[str]           # features in learned order, then targets
    feature_order: list[str]
    target_names: list[str]
    edges: list[Edge]

    def parents(self, node: str) -> list[Edge]:
        return [e for e in self.edges if e.child == node]

    def edge_map(self) -> dict[tuple[str, str], float]:
        return {(e.parent, e.child): e.weight for e in self.edges}

    def to_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "feature_order": self.feature_order,
            "target_names": self.target_names,
            "edges": [{"parent": e.parent, "child": e.child,
                       "weight": e.weight, "weight_raw": e.weight_raw}
                      for e in self.edges],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CausalGraph":
        return cls(
            nodes=list(d["nodes"]),
            feature_order=list(d["feature_order"]),
            target_names=list(d["target_names"]),
            edges=[Edge(e["parent"], e["child"], e["weight"], e["weight_raw"])
                   for e in d["edges"]],
        )

    def to_dot(self) -> str:
        lines = ["digraph causal {"]
        for node in self.nodes:
            shape = "box" if node in self.target_names else "ellipse"
            lines.append(f'  "{node}" [shape={shape}];')
        for e in self.edges:
            lines.append(f'  "{e.parent}" -> "{e.child}" [label="{e.weight:.3f}"];')
        lines.append("}")
        return "\n".join(lines)


def _standardize(M: np.ndarray):
    mu = M.mean(axis=0)
    sigma = M.std(axis=0)
    safe = np.where(sigma > 0, sigma, 1.0)
    return (M - mu) / safe, sigma


def _ridge_fit(Xs: np.ndarray, ys: np.ndarray, lam: float) -> np.ndarray:
    """Coefficients of ys on Xs, both standardized; gram is n-normalized so
    the shrinkage does not depend on sample size."""
    n, d = Xs.shape
    gram = Xs.T @ Xs / n + lam * np.eye(d)
    return np.linalg.solve(gram, Xs.T @ ys / n)


def _order_cost(Xs: np.ndarray, order: list[int], lam: float) -> float:
    """Total residual variance of each feature given its predecessors."""
    cost = 0.0
    for k in range(len(order)):
        y = Xs[:, order[k]]
        if k == 0:
            cost += float(np.var(y))
            continue
        Z = Xs[:, order[:k]]
        w = _ridge_fit(Z, y, lam)
        cost += float(np.var(y - Z @ w))
    return cost


def learn_dag(X: np.ndarray, feature_names: list[str], Y: np.ndarray,
              target_names: list[str], prune_threshold: float = 0.05,
              ridge: float = 1e-3, order_search: bool = False) -> CausalGraph:
    """Learn the weighted DAG from raw (or scaled) matrices.

    Standardization happens internally, so the standardized edge weights are
    unit-free; weight_raw converts each back into child-units per
    parent-unit.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if Y.shape[0] != X.shape[0]:
        Y = Y.T
    n, d = X.shape
    if n < 3:
        raise CausalError(f"need at least 3 rows to fit a graph, got {n}")
    if len(feature_names) != d or len(target_names) != Y.shape[1]:
        raise CausalError("names do not match matrix shapes")

    Xs, x_sigma = _standardize(X)
    Ys, y_sigma = _standardize(Y)

    first = Ys[:, 0]
    corr2 = np.array([float(np.mean(Xs[:, j] * first)) ** 2 for j in range(d)])
    order = sorted(range(d), key=lambda j: (-corr2[j], feature_names[j]))

    if order_search and d > 1:
        best_cost = _order_cost(Xs, order, ridge)
        improved = True
        while improved:
            improved = False
            for i in range(d - 1):
                trial = order.copy()
                trial[i], trial[i + 1] = trial[i + 1], trial[i]
                cost = _order_cost(Xs, trial, ridge)
                if cost < best_cost - 1e-12:
                    order, best_cost = trial, cost
                    improved = True

    edges: list[Edge] = []

    def add_edges(parent_idx: list[int], child_name: str, child_sigma: float,
                  ys: np.ndarray):
        if not parent_idx:
            return
        Z = Xs[:, parent_idx]
        w = _ridge_fit(Z, ys, ridge)
        for pos, j in enumerate(parent_idx):
            if abs(w[pos]) >= prune_threshold:
                sx = x_sigma[j] if x_sigma[j] > 0 else 1.0
                edges.append(Edge(feature_names[j], child_name,
                                  float(w[pos]),
                                  float(w[pos] * child_sigma / sx)))

    for k in range(1, d):
        child = order[k]
        add_edges(order[:k], feature_names[child],
                  x_sigma[child] if x_sigma[child] > 0 else 1.0,
                  Xs[:, child])

    for t in range(Y.shape[1]):
        add_edges(order, target_names[t],
                  y_sigma[t] if y_sigma[t] > 0 else 1.0, Ys[:, t])

    ordered_names = [feature_names[j] for j in order]
    return CausalGraph(
        nodes=ordered_names + list(target_names),
        feature_order=ordered_names,
        target_names=list(target_names),
        edges=edges,
    )


def influence_summary(graph: CausalGraph, target: str) -> list[dict]:
    """Direct parents of a target, strongest standardized weight first."""
    if target not in graph.nodes:
        raise CausalError(f"unknown node {target!r}")
    rows = [{"feature": e.parent, "weight": e.weight, "weight_raw": e.weight_raw}
            for e in graph.parents(target)]
    rows.sort(key=lambda r: (-abs(r["weight"]), r["feature"]))
    return rows


def consistency(g1: CausalGraph, g2: CausalGraph) -> float:
    """Cosine similarity of the two edge-weight vectors, floored at zero.

    Edges are aligned on the union of (parent, child) keys; a missing edge
    contributes weight 0. Two empty graphs agree perfectly; an empty graph
    against a non-empty one scores 0.
    """
    m1, m2 = g1.edge_map(), g2.edge_map()
    keys = sorted(set(m1) | set(m2))
    if not keys:
        return 1.0
    a = np.array([m1.get(k, 0.0) for k in keys])
    b = np.array([m2.get(k, 0.0) for k in keys])
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return max(0.0, float(a @ b) / (na * nb))


def graph_to_json(graph: CausalGraph) -> str:
    return json.dumps(graph.to_dict(), indent=2, sort_keys=True)
