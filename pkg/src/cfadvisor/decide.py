"""Ranking surviving candidates and explaining them in plain language.

The composite score blends five pulls: hit the target (validity), stay
close to the baseline (proximity), keep the prediction certain, keep the
candidate's dependency structure consistent with the real data, and avoid
outliers. Validity, proximity, uncertainty, and outlier score are min-max
normalized across the surviving set so the weights act on comparable
scales; the consistency term is a run-level scalar shared by all
candidates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .counterfactual import Candidate
from .evaluate import CandidateEvaluation

TOP_K = 5


class DecideError(ValueError):
    pass


@dataclass
class TradeoffWeights:
    validity: float = 0.3
    proximity: float = 0.2
    uncertainty: float = 0.2
    consistency: float = 0.15
    plausibility: float = 0.15

    def __post_init__(self):
        vals = self.as_tuple()
        if any(v < 0 for v in vals):
            raise DecideError("trade-off weights must be non-negative")
        total = sum(vals)
        if total <= 0:
            raise DecideError("at least one trade-off weight must be positive")
        (self.validity, self.proximity, self.uncertainty,
         self.consistency, self.plausibility) = tuple(v / total for v in vals)

    def as_tuple(self):
        return (self.validity, self.proximity, self.uncertainty,
                self.consistency, self.plausibility)

    def without_consistency(self) -> "TradeoffWeights":
        return TradeoffWeights(self.validity, self.proximity,
                               self.uncertainty, 0.0, self.plausibility)

    def to_dict(self) -> dict:
        return {"validity": self.validity, "proximity": self.proximity,
                "uncertainty": self.uncertainty, "consistency": self.consistency,
                "plausibility": self.plausibility}


@dataclass
class ScoredCandidate:
    candidate: Candidate
    evaluation: CandidateEvaluation
    score: float
    rank: int = 0
    components: dict = field(default_factory=dict)
    subscores: dict = field(default_factory=dict)
    explanation: str = ""
    explanation_template: str = ""


def _minmax(values: np.ndarray) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if hi - lo <= 0:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def composite_scores(candidates: list[Candidate],
                     evaluations: list[CandidateEvaluation],
                     consistency_value: float,
                     weights: TradeoffWeights) -> list[ScoredCandidate]:
    """Score each candidate; normalization spans exactly this set."""
    if len(candidates) != len(evaluations):
        raise DecideError("candidates and evaluations are misaligned")
    if not candidates:
        return []
    v = _minmax(np.array([c.validity for c in candidates]))
    p = _minmax(np.array([c.proximity for c in candidates]))
    u = _minmax(np.array([e.interval_width_rel for e in evaluations]))
    s = _minmax(np.array([e.outlier_score for e in evaluations]))
    w = weights
    out = []
    for i, (cand, ev) in enumerate(zip(candidates, evaluations)):
        subs = {
            "validity": 1.0 - v[i],
            "proximity": 1.0 - p[i],
            "uncertainty": 1.0 - u[i],
            "consistency": consistency_value,
            "plausibility": 1.0 - s[i],
        }
        parts = {k: getattr(w, k) * subs[k] for k in subs}
        out.append(ScoredCandidate(
            candidate=cand, evaluation=ev,
            score=float(sum(parts.values())),
            components={k: float(x) for k, x in parts.items()},
            subscores={k: float(x) for k, x in subs.items()},
        ))
    return out


def rank_topk(candidates: list[Candidate],
              evaluations: list[CandidateEvaluation],
              consistency_value: float,
              weights: TradeoffWeights | None = None,
              k: int = TOP_K) -> list[ScoredCandidate]:
    """Best k by composite score; ties prefer closer, then more valid."""
    weights = weights or TradeoffWeights()
    scored = composite_scores(candidates, evaluations, consistency_value, weights)
    order = sorted(
        range(len(scored)),
        key=lambda i: (-scored[i].score, scored[i].candidate.proximity,
                       scored[i].candidate.validity, i))
    top = [scored[i] for i in order[:k]]
    for rank, sc in enumerate(top, start=1):
        sc.rank = rank
    return top


# ------------------------------------------------------------- wording

def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return f"{float(v):.6g}"


def _delta_text(before, after) -> str:
    if isinstance(before, str) or isinstance(after, str):
        return f"{before} -> {after}"
    before, after = float(before), float(after)
    if before != 0.0:
        pct = 100.0 * (after - before) / abs(before)
        return f"{_fmt(before)} -> {_fmt(after)} ({pct:+.0f}%)"
    return f"{_fmt(before)} -> {_fmt(after)} ({after - before:+.6g})"


def changed_features(candidate: Candidate, baseline: dict) -> list[str]:
    changed = []
    for name, after in candidate.features.items():
        before = baseline[name]
        if isinstance(after, str) or isinstance(before, str):
            if str(after) != str(before):
                changed.append(name)
        elif not np.isclose(float(after), float(before), rtol=1e-9, atol=1e-12):
            changed.append(name)
    return changed


def explain(candidate: Candidate, baseline: dict, baseline_predictions: dict,
            graph=None) -> str:
    """Template explanation: what to change, what to expect, and why."""
    changed = changed_features(candidate, baseline)
    target_bits = []
    for tname, after in candidate.predictions.items():
        before = baseline_predictions.get(tname, after)
        target_bits.append((tname, before, after))

    if not changed:
        parts = [f"predicted {t} unchanged at {_fmt(b)}" for t, b, _ in target_bits]
        return "No changes from baseline; " + "; ".join(parts) + "."

    lines = ["Change " + "; ".join(
        f"{name}: {_delta_text(baseline[name], candidate.features[name])}"
        for name in changed) + "."]
    lines.append("Expected " + "; ".join(
        f"{t}: {_delta_text(b, a)}" for t, b, a in target_bits) + ".")

    if graph is not None:
        for tname, _, _ in target_bits:
            try:
                parents = [e for e in graph.parents(tname) if e.parent in changed]
            except AttributeError:
                parents = []
            if parents:
                parents.sort(key=lambda e: (-abs(e.weight), e.parent))
                top = parents[0]
                lines.append(
                    f"Strongest known influence on {tname} among the changed "
                    f"features: {top.parent} (weight {top.weight:+.2f}).")
    return " ".join(lines)


# ------------------------------------------- optional wording provider

_REWRITE_PROMPT = """Rewrite each of the following recommendation summaries
in clear, direct prose for an engineer. Keep every number exactly as
given. Reply with a JSON array of strings, one per summary, same order.

{items}"""


def rewrite_explanations(texts: list[str], url: str, api_key: str = "",
                         model: str = "default", timeout: float = 30.0,
                         client=None) -> list[str]:
    """Ask a chat endpoint to polish the template wording.

    Returns the rewritten strings (same order). Any transport or shape
    problem raises, and callers keep the templates.
    """
    import json as _json
    import re as _re

    import httpx

    from .rules import RuleProviderError

    payload = {
        "model": model,
        "messages": [{"role": "user", "content": _REWRITE_PROMPT.format(
            items="\n".join(f"{i + 1}. {t}" for i, t in enumerate(texts)))}],
    }
    headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
    try:
        own = client is None
        http = client or httpx.Client(timeout=timeout)
        try:
            resp = http.post(url, json=payload, headers=headers)
            resp.raise_for_status()
            body = resp.json()
        finally:
            if own:
                http.close()
        content = body["choices"][0]["message"]["content"]
        m = _re.search(r"\[.*\]", content, _re.DOTALL)
        items = _json.loads(m.group(0)) if m else None
    except Exception as exc:
        raise RuleProviderError(f"wording provider failed: {exc}") from exc
    if (not isinstance(items, list) or len(items) != len(texts)
            or not all(isinstance(t, str) for t in items)):
        raise RuleProviderError("wording provider reply has the wrong shape")
    return items
