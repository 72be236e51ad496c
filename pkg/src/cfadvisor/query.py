"""JSON query documents and the pipeline that answers them.

A query names a type (Recommend, WhatIf, Optimize, or Counterfactual as a
synonym of WhatIf), target goals like "< 1000" or "-20%", and optional
feature constraints. Execution runs the whole chain: preprocess, fit the
frozen predictor, mine and validate rules, search for candidate sets,
filter by rule compliance, screen plausibility, check causal consistency,
rank the survivors, and phrase explanations. The result is a JSON report
plus flat artifacts (candidate table, dependency graph, 2-D projection,
radar data) that are byte-stable for a given dataset and query.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .causal import consistency as graph_consistency
from .causal import learn_dag
from .counterfactual import (
    Candidate,
    Constraint,
    SearchSpec,
    TargetGoal,
    ensemble_generate,
)
from .dataset import (
    CATEGORICAL,
    Dataset,
    csv_cell,
    medoid_index,
    preprocess,
    train_test_split,
)
from .decide import TradeoffWeights, explain, rank_topk, rewrite_explanations
from .evaluate import (
    DEFAULT_OUTLIER_THRESHOLD,
    IsolationForest,
    PCAProjection,
    evaluate_candidates,
)
from .models import BoostedPredictor, UncertaintyForest
from .rules import (
    Rule,
    RuleProviderError,
    extract_rules_llm,
    extract_rules_statistical,
    score_compliance,
    validate_rules,
)

SPLIT_RATIO = 0.8
COMPLIANCE_THRESHOLD = 0.5
CAUSAL_PRUNE_THRESHOLD = 0.05
PHASES = ("preprocessing", "training", "generating", "filtering",
          "evaluating", "ranking")


class QueryError(ValueError):
    def __init__(self, message: str, stage: str = "query"):
        super().__init__(message)
        self.stage = stage


# ------------------------------------------------------------- parsing

_KNOWN_FIELDS = {
    "type", "targets", "constraints", "baseline", "seeds", "workers",
    "ncandidates", "lambda1", "lambda2", "topk", "weights", "rules",
    "ruleprovider", "explainprovider", "outlierpolicy",
}

_TYPES = {"recommend": "recommend", "whatif": "whatif",
          "counterfactual": "whatif", "optimize": "whatif"}

_NUM_RE = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_UNIT_RE = re.compile(rf"^({_NUM_RE})\s*[a-zA-Z]*$")
_RANGE_RE = re.compile(rf"^({_NUM_RE})\s*[a-zA-Z]*\s*-\s*({_NUM_RE})\s*[a-zA-Z]*$")
_PERCENT_RE = re.compile(r"^([+-](?:\d+\.?\d*|\.\d+))\s*%$")


def _strip_number(text: str, context: str) -> float:
    m = _UNIT_RE.match(text.strip())
    if not m:
        raise QueryError(f"{context}: cannot parse number from {text!r}")
    return float(m.group(1))


@dataclass
class ParsedTarget:
    name: str
    goal: TargetGoal


@dataclass
class ParsedConstraint:
    name: str
    kind: str                    # fixed | box
    value: object = None
    lo: float = -np.inf
    hi: float = np.inf
    levels: tuple = ()


@dataclass
class Query:
    type: str                    # recommend | whatif
    raw_type: str
    targets: list[ParsedTarget]
    constraints: list[ParsedConstraint]
    baseline: dict | None
    seeds: list[int] = field(default_factory=lambda: [0])
    workers: int = 1
    n_candidates: int = 20
    lambda1: float = 0.5
    lambda2: float = 1.0
    top_k: int = 5
    weights: TradeoffWeights = field(default_factory=TradeoffWeights)
    user_rules: list[Rule] = field(default_factory=list)
    rule_provider: dict | None = None
    explain_provider: dict | None = None
    outlier_policy: str = "soft"

    def echo(self) -> dict:
        return {
            "type": self.raw_type,
            "resolved_type": self.type,
            "targets": {t.name: _goal_text(t.goal) for t in self.targets},
            "constraints": {c.name: _constraint_text(c) for c in self.constraints},
            "baseline": self.baseline,
            "seeds": self.seeds,
            "workers": self.workers,
            "n_candidates": self.n_candidates,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "top_k": self.top_k,
            "weights": self.weights.to_dict(),
            "outlier_policy": self.outlier_policy,
            "rule_provider": bool(self.rule_provider),
            "explain_provider": bool(self.explain_provider),
            "user_rules": [r.name for r in self.user_rules],
        }


def _goal_text(g: TargetGoal) -> str:
    if g.kind == "point":
        return f"= {csv_cell(g.value)}"
    if g.kind == "percent":
        return f"{g.percent * 100:+g}%"
    if np.isinf(g.lo):
        return f"< {csv_cell(g.hi)}"
    if np.isinf(g.hi):
        return f"> {csv_cell(g.lo)}"
    return f"{csv_cell(g.lo)} - {csv_cell(g.hi)}"


def _constraint_text(c: ParsedConstraint) -> str:
    if c.kind == "fixed":
        return f"= {c.value}" if not isinstance(c.value, str) else c.value
    if c.levels:
        return " | ".join(c.levels)
    if np.isinf(c.lo):
        return f"<= {csv_cell(c.hi)}"
    if np.isinf(c.hi):
        return f">= {csv_cell(c.lo)}"
    return f"{csv_cell(c.lo)} - {csv_cell(c.hi)}"


def _parse_goal(name: str, value) -> TargetGoal:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return TargetGoal(name, "point", value=float(value))
    text = str(value).strip()
    ctx = f"target {name!r}"
    m = _PERCENT_RE.match(text)
    if m:
        return TargetGoal(name, "percent", percent=float(m.group(1)) / 100.0)
    if text.endswith("%"):
        raise QueryError(f"{ctx}: percent goals need an explicit sign, got {text!r}")
    for op in ("<=", "<"):
        if text.startswith(op):
            return TargetGoal(name, "range",
                              hi=_strip_number(text[len(op):], ctx))
    for op in (">=", ">"):
        if text.startswith(op):
            return TargetGoal(name, "range",
                              lo=_strip_number(text[len(op):], ctx))
    if text.startswith("="):
        return TargetGoal(name, "point", value=_strip_number(text[1:], ctx))
    m = _RANGE_RE.match(text)
    if m:
        lo, hi = float(m.group(1)), float(m.group(2))
        if lo > hi:
            raise QueryError(f"{ctx}: range {text!r} is empty")
        return TargetGoal(name, "range", lo=lo, hi=hi)
    return TargetGoal(name, "point", value=_strip_number(text, ctx))


def _parse_constraint(name: str, value) -> ParsedConstraint:
    ctx = f"constraint {name!r}"
    if isinstance(value, (list, tuple)):
        if not value or not all(isinstance(v, str) for v in value):
            raise QueryError(f"{ctx}: a level list must be non-empty strings")
        return ParsedConstraint(name, "box", levels=tuple(value))
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return ParsedConstraint(name, "fixed", value=float(value))
    text = str(value).strip()
    for op in ("<=", "<"):
        if text.startswith(op):
            return ParsedConstraint(name, "box",
                                    hi=_strip_number(text[len(op):], ctx))
    for op in (">=", ">"):
        if text.startswith(op):
            return ParsedConstraint(name, "box",
                                    lo=_strip_number(text[len(op):], ctx))
    if text.startswith("="):
        rest = text[1:].strip()
        try:
            return ParsedConstraint(name, "fixed", value=_strip_number(rest, ctx))
        except QueryError:
            return ParsedConstraint(name, "fixed", value=rest)
    m = _RANGE_RE.match(text)
    if m:
        lo, hi = float(m.group(1)), float(m.group(2))
        if lo > hi:
            raise QueryError(f"{ctx}: range {text!r} is empty")
        return ParsedConstraint(name, "box", lo=lo, hi=hi)
    try:
        return ParsedConstraint(name, "fixed", value=_strip_number(text, ctx))
    except QueryError:
        return ParsedConstraint(name, "fixed", value=text)  # categorical level


def parse_query(obj: dict) -> Query:
    """Validate a query document; unknown fields are named in the error."""
    if not isinstance(obj, dict):
        raise QueryError("query must be a JSON object")
    lowered = {}
    for key, value in obj.items():
        lk = str(key).lower()
        if lk not in _KNOWN_FIELDS:
            raise QueryError(f"unknown query field {key!r}")
        if lk in lowered:
            raise QueryError(f"duplicate query field {key!r}")
        lowered[lk] = value

    raw_type = str(lowered.get("type", "")).strip()
    qtype = _TYPES.get(raw_type.lower())
    if qtype is None:
        raise QueryError(
            f"unknown query type {raw_type!r}; expected one of "
            "Recommend, WhatIf, Optimize, Counterfactual")

    targets_obj = lowered.get("targets")
    if not isinstance(targets_obj, dict) or not targets_obj:
        raise QueryError("query needs a non-empty Targets object")
    targets = [ParsedTarget(str(k), _parse_goal(str(k), v))
               for k, v in targets_obj.items()]

    constraints_obj = lowered.get("constraints", {}) or {}
    if not isinstance(constraints_obj, dict):
        raise QueryError("Constraints must be an object")
    constraints = [_parse_constraint(str(k), v) for k, v in constraints_obj.items()]

    baseline = lowered.get("baseline")
    if qtype == "recommend":
        if baseline is not None:
            raise QueryError("Recommend queries must not include a Baseline; "
                             "a representative row is chosen automatically")
    else:
        if not isinstance(baseline, dict) or not baseline:
            raise QueryError(f"{raw_type} queries require a Baseline object")

    seeds = lowered.get("seeds", [0])
    if (not isinstance(seeds, list) or not seeds
            or not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds)):
        raise QueryError("Seeds must be a non-empty list of integers")
    if len(set(seeds)) != len(seeds):
        raise QueryError("Seeds must be distinct")

    def _pos_int(key, default):
        v = lowered.get(key, default)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise QueryError(f"{key} must be a positive integer")
        return v

    def _nonneg(key, default):
        v = lowered.get(key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0:
            raise QueryError(f"{key} must be a non-negative number")
        return float(v)

    weights_obj = lowered.get("weights", {}) or {}
    if not isinstance(weights_obj, dict):
        raise QueryError("Weights must be an object")
    known_w = {"validity", "proximity", "uncertainty", "consistency", "plausibility"}
    bad = set(weights_obj) - known_w
    if bad:
        raise QueryError(f"unknown weight name(s): {sorted(bad)}")
    try:
        weights = TradeoffWeights(**{**TradeoffWeights().to_dict(), **weights_obj})
    except ValueError as exc:
        raise QueryError(f"bad Weights: {exc}") from None

    user_rules = []
    for i, entry in enumerate(lowered.get("rules", []) or []):
        if not isinstance(entry, dict) or "expression" not in entry:
            raise QueryError(f"Rules[{i}] needs an 'expression'")
        user_rules.append(Rule(
            name=str(entry.get("name") or f"user_rule_{i}"),
            expression=str(entry["expression"]),
            explanation=str(entry.get("explanation", "")),
            source="user"))

    policy = str(lowered.get("outlierpolicy", "soft")).lower()
    if policy not in ("soft", "reject"):
        raise QueryError("OutlierPolicy must be 'soft' or 'reject'")

    for pkey in ("ruleprovider", "explainprovider"):
        p = lowered.get(pkey)
        if p is not None and (not isinstance(p, dict) or "url" not in p):
            raise QueryError(f"{pkey} must be an object with a 'url'")

    return Query(
        type=qtype,
        raw_type=raw_type,
        targets=targets,
        constraints=constraints,
        baseline=baseline,
        seeds=list(seeds),
        workers=_pos_int("workers", 1),
        n_candidates=_pos_int("ncandidates", 20),
        lambda1=_nonneg("lambda1", 0.5),
        lambda2=_nonneg("lambda2", 1.0),
        top_k=_pos_int("topk", 5),
        weights=weights,
        user_rules=user_rules,
        rule_provider=lowered.get("ruleprovider"),
        explain_provider=lowered.get("explainprovider"),
        outlier_policy=policy,
    )


def load_query(text: str) -> Query:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise QueryError(f"query is not valid JSON: {exc}") from None
    return parse_query(obj)


# ----------------------------------------------------------- execution

@dataclass
class RunResult:
    report: dict
    artifacts: dict          # name -> bytes
    infeasible: bool


def _raw_feature_matrix(pre, X_scaled: np.ndarray) -> np.ndarray:
    """Scaled rows back to raw units; categorical columns stay as codes."""
    return pre.unscale_matrix(X_scaled)


def _bindings(pre, raw_row: np.ndarray, target_values: np.ndarray) -> dict:
    row = {name: float(v) for name, v in zip(pre.feature_names, raw_row)}
    row.update({name: float(v)
                for name, v in zip(pre.target_names, target_values)})
    return row


def _candidate_bindings(pre, cand: Candidate) -> dict:
    row = {}
    for j, col in enumerate(pre.feature_columns):
        v = cand.features[col.name]
        row[col.name] = float(pre.level_to_code(col.name, v)
                              if col.kind == CATEGORICAL else v)
    row.update({k: float(v) for k, v in cand.predictions.items()})
    return row


def execute_query(ds: Dataset, query: Query, *, on_phase=None,
                  rule_client=None, explain_client=None) -> RunResult:
    """Run the full pipeline on a loaded dataset and build the report."""
    timings: dict[str, float] = {}
    started = time.time()

    def phase(name: str):
        if on_phase:
            on_phase(name)
        timings[name] = time.perf_counter()

    def close_phase(name: str):
        timings[name] = time.perf_counter() - timings[name]

    def stage_fail(stage, exc):
        if isinstance(exc, QueryError):
            return exc
        return QueryError(f"{stage}: {exc}", stage=stage)

    # ---- preprocessing
    phase("preprocessing")
    try:
        pre, prep_report = preprocess(ds)
        train, test = train_test_split(pre, ratio=SPLIT_RATIO, seed=0)
    except Exception as exc:
        raise stage_fail("preprocessing", exc)
    close_phase("preprocessing")

    # ---- training
    phase("training")
    try:
        predictor = BoostedPredictor().fit(
            train.X, train.Y, pre.feature_names, pre.target_names,
            schema_hash=pre.schema_hash())
        forest = UncertaintyForest(seed=0).fit(train.X, train.Y, pre.target_names)
        iforest = IsolationForest(seed=0).fit(train.X)
        test_pred = predictor.predict(test.X)
        r2 = {}
        for j, t in enumerate(pre.target_names):
            sse = float(((test.Y[:, j] - test_pred[:, j]) ** 2).sum())
            sst = float(((test.Y[:, j] - test.Y[:, j].mean()) ** 2).sum())
            r2[t] = 1.0 - sse / sst if sst > 0 else (1.0 if sse == 0 else 0.0)
    except Exception as exc:
        raise stage_fail("training", exc)
    close_phase("training")

    # ---- rules (part of generation setup but reported separately)
    phase("generating")
    provider_fallback = False
    provider_used = "statistical"
    try:
        train_raw = _raw_feature_matrix(pre, train.X)
        numeric_idx = [j for j, c in enumerate(pre.feature_columns)
                       if c.kind != CATEGORICAL]
        numeric_names = [pre.feature_names[j] for j in numeric_idx]
        if query.rule_provider:
            provider_used = "llm"
            try:
                mined = extract_rules_llm(
                    query.rule_provider["url"], train_raw[:, numeric_idx],
                    numeric_names,
                    api_key=query.rule_provider.get("api_key", ""),
                    model=query.rule_provider.get("model", "default"),
                    client=rule_client)
            except RuleProviderError:
                provider_fallback = True
                mined = extract_rules_statistical(
                    train_raw[:, numeric_idx], numeric_names)
        else:
            mined = extract_rules_statistical(
                train_raw[:, numeric_idx], numeric_names)

        rule_rows = [_bindings(pre, train_raw[i], train.Y[i])
                     for i in range(train.n)]
        ruleset, rejected_rules = validate_rules(
            query.user_rules + mined, rule_rows,
            min_coverage=COMPLIANCE_THRESHOLD)

        # ---- search
        goals = []
        extra_constraints = []
        reinterpreted = []
        for t in query.targets:
            if t.name in pre.feature_names:
                # a feature under Targets is a pin, not a goal
                g = t.goal
                if g.kind == "point":
                    extra_constraints.append(
                        Constraint(t.name, "fixed", value=g.value))
                else:
                    extra_constraints.append(
                        Constraint(t.name, "box", lo=g.lo, hi=g.hi))
                reinterpreted.append(t.name)
            else:
                goals.append(t.goal)
        if not goals:
            raise QueryError(
                "no Targets entry names a target column; add a goal for one of "
                f"{pre.target_names}", stage="generating")

        constraints = []
        for c in query.constraints:
            if c.name in pre.target_names:
                raise QueryError(
                    f"constraint {c.name!r} names a target; constraints apply "
                    "to features", stage="generating")
            if c.kind == "fixed":
                constraints.append(Constraint(c.name, "fixed", value=c.value))
            else:
                constraints.append(Constraint(
                    c.name, "box", lo=c.lo, hi=c.hi, levels=c.levels))
        constraints.extend(extra_constraints)

        if query.type == "recommend":
            idx = medoid_index(pre)
            raw_row = _raw_feature_matrix(pre, pre.X[idx:idx + 1])[0]
            baseline = {}
            for j, col in enumerate(pre.feature_columns):
                baseline[col.name] = (pre.code_to_level(col.name, raw_row[j])
                                      if col.kind == CATEGORICAL
                                      else float(raw_row[j]))
        else:
            baseline = dict(query.baseline)
            missing = [n for n in pre.feature_names if n not in baseline]
            if missing:
                raise QueryError(
                    f"Baseline is missing feature(s): {missing}",
                    stage="generating")

        spec = SearchSpec(
            goals=goals, constraints=constraints,
            n_candidates=query.n_candidates,
            lambda1=query.lambda1, lambda2=query.lambda2)
        gen = ensemble_generate(pre, predictor, baseline, spec,
                                seeds=query.seeds, workers=query.workers)
    except Exception as exc:
        raise stage_fail("generating", exc)
    close_phase("generating")

    # ---- compliance filtering
    phase("filtering")
    try:
        compliant: list[Candidate] = []
        compliance_notes = []
        for cand in gen.candidates:
            result = score_compliance(ruleset, _candidate_bindings(pre, cand))
            if result.score >= COMPLIANCE_THRESHOLD:
                compliant.append(cand)
                compliance_notes.append(result)
        n_rejected_compliance = len(gen.candidates) - len(compliant)
    except Exception as exc:
        raise stage_fail("filtering", exc)
    close_phase("filtering")

    # ---- plausibility
    phase("evaluating")
    try:
        evals = evaluate_candidates(compliant, predictor, forest, iforest)
        if query.outlier_policy == "reject":
            keep = [i for i, e in enumerate(evals) if not e.is_outlier]
        else:
            keep = list(range(len(evals)))
        n_rejected_outlier = len(evals) - len(keep)
        surviving = [compliant[i] for i in keep]
        surv_evals = [evals[i] for i in keep]
        compliance_by_cand = {id(compliant[i]): compliance_notes[i] for i in keep}

        real_graph = learn_dag(
            train_raw, pre.feature_names, train.Y, pre.target_names,
            prune_threshold=CAUSAL_PRUNE_THRESHOLD)
        causal_skipped = None
        consistency_value = None
        weights = query.weights
        min_rows = max(30, 3 * len(pre.feature_names))
        if len(surviving) >= min_rows:
            surv_raw = np.array(
                [[b[name] for name in pre.feature_names]
                 for b in (_candidate_bindings(pre, c) for c in surviving)])
            surv_y = np.array([[c.predictions[t] for t in pre.target_names]
                               for c in surviving])
            surv_graph = learn_dag(
                surv_raw, pre.feature_names, surv_y, pre.target_names,
                prune_threshold=CAUSAL_PRUNE_THRESHOLD)
            consistency_value = graph_consistency(real_graph, surv_graph)
        else:
            causal_skipped = (
                f"only {len(surviving)} surviving candidates; need at least "
                f"{min_rows} to fit a comparison graph")
            weights = weights.without_consistency()
    except Exception as exc:
        raise stage_fail("evaluating", exc)
    close_phase("evaluating")

    # ---- ranking + wording
    phase("ranking")
    try:
        top = rank_topk(surviving, surv_evals,
                        consistency_value if consistency_value is not None else 0.0,
                        weights, k=query.top_k)
        explain_fallback = False
        for sc in top:
            sc.explanation_template = explain(
                sc.candidate, gen.baseline, gen.baseline_predictions, real_graph)
            sc.explanation = sc.explanation_template
        if query.explain_provider and top:
            try:
                rewritten = rewrite_explanations(
                    [sc.explanation_template for sc in top],
                    query.explain_provider["url"],
                    api_key=query.explain_provider.get("api_key", ""),
                    model=query.explain_provider.get("model", "default"),
                    client=explain_client)
                for sc, text in zip(top, rewritten):
                    sc.explanation = text
            except RuleProviderError:
                explain_fallback = True

        projection = PCAProjection().fit(train.X)
    except Exception as exc:
        raise stage_fail("ranking", exc)
    close_phase("ranking")

    report = {
        "version": __version__,
        "status": "done",
        "infeasible": gen.infeasible,
        "query": query.echo(),
        "dataset": {
            "content_hash": ds.content_hash,
            "n_rows": pre.n,
            "n_train": train.n,
            "n_test": test.n,
            "split_ratio": SPLIT_RATIO,
            "features": [c.to_dict() for c in pre.feature_columns],
            "targets": [c.to_dict() for c in pre.target_columns],
            "preprocess": prep_report.to_dict(),
        },
        "model": {
            "params": {
                "n_rounds": predictor.n_rounds,
                "max_depth": predictor.max_depth,
                "learning_rate": predictor.learning_rate,
            },
            "hash": predictor.model_hash(),
            "test_r2": r2,
            "forest": {"n_trees": forest.n_trees, "max_depth": forest.max_depth},
        },
        "rules": {
            "provider": provider_used,
            "provider_fallback": provider_fallback,
            "compliance_threshold": COMPLIANCE_THRESHOLD,
            "kept": [r.to_dict() for r in ruleset],
            "rejected": rejected_rules,
        },
        "generation": {
            "n_candidates_requested": query.n_candidates,
            "n_emitted": len(gen.candidates),
            "seeds": query.seeds,
            "workers": query.workers,
            "lambda1": query.lambda1,
            "lambda2": query.lambda2,
            "best_loss": gen.best_loss,
            "runs": gen.runs,
            "reinterpreted_targets": reinterpreted,
            "y_star": gen.y_star,
        },
        "filtering": {
            "n_rejected_compliance": n_rejected_compliance,
            "n_rejected_outlier": n_rejected_outlier,
            "n_surviving": len(surviving),
            "outlier_policy": query.outlier_policy,
        },
        "evaluation": {
            "outlier_threshold": DEFAULT_OUTLIER_THRESHOLD,
            "causal_prune_threshold": CAUSAL_PRUNE_THRESHOLD,
            "consistency": consistency_value,
            "causal_skipped": causal_skipped,
            "explain_fallback": explain_fallback,
        },
        "baseline": {
            "features": gen.baseline,
            "predictions": gen.baseline_predictions,
        },
        "topk": [
            {
                "rank": sc.rank,
                "features": sc.candidate.features,
                "predictions": sc.candidate.predictions,
                "score": sc.score,
                "components": sc.components,
                "subscores": sc.subscores,
                "validity": sc.candidate.validity,
                "proximity": sc.candidate.proximity,
                "diversity": sc.candidate.diversity,
                "satisfied": sc.candidate.satisfied,
                "seed": sc.candidate.seed,
                "worker": sc.candidate.worker,
                "iteration": sc.candidate.iteration,
                "compliance": {
                    "score": compliance_by_cand[id(sc.candidate)].score,
                    "violated": compliance_by_cand[id(sc.candidate)].violated,
                },
                "outlier_score": sc.evaluation.outlier_score,
                "is_outlier": sc.evaluation.is_outlier,
                "uq": {
                    "mean": sc.evaluation.uq_mean,
                    "lower": sc.evaluation.uq_lower,
                    "upper": sc.evaluation.uq_upper,
                },
                "interval_width_rel": sc.evaluation.interval_width_rel,
                "disagreement_rel": sc.evaluation.disagreement_rel,
                "explanation": sc.explanation,
                "explanation_template": sc.explanation_template,
            }
            for sc in top
        ],
        "timings": {
            "started_at": started,
            "finished_at": time.time(),
            "phases": timings,
        },
    }

    artifacts = {
        "report.json": json.dumps(report, indent=2, sort_keys=True).encode(),
        "candidates.csv": _candidates_csv(pre, gen.candidates),
        "graph.dot": real_graph.to_dot().encode(),
        "projection.csv": _projection_csv(projection, train, pre, gen),
        "radar.json": _radar_json(top),
    }
    return RunResult(report=report, artifacts=artifacts,
                     infeasible=gen.infeasible)


def _candidates_csv(pre, candidates: list[Candidate]) -> bytes:
    header = (pre.feature_names + pre.target_names
              + ["validity", "proximity", "seed", "worker", "iteration"])
    lines = [",".join(header)]
    for c in candidates:
        cells = [csv_cell(c.features[n]) for n in pre.feature_names]
        cells += [csv_cell(c.predictions[t]) for t in pre.target_names]
        cells += [csv_cell(c.validity), csv_cell(c.proximity),
                  str(c.seed), str(c.worker), str(c.iteration)]
        lines.append(",".join(cells))
    return ("\n".join(lines) + "\n").encode()


def _projection_csv(projection, train, pre, gen) -> bytes:
    lines = ["kind,id,x,y"]
    Z = projection.transform(train.X)
    for i in range(Z.shape[0]):
        lines.append(f"train,{i},{csv_cell(Z[i, 0])},{csv_cell(Z[i, 1])}")
    if gen.candidates:
        base = np.vstack([c.x_scaled for c in gen.candidates])
        Zc = projection.transform(base)
        for i in range(Zc.shape[0]):
            lines.append(f"candidate,{i},{csv_cell(Zc[i, 0])},{csv_cell(Zc[i, 1])}")
    return ("\n".join(lines) + "\n").encode()


def _radar_json(top) -> bytes:
    axes = ["validity", "proximity", "uncertainty", "consistency", "plausibility"]
    doc = {
        "axes": axes,
        "candidates": [
            {"rank": sc.rank, "values": [sc.subscores[a] for a in axes]}
            for sc in top
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True).encode()
