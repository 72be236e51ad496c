"""Counterfactual search: find nearby feature vectors that reach a target.

A candidate set of N alternatives is scored jointly:

    total = sum_i validity(x'_i) + lambda1 * sum_i proximity(x'_i)
            - lambda2 * det(K)

where validity is the squared miss of the frozen predictor against the
target (squared hinge for ranges), proximity is MAD-weighted L1 distance
from the baseline in scaled space, and K_ij = 1 / (1 + ||x'_i - x'_j||) is
a similarity kernel whose determinant rewards spread-out sets. The search
itself is a small genetic algorithm over whole candidate sets, so the
diversity term can shape selection directly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import CATEGORICAL, PreprocessedDataset

POINT_REL_TOL = 0.05  # a point target counts as hit within 5% of its value


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class TargetGoal:
    """What one target column should become.

    kind 'range' uses [lo, hi] (either side may be infinite), 'point' wants
    an exact value, 'percent' asks for a signed relative change from the
    baseline prediction (percent=-0.2 means "20% lower").
    """

    name: str
    kind: str = "range"
    lo: float = -math.inf
    hi: float = math.inf
    value: float = 0.0
    percent: float = 0.0

    def __post_init__(self):
        if self.kind not in ("range", "point", "percent"):
            raise SearchError(f"unknown target kind {self.kind!r}")
        if self.kind == "range" and self.lo > self.hi:
            raise SearchError(f"empty range for {self.name}: [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Constraint:
    """How one feature may move: pinned, boxed, or free.

    For categorical features 'fixed' pins a level and 'box' restricts to
    the given levels list.
    """

    name: str
    kind: str = "free"  # fixed | box | free
    value: float | str | None = None
    lo: float = -math.inf
    hi: float = math.inf
    levels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("fixed", "box", "free"):
            raise SearchError(f"unknown constraint kind {self.kind!r}")
        if self.kind == "fixed" and self.value is None:
            raise SearchError(f"fixed constraint on {self.name!r} needs a value")


@dataclass
class SearchSpec:
    goals: list[TargetGoal]
    constraints: list[Constraint] = field(default_factory=list)
    n_candidates: int = 20
    lambda1: float = 0.5
    lambda2: float = 1.0
    population: int = 10
    generations: int = 200
    crossover_rate: float = 0.7
    mutation_rate: float = 0.1
    mutation_scale: float = 0.1
    early_stop_window: int = 20
    early_stop_tol: float = 1e-6

    def __post_init__(self):
        if not self.goals:
            raise SearchError("at least one target goal is required")
        if self.n_candidates < 1:
            raise SearchError("n_candidates must be positive")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise SearchError("lambda weights must be non-negative")


@dataclass
class Candidate:
    features: dict            # raw values, categorical levels decoded
    x_scaled: np.ndarray
    predictions: dict
    validity: float
    proximity: float
    diversity: float
    satisfied: bool
    seed: int
    worker: int
    iteration: int


@dataclass
class CandidateResult:
    candidates: list[Candidate]
    infeasible: bool
    best_loss: float
    generations: int
    y_star: dict
    baseline: dict
    baseline_predictions: dict
    runs: list[dict] = field(default_factory=list)


# ------------------------------------------------------------- kernel

def kernel_matrix(S: np.ndarray) -> np.ndarray:
    """K_ij = 1 / (1 + euclidean distance); symmetric with unit diagonal."""
    S = np.atleast_2d(S)
    diff = S[:, None, :] - S[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    return 1.0 / (1.0 + dist)


def diversity_det(S: np.ndarray) -> float:
    """det of the similarity kernel, clipped into [0, 1] against fp noise."""
    det = float(np.linalg.det(kernel_matrix(S)))
    return min(max(det, 0.0), 1.0)


# ------------------------------------------------------------ problem

@dataclass
class _Resolved:
    name: str
    index: int          # column in predictor output
    lo: float
    hi: float
    point: float | None
    y_star: float       # representative value for reports

    def losses(self, f: np.ndarray) -> np.ndarray:
        if self.point is not None:
            return (f - self.point) ** 2
        under = np.clip(self.lo - f, 0.0, None)
        over = np.clip(f - self.hi, 0.0, None)
        return (under + over) ** 2

    def satisfied(self, f: np.ndarray) -> np.ndarray:
        if self.point is not None:
            tol = max(POINT_REL_TOL * abs(self.point), 1e-9)
            return np.abs(f - self.point) <= tol
        return (f >= self.lo) & (f <= self.hi)


class _Problem:
    """Baseline, constraints, and goals translated into scaled space."""

    def __init__(self, pre: PreprocessedDataset, predictor, baseline: dict,
                 spec: SearchSpec):
        self.pre = pre
        self.predictor = predictor
        self.spec = spec
        names = pre.feature_names
        self.d = len(names)
        cols = pre.feature_columns

        by_name = {}
        for c in spec.constraints:
            if c.name not in names:
                raise SearchError(f"constraint on unknown feature {c.name!r}")
            by_name[c.name] = c

        self.is_cat = np.array([c.kind == CATEGORICAL for c in cols])
        self.lo = np.full(self.d, -np.inf)
        self.hi = np.full(self.d, np.inf)
        self.fixed_mask = np.zeros(self.d, dtype=bool)
        self.fixed_scaled = np.zeros(self.d)
        self.fixed_raw: dict[int, float | str] = {}
        self.allowed_codes: dict[int, np.ndarray] = {}
        self.box_raw: dict[int, tuple[float, float]] = {}

        missing = [n for n in names if n not in baseline]
        if missing:
            raise SearchError(f"baseline is missing feature(s): {missing}")
        x0 = np.empty(self.d)
        for j, col in enumerate(cols):
            v = baseline[col.name]
            if col.kind == CATEGORICAL:
                x0[j] = pre.level_to_code(col.name, v)
            else:
                x0[j] = pre.scale_value(col.name, float(v))

        for j, col in enumerate(cols):
            n_levels = len(col.levels) if col.kind == CATEGORICAL else 0
            con = by_name.get(col.name)
            pinned = col.role == "fixed" or (con is not None and con.kind == "fixed")
            if col.kind == CATEGORICAL:
                self.lo[j], self.hi[j] = 0.0, float(n_levels - 1)
                self.allowed_codes[j] = np.arange(n_levels, dtype=np.float64)
            if pinned:
                self.fixed_mask[j] = True
                if con is not None and con.kind == "fixed":
                    raw = con.value
                else:
                    raw = baseline[col.name]
                if col.kind == CATEGORICAL:
                    code = float(pre.level_to_code(col.name, raw))
                    self.fixed_scaled[j] = code
                    self.fixed_raw[j] = str(raw)
                else:
                    self.fixed_scaled[j] = pre.scale_value(col.name, float(raw))
                    self.fixed_raw[j] = float(raw)
            elif con is not None and con.kind == "box":
                if col.kind == CATEGORICAL:
                    if not con.levels:
                        raise SearchError(f"box constraint on {col.name!r} needs levels")
                    codes = sorted(pre.level_to_code(col.name, lv) for lv in con.levels)
                    self.allowed_codes[j] = np.array(codes, dtype=np.float64)
                    self.lo[j], self.hi[j] = codes[0], codes[-1]
                else:
                    if con.lo > con.hi:
                        raise SearchError(f"empty box for {col.name!r}")
                    self.box_raw[j] = (con.lo, con.hi)
                    self.lo[j] = pre.scale_value(col.name, con.lo)
                    self.hi[j] = pre.scale_value(col.name, con.hi)

        self.x0 = self.snap(x0[None, :])[0]
        base_pred = predictor.predict(self.x0[None, :])[0]
        self.baseline_predictions = {
            t: float(base_pred[i]) for i, t in enumerate(predictor.target_names)}

        self.targets: list[_Resolved] = []
        for goal in spec.goals:
            if goal.name not in predictor.target_names:
                raise SearchError(f"goal on unknown target {goal.name!r}")
            idx = predictor.target_names.index(goal.name)
            if goal.kind == "point":
                self.targets.append(_Resolved(goal.name, idx, -math.inf, math.inf,
                                              goal.value, goal.value))
            elif goal.kind == "range":
                if math.isinf(goal.lo) and math.isinf(goal.hi):
                    raise SearchError(f"goal on {goal.name!r} has no bounds")
                rep = goal.hi if math.isinf(goal.lo) else (
                    goal.lo if math.isinf(goal.hi) else (goal.lo + goal.hi) / 2)
                self.targets.append(_Resolved(goal.name, idx, goal.lo, goal.hi,
                                              None, rep))
            else:
                base = self.baseline_predictions[goal.name]
                edge = (1.0 + goal.percent) * base
                if goal.percent <= 0:
                    self.targets.append(_Resolved(goal.name, idx, -math.inf, edge,
                                                  None, edge))
                else:
                    self.targets.append(_Resolved(goal.name, idx, edge, math.inf,
                                                  None, edge))

        self.mads = pre.mads

    def snap(self, M: np.ndarray) -> np.ndarray:
        """Force a matrix of scaled rows into the feasible search space."""
        M = np.clip(M, self.lo, self.hi)
        for j, allowed in self.allowed_codes.items():
            vals = M[..., j]
            pos = np.clip(np.searchsorted(allowed, vals), 1, len(allowed) - 1) \
                if len(allowed) > 1 else np.zeros(vals.shape, dtype=int)
            left = allowed[pos - 1] if len(allowed) > 1 else allowed[pos]
            right = allowed[pos] if len(allowed) > 1 else allowed[pos]
            M[..., j] = np.where(np.abs(vals - left) <= np.abs(right - vals),
                                 left, right)
        M[..., self.fixed_mask] = self.fixed_scaled[self.fixed_mask]
        return M

    def validities(self, flat: np.ndarray) -> np.ndarray:
        """Mean per-target loss for each row of flat; shape (n,)."""
        preds = self.predictor.predict(flat)
        losses = np.stack([t.losses(preds[:, t.index]) for t in self.targets])
        return losses.mean(axis=0)

    def proximities(self, flat: np.ndarray) -> np.ndarray:
        return (np.abs(flat - self.x0) / self.mads).sum(axis=1)

    def satisfied(self, flat: np.ndarray) -> np.ndarray:
        preds = self.predictor.predict(flat)
        oks = np.stack([t.satisfied(preds[:, t.index]) for t in self.targets])
        return oks.all(axis=0)

    def set_loss(self, S: np.ndarray) -> float:
        v = self.validities(S)
        p = self.proximities(S)
        return float(v.sum() + self.spec.lambda1 * p.sum()
                     - self.spec.lambda2 * diversity_det(S))

    def population_losses(self, pop: np.ndarray) -> np.ndarray:
        """Loss for every set in a (P, N, d) population with one model call."""
        P, N, d = pop.shape
        flat = pop.reshape(P * N, d)
        v = self.validities(flat).reshape(P, N)
        p = self.proximities(flat).reshape(P, N)
        out = np.empty(P)
        for s in range(P):
            out[s] = (v[s].sum() + self.spec.lambda1 * p[s].sum()
                      - self.spec.lambda2 * diversity_det(pop[s]))
        return out


def set_loss(pre, predictor, baseline, spec, S) -> float:
    """Joint loss of an explicit candidate set (rows in scaled space)."""
    return _Problem(pre, predictor, baseline, spec).set_loss(np.atleast_2d(S))


# ----------------------------------------------------------------- GA

def generate(pre: PreprocessedDataset, predictor, baseline: dict,
             spec: SearchSpec, seed: int = 0) -> CandidateResult:
    """Run the genetic search for one seed and emit scored candidates."""
    problem = _Problem(pre, predictor, baseline, spec)
    rng = np.random.default_rng(seed)
    P, N, d = spec.population, spec.n_candidates, problem.d

    col_lo = pre.X.min(axis=0)
    col_hi = pre.X.max(axis=0)

    pop = np.empty((P, N, d))
    stamps = np.zeros((P, N), dtype=np.int64)
    pop[0] = problem.x0 + rng.normal(0.0, spec.mutation_scale, size=(N, d))
    pop[0, 0] = problem.x0
    for s in range(1, P):
        if s % 2 == 1:
            rows = rng.integers(0, pre.n, size=N)
            pop[s] = pre.X[rows]
        else:
            pop[s] = rng.uniform(col_lo, col_hi, size=(N, d))
    pop = problem.snap(pop)

    best_loss = math.inf
    best_set = pop[0].copy()
    best_stamps = stamps[0].copy()
    history: list[float] = []
    gen_done = 0

    for gen in range(spec.generations):
        losses = problem.population_losses(pop)
        gen_best = int(np.argmin(losses))
        if losses[gen_best] < best_loss:
            best_loss = float(losses[gen_best])
            best_set = pop[gen_best].copy()
            best_stamps = stamps[gen_best].copy()
        history.append(best_loss)
        gen_done = gen + 1
        if (len(history) > spec.early_stop_window and
                history[-spec.early_stop_window - 1] - best_loss < spec.early_stop_tol):
            break

        new_pop = np.empty_like(pop)
        new_stamps = np.empty_like(stamps)
        new_pop[0] = pop[gen_best]
        new_stamps[0] = stamps[gen_best]

        def pick() -> int:
            contenders = rng.integers(0, P, size=3)
            return int(contenders[np.argmin(losses[contenders])])

        for c in range(1, P):
            a = pick()
            if rng.random() < spec.crossover_rate:
                b = pick()
                take_a = rng.random(N) < 0.5
                new_pop[c] = np.where(take_a[:, None], pop[a], pop[b])
                new_stamps[c] = np.where(take_a, stamps[a], stamps[b])
            else:
                new_pop[c] = pop[a]
                new_stamps[c] = stamps[a]

            mutate = rng.random((N, d)) < spec.mutation_rate
            noise = rng.normal(0.0, spec.mutation_scale, size=(N, d))
            for j, allowed in problem.allowed_codes.items():
                # categorical mutation resamples a level instead of jittering
                noise[:, j] = allowed[rng.integers(0, len(allowed), size=N)] - new_pop[c][:, j]
            new_pop[c] = new_pop[c] + mutate * noise
            new_stamps[c] = np.where(mutate.any(axis=1), gen + 1, new_stamps[c])

        pop = problem.snap(new_pop)
        stamps = new_stamps

    return _emit(problem, best_set, best_stamps, seed, best_loss, gen_done)


def _emit(problem: _Problem, S: np.ndarray, stamps: np.ndarray, seed: int,
          best_loss: float, generations: int) -> CandidateResult:
    pre = problem.pre
    S = problem.snap(S.copy())
    preds = problem.predictor.predict(S)
    validity = problem.validities(S)
    proximity = problem.proximities(S)
    ok = problem.satisfied(S)
    K = kernel_matrix(S)
    det_full = float(np.linalg.det(K))
    n = S.shape[0]

    order = np.lexsort((proximity, validity))
    kept: list[int] = []
    for i in order:
        if any(np.max(np.abs(S[i] - S[j])) < 1e-9 for j in kept):
            continue
        kept.append(int(i))

    candidates = []
    for i in kept:
        if n > 1:
            rest = [j for j in range(n) if j != i]
            det_rest = float(np.linalg.det(K[np.ix_(rest, rest)]))
            contrib = det_full / det_rest if det_rest > 1e-300 else 0.0
        else:
            contrib = 1.0
        contrib = min(max(contrib, 0.0), 1.0)
        features = {}
        for j, col in enumerate(pre.feature_columns):
            if j in problem.fixed_raw:
                features[col.name] = problem.fixed_raw[j]
            elif col.kind == CATEGORICAL:
                features[col.name] = pre.code_to_level(col.name, S[i, j])
            else:
                raw = pre.unscale_value(col.name, S[i, j])
                if j in problem.box_raw:
                    lo, hi = problem.box_raw[j]
                    raw = min(max(raw, lo), hi)
                features[col.name] = raw
        candidates.append(Candidate(
            features=features,
            x_scaled=S[i].copy(),
            predictions={t: float(preds[i, k])
                         for k, t in enumerate(problem.predictor.target_names)},
            validity=float(validity[i]),
            proximity=float(proximity[i]),
            diversity=contrib,
            satisfied=bool(ok[i]),
            seed=seed,
            worker=0,
            iteration=int(stamps[i]),
        ))

    baseline_features = {}
    for j, col in enumerate(pre.feature_columns):
        if col.kind == CATEGORICAL:
            baseline_features[col.name] = pre.code_to_level(col.name, problem.x0[j])
        else:
            baseline_features[col.name] = pre.unscale_value(col.name, problem.x0[j])

    return CandidateResult(
        candidates=candidates,
        infeasible=not any(c.satisfied for c in candidates),
        best_loss=best_loss,
        generations=generations,
        y_star={t.name: t.y_star for t in problem.targets},
        baseline=baseline_features,
        baseline_predictions=problem.baseline_predictions,
        runs=[{"seed": seed, "best_loss": best_loss, "generations": generations}],
    )


def ensemble_generate(pre: PreprocessedDataset, predictor, baseline: dict,
                      spec: SearchSpec, seeds: list[int],
                      workers: int = 1) -> CandidateResult:
    """Run one search per seed and merge, independent of worker count.

    Each seed's search is self-contained, so scheduling them across any
    number of threads cannot change its outcome; the merge happens in seed
    order. The provenance 'worker' field records the seed's position in the
    list (its static partition lane), which keeps exported artifacts
    byte-identical whether the run used 1 thread or 8.
    """
    if not seeds:
        raise SearchError("at least one seed is required")
    workers = max(1, int(workers))

    def run(seed):
        return generate(pre, predictor, baseline, spec, seed)

    if workers == 1 or len(seeds) == 1:
        results = [run(s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, seeds))

    merged: list[Candidate] = []
    runs = []
    for lane, res in enumerate(results):
        for c in res.candidates:
            merged.append(replace(c, worker=lane))
        runs.extend(res.runs)

    kept: list[Candidate] = []
    for c in merged:
        if any(np.max(np.abs(c.x_scaled - k.x_scaled)) < 1e-9 for k in kept):
            continue
        kept.append(c)
    kept.sort(key=lambda c: (c.validity, c.proximity))

    first = results[0]
    return CandidateResult(
        candidates=kept,
        infeasible=not any(c.satisfied for c in kept),
        best_loss=min(r.best_loss for r in results),
        generations=max(r.generations for r in results),
        y_star=first.y_star,
        baseline=first.baseline,
        baseline_predictions=first.baseline_predictions,
        runs=runs,
    )
