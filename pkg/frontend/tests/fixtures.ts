import type { RankedCandidate, Report } from '../src/types.js';

export function makeCandidate(rank: number, extra: Partial<RankedCandidate> = {}): RankedCandidate {
  return {
    rank,
    features: { task_count: 100 + rank, node_count: 8 },
    predictions: { run_time: 400 - rank * 10 },
    score: 1 - rank * 0.05,
    components: {},
    subscores: { validity: 1, proximity: 0.8, uncertainty: 0.7, consistency: 0.9, plausibility: 0.6 },
    validity: 0,
    proximity: 0.5,
    satisfied: true,
    seed: 0,
    worker: 0,
    iteration: rank,
    compliance: { score: 1, violated: [] },
    outlier_score: 0.4,
    is_outlier: false,
    uq: {
      mean: { run_time: 400 - rank * 10 },
      lower: { run_time: 380 - rank * 10 },
      upper: { run_time: 420 - rank * 10 },
    },
    explanation: `candidate ${rank} explanation`,
    ...extra,
  };
}

export function makeReport(extra: Partial<Report> = {}): Report {
  return {
    version: '0.1.0',
    status: 'done',
    infeasible: false,
    query: {},
    dataset: {
      content_hash: 'ff00',
      n_rows: 200,
      features: [
        { name: 'task_count', kind: 'numeric' },
        { name: 'node_count', kind: 'numeric' },
      ],
      targets: [{ name: 'run_time', kind: 'numeric', units: 's' }],
    },
    rules: { provider: 'statistical', provider_fallback: false, kept: [], rejected: [] },
    generation: {
      seeds: [0, 1],
      n_emitted: 40,
      best_loss: 0.5,
      reinterpreted_targets: [],
      y_star: { run_time: 450 },
    },
    filtering: { n_rejected_compliance: 2, n_rejected_outlier: 1, n_surviving: 37 },
    evaluation: { consistency: 0.91, causal_skipped: null, explain_fallback: false },
    baseline: {
      features: { task_count: 250, node_count: 16 },
      predictions: { run_time: 600 },
    },
    topk: [makeCandidate(1), makeCandidate(2), makeCandidate(3)],
    timings: {},
    ...extra,
  };
}
