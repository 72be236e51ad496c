// Shapes of what the service returns. Only the fields the UI touches are
// declared; the report carries more and extra keys pass through untyped.

export interface ColumnInfo {
  name: string;
  kind: 'numeric' | 'categorical';
  role: 'feature' | 'target' | 'drop';
  units: string;
}

export interface DatasetInfo {
  dataset_id: string;
  content_hash: string;
  n_rows: number;
  columns: ColumnInfo[];
  existing?: boolean;
}

export interface RunInfo {
  run_id: string;
  dataset_id: string;
  status: string;
  error?: string | null;
  query?: Record<string, unknown>;
}

// Prediction intervals, one map per bound keyed by target name.
export interface UqBands {
  mean: Record<string, number>;
  lower: Record<string, number>;
  upper: Record<string, number>;
}

// Column descriptor as echoed back inside a report.
export interface ReportColumn {
  name: string;
  kind: 'numeric' | 'categorical';
  units?: string;
  levels?: string[];
}

export interface RankedCandidate {
  rank: number;
  features: Record<string, number | string>;
  predictions: Record<string, number>;
  score: number;
  components: Record<string, number>;
  subscores: Record<string, number>;
  validity: number;
  proximity: number;
  satisfied: boolean;
  seed: number;
  worker: number;
  iteration: number;
  compliance: { score: number; violated: string[] };
  outlier_score: number;
  is_outlier: boolean;
  uq: UqBands;
  explanation: string;
}

export interface Report {
  version: string;
  status: string;
  infeasible: boolean;
  query: Record<string, unknown>;
  dataset: {
    content_hash: string;
    n_rows: number;
    features: ReportColumn[];
    targets: ReportColumn[];
  };
  rules: {
    provider: string;
    provider_fallback: boolean;
    kept: { name: string; expression: string; explanation?: string; coverage?: number }[];
    rejected: { name: string; reason: string }[];
  };
  generation: {
    seeds: number[];
    n_emitted: number;
    best_loss: number;
    reinterpreted_targets: string[];
    y_star: Record<string, number>;
  };
  filtering: {
    n_rejected_compliance: number;
    n_rejected_outlier: number;
    n_surviving: number;
  };
  evaluation: {
    consistency: number | null;
    causal_skipped: string | null;
    explain_fallback: boolean;
  };
  baseline: {
    features: Record<string, number | string>;
    predictions: Record<string, number>;
  };
  topk: RankedCandidate[];
  timings: Record<string, unknown>;
}

export interface RadarDoc {
  axes: string[];
  candidates: { rank: number; values: number[] }[];
}

export interface ProjectionPoint {
  kind: 'train' | 'candidate';
  id: number;
  x: number;
  y: number;
}

export interface DotGraph {
  nodes: { id: string; isTarget: boolean }[];
  edges: { from: string; to: string; weight: number }[];
}
