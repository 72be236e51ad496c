import type { ColumnInfo, DatasetInfo } from './types.js';

export type QueryKind = 'Recommend' | 'WhatIf' | 'Optimize' | 'Counterfactual';

export const QUERY_KINDS: QueryKind[] = ['Recommend', 'WhatIf', 'Optimize', 'Counterfactual'];

// One row of the constraint editor. 'fixed' pins to a chosen value,
// 'range' is a min/max box (either side may be blank), 'level' pins a
// categorical, 'hold' pins at whatever the baseline carries so the
// search leaves the column alone.
export interface ConstraintRow {
  column: string;
  mode: 'fixed' | 'range' | 'level' | 'hold';
  value: string;
  lo: string;
  hi: string;
  level: string;
}

export interface TargetRow {
  column: string;
  goal: string;
}

export interface QueryFormState {
  datasetId: string;
  kind: QueryKind;
  targets: TargetRow[];
  constraints: ConstraintRow[];
  baselineText: string;
  nCandidates: number;
  topK: number;
  lambda1: number;
  lambda2: number;
  seedsText: string;
}

export function emptyForm(): QueryFormState {
  return {
    datasetId: '',
    kind: 'Recommend',
    targets: [{ column: '', goal: '' }],
    constraints: [],
    baselineText: '{}',
    nCandidates: 20,
    topK: 5,
    lambda1: 0.5,
    lambda2: 1.0,
    seedsText: '',
  };
}

export function needsBaseline(kind: QueryKind): boolean {
  return kind !== 'Recommend';
}

export function featureColumns(ds: DatasetInfo | undefined): ColumnInfo[] {
  if (!ds) return [];
  return ds.columns.filter((c) => c.role === 'feature');
}

export function targetColumns(ds: DatasetInfo | undefined): ColumnInfo[] {
  if (!ds) return [];
  return ds.columns.filter((c) => c.role === 'target');
}

const GOAL_FORMS = [
  /^(<=|<|>=|>|=)\s*[+-]?\d+\.?\d*(e[+-]?\d+)?\s*[a-z]*$/i,
  /^[+-]?\d+\.?\d*\s*[a-z]*\s*-\s*[+-]?\d+\.?\d*\s*[a-z]*$/i,
  /^[+-]?\d+\.?\d*(e[+-]?\d+)?$/i,
  /^[+-]\d+\.?\d*\s*%$/,
];

export function goalLooksValid(goal: string): boolean {
  const text = goal.trim();
  return GOAL_FORMS.some((re) => re.test(text));
}

export function parseSeeds(text: string): number[] | null {
  const trimmed = text.trim();
  if (!trimmed) return [];
  const parts = trimmed.split(',').map((p) => p.trim());
  const seeds: number[] = [];
  for (const p of parts) {
    if (!/^\d+$/.test(p)) return null;
    seeds.push(parseInt(p, 10));
  }
  if (new Set(seeds).size !== seeds.length) return null;
  return seeds;
}

export function parseBaseline(text: string): Record<string, number | string> | null {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof obj !== 'object' || obj === null || Array.isArray(obj)) return null;
  for (const v of Object.values(obj)) {
    if (typeof v === 'number') {
      if (!Number.isFinite(v)) return null;
    } else if (typeof v !== 'string') {
      return null;
    }
  }
  return obj as Record<string, number | string>;
}

/**
 * Client-side gate for the submit button. Empty result means the form
 * can be sent; the service still has the final say.
 */
export function validateForm(state: QueryFormState, ds: DatasetInfo | undefined): string[] {
  const problems: string[] = [];
  if (!state.datasetId || !ds) problems.push('select a dataset');

  const targetNames = new Set(targetColumns(ds).map((c) => c.name));
  const filled = state.targets.filter((t) => t.column || t.goal.trim());
  if (filled.length === 0) problems.push('add at least one target goal');
  for (const t of filled) {
    if (!t.column) problems.push('target goal is missing a column');
    else if (ds && !targetNames.has(t.column)) problems.push(`target ${t.column} is not in this dataset`);
    else if (!t.goal.trim()) problems.push(`target ${t.column}: goal is empty`);
    else if (!goalLooksValid(t.goal)) problems.push(`target ${t.column}: goal "${t.goal}" is not a recognized form`);
  }
  const seen = new Set<string>();
  for (const t of filled) {
    if (t.column && seen.has(t.column)) problems.push(`target ${t.column} appears twice`);
    seen.add(t.column);
  }

  let baseline: Record<string, number | string> | null = null;
  if (needsBaseline(state.kind)) {
    baseline = parseBaseline(state.baselineText);
    if (baseline === null) problems.push('baseline must be a JSON object of numbers and level strings');
    else if (Object.keys(baseline).length === 0) problems.push('baseline is empty');
  }

  const featureNames = new Set(featureColumns(ds).map((col) => col.name));
  for (const c of state.constraints) {
    if (!c.column) { problems.push('constraint is missing a column'); continue; }
    if (ds && !featureNames.has(c.column)) { problems.push(`constraint ${c.column} is not in this dataset`); continue; }
    if (c.mode === 'fixed' && c.value.trim() === '') {
      problems.push(`constraint ${c.column}: no value`);
    } else if (c.mode === 'fixed' && !Number.isFinite(Number(c.value))) {
      problems.push(`constraint ${c.column}: value must be a number`);
    } else if (c.mode === 'level' && !c.level) {
      problems.push(`constraint ${c.column}: pick a level`);
    } else if (c.mode === 'range') {
      const lo = c.lo.trim(), hi = c.hi.trim();
      if (!lo && !hi) problems.push(`constraint ${c.column}: range needs a bound`);
      if (lo && !Number.isFinite(Number(lo))) problems.push(`constraint ${c.column}: min must be a number`);
      if (hi && !Number.isFinite(Number(hi))) problems.push(`constraint ${c.column}: max must be a number`);
      if (lo && hi && Number(lo) > Number(hi)) problems.push(`constraint ${c.column}: min exceeds max`);
    } else if (c.mode === 'hold') {
      if (!needsBaseline(state.kind)) {
        problems.push(`constraint ${c.column}: holding a column needs a baseline`);
      } else if (baseline && !(c.column in baseline)) {
        problems.push(`constraint ${c.column}: baseline does not carry it`);
      }
    }
  }
  const cseen = new Set<string>();
  for (const c of state.constraints) {
    if (c.column && cseen.has(c.column)) problems.push(`constraint ${c.column} appears twice`);
    cseen.add(c.column);
  }

  if (state.seedsText.trim() && parseSeeds(state.seedsText) === null) {
    problems.push('seeds must be distinct non-negative integers, comma separated');
  }
  if (state.nCandidates < 1) problems.push('candidate count must be at least 1');
  if (state.topK < 1) problems.push('top K must be at least 1');
  if (state.lambda1 < 0 || state.lambda2 < 0) problems.push('lambda weights cannot be negative');
  return problems;
}

function constraintText(c: ConstraintRow, baseline: Record<string, number | string> | null): string | string[] | number {
  if (c.mode === 'fixed') return `= ${c.value.trim()}`;
  if (c.mode === 'level') return c.level;
  if (c.mode === 'hold') {
    const v = baseline ? baseline[c.column] : undefined;
    return typeof v === 'string' ? v : `= ${v}`;
  }
  const lo = c.lo.trim(), hi = c.hi.trim();
  if (lo && hi) return `${lo} - ${hi}`;
  if (lo) return `>= ${lo}`;
  return `<= ${hi}`;
}

/** Assemble the JSON document the service expects. Call only when valid. */
export function buildQuery(state: QueryFormState): Record<string, unknown> {
  const targets: Record<string, string> = {};
  for (const t of state.targets) {
    if (t.column && t.goal.trim()) targets[t.column] = t.goal.trim();
  }
  const baseline = needsBaseline(state.kind) ? parseBaseline(state.baselineText) : null;

  const doc: Record<string, unknown> = {
    Type: state.kind,
    Targets: targets,
    NCandidates: state.nCandidates,
    TopK: state.topK,
    Lambda1: state.lambda1,
    Lambda2: state.lambda2,
  };
  if (state.constraints.length > 0) {
    const constraints: Record<string, unknown> = {};
    for (const c of state.constraints) constraints[c.column] = constraintText(c, baseline);
    doc.Constraints = constraints;
  }
  if (baseline) doc.Baseline = baseline;
  const seeds = parseSeeds(state.seedsText);
  if (seeds && seeds.length > 0) doc.Seeds = seeds;
  return doc;
}
