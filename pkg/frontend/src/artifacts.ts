import type { ProjectionPoint, Report } from './types.js';
import type { TopkMark } from './charts.js';

// The service writes plain comma-joined cells with no quoting, so a
// straight split is correct here (levels never contain commas).
function splitCsv(text: string): string[][] {
  return text.trim().split('\n').map((line) => line.split(','));
}

export function parseProjection(text: string): ProjectionPoint[] {
  const rows = splitCsv(text);
  const out: ProjectionPoint[] = [];
  for (const row of rows.slice(1)) {
    if (row.length < 4) continue;
    out.push({
      kind: row[0] as ProjectionPoint['kind'],
      id: parseInt(row[1], 10),
      x: parseFloat(row[2]),
      y: parseFloat(row[3]),
    });
  }
  return out;
}

export interface CandidateRow {
  features: Record<string, number | string>;
  seed: number;
}

export function parseCandidatesCsv(text: string, featureNames: string[]): CandidateRow[] {
  const rows = splitCsv(text);
  if (rows.length < 1) return [];
  const header = rows[0];
  const col = new Map(header.map((name, i) => [name, i]));
  const seedIdx = col.get('seed');
  const out: CandidateRow[] = [];
  for (const row of rows.slice(1)) {
    const features: Record<string, number | string> = {};
    for (const name of featureNames) {
      const i = col.get(name);
      if (i === undefined) continue;
      const cell = row[i];
      const num = Number(cell);
      features[name] = Number.isFinite(num) && cell.trim() !== '' ? num : cell;
    }
    out.push({ features, seed: seedIdx === undefined ? 0 : parseInt(row[seedIdx], 10) });
  }
  return out;
}

function sameValue(a: number | string, b: number | string): boolean {
  if (typeof a === 'number' && typeof b === 'number') {
    if (a === b) return true;
    return Math.abs(a - b) <= 1e-9 * Math.max(Math.abs(a), Math.abs(b));
  }
  return a === b;
}

/**
 * Projection candidate ids index the emitted set in file order, the
 * same order candidates.csv uses, so matching a ranked candidate's
 * feature row recovers its point id.
 */
export function markTopk(
  report: Report,
  candidateRows: CandidateRow[],
): Map<number, TopkMark> {
  const marks = new Map<number, TopkMark>();
  const names = report.dataset.features.map((c) => c.name);
  for (const cand of report.topk) {
    const at = candidateRows.findIndex((row) =>
      row.seed === cand.seed
      && names.every((n) => sameValue(row.features[n], cand.features[n])));
    if (at >= 0) marks.set(at, { rank: cand.rank, isOutlier: cand.is_outlier });
  }
  return marks;
}

export function targetsOf(report: Report): string[] {
  return report.dataset.targets.map((c) => c.name);
}
