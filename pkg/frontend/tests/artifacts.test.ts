import { describe, expect, it } from 'vitest';
import { markTopk, parseCandidatesCsv, parseProjection } from '../src/artifacts.js';
import { makeCandidate, makeReport } from './fixtures.js';

describe('parseProjection', () => {
  it('reads kinds, ids, and coordinates', () => {
    const pts = parseProjection('kind,id,x,y\ntrain,0,0.5,-1.25\ncandidate,3,2,3\n');
    expect(pts).toEqual([
      { kind: 'train', id: 0, x: 0.5, y: -1.25 },
      { kind: 'candidate', id: 3, x: 2, y: 3 },
    ]);
  });
});

describe('parseCandidatesCsv', () => {
  const text = [
    'task_count,node_count,run_time,validity,proximity,seed,worker,iteration',
    '101,8,390,0,0.5,0,0,3',
    '102,8,380,0,0.6,1,0,7',
  ].join('\n');

  it('keeps the named features and the seed lane', () => {
    const rows = parseCandidatesCsv(text, ['task_count', 'node_count']);
    expect(rows).toHaveLength(2);
    expect(rows[0]).toEqual({ features: { task_count: 101, node_count: 8 }, seed: 0 });
    expect(rows[1].seed).toBe(1);
  });
});

describe('markTopk', () => {
  it('maps ranked candidates onto projection point ids by feature match', () => {
    const report = makeReport({
      topk: [
        makeCandidate(1, { seed: 0, features: { task_count: 101, node_count: 8 } }),
        makeCandidate(2, { seed: 1, features: { task_count: 102, node_count: 8 }, is_outlier: true }),
      ],
    });
    const rows = parseCandidatesCsv([
      'task_count,node_count,run_time,validity,proximity,seed,worker,iteration',
      '999,8,400,0,0.1,0,0,1',
      '101,8,390,0,0.5,0,0,3',
      '102,8,380,0,0.6,1,0,7',
    ].join('\n'), ['task_count', 'node_count']);
    const marks = markTopk(report, rows);
    expect(marks.get(1)).toEqual({ rank: 1, isOutlier: false });
    expect(marks.get(2)).toEqual({ rank: 2, isOutlier: true });
    expect(marks.has(0)).toBe(false);
  });

  it('requires the seed to match, not just the features', () => {
    const report = makeReport({
      topk: [makeCandidate(1, { seed: 4, features: { task_count: 101, node_count: 8 } })],
    });
    const rows = parseCandidatesCsv([
      'task_count,node_count,run_time,validity,proximity,seed,worker,iteration',
      '101,8,390,0,0.5,0,0,3',
    ].join('\n'), ['task_count', 'node_count']);
    expect(markTopk(report, rows).size).toBe(0);
  });
});
