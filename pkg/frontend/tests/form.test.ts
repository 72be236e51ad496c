import { describe, expect, it } from 'vitest';
import {
  buildQuery, emptyForm, goalLooksValid, parseBaseline, parseSeeds, validateForm,
} from '../src/form.js';
import type { DatasetInfo } from '../src/types.js';

const DS: DatasetInfo = {
  dataset_id: 'abc123',
  content_hash: 'abc123ff',
  n_rows: 200,
  columns: [
    { name: 'task_count', kind: 'numeric', role: 'feature', units: 'tasks' },
    { name: 'node_count', kind: 'numeric', role: 'feature', units: 'nodes' },
    { name: 'state', kind: 'categorical', role: 'feature', units: '' },
    { name: 'run_time', kind: 'numeric', role: 'target', units: 's' },
  ],
};

function validRecommend() {
  const s = emptyForm();
  s.datasetId = DS.dataset_id;
  s.targets = [{ column: 'run_time', goal: '< 1000' }];
  return s;
}

describe('goal syntax', () => {
  it('accepts the documented forms', () => {
    for (const goal of ['< 1000', '<= 5', '>= 5', '> 0.5', '= 128', '100 - 200',
      '450', '-20%', '+15%', '< 1000s', '1.5e3']) {
      expect(goalLooksValid(goal), goal).toBe(true);
    }
  });

  it('rejects junk and unsigned percents', () => {
    for (const goal of ['', 'fast', '20%', '< ', '1 2 3', '= ']) {
      expect(goalLooksValid(goal), goal).toBe(false);
    }
  });
});

describe('seeds', () => {
  it('parses a comma list', () => {
    expect(parseSeeds('0, 1, 2')).toEqual([0, 1, 2]);
    expect(parseSeeds('')).toEqual([]);
  });

  it('rejects duplicates and non-integers', () => {
    expect(parseSeeds('1, 1')).toBeNull();
    expect(parseSeeds('1, x')).toBeNull();
    expect(parseSeeds('1.5')).toBeNull();
  });
});

describe('baseline', () => {
  it('accepts numbers and level strings', () => {
    expect(parseBaseline('{"a": 1, "state": "completed"}'))
      .toEqual({ a: 1, state: 'completed' });
  });

  it('rejects non-objects, nulls, and non-finite values', () => {
    expect(parseBaseline('[1, 2]')).toBeNull();
    expect(parseBaseline('not json')).toBeNull();
    expect(parseBaseline('{"a": null}')).toBeNull();
    expect(parseBaseline('{"a": 1e999}')).toBeNull();
  });
});

describe('validateForm', () => {
  it('passes a complete Recommend form', () => {
    expect(validateForm(validRecommend(), DS)).toEqual([]);
  });

  it('requires a dataset and a target', () => {
    const s = emptyForm();
    const problems = validateForm(s, undefined);
    expect(problems.some((p) => p.includes('dataset'))).toBe(true);
    expect(problems.some((p) => p.includes('target'))).toBe(true);
  });

  it('requires a parseable baseline for WhatIf only', () => {
    const s = validRecommend();
    s.kind = 'WhatIf';
    s.baselineText = '{}';
    expect(validateForm(s, DS).some((p) => p.includes('baseline is empty'))).toBe(true);
    s.baselineText = '{"task_count": 100}';
    expect(validateForm(s, DS)).toEqual([]);
    s.kind = 'Recommend';
    s.baselineText = 'garbage';
    expect(validateForm(s, DS)).toEqual([]);
  });

  it('flags bad goals by column', () => {
    const s = validRecommend();
    s.targets = [{ column: 'run_time', goal: 'asap' }];
    expect(validateForm(s, DS).some((p) => p.includes('run_time') && p.includes('asap'))).toBe(true);
  });

  it('checks range constraints', () => {
    const s = validRecommend();
    s.constraints = [{ column: 'node_count', mode: 'range', value: '', lo: '10', hi: '2', level: '' }];
    expect(validateForm(s, DS).some((p) => p.includes('min exceeds max'))).toBe(true);
    s.constraints[0].hi = '20';
    expect(validateForm(s, DS)).toEqual([]);
  });

  it('rejects holds without a baseline carrying the column', () => {
    const s = validRecommend();
    s.constraints = [{ column: 'node_count', mode: 'hold', value: '', lo: '', hi: '', level: '' }];
    expect(validateForm(s, DS).some((p) => p.includes('needs a baseline'))).toBe(true);
    s.kind = 'WhatIf';
    s.baselineText = '{"task_count": 100}';
    expect(validateForm(s, DS).some((p) => p.includes('does not carry'))).toBe(true);
    s.baselineText = '{"task_count": 100, "node_count": 8}';
    expect(validateForm(s, DS)).toEqual([]);
  });

  it('rejects duplicate columns', () => {
    const s = validRecommend();
    s.targets = [{ column: 'run_time', goal: '< 10' }, { column: 'run_time', goal: '> 1' }];
    expect(validateForm(s, DS).some((p) => p.includes('twice'))).toBe(true);
  });

  it('flags columns left over from another dataset', () => {
    const s = validRecommend();
    s.targets = [{ column: 'duration', goal: '< 1000' }];
    s.constraints = [{ column: 'idle_time', mode: 'fixed', value: '3', lo: '', hi: '', level: '' }];
    const problems = validateForm(s, DS);
    expect(problems.some((p) => p.includes('target duration is not in this dataset'))).toBe(true);
    expect(problems.some((p) => p.includes('constraint idle_time is not in this dataset'))).toBe(true);
    // without a dataset loaded there is nothing to check against
    expect(validateForm(s, undefined).some((p) => p.includes('not in this dataset'))).toBe(false);
  });
});

describe('buildQuery', () => {
  it('assembles a Recommend document', () => {
    const s = validRecommend();
    s.constraints = [
      { column: 'node_count', mode: 'fixed', value: '8', lo: '', hi: '', level: '' },
      { column: 'task_count', mode: 'range', value: '', lo: '100', hi: '', level: '' },
      { column: 'state', mode: 'level', value: '', lo: '', hi: '', level: 'completed' },
    ];
    const doc = buildQuery(s);
    expect(doc).toEqual({
      Type: 'Recommend',
      Targets: { run_time: '< 1000' },
      Constraints: { node_count: '= 8', task_count: '>= 100', state: 'completed' },
      NCandidates: 20,
      TopK: 5,
      Lambda1: 0.5,
      Lambda2: 1.0,
    });
  });

  it('carries baseline, seeds, and held columns for WhatIf', () => {
    const s = validRecommend();
    s.kind = 'WhatIf';
    s.baselineText = '{"task_count": 100, "node_count": 8, "state": "completed"}';
    s.seedsText = '3, 4';
    s.constraints = [
      { column: 'node_count', mode: 'hold', value: '', lo: '', hi: '', level: '' },
      { column: 'state', mode: 'hold', value: '', lo: '', hi: '', level: '' },
    ];
    const doc = buildQuery(s);
    expect(doc.Baseline).toEqual({ task_count: 100, node_count: 8, state: 'completed' });
    expect(doc.Seeds).toEqual([3, 4]);
    expect(doc.Constraints).toEqual({ node_count: '= 8', state: 'completed' });
  });

  it('emits two-sided ranges with a dash', () => {
    const s = validRecommend();
    s.constraints = [{ column: 'task_count', mode: 'range', value: '', lo: '100', hi: '200', level: '' }];
    expect((buildQuery(s).Constraints as Record<string, unknown>).task_count).toBe('100 - 200');
  });
});
