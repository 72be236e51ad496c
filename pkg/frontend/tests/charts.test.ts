// @vitest-environment jsdom
import { describe, expect, it } from 'vitest';
import { renderGraph, renderProjection, renderRadar, renderUqBars } from '../src/charts.js';
import { layoutGraph, parseDot } from '../src/dot.js';
import type { ProjectionPoint, RadarDoc } from '../src/types.js';
import { makeCandidate } from './fixtures.js';

function box(): HTMLElement {
  const div = document.createElement('div');
  document.body.append(div);
  return div;
}

describe('renderRadar', () => {
  const doc: RadarDoc = {
    axes: ['validity', 'proximity', 'uncertainty', 'consistency', 'plausibility'],
    candidates: [
      { rank: 1, values: [1, 0.8, 0.7, 0.9, 0.6] },
      { rank: 2, values: [0.9, 0.7, 0.6, 0.9, 0.5] },
    ],
  };

  it('draws one polygon per candidate plus axis labels', () => {
    const host = box();
    renderRadar(host, doc);
    const polys = host.querySelectorAll('polygon.radar-candidate');
    expect(polys).toHaveLength(2);
    expect(polys[0].getAttribute('data-rank')).toBe('1');
    const labels = [...host.querySelectorAll('text')].map((t) => t.textContent);
    for (const axis of doc.axes) expect(labels).toContain(axis);
  });

  it('clamps out-of-range values instead of exploding the polygon', () => {
    const host = box();
    renderRadar(host, { axes: doc.axes, candidates: [{ rank: 1, values: [2, -1, 0.5, 0.5, 0.5] }] });
    const pts = host.querySelector('polygon.radar-candidate')!.getAttribute('points')!;
    for (const pair of pts.split(' ')) {
      const [x, y] = pair.split(',').map(Number);
      expect(x).toBeGreaterThanOrEqual(0);
      expect(x).toBeLessThanOrEqual(260);
      expect(y).toBeGreaterThanOrEqual(0);
      expect(y).toBeLessThanOrEqual(260);
    }
  });
});

describe('renderProjection', () => {
  const points: ProjectionPoint[] = [
    { kind: 'train', id: 0, x: 0, y: 0 },
    { kind: 'train', id: 1, x: 1, y: 1 },
    { kind: 'candidate', id: 0, x: 0.5, y: 0.5 },
    { kind: 'candidate', id: 1, x: 2, y: 2 },
    { kind: 'candidate', id: 2, x: -1, y: 0 },
  ];

  it('separates train, plain candidate, and ranked points', () => {
    const host = box();
    const marks = new Map([
      [1, { rank: 1, isOutlier: false }],
      [2, { rank: 2, isOutlier: true }],
    ]);
    renderProjection(host, points, marks);
    expect(host.querySelectorAll('.proj-train')).toHaveLength(2);
    expect(host.querySelectorAll('.proj-candidate')).toHaveLength(1);
    const topk = host.querySelectorAll('.proj-topk');
    expect(topk).toHaveLength(2);
    expect(host.querySelectorAll('.proj-outlier')).toHaveLength(1);
    const ranks = [...topk].map((n) => n.getAttribute('data-rank')).sort();
    expect(ranks).toEqual(['1', '2']);
  });

  it('renders an empty svg for no points', () => {
    const host = box();
    renderProjection(host, [], new Map());
    expect(host.querySelector('svg')).not.toBeNull();
  });
});

describe('renderUqBars', () => {
  it('draws a band per candidate with width following the interval', () => {
    const host = box();
    const narrow = makeCandidate(1, {
      uq: { mean: { run_time: 400 }, lower: { run_time: 395 }, upper: { run_time: 405 } },
    });
    const wide = makeCandidate(2, {
      uq: { mean: { run_time: 400 }, lower: { run_time: 350 }, upper: { run_time: 450 } },
    });
    renderUqBars(host, [narrow, wide], { run_time: 600 }, ['run_time']);
    const svg = host.querySelector('svg.uq')!;
    expect(svg.getAttribute('data-target')).toBe('run_time');
    const bands = svg.querySelectorAll('rect.uq-band');
    expect(bands).toHaveLength(2);
    const w1 = Number(bands[0].getAttribute('width'));
    const w2 = Number(bands[1].getAttribute('width'));
    expect(w2).toBeGreaterThan(w1);
    expect(svg.querySelectorAll('.uq-mean')).toHaveLength(2);
    expect(svg.querySelector('.uq-baseline')).not.toBeNull();
  });

  it('skips targets with no interval data', () => {
    const host = box();
    renderUqBars(host, [makeCandidate(1)], {}, ['memory']);
    expect(host.querySelector('svg')).toBeNull();
  });
});

describe('renderGraph', () => {
  it('draws nodes, a box for the target, and labeled edges', () => {
    const host = box();
    const layout = layoutGraph(parseDot(
      'digraph causal {\n"a" [shape=ellipse];\n"y" [shape=box];\n"a" -> "y" [label="0.9"];\n}'));
    renderGraph(host, layout);
    expect(host.querySelectorAll('.graph-node')).toHaveLength(2);
    expect(host.querySelectorAll('.graph-target')).toHaveLength(1);
    expect(host.querySelectorAll('.graph-edge')).toHaveLength(1);
    const weights = [...host.querySelectorAll('.graph-weight')].map((t) => t.textContent);
    expect(weights).toContain('0.90');
  });
});
