import type { ProjectionPoint, RadarDoc, RankedCandidate } from './types.js';
import type { GraphLayout } from './dot.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export const RANK_COLORS = ['#1f77b4', '#ff7f0e', '#2ca02c', '#d62728', '#9467bd',
  '#8c564b', '#e377c2', '#7f7f7f', '#bcbd22', '#17becf'];

export function rankColor(rank: number): string {
  return RANK_COLORS[(rank - 1) % RANK_COLORS.length];
}

function el<K extends keyof SVGElementTagNameMap>(
  tag: K, attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v));
  return node;
}

function text(x: number, y: number, content: string, attrs: Record<string, string | number> = {}) {
  const t = el('text', { x, y, 'font-size': 11, fill: '#444', ...attrs });
  t.textContent = content;
  return t;
}

/** Overlaid polygon per candidate across the five score axes. */
export function renderRadar(container: HTMLElement, doc: RadarDoc): void {
  container.replaceChildren();
  const size = 260;
  const cx = size / 2, cy = size / 2, r = size / 2 - 42;
  const svg = el('svg', { viewBox: `0 0 ${size} ${size}`, class: 'radar' });

  const n = doc.axes.length;
  const angle = (i: number) => -Math.PI / 2 + (2 * Math.PI * i) / n;
  for (const frac of [0.25, 0.5, 0.75, 1]) {
    const ring = doc.axes.map((_, i) =>
      `${cx + frac * r * Math.cos(angle(i))},${cy + frac * r * Math.sin(angle(i))}`).join(' ');
    svg.append(el('polygon', { points: ring, fill: 'none', stroke: '#ddd' }));
  }
  doc.axes.forEach((name, i) => {
    const x = cx + r * Math.cos(angle(i));
    const y = cy + r * Math.sin(angle(i));
    svg.append(el('line', { x1: cx, y1: cy, x2: x, y2: y, stroke: '#ddd' }));
    const lx = cx + (r + 16) * Math.cos(angle(i));
    const ly = cy + (r + 16) * Math.sin(angle(i));
    svg.append(text(lx, ly, name, { 'text-anchor': 'middle', 'dominant-baseline': 'middle' }));
  });

  for (const cand of doc.candidates) {
    const pts = cand.values.map((v, i) => {
      const f = Math.max(0, Math.min(1, v));
      return `${cx + f * r * Math.cos(angle(i))},${cy + f * r * Math.sin(angle(i))}`;
    }).join(' ');
    svg.append(el('polygon', {
      points: pts,
      class: 'radar-candidate',
      'data-rank': cand.rank,
      fill: rankColor(cand.rank) + '22',
      stroke: rankColor(cand.rank),
      'stroke-width': 1.5,
    }));
  }
  container.append(svg);
}

export interface TopkMark {
  rank: number;
  isOutlier: boolean;
}

/**
 * 2-D projection of the training cloud and every emitted candidate.
 * topkMarks maps a candidate point id to its rank so the reported rows
 * stand out; outliers among them get the warning color.
 */
export function renderProjection(
  container: HTMLElement,
  points: ProjectionPoint[],
  topkMarks: Map<number, TopkMark>,
): void {
  container.replaceChildren();
  const w = 420, h = 300, pad = 28;
  const svg = el('svg', { viewBox: `0 0 ${w} ${h}`, class: 'projection' });
  if (points.length === 0) { container.append(svg); return; }

  const xs = points.map((p) => p.x), ys = points.map((p) => p.y);
  const xmin = Math.min(...xs), xmax = Math.max(...xs);
  const ymin = Math.min(...ys), ymax = Math.max(...ys);
  const sx = (x: number) => pad + ((x - xmin) / (xmax - xmin || 1)) * (w - 2 * pad);
  const sy = (y: number) => h - pad - ((y - ymin) / (ymax - ymin || 1)) * (h - 2 * pad);

  for (const p of points.filter((q) => q.kind === 'train')) {
    svg.append(el('circle', {
      cx: sx(p.x), cy: sy(p.y), r: 2.2, class: 'proj-train', fill: '#c8c8c8',
    }));
  }
  for (const p of points.filter((q) => q.kind === 'candidate')) {
    const mark = topkMarks.get(p.id);
    if (!mark) {
      svg.append(el('circle', {
        cx: sx(p.x), cy: sy(p.y), r: 3, class: 'proj-candidate', fill: '#5a9bd4',
      }));
    }
  }
  for (const p of points.filter((q) => q.kind === 'candidate')) {
    const mark = topkMarks.get(p.id);
    if (!mark) continue;
    const cls = mark.isOutlier ? 'proj-topk proj-outlier' : 'proj-topk';
    svg.append(el('circle', {
      cx: sx(p.x), cy: sy(p.y), r: 5.5,
      class: cls,
      'data-rank': mark.rank,
      fill: mark.isOutlier ? '#d62728' : rankColor(mark.rank),
      stroke: '#222', 'stroke-width': 1,
    }));
    svg.append(text(sx(p.x) + 7, sy(p.y) - 6, `#${mark.rank}`, { 'font-size': 10 }));
  }
  container.append(svg);
}

/**
 * One horizontal band per candidate per target: the ensemble interval
 * with the mean ticked, plus the baseline prediction as a dashed rule
 * so shifts read at a glance.
 */
export function renderUqBars(
  container: HTMLElement,
  topk: RankedCandidate[],
  baselinePred: Record<string, number>,
  targets: string[],
): void {
  container.replaceChildren();
  for (const target of targets) {
    const rows = topk.filter((c) => c.uq.lower[target] !== undefined);
    if (rows.length === 0) continue;
    const los = rows.map((c) => c.uq.lower[target]);
    const his = rows.map((c) => c.uq.upper[target]);
    const base = baselinePred[target];
    const lo = Math.min(...los, base);
    const hi = Math.max(...his, base);
    const span = hi - lo || 1;

    const w = 420, rowH = 22, pad = 60;
    const h = rows.length * rowH + 30;
    const svg = el('svg', { viewBox: `0 0 ${w} ${h}`, class: 'uq', 'data-target': target });
    const sx = (v: number) => pad + ((v - lo) / span) * (w - pad - 14);

    svg.append(text(4, 12, target, { 'font-weight': 'bold' }));
    const bx = sx(base);
    svg.append(el('line', {
      x1: bx, y1: 18, x2: bx, y2: h - 6,
      stroke: '#888', 'stroke-dasharray': '4 3', class: 'uq-baseline',
    }));
    rows.forEach((c, i) => {
      const y = 24 + i * rowH;
      const bandLo = c.uq.lower[target], bandHi = c.uq.upper[target], bandMean = c.uq.mean[target];
      svg.append(text(4, y + 8, `#${c.rank}`));
      svg.append(el('rect', {
        x: sx(bandLo), y, width: Math.max(sx(bandHi) - sx(bandLo), 1), height: 12,
        class: 'uq-band', 'data-rank': c.rank,
        fill: rankColor(c.rank) + '55', stroke: rankColor(c.rank),
      }));
      svg.append(el('line', {
        x1: sx(bandMean), y1: y - 2, x2: sx(bandMean), y2: y + 14,
        stroke: '#222', 'stroke-width': 1.5, class: 'uq-mean',
      }));
    });
    container.append(svg);
  }
}

/** Draw the laid-out dependency graph; targets are boxes, weights edge labels. */
export function renderGraph(container: HTMLElement, layout: GraphLayout): void {
  container.replaceChildren();
  const svg = el('svg', {
    viewBox: `0 0 ${layout.width} ${layout.height}`, class: 'causal-graph',
  });
  const defs = el('defs');
  const marker = el('marker', {
    id: 'arrow', viewBox: '0 0 10 10', refX: 9, refY: 5,
    markerWidth: 7, markerHeight: 7, orient: 'auto-start-reverse',
  });
  marker.append(el('path', { d: 'M 0 0 L 10 5 L 0 10 z', fill: '#666' }));
  defs.append(marker);
  svg.append(defs);

  const rNode = 26;
  for (const e of layout.edges) {
    const dx = e.to.x - e.from.x, dy = e.to.y - e.from.y;
    const len = Math.hypot(dx, dy) || 1;
    const x1 = e.from.x + (dx / len) * rNode;
    const y1 = e.from.y + (dy / len) * rNode;
    const x2 = e.to.x - (dx / len) * (rNode + 4);
    const y2 = e.to.y - (dy / len) * (rNode + 4);
    svg.append(el('line', {
      x1, y1, x2, y2, stroke: '#666',
      'stroke-width': Math.min(0.75 + Math.abs(e.weight) * 2.5, 4),
      'marker-end': 'url(#arrow)', class: 'graph-edge',
    }));
    svg.append(text((x1 + x2) / 2, (y1 + y2) / 2 - 4, e.weight.toFixed(2),
      { 'text-anchor': 'middle', class: 'graph-weight' }));
  }
  for (const n of layout.nodes) {
    if (n.isTarget) {
      svg.append(el('rect', {
        x: n.x - rNode, y: n.y - 16, width: rNode * 2, height: 32, rx: 3,
        fill: '#fde9c8', stroke: '#b8860b', class: 'graph-node graph-target',
      }));
    } else {
      svg.append(el('ellipse', {
        cx: n.x, cy: n.y, rx: rNode, ry: 17,
        fill: '#e8eef7', stroke: '#4a6fa5', class: 'graph-node',
      }));
    }
    svg.append(text(n.x, n.y, n.id, {
      'text-anchor': 'middle', 'dominant-baseline': 'middle', 'font-size': 10,
    }));
  }
  container.append(svg);
}
