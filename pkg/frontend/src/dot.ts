import type { DotGraph } from './types.js';

const NODE_RE = /^"([^"]+)"\s*\[shape=(\w+)\];?$/;
const EDGE_RE = /^"([^"]+)"\s*->\s*"([^"]+)"\s*\[label="([^"]+)"\];?$/;

/**
 * Read the graph emitted by the service. The writer quotes every node
 * and puts one statement per line, so a line scan is enough; anything
 * unrecognized is skipped rather than fatal.
 */
export function parseDot(text: string): DotGraph {
  const nodes: DotGraph['nodes'] = [];
  const edges: DotGraph['edges'] = [];
  const known = new Set<string>();
  for (const raw of text.split('\n')) {
    const line = raw.trim();
    const e = EDGE_RE.exec(line);
    if (e) {
      const weight = Number(e[3]);
      edges.push({ from: e[1], to: e[2], weight: Number.isFinite(weight) ? weight : 0 });
      continue;
    }
    const n = NODE_RE.exec(line);
    if (n) {
      if (!known.has(n[1])) {
        known.add(n[1]);
        nodes.push({ id: n[1], isTarget: n[2] === 'box' });
      }
    }
  }
  for (const e of edges) {
    for (const id of [e.from, e.to]) {
      if (!known.has(id)) {
        known.add(id);
        nodes.push({ id, isTarget: false });
      }
    }
  }
  return { nodes, edges };
}

export interface PlacedNode {
  id: string;
  isTarget: boolean;
  x: number;
  y: number;
}

export interface GraphLayout {
  width: number;
  height: number;
  nodes: PlacedNode[];
  edges: { from: PlacedNode; to: PlacedNode; weight: number }[];
}

// Longest-path layering, then a barycenter pass to cut crossings.
// Deterministic: ties fall back to declaration order.
export function layoutGraph(g: DotGraph, colWidth = 150, rowHeight = 64): GraphLayout {
  const index = new Map(g.nodes.map((n, i) => [n.id, i]));
  const layer = new Map<string, number>();
  const resolve = (id: string): number => {
    const got = layer.get(id);
    if (got !== undefined) return got;
    layer.set(id, 0); // cycle guard; the service only emits DAGs
    const preds = g.edges.filter((e) => e.to === id);
    const depth = preds.length === 0 ? 0 : 1 + Math.max(...preds.map((e) => resolve(e.from)));
    layer.set(id, depth);
    return depth;
  };
  for (const n of g.nodes) resolve(n.id);

  const nLayers = Math.max(...[...layer.values()], 0) + 1;
  const columns: string[][] = Array.from({ length: nLayers }, () => []);
  for (const n of g.nodes) columns[layer.get(n.id)!].push(n.id);

  const slot = new Map<string, number>();
  columns.forEach((col) => col.forEach((id, i) => slot.set(id, i)));
  for (let pass = 0; pass < 2; pass++) {
    for (let c = 1; c < nLayers; c++) {
      const keyed = columns[c].map((id) => {
        const parents = g.edges.filter((e) => e.to === id).map((e) => slot.get(e.from)!);
        const bary = parents.length ? parents.reduce((a, b) => a + b, 0) / parents.length : slot.get(id)!;
        return { id, bary };
      });
      keyed.sort((a, b) => a.bary - b.bary || index.get(a.id)! - index.get(b.id)!);
      columns[c] = keyed.map((k) => k.id);
      columns[c].forEach((id, i) => slot.set(id, i));
    }
  }

  const tallest = Math.max(...columns.map((c) => c.length));
  const height = tallest * rowHeight + rowHeight;
  const placed = new Map<string, PlacedNode>();
  const nodes: PlacedNode[] = [];
  columns.forEach((col, c) => {
    const top = (height - col.length * rowHeight) / 2;
    col.forEach((id, i) => {
      const n = g.nodes[index.get(id)!];
      const p = {
        id,
        isTarget: n.isTarget,
        x: c * colWidth + colWidth / 2,
        y: top + i * rowHeight + rowHeight / 2,
      };
      placed.set(id, p);
      nodes.push(p);
    });
  });
  return {
    width: nLayers * colWidth,
    height,
    nodes,
    edges: g.edges.map((e) => ({ from: placed.get(e.from)!, to: placed.get(e.to)!, weight: e.weight })),
  };
}
