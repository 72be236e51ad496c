import { describe, expect, it } from 'vitest';
import { layoutGraph, parseDot } from '../src/dot.js';

const SAMPLE = `digraph causal {
  "cpu_power" [shape=ellipse];
  "num_nodes" [shape=ellipse];
  "mem_power" [shape=ellipse];
  "node_power" [shape=box];
  "cpu_power" -> "num_nodes" [label="0.896"];
  "cpu_power" -> "mem_power" [label="0.095"];
  "num_nodes" -> "mem_power" [label="0.805"];
  "cpu_power" -> "node_power" [label="0.776"];
  "mem_power" -> "node_power" [label="-0.254"];
}
`;

describe('parseDot', () => {
  it('reads nodes with shapes and weighted edges', () => {
    const g = parseDot(SAMPLE);
    expect(g.nodes.map((n) => n.id)).toEqual(['cpu_power', 'num_nodes', 'mem_power', 'node_power']);
    expect(g.nodes.find((n) => n.id === 'node_power')?.isTarget).toBe(true);
    expect(g.nodes.find((n) => n.id === 'cpu_power')?.isTarget).toBe(false);
    expect(g.edges).toHaveLength(5);
    expect(g.edges[4]).toEqual({ from: 'mem_power', to: 'node_power', weight: -0.254 });
  });

  it('tolerates noise lines and invents nodes edges mention', () => {
    const g = parseDot('junk\n"a" -> "b" [label="1.5"];\n}');
    expect(g.nodes.map((n) => n.id)).toEqual(['a', 'b']);
    expect(g.edges).toHaveLength(1);
  });

  it('handles an empty graph', () => {
    const g = parseDot('digraph causal {\n}\n');
    expect(g.nodes).toEqual([]);
    expect(g.edges).toEqual([]);
  });
});

describe('layoutGraph', () => {
  it('layers nodes by longest path from a root', () => {
    const layout = layoutGraph(parseDot(SAMPLE), 100, 50);
    const x = new Map(layout.nodes.map((n) => [n.id, n.x]));
    expect(x.get('cpu_power')!).toBeLessThan(x.get('num_nodes')!);
    expect(x.get('num_nodes')!).toBeLessThan(x.get('mem_power')!);
    expect(x.get('mem_power')!).toBeLessThan(x.get('node_power')!);
  });

  it('keeps every edge attached to placed nodes', () => {
    const layout = layoutGraph(parseDot(SAMPLE));
    for (const e of layout.edges) {
      expect(layout.nodes).toContain(e.from);
      expect(layout.nodes).toContain(e.to);
    }
    expect(layout.width).toBeGreaterThan(0);
    expect(layout.height).toBeGreaterThan(0);
  });

  it('is deterministic', () => {
    const a = JSON.stringify(layoutGraph(parseDot(SAMPLE)));
    const b = JSON.stringify(layoutGraph(parseDot(SAMPLE)));
    expect(a).toBe(b);
  });
});
