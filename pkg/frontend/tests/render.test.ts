// @vitest-environment jsdom
import { describe, expect, it, vi } from 'vitest';
import {
  renderBanner, renderExplanations, renderProgress, renderRules,
  renderTopkTable, showError,
} from '../src/render.js';
import { makeCandidate, makeReport } from './fixtures.js';

function box(): HTMLElement {
  const div = document.createElement('div');
  document.body.append(div);
  return div;
}

describe('renderTopkTable', () => {
  it('renders one row per candidate with features, predictions, score', () => {
    const host = box();
    renderTopkTable(host, makeReport(), () => {});
    const rows = host.querySelectorAll('tr.topk-row');
    expect(rows).toHaveLength(3);
    const first = rows[0];
    expect(first.getAttribute('data-rank')).toBe('1');
    expect(first.textContent).toContain('101');
    expect(first.textContent).toContain('390');
    expect(first.textContent).toContain('0.950');
    expect(host.textContent).toContain('baseline:');
  });

  it('fires the pick callback from row click and button alike', () => {
    const host = box();
    const picked = vi.fn();
    renderTopkTable(host, makeReport(), picked);
    (host.querySelector('tr.topk-row[data-rank="2"]') as HTMLElement).click();
    expect(picked).toHaveBeenCalledTimes(1);
    expect(picked.mock.calls[0][0].rank).toBe(2);
    (host.querySelector('button.pick-btn[data-rank="3"]') as HTMLElement).click();
    expect(picked).toHaveBeenCalledTimes(2);
    expect(picked.mock.calls[1][0].rank).toBe(3);
  });

  it('marks unsatisfied and outlier rows', () => {
    const host = box();
    const report = makeReport({
      topk: [makeCandidate(1, { satisfied: false, is_outlier: true })],
    });
    renderTopkTable(host, report, () => {});
    expect(host.querySelector('.sat.no')).not.toBeNull();
    expect(host.querySelector('.outlier-row')).not.toBeNull();
  });

  it('says so when nothing survived', () => {
    const host = box();
    renderTopkTable(host, makeReport({ topk: [] }), () => {});
    expect(host.textContent).toContain('No candidates survived');
  });
});

describe('renderExplanations', () => {
  it('shows each explanation with its rank', () => {
    const host = box();
    renderExplanations(host, makeReport());
    const blocks = host.querySelectorAll('.explanation');
    expect(blocks).toHaveLength(3);
    expect(blocks[1].textContent).toContain('#2');
    expect(blocks[1].textContent).toContain('candidate 2 explanation');
  });
});

describe('renderBanner', () => {
  it('is calm on a clean feasible run', () => {
    const host = box();
    renderBanner(host, makeReport());
    expect(host.querySelector('.infeasible')).toBeNull();
    expect(host.textContent).toContain('surviving 37 of 40');
    expect(host.textContent).toContain('0.910');
  });

  it('shouts when infeasible and lists fallbacks', () => {
    const host = box();
    const report = makeReport({
      infeasible: true,
      rules: { provider: 'llm', provider_fallback: true, kept: [], rejected: [] },
      evaluation: { consistency: null, causal_skipped: 'too few survivors', explain_fallback: true },
    });
    renderBanner(host, report);
    expect(host.querySelector('.banner.infeasible')).not.toBeNull();
    expect(host.textContent).toContain('closest attempts');
    expect(host.textContent).toContain('rule provider unreachable');
    expect(host.textContent).toContain('template text');
    expect(host.textContent).toContain('too few survivors');
  });

  it('reports reinterpreted pinned features', () => {
    const host = box();
    const report = makeReport();
    report.generation.reinterpreted_targets = ['node_count'];
    renderBanner(host, report);
    expect(host.textContent).toContain('pinned features: node_count');
  });
});

describe('renderProgress', () => {
  it('highlights the current phase and marks earlier ones done', () => {
    const host = box();
    renderProgress(host, 'generating');
    expect(host.querySelector('.phase.current')?.textContent).toBe('generating');
    expect(host.querySelector('[data-phase="training"]')?.className).toContain('done');
    expect(host.querySelector('[data-phase="ranking"]')?.className).toBe('phase');
  });
});

describe('showError', () => {
  it('renders an alert box', () => {
    const host = box();
    showError(host, 'cannot reach service');
    const alert = host.querySelector('.error-box')!;
    expect(alert.getAttribute('role')).toBe('alert');
    expect(alert.textContent).toContain('cannot reach service');
  });
});

describe('renderRules', () => {
  it('lists kept rules behind a summary', () => {
    const host = box();
    const report = makeReport({
      rules: {
        provider: 'statistical',
        provider_fallback: false,
        kept: [{ name: 'io_cap', expression: 'io_volume < 100' }],
        rejected: [],
      },
    });
    renderRules(host, report);
    expect(host.textContent).toContain('1 active rules');
    expect(host.textContent).toContain('io_volume < 100');
  });
});
