import type { RankedCandidate, Report } from './types.js';

const PHASES = ['queued', 'preprocessing', 'training', 'generating',
  'filtering', 'evaluating', 'ranking', 'done'];

function h<K extends keyof HTMLElementTagNameMap>(
  tag: K, attrs: Record<string, string> = {}, children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  node.append(...children);
  return node;
}

export function renderProgress(container: HTMLElement, status: string): void {
  container.replaceChildren();
  const at = PHASES.indexOf(status);
  const bar = h('div', { class: 'phase-bar' });
  for (const [i, phase] of PHASES.entries()) {
    const cls = i < at ? 'phase done' : i === at ? 'phase current' : 'phase';
    bar.append(h('span', { class: cls, 'data-phase': phase }, [phase]));
  }
  container.append(bar);
}

export function clearProgress(container: HTMLElement): void {
  container.replaceChildren();
}

export function showError(container: HTMLElement, message: string): void {
  container.replaceChildren(h('div', { class: 'error-box', role: 'alert' }, [message]));
}

export function clearError(container: HTMLElement): void {
  container.replaceChildren();
}

function fmt(v: number | string): string {
  if (typeof v === 'string') return v;
  if (Number.isInteger(v)) return String(v);
  const abs = Math.abs(v);
  if (abs !== 0 && (abs >= 1e5 || abs < 1e-3)) return v.toExponential(3);
  return String(parseFloat(v.toPrecision(5)));
}

export function renderBanner(container: HTMLElement, report: Report): void {
  container.replaceChildren();
  if (report.infeasible) {
    container.append(h('div', { class: 'banner infeasible' }, [
      'No candidate fully met the targets; showing the closest attempts.',
    ]));
  }
  const notes: string[] = [];
  if (report.rules.provider_fallback) {
    notes.push('rule provider unreachable, used mined rules');
  }
  if (report.evaluation.explain_fallback) {
    notes.push('explanation provider unreachable, showing template text');
  }
  if (report.evaluation.causal_skipped) {
    notes.push(`structure comparison skipped: ${report.evaluation.causal_skipped}`);
  }
  if (report.generation.reinterpreted_targets.length > 0) {
    notes.push(`treated as pinned features: ${report.generation.reinterpreted_targets.join(', ')}`);
  }
  for (const note of notes) {
    container.append(h('div', { class: 'banner note' }, [note]));
  }
  const cons = report.evaluation.consistency;
  const stats = `surviving ${report.filtering.n_surviving} of ${report.generation.n_emitted}`
    + ` (${report.filtering.n_rejected_compliance} rule-rejected,`
    + ` ${report.filtering.n_rejected_outlier} outlier-rejected)`
    + (cons === null ? '' : `, structural agreement ${cons.toFixed(3)}`);
  container.append(h('div', { class: 'run-stats' }, [stats]));
}

/**
 * The ranked table. Every row carries a pick button so a candidate can
 * seed the next what-if round.
 */
export function renderTopkTable(
  container: HTMLElement,
  report: Report,
  onPick: (cand: RankedCandidate) => void,
): void {
  container.replaceChildren();
  if (report.topk.length === 0) {
    container.append(h('p', { class: 'empty' }, ['No candidates survived filtering.']));
    return;
  }
  const features = report.dataset.features.map((c) => c.name);
  const targets = report.dataset.targets.map((c) => c.name);

  const head = h('tr', {}, [
    h('th', {}, ['#']),
    ...features.map((f) => h('th', {}, [f])),
    ...targets.map((t) => h('th', { class: 'pred-col' }, [`${t} (pred)`])),
    h('th', {}, ['score']),
    h('th', {}, ['ok']),
    h('th', {}, ['']),
  ]);

  const body = report.topk.map((cand) => {
    const pick = h('button', { class: 'pick-btn', type: 'button', 'data-rank': String(cand.rank) },
      ['use as baseline']);
    pick.addEventListener('click', (ev) => {
      ev.stopPropagation();
      onPick(cand);
    });
    const row = h('tr', { class: 'topk-row', 'data-rank': String(cand.rank) }, [
      h('td', {}, [`#${cand.rank}`]),
      ...features.map((f) => h('td', {}, [fmt(cand.features[f])])),
      ...targets.map((t) => h('td', { class: 'pred-col' }, [fmt(cand.predictions[t])])),
      h('td', {}, [cand.score.toFixed(3)]),
      h('td', { class: cand.satisfied ? 'sat yes' : 'sat no' }, [cand.satisfied ? '✓' : '✗']),
      h('td', {}, [pick]),
    ]);
    if (cand.is_outlier) row.classList.add('outlier-row');
    row.addEventListener('click', () => onPick(cand));
    return row;
  });

  container.append(h('table', { class: 'topk' }, [
    h('thead', {}, [head]), h('tbody', {}, body),
  ]));

  const base = report.baseline;
  const baseLine = features.map((f) => `${f}=${fmt(base.features[f])}`).join(', ');
  const predLine = targets.map((t) => `${t}=${fmt(base.predictions[t])}`).join(', ');
  container.append(h('p', { class: 'baseline-line' },
    [`baseline: ${baseLine} → ${predLine}`]));
}

export function renderExplanations(container: HTMLElement, report: Report): void {
  container.replaceChildren();
  for (const cand of report.topk) {
    container.append(h('div', { class: 'explanation', 'data-rank': String(cand.rank) }, [
      h('span', { class: 'expl-rank' }, [`#${cand.rank}`]),
      h('span', { class: 'expl-text' }, [cand.explanation]),
    ]));
  }
}

export function renderRules(container: HTMLElement, report: Report): void {
  container.replaceChildren();
  const kept = report.rules.kept;
  if (kept.length === 0) return;
  const items = kept.map((r) => h('li', {}, [`${r.name}: ${r.expression}`]));
  container.append(h('details', { class: 'rules' }, [
    h('summary', {}, [`${kept.length} active rules (${report.rules.provider})`]),
    h('ul', {}, items),
  ]));
}
