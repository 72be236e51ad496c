import { ApiClient, ApiError, pollRun, type PollHandle } from './api.js';
import {
  QUERY_KINDS, buildQuery, emptyForm, featureColumns, needsBaseline,
  targetColumns, validateForm,
  type ConstraintRow, type QueryFormState, type QueryKind,
} from './form.js';
import { layoutGraph, parseDot } from './dot.js';
import { renderGraph, renderProjection, renderRadar, renderUqBars } from './charts.js';
import { markTopk, parseCandidatesCsv, parseProjection, targetsOf } from './artifacts.js';
import {
  clearError, clearProgress, renderBanner, renderExplanations, renderProgress,
  renderRules, renderTopkTable, showError,
} from './render.js';
import type { DatasetInfo, RankedCandidate, RadarDoc, Report } from './types.js';

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export class App {
  api: ApiClient;
  datasets: DatasetInfo[] = [];
  state: QueryFormState = emptyForm();
  snapshot: QueryFormState | null = null;
  poll: PollHandle | null = null;
  lastRunId = '';
  pollIntervalMs = 500;

  constructor(baseUrl: string) {
    this.api = new ApiClient(baseUrl);
  }

  dataset(): DatasetInfo | undefined {
    return this.datasets.find((d) => d.dataset_id === this.state.datasetId);
  }
}

export function setupApp(initialBase?: string): App {
  const app = new App(initialBase ?? (byId<HTMLInputElement>('base-url')).value);
  byId<HTMLInputElement>('base-url').value = app.api.base;

  const kindSel = byId<HTMLSelectElement>('kind');
  for (const kind of QUERY_KINDS) {
    const opt = document.createElement('option');
    opt.value = kind;
    opt.textContent = kind;
    kindSel.append(opt);
  }

  wireConnection(app);
  wireUpload(app);
  wireForm(app);
  refreshDatasets(app);
  renderTargets(app);
  renderConstraints(app);
  syncVisibility(app);
  syncValidation(app);
  return app;
}

function setConnStatus(text: string, ok: boolean): void {
  const node = byId<HTMLSpanElement>('conn-status');
  node.textContent = text;
  node.className = ok ? 'ok' : 'bad';
}

async function refreshDatasets(app: App): Promise<void> {
  try {
    app.datasets = await app.api.listDatasets();
    setConnStatus('connected', true);
  } catch (err) {
    app.datasets = [];
    setConnStatus(err instanceof ApiError && err.status === 0 ? 'unreachable' : String(err), false);
  }
  const sel = byId<HTMLSelectElement>('dataset');
  sel.replaceChildren();
  const blank = document.createElement('option');
  blank.value = '';
  blank.textContent = app.datasets.length ? 'pick a dataset' : 'no datasets uploaded';
  sel.append(blank);
  for (const ds of app.datasets) {
    const opt = document.createElement('option');
    opt.value = ds.dataset_id;
    opt.textContent = `${ds.dataset_id} (${ds.n_rows} rows)`;
    sel.append(opt);
  }
  if (app.datasets.some((d) => d.dataset_id === app.state.datasetId)) {
    sel.value = app.state.datasetId;
  } else {
    app.state.datasetId = '';
  }
  renderColumnPickers(app);
  syncValidation(app);
}

function wireConnection(app: App): void {
  byId<HTMLButtonElement>('connect').addEventListener('click', () => {
    app.api = new ApiClient(byId<HTMLInputElement>('base-url').value);
    refreshDatasets(app);
  });
}

function wireUpload(app: App): void {
  byId<HTMLButtonElement>('upload-btn').addEventListener('click', async () => {
    const status = byId<HTMLSpanElement>('upload-status');
    const dataInput = byId<HTMLInputElement>('data-file');
    const schemaInput = byId<HTMLInputElement>('schema-file');
    const data = dataInput.files?.[0];
    const schema = schemaInput.files?.[0];
    if (!data || !schema) {
      status.textContent = 'pick both files first';
      return;
    }
    status.textContent = 'uploading...';
    try {
      const info = await app.api.uploadDataset(data, data.name, await schema.text());
      status.textContent = info.existing ? `already known as ${info.dataset_id}` : `uploaded as ${info.dataset_id}`;
      await refreshDatasets(app);
      app.state.datasetId = info.dataset_id;
      byId<HTMLSelectElement>('dataset').value = info.dataset_id;
      app.state.constraints = [];
      renderTargets(app);
      renderConstraints(app);
      renderColumnPickers(app);
      syncValidation(app);
    } catch (err) {
      status.textContent = String(err instanceof Error ? err.message : err);
    }
  });
}

function renderColumnPickers(app: App): void {
  const ds = app.dataset();
  for (const id of ['fix-col', 'hold-col']) {
    const sel = byId<HTMLSelectElement>(id);
    const keep = sel.value;
    sel.replaceChildren();
    const blank = document.createElement('option');
    blank.value = '';
    blank.textContent = id === 'fix-col' ? 'fix at a value...' : 'hold at baseline...';
    sel.append(blank);
    for (const col of featureColumns(ds)) {
      if (app.state.constraints.some((c) => c.column === col.name)) continue;
      const opt = document.createElement('option');
      opt.value = col.name;
      opt.textContent = col.name;
      sel.append(opt);
    }
    sel.value = keep;
  }
  byId<HTMLSelectElement>('hold-col').disabled = !needsBaseline(app.state.kind);
}

function renderTargets(app: App): void {
  const box = byId<HTMLDivElement>('targets');
  box.replaceChildren();
  const ds = app.dataset();
  const valid = new Set(targetColumns(ds).map((c) => c.name));
  app.state.targets.forEach((t, i) => {
    if (t.column && ds && !valid.has(t.column)) t.column = '';
    const row = document.createElement('div');
    row.className = 'target-row';

    const sel = document.createElement('select');
    sel.className = 'target-col';
    const blank = document.createElement('option');
    blank.value = '';
    blank.textContent = 'column...';
    sel.append(blank);
    for (const col of targetColumns(ds)) {
      const opt = document.createElement('option');
      opt.value = col.name;
      opt.textContent = col.units ? `${col.name} (${col.units})` : col.name;
      sel.append(opt);
    }
    sel.value = t.column;
    sel.addEventListener('change', () => { t.column = sel.value; syncValidation(app); });

    const goal = document.createElement('input');
    goal.type = 'text';
    goal.className = 'target-goal';
    goal.placeholder = 'e.g. < 1000';
    goal.value = t.goal;
    goal.addEventListener('input', () => { t.goal = goal.value; syncValidation(app); });

    const del = document.createElement('button');
    del.type = 'button';
    del.textContent = '×';
    del.addEventListener('click', () => {
      app.state.targets.splice(i, 1);
      if (app.state.targets.length === 0) app.state.targets.push({ column: '', goal: '' });
      renderTargets(app);
      syncValidation(app);
    });

    row.append(sel, goal, del);
    box.append(row);
  });
}

function renderConstraints(app: App): void {
  const box = byId<HTMLDivElement>('constraints');
  box.replaceChildren();
  const ds = app.dataset();
  app.state.constraints.forEach((c, i) => {
    const row = document.createElement('div');
    row.className = 'constraint-row';
    row.dataset.column = c.column;

    const name = document.createElement('span');
    name.className = 'constraint-name';
    name.textContent = c.column;
    row.append(name);

    const col = ds?.columns.find((x) => x.name === c.column);
    if (c.mode === 'hold') {
      const note = document.createElement('span');
      note.className = 'hold-note';
      note.textContent = 'held at baseline value';
      row.append(note);
    } else if (col?.kind === 'categorical' || c.mode === 'level') {
      const level = document.createElement('input');
      level.type = 'text';
      level.className = 'constraint-level';
      level.placeholder = 'level';
      level.value = c.level;
      level.addEventListener('input', () => { c.level = level.value; c.mode = 'level'; syncValidation(app); });
      row.append(level);
    } else {
      const fixed = document.createElement('input');
      fixed.type = 'text';
      fixed.className = 'constraint-value';
      fixed.placeholder = '= value';
      fixed.value = c.value;
      fixed.addEventListener('input', () => {
        c.value = fixed.value;
        c.mode = 'fixed';
        syncValidation(app);
      });
      const lo = document.createElement('input');
      lo.type = 'text';
      lo.className = 'constraint-lo';
      lo.placeholder = 'min';
      lo.value = c.lo;
      const hi = document.createElement('input');
      hi.type = 'text';
      hi.className = 'constraint-hi';
      hi.placeholder = 'max';
      hi.value = c.hi;
      const toRange = () => {
        c.lo = lo.value;
        c.hi = hi.value;
        if (lo.value || hi.value) { c.mode = 'range'; c.value = ''; fixed.value = ''; }
        syncValidation(app);
      };
      lo.addEventListener('input', toRange);
      hi.addEventListener('input', toRange);
      row.append(fixed, lo, hi);
    }

    const del = document.createElement('button');
    del.type = 'button';
    del.textContent = '×';
    del.addEventListener('click', () => {
      app.state.constraints.splice(i, 1);
      renderConstraints(app);
      renderColumnPickers(app);
      syncValidation(app);
    });
    row.append(del);
    box.append(row);
  });
}

function addConstraint(app: App, column: string, mode: ConstraintRow['mode']): void {
  if (!column || app.state.constraints.some((c) => c.column === column)) return;
  app.state.constraints.push({ column, mode, value: '', lo: '', hi: '', level: '' });
  renderConstraints(app);
  renderColumnPickers(app);
  syncValidation(app);
}

function syncVisibility(app: App): void {
  byId<HTMLFieldSetElement>('baseline-box').hidden = !needsBaseline(app.state.kind);
  byId<HTMLSelectElement>('hold-col').disabled = !needsBaseline(app.state.kind);
}

function syncValidation(app: App): void {
  const problems = validateForm(app.state, app.dataset());
  const list = byId<HTMLUListElement>('validation');
  list.replaceChildren();
  for (const p of problems) {
    const li = document.createElement('li');
    li.textContent = p;
    list.append(li);
  }
  byId<HTMLButtonElement>('submit').disabled = problems.length > 0;
}

function wireForm(app: App): void {
  byId<HTMLSelectElement>('dataset').addEventListener('change', (ev) => {
    app.state.datasetId = (ev.target as HTMLSelectElement).value;
    app.state.constraints = [];
    renderTargets(app);
    renderConstraints(app);
    renderColumnPickers(app);
    syncValidation(app);
  });

  kindChange(app);
  byId<HTMLButtonElement>('add-target').addEventListener('click', () => {
    app.state.targets.push({ column: '', goal: '' });
    renderTargets(app);
    syncValidation(app);
  });

  byId<HTMLSelectElement>('fix-col').addEventListener('change', (ev) => {
    const sel = ev.target as HTMLSelectElement;
    addConstraint(app, sel.value, 'fixed');
    sel.value = '';
  });
  byId<HTMLSelectElement>('hold-col').addEventListener('change', (ev) => {
    const sel = ev.target as HTMLSelectElement;
    addConstraint(app, sel.value, 'hold');
    sel.value = '';
  });

  const baseline = byId<HTMLTextAreaElement>('baseline');
  baseline.addEventListener('input', () => {
    app.state.baselineText = baseline.value;
    syncValidation(app);
  });

  wireSlider(app, 'n-candidates', (v) => { app.state.nCandidates = v; });
  wireSlider(app, 'topk', (v) => { app.state.topK = v; });
  wireSlider(app, 'lambda1', (v) => { app.state.lambda1 = v; });
  wireSlider(app, 'lambda2', (v) => { app.state.lambda2 = v; });

  const seeds = byId<HTMLInputElement>('seeds');
  seeds.addEventListener('input', () => {
    app.state.seedsText = seeds.value;
    syncValidation(app);
  });

  byId<HTMLFormElement>('query-form').addEventListener('submit', (ev) => {
    ev.preventDefault();
    submitQuery(app);
  });

  byId<HTMLButtonElement>('cancel').addEventListener('click', () => restoreSnapshot(app));
}

function kindChange(app: App): void {
  byId<HTMLSelectElement>('kind').addEventListener('change', (ev) => {
    app.state.kind = (ev.target as HTMLSelectElement).value as QueryKind;
    if (!needsBaseline(app.state.kind)) {
      app.state.constraints = app.state.constraints.filter((c) => c.mode !== 'hold');
      renderConstraints(app);
    }
    syncVisibility(app);
    renderColumnPickers(app);
    syncValidation(app);
  });
}

function wireSlider(app: App, id: string, apply: (v: number) => void): void {
  const input = byId<HTMLInputElement>(id);
  const out = byId<HTMLSpanElement>(`${id}-out`);
  input.addEventListener('input', () => {
    apply(Number(input.value));
    out.textContent = input.value;
    syncValidation(app);
  });
}

async function submitQuery(app: App): Promise<void> {
  const errBox = byId<HTMLDivElement>('error');
  clearError(errBox);
  const submit = byId<HTMLButtonElement>('submit');
  submit.disabled = true;
  try {
    const query = buildQuery(app.state);
    const runId = await app.api.submitQuery(app.state.datasetId, query);
    app.lastRunId = runId;
    const progress = byId<HTMLDivElement>('progress');
    renderProgress(progress, 'queued');
    app.poll = pollRun(app.api, runId, (status) => renderProgress(progress, status),
      app.pollIntervalMs);
    const info = await app.poll.done;
    clearProgress(progress);
    if (info.status === 'failed') {
      showError(errBox, info.error ?? 'run failed');
      return;
    }
    await showReport(app, runId);
  } catch (err) {
    clearProgress(byId<HTMLDivElement>('progress'));
    showError(errBox, err instanceof Error ? err.message : String(err));
  } finally {
    submit.disabled = false;
    syncValidation(app);
  }
}

async function showReport(app: App, runId: string): Promise<void> {
  const report: Report = await app.api.getReport(runId);
  const [radarText, projText, dotText] = await Promise.all([
    app.api.getArtifact(runId, 'radar.json'),
    app.api.getArtifact(runId, 'projection.csv'),
    app.api.getArtifact(runId, 'graph.dot'),
  ]);
  const candText = await app.api.getArtifact(runId, 'candidates.csv');

  renderBanner(byId('banner'), report);
  renderTopkTable(byId('table'), report, (cand) => pickCandidate(app, cand));
  renderExplanations(byId('explanations'), report);
  renderUqBars(byId('uq'), report.topk, report.baseline.predictions, targetsOf(report));
  renderRadar(byId('radar'), JSON.parse(radarText) as RadarDoc);
  const rows = parseCandidatesCsv(candText, report.dataset.features.map((c) => c.name));
  renderProjection(byId('projection'), parseProjection(projText), markTopk(report, rows));
  renderGraph(byId('graph'), layoutGraph(parseDot(dotText)));
  renderRules(byId('rules'), report);
  for (const head of document.querySelectorAll<HTMLElement>('.result-h')) head.hidden = false;
}

// One click turns a recommendation into the next round's starting
// point; cancel undoes the whole prefill.
function pickCandidate(app: App, cand: RankedCandidate): void {
  app.snapshot = structuredClone(app.state);
  if (!needsBaseline(app.state.kind)) {
    app.state.kind = 'WhatIf';
    byId<HTMLSelectElement>('kind').value = 'WhatIf';
  }
  app.state.baselineText = JSON.stringify(cand.features, null, 2);
  byId<HTMLTextAreaElement>('baseline').value = app.state.baselineText;
  syncVisibility(app);
  renderColumnPickers(app);
  syncValidation(app);
  byId<HTMLButtonElement>('cancel').hidden = false;
}

function restoreSnapshot(app: App): void {
  if (!app.snapshot) return;
  app.state = app.snapshot;
  app.snapshot = null;
  byId<HTMLSelectElement>('kind').value = app.state.kind;
  byId<HTMLTextAreaElement>('baseline').value = app.state.baselineText;
  byId<HTMLInputElement>('seeds').value = app.state.seedsText;
  renderTargets(app);
  renderConstraints(app);
  renderColumnPickers(app);
  syncVisibility(app);
  syncValidation(app);
  byId<HTMLButtonElement>('cancel').hidden = true;
}
