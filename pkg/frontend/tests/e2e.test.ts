// Scripted browser run against a live service: the page is loaded into
// jsdom, the real app is wired onto it, and every interaction goes
// through the DOM exactly as a user's clicks would. The service is the
// actual Python process, not a mock.
import { spawn, execFile, type ChildProcess } from 'node:child_process';
import { promisify } from 'node:util';
import { mkdtempSync, readFileSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { dirname, join, resolve } from 'node:path';
import { fileURLToPath } from 'node:url';
import { JSDOM } from 'jsdom';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { setupApp, type App } from '../src/app.js';

const execFileP = promisify(execFile);
const REPO = resolve(dirname(fileURLToPath(import.meta.url)), '..', '..');
const PORT = 8900 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;

let service: ChildProcess;
let workDir: string;
let dom: JSDOM;
let app: App;
const datasetIds: Record<string, string> = {};

function byId<T extends HTMLElement>(id: string): T {
  return dom.window.document.getElementById(id) as T;
}

function fire(node: HTMLElement, type: string): void {
  node.dispatchEvent(new dom.window.Event(type, { bubbles: true, cancelable: true }));
}

function setInput(node: HTMLInputElement | HTMLTextAreaElement, value: string): void {
  node.value = value;
  fire(node, 'input');
}

function setSelect(node: HTMLSelectElement, value: string): void {
  node.value = value;
  fire(node, 'change');
}

async function until(check: () => boolean, ms = 60_000, step = 25): Promise<void> {
  const deadline = Date.now() + ms;
  while (!check()) {
    if (Date.now() > deadline) throw new Error('condition not met in time');
    await new Promise((r) => setTimeout(r, step));
  }
}

async function waitForService(): Promise<void> {
  const deadline = Date.now() + 60_000;
  for (;;) {
    try {
      const res = await fetch(`${BASE}/health`);
      if (res.ok) return;
    } catch { /* not up yet */ }
    if (Date.now() > deadline) throw new Error('service never came up');
    await new Promise((r) => setTimeout(r, 300));
  }
}

async function submitAndWaitForReport(): Promise<void> {
  const table = byId<HTMLDivElement>('table');
  table.replaceChildren();
  fire(byId('query-form'), 'submit');
  await until(() => table.querySelector('tr.topk-row') !== null
    || byId('error').querySelector('.error-box') !== null, 150_000, 50);
  const err = byId('error').querySelector('.error-box');
  if (err) throw new Error(`run failed: ${err.textContent}`);
}

function resultCounts() {
  const doc = dom.window.document;
  return {
    rows: doc.querySelectorAll('#table tr.topk-row').length,
    explanations: doc.querySelectorAll('#explanations .explanation').length,
    radar: doc.querySelectorAll('#radar polygon.radar-candidate').length,
    trainPts: doc.querySelectorAll('#projection .proj-train').length,
    topkPts: doc.querySelectorAll('#projection .proj-topk').length,
    graphNodes: doc.querySelectorAll('#graph .graph-node').length,
    graphTargets: doc.querySelectorAll('#graph .graph-target').length,
    uqBands: doc.querySelectorAll('#uq rect.uq-band').length,
  };
}

function expectFullRender(): void {
  const got = resultCounts();
  expect(got.rows).toBeGreaterThanOrEqual(1);
  expect(got.rows).toBeLessThanOrEqual(5);
  expect(got.explanations).toBe(got.rows);
  expect(got.radar).toBe(got.rows);
  expect(got.trainPts).toBeGreaterThan(50);
  expect(got.topkPts).toBeGreaterThanOrEqual(1);
  expect(got.topkPts).toBeLessThanOrEqual(got.rows);
  expect(got.graphNodes).toBe(4);
  expect(got.graphTargets).toBe(1);
  expect(got.uqBands).toBe(got.rows);
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), 'ui-e2e-'));
  for (const [name, seed] of [['fugaku-like', 1], ['pm100-like', 2], ['sc19-like', 3]] as const) {
    await execFileP('python3', ['-m', 'cfadvisor.cli', 'synth',
      '--name', name, '--n', '240', '--seed', String(seed),
      '--out', join(workDir, `${name}.csv`)], { cwd: REPO });
  }

  service = spawn('python3', ['-m', 'cfadvisor.service', '--port', String(PORT)],
    { cwd: REPO, stdio: 'ignore' });
  await waitForService();

  const html = readFileSync(join(REPO, 'frontend', 'index.html'), 'utf8');
  dom = new JSDOM(html, { url: BASE });
  (globalThis as { document: Document }).document = dom.window.document;

  app = setupApp(BASE);
  app.pollIntervalMs = 150;
  for (const name of ['fugaku-like', 'pm100-like', 'sc19-like']) {
    const data = new Blob([readFileSync(join(workDir, `${name}.csv`))]);
    const schema = readFileSync(join(workDir, `${name}.schema.json`), 'utf8');
    const info = await app.api.uploadDataset(data, `${name}.csv`, schema);
    datasetIds[name] = info.dataset_id;
  }
  byId<HTMLButtonElement>('connect').click();
  await until(() => byId<HTMLSelectElement>('dataset').options.length === 4);
}, 180_000);

afterAll(() => {
  service?.kill();
  if (workDir) rmSync(workDir, { recursive: true, force: true });
});

describe('recommendation query through the form', () => {
  it('validates before enabling submit', async () => {
    const submit = byId<HTMLButtonElement>('submit');
    expect(submit.disabled).toBe(true);

    setSelect(byId('dataset'), datasetIds['fugaku-like']);
    expect(submit.disabled).toBe(true);

    setSelect(dom.window.document.querySelector('.target-col') as HTMLSelectElement, 'duration');
    setInput(dom.window.document.querySelector('.target-goal') as HTMLInputElement, '< 1000s');
    expect(submit.disabled).toBe(false);
  });

  it('adds a categorical pin from the fix-column dropdown', async () => {
    setSelect(byId('fix-col'), 'state');
    const level = dom.window.document.querySelector('.constraint-level') as HTMLInputElement;
    expect(level).not.toBeNull();
    setInput(level, 'completed');
    expect(byId<HTMLButtonElement>('submit').disabled).toBe(false);
  });

  it('shows phase progress mid-run and renders every panel', async () => {
    const seen: string[] = [];
    const watcher = setInterval(() => {
      const current = dom.window.document.querySelector('#progress .phase.current');
      if (current?.textContent) seen.push(current.textContent);
    }, 60);
    try {
      await submitAndWaitForReport();
    } finally {
      clearInterval(watcher);
    }
    expect(seen.length).toBeGreaterThan(0);
    expectFullRender();

    const report = await app.api.getReport(app.lastRunId);
    expect(report.status).toBe('done');
    for (const cand of report.topk) {
      expect(cand.features.state).toBe('completed');
      expect(cand.predictions.duration).toBeLessThan(1000);
    }
  });

  it('prefills the next query from a clicked candidate', async () => {
    const report = await app.api.getReport(app.lastRunId);
    const row = dom.window.document.querySelector('#table tr.topk-row[data-rank="1"]') as HTMLElement;
    row.click();

    expect(byId<HTMLSelectElement>('kind').value).toBe('WhatIf');
    expect(byId<HTMLFieldSetElement>('baseline-box').hidden).toBe(false);
    const prefilled = JSON.parse(byId<HTMLTextAreaElement>('baseline').value);
    expect(prefilled).toEqual(report.topk[0].features);
    expect(byId<HTMLButtonElement>('cancel').hidden).toBe(false);
  });

  it('cancel restores the form as it was', async () => {
    byId<HTMLButtonElement>('cancel').click();
    expect(byId<HTMLSelectElement>('kind').value).toBe('Recommend');
    expect(byId<HTMLFieldSetElement>('baseline-box').hidden).toBe(true);
    expect(byId<HTMLButtonElement>('cancel').hidden).toBe(true);
    expect(byId<HTMLButtonElement>('submit').disabled).toBe(false);
  });
});

describe('what-if percent reduction through the form', () => {
  it('runs and renders on a supplied baseline', async () => {
    setSelect(byId('dataset'), datasetIds['pm100-like']);
    setSelect(byId('kind'), 'WhatIf');
    setSelect(dom.window.document.querySelector('.target-col') as HTMLSelectElement, 'node_power');
    setInput(dom.window.document.querySelector('.target-goal') as HTMLInputElement, '-20%');
    setInput(byId<HTMLTextAreaElement>('baseline'),
      '{"num_nodes": 55, "cpu_power": 1255.5, "mem_power": 323.0}');
    expect(byId<HTMLButtonElement>('submit').disabled).toBe(false);

    const before = app.lastRunId;
    await submitAndWaitForReport();
    expect(app.lastRunId).not.toBe(before);
    expectFullRender();

    const report = await app.api.getReport(app.lastRunId);
    expect(report.generation.y_star.node_power)
      .toBeCloseTo(0.8 * report.baseline.predictions.node_power, 6);
  });
});

describe('counterfactual with a doubled pinned feature', () => {
  it('holds the pin exactly across every candidate', async () => {
    setSelect(byId('dataset'), datasetIds['sc19-like']);
    setSelect(byId('kind'), 'Counterfactual');
    setSelect(dom.window.document.querySelector('.target-col') as HTMLSelectElement, 'run_time');
    setInput(dom.window.document.querySelector('.target-goal') as HTMLInputElement, '< 100000');
    setInput(byId<HTMLTextAreaElement>('baseline'),
      '{"task_count": 438, "node_count": 17, "io_volume": 2.0}');
    setSelect(byId('fix-col'), 'task_count');
    const fixed = dom.window.document.querySelector('.constraint-value') as HTMLInputElement;
    setInput(fixed, '876');
    expect(byId<HTMLButtonElement>('submit').disabled).toBe(false);

    await submitAndWaitForReport();
    expectFullRender();

    const report = await app.api.getReport(app.lastRunId);
    for (const cand of report.topk) {
      expect(cand.features.task_count).toBe(876);
    }
    // the search starts from the baseline projected into the pin, and the
    // report's baseline reflects that; the raw query echo keeps the input
    expect(report.baseline.features.task_count).toBe(876);
    expect(report.baseline.features.node_count).toBe(17);
    expect((report.query.baseline as Record<string, number>).task_count).toBe(438);
  });

  it('a fresh submit after editing one baseline field yields a new run', async () => {
    setInput(byId<HTMLTextAreaElement>('baseline'),
      '{"task_count": 438, "node_count": 20, "io_volume": 2.0}');
    const before = app.lastRunId;
    await submitAndWaitForReport();
    expect(app.lastRunId).not.toBe(before);
  });
});

describe('service loss', () => {
  it('surfaces an inline connection error and keeps the form', async () => {
    service.kill();
    await new Promise((r) => setTimeout(r, 500));

    const baselineBefore = byId<HTMLTextAreaElement>('baseline').value;
    fire(byId('query-form'), 'submit');
    await until(() => byId('error').querySelector('.error-box') !== null, 20_000);
    expect(byId('error').textContent).toContain('cannot reach service');
    expect(byId<HTMLTextAreaElement>('baseline').value).toBe(baselineBefore);
    expect((dom.window.document.querySelector('.target-goal') as HTMLInputElement).value)
      .toBe('< 100000');
  });
});
