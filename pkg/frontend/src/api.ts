import type { DatasetInfo, Report, RunInfo } from './types.js';

export class ApiError extends Error {
  status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function errorMessage(res: Response): Promise<string> {
  try {
    const body = await res.json();
    if (typeof body.detail === 'string') return body.detail;
    if (typeof body.error === 'string') return body.error;
    return JSON.stringify(body);
  } catch {
    return res.statusText || `HTTP ${res.status}`;
  }
}

/** Thin client for the run service. All state lives server-side. */
export class ApiClient {
  base: string;

  constructor(base: string) {
    this.base = base.replace(/\/+$/, '');
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let res: Response;
    try {
      res = await fetch(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, `cannot reach service at ${this.base}: ${err}`);
    }
    if (!res.ok) throw new ApiError(res.status, await errorMessage(res));
    return res;
  }

  async health(): Promise<void> {
    await this.request('/health');
  }

  async listDatasets(): Promise<DatasetInfo[]> {
    const res = await this.request('/datasets');
    return (await res.json()).datasets;
  }

  async uploadDataset(data: Blob, dataName: string, schemaJson: string): Promise<DatasetInfo> {
    const form = new FormData();
    form.append('file', data, dataName);
    form.append('schema_json', schemaJson);
    const res = await this.request('/datasets', { method: 'POST', body: form });
    return res.json();
  }

  async submitQuery(datasetId: string, query: Record<string, unknown>): Promise<string> {
    const res = await this.request('/queries', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ dataset_id: datasetId, query }),
    });
    return (await res.json()).run_id;
  }

  async getRun(runId: string): Promise<RunInfo> {
    const res = await this.request(`/runs/${runId}`);
    return res.json();
  }

  async getReport(runId: string): Promise<Report> {
    const res = await this.request(`/reports/${runId}`);
    return res.json();
  }

  async getArtifact(runId: string, name: string): Promise<string> {
    const res = await this.request(`/reports/${runId}/artifacts/${name}`);
    return res.text();
  }
}

export interface PollHandle {
  done: Promise<RunInfo>;
  cancel: () => void;
}

/**
 * Poll a run until it leaves the queue. One loop per run; cancel stops
 * the next tick but not a request already in flight.
 */
export function pollRun(
  api: ApiClient,
  runId: string,
  onPhase: (status: string) => void,
  intervalMs = 500,
): PollHandle {
  let cancelled = false;
  const done = new Promise<RunInfo>((resolve, reject) => {
    const tick = async () => {
      if (cancelled) return;
      let info: RunInfo;
      try {
        info = await api.getRun(runId);
      } catch (err) {
        reject(err);
        return;
      }
      onPhase(info.status);
      if (info.status === 'done' || info.status === 'failed') {
        resolve(info);
        return;
      }
      setTimeout(tick, intervalMs);
    };
    tick();
  });
  return { done, cancel: () => { cancelled = true; } };
}
