// Typed client for the analysis service. The UI performs no numerics of its
// own: everything rendered comes verbatim from these payloads.

export interface BlockSpec {
  num?: number[];
  den?: number[];
  gain?: number;
  frf_csv?: string;
}

export interface AnalysisConfig {
  preset?: string;
  blocks?: Record<string, BlockSpec>;
  reset?: { num: number[]; den: number[]; gamma: number };
  plant?: BlockSpec;
  analysis?: {
    f_start_hz: number;
    f_end_hz: number;
    points: number;
    harmonics: number;
  };
  sim?: Record<string, number | string>;
}

export interface GridRow {
  freq_hz: number;
  n: number;
  re: number;
  im: number;
  mag_db: number;
  phase_deg: number;
  gamma?: number;
}

export interface StabilityPayload {
  passed: boolean;
  marginal: boolean;
  worst_spectral_radius: number;
  worst_delta_s: number;
}

export interface GridPayload {
  function: string;
  freqs_hz: number[];
  harmonics: number[];
  rows: GridRow[];
  gamma?: (number | null)[];
  stability: StabilityPayload;
  failures: unknown[];
}

export interface ScanResult {
  intervals_hz: [number, number][];
  frequencies_hz: number[];
  counts: (number | null)[];
  failures: { freq_hz: number; message: string }[];
  has_multiple_reset_region: boolean;
}

export interface ScanProgress {
  freq_hz: number;
  count: number | null;
  error: string | null;
}

export interface SimulatePayload {
  step_s: number;
  decimate: number;
  columns: string[];
  rows: Record<string, number>[];
  reset_times_s: number[];
  effective_resets: boolean;
  notes: string[];
  steady_state: {
    reached: boolean;
    message?: string;
    convergence_metric?: number;
    resets_per_cycle?: number;
    prediction_error?: Record<string, number>;
    harmonics?: number;
  };
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function post<T>(base: string, path: string, body: unknown): Promise<T> {
  const resp = await fetch(base + path, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const payload = await resp.json();
      detail = typeof payload.detail === "string"
        ? payload.detail
        : JSON.stringify(payload.detail);
    } catch {
      // keep statusText
    }
    throw new ApiError(resp.status, detail);
  }
  return resp.json() as Promise<T>;
}

export class AnalysisClient {
  constructor(public base: string) {}

  openLoop(config: AnalysisConfig, fn: "cr" | "ln"): Promise<GridPayload> {
    return post(this.base, "/analyze/open-loop", { config, function: fn });
  }

  closedLoop(
    config: AnalysisConfig,
    fn: "sn" | "tn" | "csn" | "psn",
  ): Promise<GridPayload> {
    return post(this.base, "/analyze/closed-loop", { config, function: fn });
  }

  simulate(
    config: AnalysisConfig,
    input: { kind: "r" | "d" | "eo"; amplitude: number; freq_hz: number },
    decimate = 8,
  ): Promise<SimulatePayload> {
    return post(this.base, "/analyze/simulate", { config, input, decimate });
  }

  scan(
    config: AnalysisConfig,
    band: { f_start_hz: number; f_end_hz: number; step_hz: number },
  ): Promise<ScanResult> {
    return post(this.base, "/analyze/scan", { config, ...band, stream: false });
  }

  // Streaming scan: resolves with the final result, or with the progress
  // seen so far marked partial when the caller aborts mid-flight.
  async scanStream(
    config: AnalysisConfig,
    band: { f_start_hz: number; f_end_hz: number; step_hz: number },
    onProgress: (p: ScanProgress) => void,
    signal?: AbortSignal,
  ): Promise<{ result: ScanResult | null; partial: boolean; seen: ScanProgress[] }> {
    const resp = await fetch(this.base + "/analyze/scan", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ config, ...band, stream: true }),
      signal,
    });
    if (!resp.ok || !resp.body) {
      throw new ApiError(resp.status, await resp.text());
    }
    try {
      const { progress, result } = await consumeScanStream(resp.body, onProgress);
      return { result, partial: result === null, seen: progress };
    } catch (err) {
      if (signal?.aborted) {
        return { result: null, partial: true, seen: [] };
      }
      throw err;
    }
  }
}

// Parse the newline-delimited JSON scan stream; exported for tests.
export async function consumeScanStream(
  body: ReadableStream<Uint8Array>,
  onProgress: (p: ScanProgress) => void,
): Promise<{ progress: ScanProgress[]; result: ScanResult | null }> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  const progress: ScanProgress[] = [];
  let result: ScanResult | null = null;
  for (;;) {
    const { done, value } = await reader.read();
    if (value) {
      buffer += decoder.decode(value, { stream: true });
    }
    let idx;
    while ((idx = buffer.indexOf("\n")) >= 0) {
      const line = buffer.slice(0, idx).trim();
      buffer = buffer.slice(idx + 1);
      if (!line) continue;
      const msg = JSON.parse(line);
      if (msg.type === "progress") {
        const p: ScanProgress = {
          freq_hz: msg.freq_hz,
          count: msg.count ?? null,
          error: msg.error ?? null,
        };
        progress.push(p);
        onProgress(p);
      } else if (msg.type === "result") {
        const { type: _type, ...rest } = msg;
        result = rest as ScanResult;
      }
    }
    if (done) break;
  }
  return { progress, result };
}
