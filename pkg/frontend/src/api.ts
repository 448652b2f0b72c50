// HTTP client for the caricatureforge session service. All geometry arrives
// as the binary mesh payload; errors surface the server's {code, message}.

import { decodeMeshPayload, MeshPayload } from "./codec";

export interface SessionReport {
  vertex_count: number;
  face_count: number;
  gamma_f: number;
  K_inf: number;
  bbox_diagonal: number;
  residual_norm: number[];
  precompute_seconds: number;
  labels: Record<string, number>;
}

export interface ErrorCurveReport {
  gamma_f: number;
  gammas: number[];
  err_linf: number[];
  err_l2: number[];
  bound: number[];
  C_P: number;
  K_inf: number;
}

export interface SessionMeta {
  id: string;
  gamma_f: number;
  report: SessionReport;
  labels: Record<string, number[]>;
  edits: Array<{ edit_id: string; region: string[]; gamma: number }>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function raiseForStatus(resp: Response): Promise<void> {
  if (resp.ok) return;
  let code = "http_error";
  let message = `${resp.status} ${resp.statusText}`;
  try {
    const doc = await resp.json();
    if (doc && typeof doc === "object") {
      code = doc.code ?? code;
      message = doc.message ?? JSON.stringify(doc);
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(resp.status, code, message);
}

export class ForgeClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  async createSession(
    meshFile: Blob,
    meshName: string,
    options: { gammaF?: number; epsilon?: number; labels?: Blob } = {},
  ): Promise<{ id: string; report: SessionReport }> {
    const form = new FormData();
    form.append("mesh", meshFile, meshName);
    if (options.labels) {
      form.append("labels", options.labels, "labels.json");
    }
    if (options.gammaF !== undefined) {
      form.append("gamma_f", String(options.gammaF));
    }
    if (options.epsilon !== undefined) {
      form.append("epsilon", String(options.epsilon));
    }
    const resp = await this.fetchFn(`${this.baseUrl}/sessions`, {
      method: "POST",
      body: form,
    });
    await raiseForStatus(resp);
    return resp.json();
  }

  async getBlend(sessionId: string, gamma: number): Promise<MeshPayload> {
    const resp = await this.fetchFn(
      `${this.baseUrl}/sessions/${sessionId}/blend?gamma=${gamma}`,
    );
    await raiseForStatus(resp);
    return decodeMeshPayload(await resp.arrayBuffer());
  }

  async submitEdit(
    sessionId: string,
    region: string | string[],
    gamma: number,
    indices?: number[],
  ): Promise<MeshPayload> {
    const body: Record<string, unknown> = { region, gamma };
    if (indices) {
      body.indices = indices;
    }
    const resp = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/edits`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    await raiseForStatus(resp);
    return decodeMeshPayload(await resp.arrayBuffer());
  }

  async errorCurve(sessionId: string, samples = 11, calibrate = false): Promise<ErrorCurveReport> {
    const resp = await this.fetchFn(
      `${this.baseUrl}/sessions/${sessionId}/error-curve?samples=${samples}&calibrate=${calibrate}`,
    );
    await raiseForStatus(resp);
    return resp.json();
  }

  async meta(sessionId: string): Promise<SessionMeta> {
    const resp = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/meta`);
    await raiseForStatus(resp);
    return resp.json();
  }
}

/**
 * Stale-response discarding keyed by a monotonically increasing revision:
 * only the newest in-flight request of a keyed family may apply its result.
 */
export class RevisionGate {
  private revisions = new Map<string, number>();

  issue(key: string): number {
    const next = (this.revisions.get(key) ?? 0) + 1;
    this.revisions.set(key, next);
    return next;
  }

  isCurrent(key: string, revision: number): boolean {
    return this.revisions.get(key) === revision;
  }

  /** Run an async job; resolve null if a newer request superseded it. */
  async run<T>(key: string, job: () => Promise<T>): Promise<T | null> {
    const rev = this.issue(key);
    const result = await job();
    return this.isCurrent(key, rev) ? result : null;
  }
}
