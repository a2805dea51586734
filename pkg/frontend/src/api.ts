/** Typed fetch client for the inference service. Generate requests are
 * serialized through a queue: at most one in flight, later submissions wait
 * their turn (the service call order then matches the click order).
 */

import type {
  GenerateRequest, GenerateResponse, HealthResponse, MaterialInfo,
  PredictResponse,
} from "./types";

export class ApiError extends Error {
  readonly status: number;
  readonly field?: string;

  constructor(status: number, message: string, field?: string) {
    super(message);
    this.status = status;
    this.field = field;
  }

  get offline(): boolean {
    return this.status === 0;
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  let res: Response;
  try {
    res = await fetch(path, init);
  } catch {
    throw new ApiError(0, "service unreachable");
  }
  let body: unknown = null;
  try {
    body = await res.json();
  } catch {
    if (res.ok) throw new ApiError(res.status, "malformed JSON response");
  }
  if (!res.ok) {
    const detail = (body as { detail?: { field?: string; message?: string } } | null)?.detail;
    throw new ApiError(res.status,
                       detail?.message ?? `request failed (${res.status})`,
                       detail?.field);
  }
  return body as T;
}

export function fetchHealth(): Promise<HealthResponse> {
  return request("/api/health");
}

export function fetchMaterials(): Promise<MaterialInfo[]> {
  return request("/api/materials");
}

let generateTail: Promise<unknown> = Promise.resolve();

export function postGenerate(req: GenerateRequest): Promise<GenerateResponse> {
  const run = generateTail.then(() =>
    request<GenerateResponse>("/api/generate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    }));
  generateTail = run.catch(() => undefined);
  return run;
}

export function postPredict(body: { alloy_name: string; image: string })
    : Promise<PredictResponse> {
  return request("/api/predict", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
}
