/** Permalink state: the generate request (including seed) round-trips
 * through the querystring, so any exploration is shareable and replayable.
 */

import type { GenerateRequest } from "./types";
import { DC_FIELDS } from "./units";

export function encodeRequest(req: GenerateRequest): string {
  const params = new URLSearchParams();
  params.set("alloy", req.alloy_name);
  for (const def of DC_FIELDS) {
    params.set(def.key, String(req.d_c[def.key]));
  }
  params.set("n", String(req.n));
  if (req.seed !== undefined) params.set("seed", String(req.seed));
  return params.toString();
}

export function decodeRequest(qs: string): GenerateRequest | null {
  const params = new URLSearchParams(qs);
  const alloy = params.get("alloy");
  if (!alloy) return null;
  const d_c: Record<string, number> = {};
  for (const def of DC_FIELDS) {
    const raw = params.get(def.key);
    if (raw === null) return null;
    const v = Number(raw);
    if (!Number.isFinite(v)) return null;
    d_c[def.key] = v;
  }
  const n = Number(params.get("n") ?? "1");
  if (!Number.isInteger(n)) return null;
  const req: GenerateRequest = { alloy_name: alloy, d_c, n };
  const seedRaw = params.get("seed");
  if (seedRaw !== null) {
    const seed = Number(seedRaw);
    if (!Number.isInteger(seed) || seed < 0) return null;
    req.seed = seed;
  }
  return req;
}

export function writePermalink(req: GenerateRequest): void {
  const qs = encodeRequest(req);
  window.history.replaceState(null, "", `${window.location.pathname}?${qs}`);
}

export function readPermalink(): GenerateRequest | null {
  return decodeRequest(window.location.search);
}
