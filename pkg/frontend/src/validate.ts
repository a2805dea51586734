/** Client-side validation mirroring the service's 400 contract: same field
 * paths, same message shapes. A form that passes here can still be rejected
 * by the service (it owns the contract); a form that fails here is never
 * sent.
 */

import type { FieldError } from "./types";
import { DC_FIELDS } from "./units";

export interface FormValues {
  alloy_name: string;
  d_c: Record<string, string>;
  n: string;
  seed: string;
}

function asNumber(raw: string): number | null {
  if (raw.trim() === "") return null;
  const v = Number(raw);
  return Number.isFinite(v) ? v : null;
}

export function validateGenerateForm(values: FormValues,
                                     alloyNames: string[]): FieldError[] {
  const errors: FieldError[] = [];
  if (!alloyNames.includes(values.alloy_name)) {
    errors.push({
      field: "alloy_name",
      message: `unknown alloy ${JSON.stringify(values.alloy_name)}; valid names: ${alloyNames.join(", ")}`,
    });
  }
  for (const def of DC_FIELDS) {
    const raw = values.d_c[def.key] ?? "";
    const label = `d_c.${def.key}`;
    if (raw.trim() === "") {
      errors.push({ field: label, message: "missing required field" });
      continue;
    }
    const v = asNumber(raw);
    if (v === null) {
      errors.push({ field: label, message: `expected a number, got ${JSON.stringify(raw)}` });
      continue;
    }
    if (def.key.startsWith("phi_") && v < 0) {
      errors.push({ field: label, message: `${def.key} must be nonnegative, got ${v}` });
    }
    if (def.key.startsWith("T_") && !(v > 0)) {
      errors.push({ field: label, message: `${def.key} must be positive, got ${v}` });
    }
  }
  const n = asNumber(values.n);
  if (n === null || !Number.isInteger(n) || n < 1 || n > 16) {
    errors.push({
      field: "n",
      message: `sample count must be an integer in [1, 16], got ${JSON.stringify(values.n)}`,
    });
  }
  if (values.seed.trim() !== "") {
    const seed = asNumber(values.seed);
    if (seed === null || !Number.isInteger(seed) || seed < 0) {
      errors.push({
        field: "seed",
        message: `seed must be a nonnegative integer, got ${JSON.stringify(values.seed)}`,
      });
    }
  }
  return errors;
}
