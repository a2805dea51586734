/** Wiring for the what-if console: form -> /api/generate -> result cards,
 * pin board, compare view, permalink, offline banner.
 */

import { ApiError, fetchHealth, fetchMaterials, postGenerate } from "./api";
import { renderCompare, renderSampleCard } from "./components";
import { readPermalink, writePermalink } from "./params";
import { SessionState } from "./state";
import type { FieldError, GenerateRequest, MaterialInfo } from "./types";
import { DC_FIELDS } from "./units";
import { validateGenerateForm, type FormValues } from "./validate";

const state = new SessionState();
let alloyNames: string[] = [];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setOffline(offline: boolean, message?: string): void {
  const banner = el("offline-banner");
  banner.hidden = !offline;
  if (offline) {
    banner.textContent = message ?? "service unreachable; the form stays editable";
  }
}

function buildForm(materials: MaterialInfo[]): void {
  const select = el<HTMLSelectElement>("alloy");
  select.textContent = "";
  for (const m of materials) {
    const opt = document.createElement("option");
    opt.value = m.name;
    opt.textContent = m.name;
    select.appendChild(opt);
  }
  const fields = el("dc-fields");
  fields.textContent = "";
  for (const def of DC_FIELDS) {
    const row = document.createElement("label");
    row.className = "field-row";
    row.htmlFor = `num-${def.key}`;
    const caption = document.createElement("span");
    caption.textContent = `${def.label} (${def.unit})`;
    const slider = document.createElement("input");
    slider.type = "range";
    slider.id = `rng-${def.key}`;
    slider.min = String(def.min);
    slider.max = String(def.max);
    slider.step = String(def.step);
    slider.value = String(def.default);
    const num = document.createElement("input");
    num.type = "number";
    num.id = `num-${def.key}`;
    num.step = String(def.step);
    num.value = String(def.default);
    slider.addEventListener("input", () => { num.value = slider.value; });
    num.addEventListener("input", () => { slider.value = num.value; });
    const err = document.createElement("span");
    err.className = "field-error";
    err.id = `err-d_c.${def.key}`;
    row.append(caption, slider, num, err);
    fields.appendChild(row);
  }
}

function formValues(): FormValues {
  const d_c: Record<string, string> = {};
  for (const def of DC_FIELDS) {
    d_c[def.key] = el<HTMLInputElement>(`num-${def.key}`).value;
  }
  return {
    alloy_name: el<HTMLSelectElement>("alloy").value,
    d_c,
    n: el<HTMLInputElement>("n").value,
    seed: el<HTMLInputElement>("seed").value,
  };
}

function showErrors(errors: FieldError[]): void {
  for (const node of document.querySelectorAll(".field-error")) {
    node.textContent = "";
  }
  for (const e of errors) {
    const slot = document.getElementById(`err-${e.field}`)
        ?? el("form-errors");
    slot.textContent = e.message;
  }
}

function applyRequestToForm(req: GenerateRequest): void {
  el<HTMLSelectElement>("alloy").value = req.alloy_name;
  for (const def of DC_FIELDS) {
    const v = String(req.d_c[def.key]);
    el<HTMLInputElement>(`num-${def.key}`).value = v;
    el<HTMLInputElement>(`rng-${def.key}`).value = v;
  }
  el<HTMLInputElement>("n").value = String(req.n);
  el<HTMLInputElement>("seed").value = req.seed === undefined ? "" : String(req.seed);
}

function refreshCompare(): void {
  renderCompare(el("compare"), state.pinned, (i) => {
    state.unpin(i);
    refreshCompare();
  });
}

function renderHistory(): void {
  const list = el("history");
  list.textContent = "";
  state.history.forEach((entry) => {
    const item = document.createElement("li");
    const btn = document.createElement("button");
    btn.type = "button";
    const dc = DC_FIELDS.map((d) => `${d.key}=${entry.request.d_c[d.key]}`).join(" ");
    btn.textContent =
        `${entry.request.alloy_name} ${dc} n=${entry.request.n} seed=${entry.response.seed_used}`;
    btn.addEventListener("click", () => {
      applyRequestToForm({ ...entry.request, seed: entry.response.seed_used });
    });
    item.appendChild(btn);
    list.appendChild(item);
  });
}

async function submit(): Promise<void> {
  const values = formValues();
  const errors = validateGenerateForm(values, alloyNames);
  showErrors(errors);
  if (errors.length > 0) return;

  const req: GenerateRequest = {
    alloy_name: values.alloy_name,
    d_c: Object.fromEntries(
        DC_FIELDS.map((d) => [d.key, Number(values.d_c[d.key])])),
    n: Number(values.n),
  };
  if (values.seed.trim() !== "") req.seed = Number(values.seed);

  const button = el<HTMLButtonElement>("submit");
  button.disabled = true;
  try {
    const res = await postGenerate(req);
    setOffline(false);
    state.pushHistory(req, res);
    renderHistory();
    writePermalink({ ...req, seed: res.seed_used });

    const results = el("results");
    results.textContent = "";
    res.samples.forEach((sample, index) => {
      results.appendChild(renderSampleCard(sample, req, {
        index,
        onPin: (s) => {
          if (!state.pin(req, s)) {
            el("form-errors").textContent = "pin board full (4); unpin first";
            return;
          }
          refreshCompare();
        },
      }));
    });
  } catch (err) {
    if (err instanceof ApiError && err.offline) {
      setOffline(true);
    } else if (err instanceof ApiError && err.field) {
      showErrors([{ field: err.field, message: err.message }]);
    } else {
      el("form-errors").textContent = String(err);
    }
  } finally {
    button.disabled = false;
  }
}

export async function boot(): Promise<void> {
  try {
    const health = await fetchHealth();
    setOffline(health.status !== "ready",
               health.status !== "ready" ? `service ${health.status}` : undefined);
  } catch {
    setOffline(true);
  }
  try {
    const materials = await fetchMaterials();
    alloyNames = materials.map((m) => m.name);
    buildForm(materials);
  } catch {
    setOffline(true);
    buildForm([]);
  }
  const fromLink = readPermalink();
  if (fromLink && (alloyNames.length === 0 || alloyNames.includes(fromLink.alloy_name))) {
    applyRequestToForm(fromLink);
  }
  el<HTMLFormElement>("whatif-form").addEventListener("submit", (ev) => {
    ev.preventDefault();
    void submit();
  });
  refreshCompare();
}

if (document.getElementById("whatif-form")) {
  void boot();
}
