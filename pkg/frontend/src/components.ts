/** Result-panel builders. Everything numeric printed here is copied from a
 * response field (class "rn" marks response numbers for the contract test);
 * the only derived numbers on screen are the compare view's delta column.
 */

import { drawMicrograph } from "./canvas";
import { renderDrTable } from "./drtable";
import { renderHistogram } from "./histogram";
import { decodeBase64Pgm } from "./pgm";
import type { PinnedResult } from "./state";
import type { GeneratedSample, GenerateRequest } from "./types";

export interface SampleCardOptions {
  index: number;
  onPin?: (sample: GeneratedSample) => void;
}

export function renderSampleCard(sample: GeneratedSample,
                                 request: GenerateRequest,
                                 opts: SampleCardOptions): HTMLElement {
  const card = document.createElement("section");
  card.className = "sample-card";

  const header = document.createElement("header");
  const title = document.createElement("span");
  title.textContent = `${request.alloy_name} sample ${opts.index + 1}`;
  const seed = document.createElement("span");
  seed.className = "seed-badge";
  seed.append("seed ");
  const seedValue = document.createElement("span");
  seedValue.className = "rn";
  seedValue.textContent = String(sample.seed_used);
  seed.appendChild(seedValue);
  header.append(title, seed);
  if (opts.onPin) {
    const pin = document.createElement("button");
    pin.type = "button";
    pin.className = "pin-button";
    pin.textContent = "pin";
    pin.addEventListener("click", () => opts.onPin!(sample));
    header.appendChild(pin);
  }
  card.appendChild(header);

  const canvas = document.createElement("canvas");
  canvas.className = "micrograph";
  drawMicrograph(canvas, decodeBase64Pgm(sample.image));
  card.appendChild(canvas);

  const chart = document.createElement("div");
  renderHistogram(chart, [{ counts: sample.h_v_estimate, cls: "series-a",
                            label: "estimate" }]);
  card.appendChild(chart);

  const table = document.createElement("div");
  renderDrTable(table, [{ label: "predicted", d_r: sample.d_r_prediction }]);
  card.appendChild(table);

  return card;
}

export function renderCompare(el: HTMLElement,
                              pinned: readonly PinnedResult[],
                              onUnpin?: (index: number) => void): void {
  el.textContent = "";
  const strip = document.createElement("div");
  strip.className = "compare-strip";
  pinned.forEach((pin, i) => {
    const panel = document.createElement("div");
    panel.className = "compare-panel";
    const label = document.createElement("div");
    label.className = "compare-label";
    const seedValue = document.createElement("span");
    seedValue.className = "rn";
    seedValue.textContent = String(pin.sample.seed_used);
    label.append(`#${i + 1} ${pin.request.alloy_name} seed `, seedValue);
    if (onUnpin) {
      const btn = document.createElement("button");
      btn.type = "button";
      btn.className = "unpin-button";
      btn.textContent = "unpin";
      btn.addEventListener("click", () => onUnpin(i));
      label.appendChild(btn);
    }
    panel.appendChild(label);
    const canvas = document.createElement("canvas");
    canvas.className = "micrograph";
    drawMicrograph(canvas, decodeBase64Pgm(pin.sample.image));
    panel.appendChild(canvas);
    strip.appendChild(panel);
  });
  el.appendChild(strip);

  if (pinned.length < 2) {
    const note = document.createElement("p");
    note.className = "compare-disabled";
    note.textContent = "pin at least two results to compare";
    el.appendChild(note);
    return;
  }

  const chart = document.createElement("div");
  renderHistogram(chart, pinned.map((pin, i) => ({
    counts: pin.sample.h_v_estimate,
    cls: `series-${"abcd"[i]}`,
    label: `#${i + 1}`,
  })));
  el.appendChild(chart);

  const table = document.createElement("div");
  renderDrTable(table,
                pinned.map((pin, i) => ({ label: `#${i + 1}`,
                                          d_r: pin.sample.d_r_prediction })),
                true);
  el.appendChild(table);
}
