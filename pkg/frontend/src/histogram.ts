/** 8-bar cavity-histogram chart built from response values only.
 *
 * Bar heights are proportional layout; the printed count under each bar is
 * the exact response value (String(v)), which is what the fixture-render
 * test checks.
 */

import { N_BINS } from "./units";

export interface HistogramSeries {
  counts: number[];
  cls: string;
  label: string;
}

export function renderHistogram(el: HTMLElement,
                                series: HistogramSeries[]): void {
  el.textContent = "";
  el.classList.add("hv-chart");
  const max = Math.max(1e-12,
                       ...series.flatMap((s) => s.counts.map((c) => Math.abs(c))));
  for (let b = 0; b < N_BINS; b++) {
    const bin = document.createElement("div");
    bin.className = "hv-bin";
    const track = document.createElement("div");
    track.className = "hv-track";
    for (const s of series) {
      const bar = document.createElement("div");
      bar.className = `hv-bar ${s.cls}`;
      const v = s.counts[b] ?? 0;
      bar.style.height = `${Math.max(0, (v / max) * 100)}%`;
      bar.title = `${s.label} bin ${b + 1}: ${v}`;
      track.appendChild(bar);
    }
    bin.appendChild(track);
    if (series.length === 1) {
      const count = document.createElement("div");
      count.className = "hv-count rn";
      count.textContent = String(series[0].counts[b] ?? 0);
      bin.appendChild(count);
    }
    const label = document.createElement("div");
    label.className = "hv-label";
    label.textContent = `r${b + 1}`;
    bin.appendChild(label);
    el.appendChild(bin);
  }
}
