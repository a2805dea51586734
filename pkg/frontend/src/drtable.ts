/** 12-row performance table; values are exact response fields. */

import { DR_ROWS } from "./units";

/** Delta is presentation arithmetic between two displayed response values. */
export function formatDelta(a: number, b: number): string {
  const d = a - b;
  if (d === 0) return "0";
  return d.toPrecision(6);
}

export function renderDrTable(el: HTMLElement,
                              columns: { label: string; d_r: Record<string, number> }[],
                              withDelta: boolean = false): void {
  el.textContent = "";
  const table = document.createElement("table");
  table.className = "dr-table";
  const head = table.createTHead().insertRow();
  for (const text of ["field", "unit", ...columns.map((c) => c.label)]) {
    const th = document.createElement("th");
    th.textContent = text;
    head.appendChild(th);
  }
  if (withDelta) {
    for (let i = 1; i < columns.length; i++) {
      const th = document.createElement("th");
      th.textContent = `delta #${i + 1} - #1`;
      head.appendChild(th);
    }
  }
  const body = table.createTBody();
  for (const row of DR_ROWS) {
    const tr = body.insertRow();
    tr.dataset.field = row.key;
    tr.insertCell().textContent = row.key;
    tr.insertCell().textContent = row.unit;
    for (const col of columns) {
      const td = tr.insertCell();
      td.className = "dr-value rn";
      td.textContent = String(col.d_r[row.key]);
    }
    if (withDelta) {
      for (let i = 1; i < columns.length; i++) {
        const td = tr.insertCell();
        td.className = "dr-delta";
        td.textContent = formatDelta(columns[i].d_r[row.key],
                                     columns[0].d_r[row.key]);
      }
    }
  }
  el.appendChild(table);
}
