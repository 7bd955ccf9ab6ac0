/**
 * Paged binding-table view for the selected node: one column per variable,
 * label columns, a verdict column when the node has constraints, a toggle to
 * include rows excluded by child-set bounds, and a CSV download link.
 */

import type { ResultPage } from "./api.js";

export interface TableCallbacks {
  onPage(offset: number): void;
  onToggleExcluded(include: boolean): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  cls?: string,
  textContent?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (textContent !== undefined) node.textContent = textContent;
  return node;
}

function formatLabel(value: number | null): string {
  if (value === null) return "";
  if (Number.isInteger(value)) return String(value);
  return value.toFixed(2);
}

export function renderTable(
  container: HTMLElement,
  nodeId: string,
  page: ResultPage,
  includeExcluded: boolean,
  csvUrl: string,
  callbacks: TableCallbacks,
): void {
  container.textContent = "";

  const bar = el("div", "table-bar");
  bar.appendChild(el("span", "table-title", `${nodeId}: ${page.total} rows`));

  const toggle = el("label", "toggle");
  const box = el("input");
  box.type = "checkbox";
  box.checked = includeExcluded;
  box.addEventListener("change", () => callbacks.onToggleExcluded(box.checked));
  toggle.appendChild(box);
  toggle.appendChild(document.createTextNode(" include rows excluded by child-set bounds"));
  bar.appendChild(toggle);

  const csv = el("a", "csv-link", "download CSV");
  csv.href = csvUrl;
  bar.appendChild(csv);
  container.appendChild(bar);

  const table = el("table", "bindings");
  const head = el("tr");
  for (const name of page.varNames) head.appendChild(el("th", undefined, name));
  for (const name of page.labelNames) head.appendChild(el("th", "num", name));
  if (includeExcluded) head.appendChild(el("th", undefined, "excluded"));
  if (page.hasConstraints) head.appendChild(el("th", undefined, "verdict"));
  table.appendChild(head);

  for (const row of page.rows) {
    const tr = el("tr", row.cbsExcluded ? "excluded" : undefined);
    for (const name of page.varNames) tr.appendChild(el("td", undefined, row.vars[name] ?? ""));
    for (const name of page.labelNames) {
      tr.appendChild(el("td", "num", formatLabel(row.labels[name] ?? null)));
    }
    if (includeExcluded) {
      tr.appendChild(el("td", undefined, row.cbsExcluded ? "yes" : ""));
    }
    if (page.hasConstraints) {
      const cell = el(
        "td",
        row.satisfied ? "ok" : "bad",
        row.cbsExcluded ? "" : row.satisfied ? "satisfied" : "violated",
      );
      cell.title = row.verdicts.map((v, i) => `constraint ${i}: ${v ? "true" : "false"}`).join("\n");
      tr.appendChild(cell);
    }
    table.appendChild(tr);
  }
  container.appendChild(table);

  const pager = el("div", "pager");
  const prev = el("button", undefined, "previous");
  prev.disabled = page.offset === 0;
  prev.addEventListener("click", () => callbacks.onPage(Math.max(0, page.offset - page.limit)));
  pager.appendChild(prev);
  const last = Math.min(page.offset + page.rows.length, page.total);
  pager.appendChild(
    el("span", "pager-info", page.total ? `${page.offset + 1}-${last} of ${page.total}` : "empty"),
  );
  const next = el("button", undefined, "next");
  next.disabled = page.offset + page.limit >= page.total;
  next.addEventListener("click", () => callbacks.onPage(page.offset + page.limit));
  pager.appendChild(next);
  container.appendChild(pager);
}
