/**
 * SVG canvas: one card per binding box, edges between them, drag to move,
 * click to select, click pairs in connect mode. Cards show declarations
 * above a rule and predicates below it; items repeated from an ancestor are
 * dimmed so a node reads as a delta on its parent.
 */

import type { Finding, NodeSummary, Predicate, QueryTree } from "./model.js";
import { badgeColor, badgeText, predKey } from "./model.js";
import type { EditorState, Point } from "./state.js";

export const NODE_WIDTH = 230;
const LINE_H = 15;
const HEADER_H = 26;
const PAD = 8;

export interface CanvasView {
  selected: string | null;
  connectMode: boolean;
  pendingParent: string | null;
}

export interface CanvasCallbacks {
  onSelect(id: string | null): void;
  onNodeClick(id: string): void;
  onMoved(): void;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

function text(x: number, y: number, content: string, cls: string): SVGTextElement {
  const el = svgEl("text", { x: String(x), y: String(y), class: cls });
  el.textContent = content;
  return el;
}

function qualText(qual: string | null): string {
  if (qual === null) return "*";
  if (qual === "") return '""';
  return qual;
}

function boundText(value: number | string | null, side: "min" | "max"): string {
  if (value === null) return side === "min" ? "-inf" : "inf";
  return String(value);
}

export function describePred(p: Predicate): string {
  switch (p.t) {
    case "e2o":
      return `e2o(${p.ev}, ${p.ob}, ${qualText(p.qual)})`;
    case "o2o":
      return `o2o(${p.ob}, ${p.ob2}, ${qualText(p.qual)})`;
    case "tbe":
      return `tbe(${p.from}, ${p.to}, ${boundText(p.min, "min")}, ${boundText(p.max, "max")})`;
    case "cbs":
      return `|${p.edge}| in [${p.min}, ${boundText(p.max, "max")}]`;
  }
}

interface CardLayout {
  height: number;
  anchorTop: Point;
  anchorBottom: Point;
}

function cardHeight(state: EditorState, id: string): number {
  const box = state.node(id);
  const lines =
    Math.max(1, box.vars.length) +
    box.predicates.length +
    box.constraints.length +
    box.labels.length;
  return HEADER_H + PAD + lines * LINE_H + PAD + 4;
}

function layoutOf(state: EditorState, id: string): CardLayout {
  const at = state.position(id);
  const height = cardHeight(state, id);
  return {
    height,
    anchorTop: { x: at.x + NODE_WIDTH / 2, y: at.y },
    anchorBottom: { x: at.x + NODE_WIDTH / 2, y: at.y + height },
  };
}

function renderEdges(svg: SVGSVGElement, state: EditorState): void {
  for (const edge of state.tree.edges) {
    if (!state.hasNode(edge.from) || !state.hasNode(edge.to)) continue;
    const from = layoutOf(state, edge.from).anchorBottom;
    const to = layoutOf(state, edge.to).anchorTop;
    const midY = (from.y + to.y) / 2;
    const path = svgEl("path", {
      d: `M ${from.x} ${from.y} C ${from.x} ${midY}, ${to.x} ${midY}, ${to.x} ${to.y}`,
      class: "edge",
    });
    svg.appendChild(path);
    const labelBg = svgEl("rect", {
      x: String((from.x + to.x) / 2 - 12),
      y: String(midY - 10),
      width: "24",
      height: "18",
      rx: "4",
      class: "edge-label-bg",
    });
    svg.appendChild(labelBg);
    const label = text((from.x + to.x) / 2, midY + 3, edge.label, "edge-label");
    label.setAttribute("text-anchor", "middle");
    svg.appendChild(label);
  }
}

function renderCard(
  svg: SVGSVGElement,
  state: EditorState,
  tree: QueryTree,
  id: string,
  view: CanvasView,
  findings: Finding[],
  summary: NodeSummary | undefined,
  callbacks: CanvasCallbacks,
): void {
  const box = state.node(id);
  const at = state.position(id);
  const height = cardHeight(state, id);
  const inherited = state.inherited(id);

  const group = svgEl("g", {
    transform: `translate(${at.x}, ${at.y})`,
    class: "node" + (view.selected === id ? " selected" : ""),
  });
  group.dataset.nodeId = id;

  const classes = ["card"];
  if (view.pendingParent === id) classes.push("pending");
  group.appendChild(
    svgEl("rect", {
      width: String(NODE_WIDTH),
      height: String(height),
      rx: "8",
      class: classes.join(" "),
    }),
  );
  const title = text(PAD, 17, id + (tree.root === id ? "  (root)" : ""), "node-title");
  group.appendChild(title);

  if (summary !== undefined) {
    const badge = svgEl("g", { class: "badge" });
    const label = badgeText(summary);
    const width = 7.5 * label.length + 10;
    const rect = svgEl("rect", {
      x: String(NODE_WIDTH - width - 6),
      y: "4",
      width: String(width),
      height: "18",
      rx: "9",
    });
    rect.style.fill = badgeColor(summary);
    badge.appendChild(rect);
    const textEl = text(NODE_WIDTH - 6 - width / 2, 17, label, "badge-text");
    textEl.setAttribute("text-anchor", "middle");
    badge.appendChild(textEl);
    const tip = svgEl("title");
    tip.textContent = `${summary.violated} of ${summary.satisfied + summary.violated} violated`;
    badge.appendChild(tip);
    group.appendChild(badge);
  }

  if (findings.length) {
    const marker = svgEl("g", { class: "finding-marker" });
    marker.appendChild(svgEl("circle", { cx: "-5", cy: "-5", r: "7" }));
    const bang = text(-5, -1, "!", "finding-bang");
    bang.setAttribute("text-anchor", "middle");
    marker.appendChild(bang);
    const tip = svgEl("title");
    tip.textContent = findings.map((f) => `${f.code}: ${f.message}`).join("\n");
    marker.appendChild(tip);
    group.appendChild(marker);
  }

  let y = HEADER_H + PAD + 4;
  if (box.vars.length === 0) {
    group.appendChild(text(PAD, y, "(no variables)", "soft"));
    y += LINE_H;
  }
  for (const decl of box.vars) {
    const cls = inherited.vars.has(decl.name) ? "var dim" : "var";
    const types = decl.types.length > 2 ? `${decl.types.length} types` : decl.types.join("|");
    group.appendChild(text(PAD, y, `${decl.name}: ${decl.kind} ${types}`, cls));
    y += LINE_H;
  }

  const rule = svgEl("line", {
    x1: "4",
    x2: String(NODE_WIDTH - 4),
    y1: String(y - 10),
    y2: String(y - 10),
    class: "rule",
  });
  group.appendChild(rule);
  y += 2;

  box.predicates.forEach((p) => {
    const cls = inherited.preds.has(predKey(p)) ? "pred dim" : "pred";
    group.appendChild(text(PAD, y, `• ${describePred(p)}`, cls));
    y += LINE_H;
  });
  box.constraints.forEach((p) => {
    group.appendChild(text(PAD, y, `◆ ${describePred(p)}`, "constraint"));
    y += LINE_H;
  });
  box.labels.forEach((s) => {
    const args = s.agg === "count" ? s.edge : `${s.edge}: ${s.from}..${s.to}`;
    group.appendChild(text(PAD, y, `${s.name} = ${s.agg}(${args})`, "label-line"));
    y += LINE_H;
  });

  attachDrag(group, state, id, view, callbacks);
  svg.appendChild(group);
}

function attachDrag(
  group: SVGGElement,
  state: EditorState,
  id: string,
  view: CanvasView,
  callbacks: CanvasCallbacks,
): void {
  let dragging = false;
  let moved = false;
  let start: Point = { x: 0, y: 0 };
  let origin: Point = { x: 0, y: 0 };

  group.addEventListener("pointerdown", (event) => {
    dragging = true;
    moved = false;
    start = { x: event.clientX, y: event.clientY };
    origin = state.position(id);
    group.setPointerCapture(event.pointerId);
    event.stopPropagation();
  });
  group.addEventListener("pointermove", (event) => {
    if (!dragging) return;
    const dx = event.clientX - start.x;
    const dy = event.clientY - start.y;
    if (Math.abs(dx) + Math.abs(dy) > 3) moved = true;
    if (moved && !view.connectMode) {
      state.moveNode(id, { x: origin.x + dx, y: origin.y + dy });
      callbacks.onMoved();
    }
  });
  group.addEventListener("pointerup", (event) => {
    if (!dragging) return;
    dragging = false;
    group.releasePointerCapture(event.pointerId);
    if (!moved) {
      callbacks.onNodeClick(id);
    } else {
      callbacks.onSelect(id);
    }
    event.stopPropagation();
  });
}

export function renderCanvas(
  svg: SVGSVGElement,
  state: EditorState,
  view: CanvasView,
  findings: Finding[],
  callbacks: CanvasCallbacks,
): void {
  svg.textContent = "";
  svg.classList.toggle("connect-mode", view.connectMode);

  let maxX = 640;
  let maxY = 420;
  for (const node of state.tree.nodes) {
    const at = state.position(node.id);
    maxX = Math.max(maxX, at.x + NODE_WIDTH + 60);
    maxY = Math.max(maxY, at.y + cardHeight(state, node.id) + 60);
  }
  svg.setAttribute("width", String(maxX));
  svg.setAttribute("height", String(maxY));

  renderEdges(svg, state);
  const byNode = new Map<string, Finding[]>();
  for (const f of findings) {
    // a finding's `where` is a node id or an edge label; pin edge findings
    // on the child node so they are visible on the canvas
    let target = state.hasNode(f.where) ? f.where : null;
    if (target === null) {
      const edge = state.tree.edges.find((e) => e.label === f.where);
      if (edge && state.hasNode(edge.to)) target = edge.to;
    }
    if (target === null) continue;
    const list = byNode.get(target) ?? [];
    list.push(f);
    byNode.set(target, list);
  }
  for (const node of state.tree.nodes) {
    renderCard(
      svg,
      state,
      state.tree,
      node.id,
      view,
      byNode.get(node.id) ?? [],
      state.summaries?.[node.id],
      callbacks,
    );
  }

  svg.onpointerdown = (event) => {
    if (event.target === svg) callbacks.onSelect(null);
  };
}
