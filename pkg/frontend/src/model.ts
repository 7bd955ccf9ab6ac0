/**
 * Query-tree document model: parsing, serialization, and draft validation.
 *
 * serializeQuery emits the same bytes as the engine's serializer (two-space
 * indent, identical key order), so an unedited import re-exports identically.
 */

export type Kind = "event" | "object";
/** null means "any qualifier"; "" matches relationships stored without one. */
export type Qual = string | null;
/** Milliseconds, a shorthand/ISO duration string, or null for unbounded. */
export type Duration = number | string | null;

export interface VarDecl {
  name: string;
  kind: Kind;
  types: string[];
}

export interface E2OPred {
  t: "e2o";
  ev: string;
  ob: string;
  qual: Qual;
}

export interface O2OPred {
  t: "o2o";
  ob: string;
  ob2: string;
  qual: Qual;
}

export interface TBEPred {
  t: "tbe";
  from: string;
  to: string;
  min: Duration;
  max: Duration;
}

export interface CBSPred {
  t: "cbs";
  edge: string;
  min: number;
  max: number | null;
}

export type Predicate = E2OPred | O2OPred | TBEPred | CBSPred;

export type Agg = "count" | "min_dur" | "max_dur" | "mean_dur";

export interface LabelSpec {
  name: string;
  agg: Agg;
  edge: string;
  from?: string;
  to?: string;
}

export interface BoxNode {
  id: string;
  vars: VarDecl[];
  predicates: Predicate[];
  constraints: Predicate[];
  labels: LabelSpec[];
}

export interface EdgeDef {
  from: string;
  to: string;
  label: string;
}

export interface QueryTree {
  nodes: BoxNode[];
  edges: EdgeDef[];
  root: string;
}

export interface Finding {
  code: string;
  where: string;
  message: string;
}

export class QueryParseError extends Error {}

const AGGS: readonly string[] = ["count", "min_dur", "max_dur", "mean_dur"];

function fail(msg: string): never {
  throw new QueryParseError(msg);
}

function asRecord(value: unknown, where: string): Record<string, unknown> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    fail(`${where} must be an object`);
  }
  return value as Record<string, unknown>;
}

function asArray(value: unknown, where: string): unknown[] {
  if (!Array.isArray(value)) fail(`${where} must be an array`);
  return value;
}

function asString(value: unknown, where: string): string {
  if (typeof value !== "string") fail(`${where} must be a string`);
  return value;
}

function asQual(value: unknown, where: string): Qual {
  if (value === undefined || value === null) return null;
  return asString(value, where);
}

function asDuration(value: unknown, where: string): Duration {
  if (value === undefined || value === null) return null;
  if (typeof value === "number" || typeof value === "string") return value;
  fail(`${where} must be a number, duration string, or null`);
}

function asBound(value: unknown, where: string): number | null {
  if (value === undefined || value === null) return null;
  if (typeof value === "number" && Number.isInteger(value)) return value;
  fail(`${where} must be an integer or null`);
}

function parsePred(value: unknown, where: string): Predicate {
  const obj = asRecord(value, where);
  const t = asString(obj.t, `${where}.t`);
  switch (t) {
    case "e2o":
      return {
        t: "e2o",
        ev: asString(obj.ev, `${where}.ev`),
        ob: asString(obj.ob, `${where}.ob`),
        qual: asQual(obj.qual, `${where}.qual`),
      };
    case "o2o":
      return {
        t: "o2o",
        ob: asString(obj.ob, `${where}.ob`),
        ob2: asString(obj.ob2, `${where}.ob2`),
        qual: asQual(obj.qual, `${where}.qual`),
      };
    case "tbe":
      return {
        t: "tbe",
        from: asString(obj.from, `${where}.from`),
        to: asString(obj.to, `${where}.to`),
        min: asDuration(obj.min, `${where}.min`),
        max: asDuration(obj.max, `${where}.max`),
      };
    case "cbs": {
      const min = asBound(obj.min, `${where}.min`);
      if (min === null) fail(`${where}.min must be an integer`);
      return {
        t: "cbs",
        edge: asString(obj.edge, `${where}.edge`),
        min,
        max: asBound(obj.max, `${where}.max`),
      };
    }
    default:
      return fail(`${where}: unknown predicate tag ${JSON.stringify(t)}`);
  }
}

function parseLabel(value: unknown, where: string): LabelSpec {
  const obj = asRecord(value, where);
  const agg = asString(obj.agg, `${where}.agg`);
  if (!AGGS.includes(agg)) fail(`${where}: unknown aggregation ${JSON.stringify(agg)}`);
  const spec: LabelSpec = {
    name: asString(obj.name, `${where}.name`),
    agg: agg as Agg,
    edge: asString(obj.edge, `${where}.edge`),
  };
  if (agg !== "count") {
    spec.from = asString(obj.from, `${where}.from`);
    spec.to = asString(obj.to, `${where}.to`);
  }
  return spec;
}

function parseVar(value: unknown, where: string): VarDecl {
  const obj = asRecord(value, where);
  const kind = asString(obj.kind, `${where}.kind`);
  if (kind !== "event" && kind !== "object") {
    fail(`${where}.kind must be "event" or "object"`);
  }
  return {
    name: asString(obj.name, `${where}.name`),
    kind,
    types: asArray(obj.types, `${where}.types`).map((t, i) =>
      asString(t, `${where}.types[${i}]`),
    ),
  };
}

export function parseQuery(data: string | unknown): QueryTree {
  let doc: unknown = data;
  if (typeof data === "string") {
    try {
      doc = JSON.parse(data);
    } catch (err) {
      fail(`not valid JSON: ${(err as Error).message}`);
    }
  }
  const top = asRecord(doc, "query document");
  if (top.nodes === undefined) fail("query document needs 'nodes'");
  if (top.root === undefined) fail("query document needs 'root'");
  const nodes = asArray(top.nodes, "nodes").map((raw, i) => {
    const obj = asRecord(raw, `nodes[${i}]`);
    const id = asString(obj.id, `nodes[${i}].id`);
    return {
      id,
      vars: asArray(obj.vars ?? [], `${id}.vars`).map((v, j) => parseVar(v, `${id}.vars[${j}]`)),
      predicates: asArray(obj.predicates ?? [], `${id}.predicates`).map((p, j) =>
        parsePred(p, `${id}.predicates[${j}]`),
      ),
      constraints: asArray(obj.constraints ?? [], `${id}.constraints`).map((p, j) =>
        parsePred(p, `${id}.constraints[${j}]`),
      ),
      labels: asArray(obj.labels ?? [], `${id}.labels`).map((l, j) =>
        parseLabel(l, `${id}.labels[${j}]`),
      ),
    };
  });
  const seen = new Set<string>();
  for (const node of nodes) {
    if (seen.has(node.id)) fail(`duplicate node id ${JSON.stringify(node.id)}`);
    seen.add(node.id);
  }
  const edges = asArray(top.edges ?? [], "edges").map((raw, i) => {
    const obj = asRecord(raw, `edges[${i}]`);
    return {
      from: asString(obj.from, `edges[${i}].from`),
      to: asString(obj.to, `edges[${i}].to`),
      label: asString(obj.label, `edges[${i}].label`),
    };
  });
  return { nodes, edges, root: asString(top.root, "root") };
}

function predToJson(p: Predicate): Record<string, unknown> {
  switch (p.t) {
    case "e2o":
      return { t: "e2o", ev: p.ev, ob: p.ob, qual: p.qual };
    case "o2o":
      return { t: "o2o", ob: p.ob, ob2: p.ob2, qual: p.qual };
    case "tbe":
      return { t: "tbe", from: p.from, to: p.to, min: p.min, max: p.max };
    case "cbs":
      return { t: "cbs", edge: p.edge, min: p.min, max: p.max };
  }
}

function labelToJson(s: LabelSpec): Record<string, unknown> {
  const out: Record<string, unknown> = { name: s.name, agg: s.agg, edge: s.edge };
  if (s.agg !== "count") {
    out.from = s.from;
    out.to = s.to;
  }
  return out;
}

export function serializeQuery(tree: QueryTree): string {
  const doc = {
    nodes: tree.nodes.map((n) => ({
      id: n.id,
      vars: n.vars.map((v) => ({ name: v.name, kind: v.kind, types: [...v.types].sort() })),
      predicates: n.predicates.map(predToJson),
      constraints: n.constraints.map(predToJson),
      labels: n.labels.map(labelToJson),
    })),
    edges: tree.edges.map((e) => ({ from: e.from, to: e.to, label: e.label })),
    root: tree.root,
  };
  return JSON.stringify(doc, null, 2);
}

/** Stable identity of a basic predicate, used for refinement and dimming. */
export function predKey(p: Predicate): string {
  return JSON.stringify(predToJson(p));
}

export function isBasic(p: Predicate): boolean {
  return p.t !== "cbs";
}

function nodeById(tree: QueryTree): Map<string, BoxNode> {
  return new Map(tree.nodes.map((n) => [n.id, n]));
}

export function childEdges(tree: QueryTree, nodeId: string): EdgeDef[] {
  return tree.edges.filter((e) => e.from === nodeId);
}

export function parentOf(tree: QueryTree, nodeId: string): string | null {
  const edge = tree.edges.find((e) => e.to === nodeId);
  return edge ? edge.from : null;
}

function checkScope(node: BoxNode, findings: Finding[]): void {
  const kinds = new Map(node.vars.map((v) => [v.name, v.kind]));
  const outgoing = new Set<string>();
  const need = (name: string, kind: Kind, ctx: string) => {
    const actual = kinds.get(name);
    if (actual === undefined) {
      findings.push({
        code: "UnboundVariable",
        where: node.id,
        message: `${ctx} references undeclared variable ${JSON.stringify(name)}`,
      });
    } else if (actual !== kind) {
      findings.push({
        code: "KindMismatch",
        where: node.id,
        message: `${ctx} needs ${kind} variable, ${JSON.stringify(name)} is ${actual}`,
      });
    }
  };
  void outgoing;
  for (const [pos, preds] of [
    ["predicate", node.predicates],
    ["constraint", node.constraints],
  ] as const) {
    preds.forEach((p, i) => {
      const ctx = `${pos} ${i}`;
      switch (p.t) {
        case "e2o":
          need(p.ev, "event", ctx);
          need(p.ob, "object", ctx);
          break;
        case "o2o":
          need(p.ob, "object", ctx);
          need(p.ob2, "object", ctx);
          break;
        case "tbe":
          need(p.from, "event", ctx);
          need(p.to, "event", ctx);
          break;
        case "cbs":
          break;
      }
    });
  }
}

/**
 * Client-side validation mirroring the server's tree checks, so problems are
 * flagged on the canvas before evaluation. The server stays authoritative.
 */
export function validateDraft(tree: QueryTree): Finding[] {
  const findings: Finding[] = [];
  const byId = nodeById(tree);
  if (!byId.has(tree.root)) {
    findings.push({
      code: "UnknownNode",
      where: tree.root,
      message: "root is not a declared node",
    });
    return findings;
  }
  const labels = new Set<string>();
  const incoming = new Map<string, number>(tree.nodes.map((n) => [n.id, 0]));
  for (const edge of tree.edges) {
    if (labels.has(edge.label)) {
      findings.push({
        code: "DuplicateEdgeLabel",
        where: edge.label,
        message: "edge label used twice",
      });
    }
    labels.add(edge.label);
    for (const end of [edge.from, edge.to]) {
      if (!byId.has(end)) {
        findings.push({
          code: "UnknownNode",
          where: end,
          message: `edge ${JSON.stringify(edge.label)} references undeclared node`,
        });
      }
    }
    if (incoming.has(edge.to)) {
      incoming.set(edge.to, incoming.get(edge.to)! + 1);
    }
  }
  if ((incoming.get(tree.root) ?? 0) > 0) {
    findings.push({ code: "NotATree", where: tree.root, message: "root has an incoming edge" });
  }
  for (const node of tree.nodes) {
    const count = incoming.get(node.id) ?? 0;
    if (node.id !== tree.root && count !== 1) {
      findings.push({
        code: "NotATree",
        where: node.id,
        message: `node has ${count} incoming edges, expected 1`,
      });
    }
  }
  const reachable = new Set<string>();
  {
    const queue = [tree.root];
    while (queue.length) {
      const id = queue.shift()!;
      if (reachable.has(id)) continue;
      reachable.add(id);
      for (const e of childEdges(tree, id)) queue.push(e.to);
    }
  }
  for (const node of tree.nodes) {
    if (!reachable.has(node.id)) {
      findings.push({
        code: "NotATree",
        where: node.id,
        message: "node not reachable from the root",
      });
    }
  }
  if (findings.length) {
    return findings; // shape errors make the checks below ill-defined
  }

  for (const node of tree.nodes) {
    const names = new Set<string>();
    for (const v of node.vars) {
      if (names.has(v.name)) {
        findings.push({
          code: "DuplicateVariable",
          where: node.id,
          message: `variable ${JSON.stringify(v.name)} declared twice`,
        });
      }
      names.add(v.name);
      if (v.types.length === 0) {
        findings.push({
          code: "EmptyTypeSet",
          where: node.id,
          message: `variable ${JSON.stringify(v.name)} has no types`,
        });
      }
    }
    checkScope(node, findings);

    const outgoing = new Set(childEdges(tree, node.id).map((e) => e.label));
    for (const p of [...node.predicates, ...node.constraints]) {
      if (p.t === "cbs" && !outgoing.has(p.edge)) {
        findings.push({
          code: "UnknownEdgeLabel",
          where: node.id,
          message: `child-set bound references edge ${JSON.stringify(p.edge)} which is not outgoing`,
        });
      }
    }
    const labelNames = new Set<string>();
    for (const spec of node.labels) {
      if (labelNames.has(spec.name)) {
        findings.push({
          code: "DuplicateLabelName",
          where: node.id,
          message: `label ${JSON.stringify(spec.name)} defined twice`,
        });
      }
      labelNames.add(spec.name);
      const edge = childEdges(tree, node.id).find((e) => e.label === spec.edge);
      if (edge === undefined) {
        findings.push({
          code: "UnknownEdgeLabel",
          where: node.id,
          message: `label ${JSON.stringify(spec.name)} references edge ${JSON.stringify(spec.edge)}`,
        });
      } else if (spec.agg !== "count") {
        const childVars = new Map(byId.get(edge.to)!.vars.map((v) => [v.name, v]));
        for (const name of [spec.from, spec.to]) {
          const decl = name === undefined ? undefined : childVars.get(name);
          if (decl === undefined) {
            findings.push({
              code: "UnboundVariable",
              where: node.id,
              message: `label ${JSON.stringify(spec.name)} references ${JSON.stringify(name)} not bound in child`,
            });
          } else if (decl.kind !== "event") {
            findings.push({
              code: "KindMismatch",
              where: node.id,
              message: `label ${JSON.stringify(spec.name)} needs event variables`,
            });
          }
        }
      }
    }
  }

  for (const edge of tree.edges) {
    if (!isRefinement(byId.get(edge.from)!, byId.get(edge.to)!)) {
      findings.push({
        code: "RefinementViolation",
        where: edge.label,
        message: `node ${JSON.stringify(edge.to)} does not refine ${JSON.stringify(edge.from)}`,
      });
    }
  }
  return findings;
}

/**
 * True iff child refines parent: every parent declaration reappears with the
 * same kind and type set, and every basic parent predicate is repeated.
 * Child-set bounds never affect refinement.
 */
export function isRefinement(parent: BoxNode, child: BoxNode): boolean {
  const childVars = new Map(child.vars.map((v) => [v.name, v]));
  for (const decl of parent.vars) {
    const other = childVars.get(decl.name);
    if (
      other === undefined ||
      other.kind !== decl.kind ||
      sortedTypesKey(other.types) !== sortedTypesKey(decl.types)
    ) {
      return false;
    }
  }
  const childPreds = new Set(child.predicates.filter(isBasic).map(predKey));
  return parent.predicates.filter(isBasic).every((p) => childPreds.has(predKey(p)));
}

function sortedTypesKey(types: string[]): string {
  return JSON.stringify([...types].sort());
}

export interface NodeSummary {
  totalBasic: number;
  satisfied: number;
  violated: number;
  violationPercent: number;
}

/** Two-decimal percent, matching the engine's summary formatting. */
export function formatPercent(value: number): string {
  return value.toFixed(2);
}

/** The text shown on a node's violation badge, e.g. "50.00%". */
export function badgeText(summary: NodeSummary): string {
  return `${formatPercent(summary.violationPercent)}%`;
}

/** Badge color on a green-to-red scale by violation percentage. */
export function badgeColor(summary: NodeSummary): string {
  const hue = 120 * (1 - summary.violationPercent / 100);
  return `hsl(${hue.toFixed(0)}, 70%, 42%)`;
}
