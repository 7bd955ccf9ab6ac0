/**
 * Editor state: the query draft, canvas layout, and the last evaluation.
 *
 * Mutators keep the tree invariant that every child redeclares its parent's
 * variables and repeats its basic predicates, so a draft edited only through
 * this class cannot drift into a refinement violation. Rejected edits throw
 * EditError with a message the app shows inline.
 */

import type {
  BoxNode,
  Finding,
  Kind,
  LabelSpec,
  NodeSummary,
  Predicate,
  QueryTree,
  VarDecl,
} from "./model.js";
import {
  childEdges,
  isBasic,
  parentOf,
  parseQuery,
  predKey,
  serializeQuery,
  validateDraft,
} from "./model.js";

export class EditError extends Error {}

export interface Point {
  x: number;
  y: number;
}

export interface InheritedSets {
  vars: Set<string>;
  preds: Set<string>;
}

const NODE_W = 230;
const NODE_GAP_X = 42;
const NODE_GAP_Y = 176;

function deepCopy<T>(value: T): T {
  return JSON.parse(JSON.stringify(value)) as T;
}

export class EditorState {
  tree: QueryTree = { nodes: [], edges: [], root: "" };
  positions: Map<string, Point> = new Map();
  logId: string | null = null;
  eventTypes: string[] = [];
  objectTypes: string[] = [];
  qualifiers: string[] = [];
  resultId: string | null = null;
  summaries: Record<string, NodeSummary> | null = null;

  node(id: string): BoxNode {
    const found = this.tree.nodes.find((n) => n.id === id);
    if (!found) throw new EditError(`no node ${JSON.stringify(id)}`);
    return found;
  }

  hasNode(id: string): boolean {
    return this.tree.nodes.some((n) => n.id === id);
  }

  findings(): Finding[] {
    return validateDraft(this.tree);
  }

  clearResults(): void {
    this.resultId = null;
    this.summaries = null;
  }

  setLog(logId: string, eventTypes: string[], objectTypes: string[], qualifiers: string[]): void {
    this.logId = logId;
    this.eventTypes = eventTypes;
    this.objectTypes = objectTypes;
    this.qualifiers = qualifiers;
    this.clearResults();
  }

  loadQuery(text: string): void {
    this.tree = parseQuery(text);
    this.clearResults();
    this.autoLayout();
  }

  exportQuery(): string {
    return serializeQuery(this.tree);
  }

  nextNodeId(): string {
    for (let i = 0; ; i++) {
      const id = `v${i}`;
      if (!this.hasNode(id)) return id;
    }
  }

  nextEdgeLabel(): string {
    const used = new Set(this.tree.edges.map((e) => e.label));
    for (let i = 0; ; i++) {
      const label = i < 26 ? String.fromCharCode(65 + i) : `A${i - 25}`;
      if (!used.has(label)) return label;
    }
  }

  addNode(at?: Point): string {
    const id = this.nextNodeId();
    this.tree.nodes.push({ id, vars: [], predicates: [], constraints: [], labels: [] });
    if (this.tree.nodes.length === 1) this.tree.root = id;
    this.positions.set(id, at ?? { x: 40 + 24 * this.tree.nodes.length, y: 40 + 24 * this.tree.nodes.length });
    this.clearResults();
    return id;
  }

  removeNode(id: string): void {
    this.node(id);
    const parent = parentOf(this.tree, id);
    const dropped = new Set(
      this.tree.edges.filter((e) => e.from === id || e.to === id).map((e) => e.label),
    );
    this.tree.edges = this.tree.edges.filter((e) => e.from !== id && e.to !== id);
    this.tree.nodes = this.tree.nodes.filter((n) => n.id !== id);
    this.positions.delete(id);
    if (parent !== null) {
      // the parent may reference the removed edge in bounds or labels
      const box = this.node(parent);
      box.predicates = box.predicates.filter((p) => p.t !== "cbs" || !dropped.has(p.edge));
      box.constraints = box.constraints.filter((p) => p.t !== "cbs" || !dropped.has(p.edge));
      box.labels = box.labels.filter((s) => !dropped.has(s.edge));
    }
    if (this.tree.root === id) {
      this.tree.root = this.tree.nodes.length ? this.tree.nodes[0].id : "";
    }
    this.clearResults();
  }

  renameNode(id: string, newId: string): void {
    if (newId === id) return;
    if (!newId) throw new EditError("node id must not be empty");
    if (this.hasNode(newId)) throw new EditError(`node ${JSON.stringify(newId)} already exists`);
    const box = this.node(id);
    box.id = newId;
    for (const e of this.tree.edges) {
      if (e.from === id) e.from = newId;
      if (e.to === id) e.to = newId;
    }
    if (this.tree.root === id) this.tree.root = newId;
    const at = this.positions.get(id);
    if (at) {
      this.positions.delete(id);
      this.positions.set(newId, at);
    }
    this.clearResults();
  }

  private descendants(id: string): string[] {
    const out: string[] = [];
    const queue = childEdges(this.tree, id).map((e) => e.to);
    while (queue.length) {
      const next = queue.shift()!;
      out.push(next);
      queue.push(...childEdges(this.tree, next).map((e) => e.to));
    }
    return out;
  }

  private isAncestor(maybeAncestor: string, id: string): boolean {
    let current: string | null = id;
    while (current !== null) {
      if (current === maybeAncestor) return true;
      current = parentOf(this.tree, current);
    }
    return false;
  }

  connect(parentId: string, childId: string, label?: string): string {
    const parent = this.node(parentId);
    const child = this.node(childId);
    if (parentId === childId) throw new EditError("cannot connect a node to itself");
    if (parentOf(this.tree, childId) !== null) {
      throw new EditError(`${childId} already has a parent`);
    }
    if (this.isAncestor(childId, parentId)) {
      throw new EditError("connection would create a cycle");
    }
    const edgeLabel = label ?? this.nextEdgeLabel();
    if (this.tree.edges.some((e) => e.label === edgeLabel)) {
      throw new EditError(`edge label ${JSON.stringify(edgeLabel)} is already used`);
    }
    // the child and its subtree take over the parent's scope
    const targets = [child, ...this.descendants(childId).map((id) => this.node(id))];
    for (const decl of parent.vars) {
      for (const target of targets) {
        const existing = target.vars.find((v) => v.name === decl.name);
        const sameTypes =
          existing !== undefined &&
          JSON.stringify([...existing.types].sort()) === JSON.stringify([...decl.types].sort());
        if (existing !== undefined && (existing.kind !== decl.kind || !sameTypes)) {
          throw new EditError(
            `${target.id} already declares ${JSON.stringify(decl.name)} with a different kind or types`,
          );
        }
      }
    }
    for (const decl of parent.vars) {
      for (const target of targets) this.pushVar(target, decl);
    }
    for (const p of parent.predicates.filter(isBasic)) {
      for (const target of targets) this.pushPred(target, p);
    }
    this.tree.edges.push({ from: parentId, to: childId, label: edgeLabel });
    if (this.tree.root === childId) {
      let top = parentId;
      for (let up = parentOf(this.tree, top); up !== null; up = parentOf(this.tree, top)) {
        top = up;
      }
      this.tree.root = top;
    }
    this.clearResults();
    return edgeLabel;
  }

  disconnect(label: string): void {
    const edge = this.tree.edges.find((e) => e.label === label);
    if (!edge) throw new EditError(`no edge ${JSON.stringify(label)}`);
    this.tree.edges = this.tree.edges.filter((e) => e !== edge);
    const box = this.node(edge.from);
    box.predicates = box.predicates.filter((p) => p.t !== "cbs" || p.edge !== label);
    box.constraints = box.constraints.filter((p) => p.t !== "cbs" || p.edge !== label);
    box.labels = box.labels.filter((s) => s.edge !== label);
    this.clearResults();
  }

  private pushVar(box: BoxNode, decl: VarDecl): void {
    const existing = box.vars.find((v) => v.name === decl.name);
    if (existing === undefined) {
      box.vars.push(deepCopy(decl));
      return;
    }
    const sameTypes =
      JSON.stringify([...existing.types].sort()) === JSON.stringify([...decl.types].sort());
    if (existing.kind !== decl.kind || !sameTypes) {
      throw new EditError(
        `${box.id} already declares ${JSON.stringify(decl.name)} with a different kind or types`,
      );
    }
  }

  private pushPred(box: BoxNode, pred: Predicate): void {
    if (!box.predicates.some((p) => predKey(p) === predKey(pred))) {
      box.predicates.push(deepCopy(pred));
    }
  }

  addVar(nodeId: string, decl: VarDecl): void {
    if (!decl.name) throw new EditError("variable name must not be empty");
    if (decl.types.length === 0) throw new EditError("pick at least one type");
    const box = this.node(nodeId);
    if (box.vars.some((v) => v.name === decl.name)) {
      throw new EditError(`${nodeId} already declares ${JSON.stringify(decl.name)}`);
    }
    this.pushVar(box, decl);
    for (const id of this.descendants(nodeId)) this.pushVar(this.node(id), decl);
    this.clearResults();
  }

  setVarTypes(nodeId: string, name: string, types: string[]): void {
    if (types.length === 0) throw new EditError("pick at least one type");
    if (this.inherited(nodeId).vars.has(name)) {
      throw new EditError(`${JSON.stringify(name)} is inherited, edit it on the ancestor`);
    }
    const apply = (box: BoxNode) => {
      const decl = box.vars.find((v) => v.name === name);
      if (decl) decl.types = [...types];
    };
    apply(this.node(nodeId));
    for (const id of this.descendants(nodeId)) apply(this.node(id));
    this.clearResults();
  }

  removeVar(nodeId: string, name: string): void {
    const box = this.node(nodeId);
    if (this.inherited(nodeId).vars.has(name)) {
      throw new EditError(`${JSON.stringify(name)} is inherited, remove it on the ancestor`);
    }
    if (!box.vars.some((v) => v.name === name)) {
      throw new EditError(`${nodeId} does not declare ${JSON.stringify(name)}`);
    }
    const uses = (p: Predicate): boolean => {
      switch (p.t) {
        case "e2o":
          return p.ev === name || p.ob === name;
        case "o2o":
          return p.ob === name || p.ob2 === name;
        case "tbe":
          return p.from === name || p.to === name;
        case "cbs":
          return false;
      }
    };
    const strip = (b: BoxNode) => {
      b.vars = b.vars.filter((v) => v.name !== name);
      b.predicates = b.predicates.filter((p) => !uses(p));
      b.constraints = b.constraints.filter((p) => !uses(p));
    };
    strip(box);
    for (const id of this.descendants(nodeId)) strip(this.node(id));
    this.clearResults();
  }

  private checkScope(box: BoxNode, pred: Predicate): void {
    const kinds = new Map(box.vars.map((v) => [v.name, v.kind]));
    const need = (name: string, kind: Kind) => {
      if (kinds.get(name) !== kind) {
        throw new EditError(`${box.id} has no ${kind} variable ${JSON.stringify(name)}`);
      }
    };
    switch (pred.t) {
      case "e2o":
        need(pred.ev, "event");
        need(pred.ob, "object");
        break;
      case "o2o":
        need(pred.ob, "object");
        need(pred.ob2, "object");
        break;
      case "tbe":
        need(pred.from, "event");
        need(pred.to, "event");
        break;
      case "cbs":
        if (!childEdges(this.tree, box.id).some((e) => e.label === pred.edge)) {
          throw new EditError(`${box.id} has no outgoing edge ${JSON.stringify(pred.edge)}`);
        }
        break;
    }
  }

  addPredicate(nodeId: string, pred: Predicate, asConstraint: boolean): void {
    const box = this.node(nodeId);
    this.checkScope(box, pred);
    const bucket = asConstraint ? box.constraints : box.predicates;
    if (bucket.some((p) => predKey(p) === predKey(pred))) {
      throw new EditError("that predicate is already present");
    }
    bucket.push(deepCopy(pred));
    if (!asConstraint && isBasic(pred)) {
      for (const id of this.descendants(nodeId)) this.pushPred(this.node(id), pred);
    }
    this.clearResults();
  }

  removePredicate(nodeId: string, index: number, fromConstraints: boolean): void {
    const box = this.node(nodeId);
    const bucket = fromConstraints ? box.constraints : box.predicates;
    const pred = bucket[index];
    if (pred === undefined) throw new EditError("no such predicate");
    if (!fromConstraints && this.inherited(nodeId).preds.has(predKey(pred))) {
      throw new EditError("that predicate is inherited, remove it on the ancestor");
    }
    bucket.splice(index, 1);
    this.clearResults();
  }

  /** Move a predicate between the filtering and constraint roles. */
  togglePredicate(nodeId: string, index: number, fromConstraints: boolean): void {
    const box = this.node(nodeId);
    const source = fromConstraints ? box.constraints : box.predicates;
    const target = fromConstraints ? box.predicates : box.constraints;
    const pred = source[index];
    if (pred === undefined) throw new EditError("no such predicate");
    if (!fromConstraints && this.inherited(nodeId).preds.has(predKey(pred))) {
      throw new EditError("that predicate is inherited, change it on the ancestor");
    }
    source.splice(index, 1);
    target.push(pred);
    if (fromConstraints && isBasic(pred)) {
      // now a filtering predicate, so the subtree must repeat it
      for (const id of this.descendants(nodeId)) this.pushPred(this.node(id), pred);
    }
    this.clearResults();
  }

  addLabel(nodeId: string, spec: LabelSpec): void {
    const box = this.node(nodeId);
    if (!spec.name) throw new EditError("label name must not be empty");
    if (box.labels.some((s) => s.name === spec.name)) {
      throw new EditError(`label ${JSON.stringify(spec.name)} already exists`);
    }
    const edge = childEdges(this.tree, nodeId).find((e) => e.label === spec.edge);
    if (!edge) throw new EditError(`${nodeId} has no outgoing edge ${JSON.stringify(spec.edge)}`);
    if (spec.agg !== "count") {
      const child = this.node(edge.to);
      for (const name of [spec.from, spec.to]) {
        if (!child.vars.some((v) => v.name === name && v.kind === "event")) {
          throw new EditError(`${edge.to} has no event variable ${JSON.stringify(name)}`);
        }
      }
    }
    box.labels.push(deepCopy(spec));
    this.clearResults();
  }

  removeLabel(nodeId: string, name: string): void {
    const box = this.node(nodeId);
    const before = box.labels.length;
    box.labels = box.labels.filter((s) => s.name !== name);
    if (box.labels.length === before) throw new EditError(`no label ${JSON.stringify(name)}`);
    this.clearResults();
  }

  /** Variable names and predicate keys the node repeats from its ancestors. */
  inherited(nodeId: string): InheritedSets {
    const vars = new Set<string>();
    const preds = new Set<string>();
    for (let up = parentOf(this.tree, nodeId); up !== null; up = parentOf(this.tree, up)) {
      const box = this.node(up);
      for (const v of box.vars) vars.add(v.name);
      for (const p of box.predicates.filter(isBasic)) preds.add(predKey(p));
    }
    return { vars, preds };
  }

  moveNode(id: string, at: Point): void {
    this.positions.set(id, at);
  }

  position(id: string): Point {
    return this.positions.get(id) ?? { x: 40, y: 40 };
  }

  /** Layered placement: depth below the root is the row, siblings spread out. */
  autoLayout(): void {
    const depth = new Map<string, number>();
    const roots = this.tree.nodes
      .map((n) => n.id)
      .filter((id) => parentOf(this.tree, id) === null);
    const queue = [...roots];
    for (const id of roots) depth.set(id, 0);
    while (queue.length) {
      const id = queue.shift()!;
      for (const e of childEdges(this.tree, id)) {
        if (!depth.has(e.to)) {
          depth.set(e.to, depth.get(id)! + 1);
          queue.push(e.to);
        }
      }
    }
    const rows = new Map<number, string[]>();
    for (const node of this.tree.nodes) {
      const d = depth.get(node.id) ?? 0;
      const row = rows.get(d) ?? [];
      row.push(node.id);
      rows.set(d, row);
    }
    for (const [d, ids] of rows) {
      ids.forEach((id, i) => {
        this.positions.set(id, { x: 40 + i * (NODE_W + NODE_GAP_X), y: 40 + d * NODE_GAP_Y });
      });
    }
  }
}
