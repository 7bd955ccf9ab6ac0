"""The query algebra: bindings, predicates, binding boxes, query trees.

A query tree is a rooted tree of binding boxes.  Each box declares typed
variables and predicates; child boxes refine their parent (superset of
variable declarations with equal type sets, superset of basic predicates).
Child-set predicates count the rows a child node produces per parent row;
constraints are predicates evaluated as verdicts instead of filters.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Optional, Union

import numpy as np

from .errors import InvalidQuery, ParseError
from .index import IndexedLog
from .oced import WILDCARD

KIND_EVENT = "event"
KIND_OBJECT = "object"

WEEK_MS = 7 * 86_400_000
_UNIT_MS = {"w": WEEK_MS, "d": 86_400_000, "h": 3_600_000, "m": 60_000, "s": 1000, "ms": 1}
_SHORT_RE = re.compile(r"^(-?\d+)\s*(ms|[wdhms])$")
_ISO_RE = re.compile(
    r"^(-?)P(?:(\d+)W|(?=\d|T)(?:(\d+)D)?(?:T(?=\d)(?:(\d+)H)?(?:(\d+)M)?(?:(\d+(?:\.\d+)?)S)?)?)$"
)


def parse_duration(value: Union[int, float, str, None]) -> Optional[int]:
    """Milliseconds from an int, an ISO-8601 duration, or shorthand like "4w".

    None stays None (an unbounded end).
    """
    if value is None:
        return None
    if isinstance(value, bool):
        raise ParseError(f"not a duration: {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if not value.is_integer():
            raise ParseError(f"duration must be whole milliseconds: {value!r}")
        return int(value)
    text = value.strip()
    m = _SHORT_RE.match(text)
    if m:
        return int(m.group(1)) * _UNIT_MS[m.group(2)]
    if re.fullmatch(r"-?\d+", text):
        return int(text)
    m = _ISO_RE.match(text)
    if m:
        sign = -1 if m.group(1) else 1
        if m.group(2) is not None:
            return sign * int(m.group(2)) * WEEK_MS
        days, hours, minutes = (int(g) if g else 0 for g in m.group(3, 4, 5))
        ms = ((days * 24 + hours) * 60 + minutes) * 60_000
        if m.group(6):
            sec_ms = round(float(m.group(6)) * 1000)
            ms += int(sec_ms)
        return sign * ms
    raise ParseError(f"not a duration: {value!r}")


@dataclass(frozen=True, slots=True)
class E2O:
    """Event-to-object: the event references the object under the qualifier."""

    ev: str
    ob: str
    qual: Any = WILDCARD  # qualifier string, or WILDCARD for any


@dataclass(frozen=True, slots=True)
class O2O:
    """Object-to-object: the first object references the second."""

    ob: str
    ob2: str
    qual: Any = WILDCARD


@dataclass(frozen=True, slots=True)
class TBE:
    """Time between events: tmin <= time(to) - time(from) <= tmax, inclusive.

    None bounds are unbounded; negative bounds are allowed (the difference
    is signed).
    """

    ev_from: str
    ev_to: str
    tmin: Optional[int] = None
    tmax: Optional[int] = None

    def __post_init__(self) -> None:
        if self.tmin is not None and self.tmax is not None and self.tmin > self.tmax:
            raise ValueError(f"TBE bounds out of order: [{self.tmin}, {self.tmax}]")


@dataclass(frozen=True, slots=True)
class CBS:
    """Child-set size: nmin <= |child rows under the edge| <= nmax."""

    edge: str
    nmin: int = 0
    nmax: Optional[int] = None  # None = unbounded

    def __post_init__(self) -> None:
        if self.nmin < 0:
            raise ValueError(f"CBS lower bound must be >= 0, got {self.nmin}")
        if self.nmax is not None and self.nmin > self.nmax:
            raise ValueError(f"CBS bounds out of order: [{self.nmin}, {self.nmax}]")


Predicate = Union[E2O, O2O, TBE, CBS]
BASIC_KINDS = (E2O, O2O, TBE)

AGG_COUNT = "count"
AGG_MIN_DUR = "min_dur"
AGG_MAX_DUR = "max_dur"
AGG_MEAN_DUR = "mean_dur"
_AGGS = (AGG_COUNT, AGG_MIN_DUR, AGG_MAX_DUR, AGG_MEAN_DUR)


@dataclass(frozen=True, slots=True)
class LabelSpec:
    """A computed output column: child-row count or a duration aggregate
    (time(ev_to) - time(ev_from)) over the rows of one child edge."""

    name: str
    agg: str
    edge: str
    ev_from: Optional[str] = None
    ev_to: Optional[str] = None

    def __post_init__(self) -> None:
        if self.agg not in _AGGS:
            raise ValueError(f"unknown aggregation {self.agg!r}")
        if self.agg != AGG_COUNT and (self.ev_from is None or self.ev_to is None):
            raise ValueError(f"{self.agg} needs ev_from and ev_to")


@dataclass(frozen=True, slots=True)
class VarDecl:
    name: str
    kind: str  # KIND_EVENT or KIND_OBJECT
    types: frozenset[str]


@dataclass(frozen=True, slots=True)
class BindingBox:
    vars: tuple[VarDecl, ...] = ()
    predicates: tuple[Predicate, ...] = ()
    constraints: tuple[Predicate, ...] = ()
    labels: tuple[LabelSpec, ...] = ()

    def var_map(self) -> dict[str, VarDecl]:
        return {v.name: v for v in self.vars}

    def basic_predicates(self) -> frozenset[Predicate]:
        return frozenset(p for p in self.predicates if isinstance(p, BASIC_KINDS))

    def cbs_predicates(self) -> tuple[CBS, ...]:
        return tuple(p for p in self.predicates if isinstance(p, CBS))


class Edge(NamedTuple):
    parent: str
    child: str
    label: str


@dataclass(slots=True)
class QueryTree:
    nodes: dict[str, BindingBox]
    root: str
    edges: tuple[Edge, ...]
    _children: dict[str, tuple[Edge, ...]] = field(init=False, repr=False, compare=False)
    _parent: dict[str, str] = field(init=False, repr=False, compare=False)
    _by_label: dict[str, Edge] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        children: dict[str, list[Edge]] = {n: [] for n in self.nodes}
        parent: dict[str, str] = {}
        by_label: dict[str, Edge] = {}
        for e in self.edges:
            children.setdefault(e.parent, []).append(e)
            parent.setdefault(e.child, e.parent)
            by_label.setdefault(e.label, e)
        self._children = {n: tuple(v) for n, v in children.items()}
        self._parent = parent
        self._by_label = by_label

    def children(self, node_id: str) -> tuple[Edge, ...]:
        return self._children.get(node_id, ())

    def parent_of(self, node_id: str) -> Optional[str]:
        return self._parent.get(node_id)

    def edge_by_label(self, label: str) -> Optional[Edge]:
        return self._by_label.get(label)

    def node_order(self) -> list[str]:
        """Root-first traversal following edge declaration order."""
        out: list[str] = []
        stack = [self.root]
        seen = set()
        while stack:
            n = stack.pop()
            if n in seen or n not in self.nodes:
                continue
            seen.add(n)
            out.append(n)
            stack.extend(e.child for e in reversed(self.children(n)))
        return out


@dataclass(frozen=True, slots=True)
class Binding:
    """A partial assignment of variables to entities, sorted by variable."""

    entries: tuple[tuple[str, str, str], ...]  # (var, kind, entity id)

    @classmethod
    def of(cls, mapping: dict[str, tuple[str, str]]) -> "Binding":
        return cls(tuple(sorted((v, k, e) for v, (k, e) in mapping.items())))

    def get(self, var: str) -> Optional[tuple[str, str]]:
        for v, k, e in self.entries:
            if v == var:
                return k, e
        return None

    def extend(self, var: str, kind: str, entity: str) -> "Binding":
        return Binding(tuple(sorted(self.entries + ((var, kind, entity),))))

    def restrict(self, names) -> "Binding":
        return Binding(tuple(e for e in self.entries if e[0] in names))


EMPTY_BINDING = Binding(())


def is_child(parent: Binding, child: Binding) -> bool:
    """True iff child extends parent (every parent entry occurs in child)."""
    return set(parent.entries) <= set(child.entries)


def _pair_in(pairset, qual, src_code: int, dst_code: int) -> bool:
    table = pairset.lookup(qual)
    key = (src_code << 32) | dst_code
    pos = int(np.searchsorted(table, key))
    return pos < table.size and int(table[pos]) == key


def satisfies_basic(b: Binding, p: Predicate, idx: IndexedLog) -> bool:
    """Scalar basic-predicate check; unbound referenced variables give False."""
    it = idx.interner
    if isinstance(p, E2O):
        ev = b.get(p.ev)
        ob = b.get(p.ob)
        if ev is None or ob is None or ev[0] != KIND_EVENT or ob[0] != KIND_OBJECT:
            return False
        ev_code = it.event_ids.get(ev[1])
        ob_code = it.object_ids.get(ob[1])
        if ev_code is None or ob_code is None:
            return False
        qual = None if p.qual is WILDCARD else it.qualifiers.get(p.qual)
        if qual is None and p.qual is not WILDCARD:
            return False
        return _pair_in(idx.e2o_pairs, qual, ev_code, ob_code)
    if isinstance(p, O2O):
        src = b.get(p.ob)
        dst = b.get(p.ob2)
        if src is None or dst is None or src[0] != KIND_OBJECT or dst[0] != KIND_OBJECT:
            return False
        src_code = it.object_ids.get(src[1])
        dst_code = it.object_ids.get(dst[1])
        if src_code is None or dst_code is None:
            return False
        qual = None if p.qual is WILDCARD else it.qualifiers.get(p.qual)
        if qual is None and p.qual is not WILDCARD:
            return False
        return _pair_in(idx.o2o_pairs, qual, src_code, dst_code)
    if isinstance(p, TBE):
        a = b.get(p.ev_from)
        c = b.get(p.ev_to)
        if a is None or c is None or a[0] != KIND_EVENT or c[0] != KIND_EVENT:
            return False
        a_code = it.event_ids.get(a[1])
        c_code = it.event_ids.get(c[1])
        if a_code is None or c_code is None:
            return False
        d = int(idx.times[c_code]) - int(idx.times[a_code])
        return (p.tmin is None or d >= p.tmin) and (p.tmax is None or d <= p.tmax)
    raise TypeError(f"not a basic predicate: {p!r}")


def is_refinement(a: BindingBox, b: BindingBox) -> bool:
    """True iff b refines a: a's declarations and basic predicates are subsets
    of b's, with equal type sets on shared variables.  Child-set predicates
    never affect refinement."""
    b_vars = b.var_map()
    for decl in a.vars:
        other = b_vars.get(decl.name)
        if other is None or other.kind != decl.kind or other.types != decl.types:
            return False
    return a.basic_predicates() <= b.basic_predicates()


class TreeFinding(NamedTuple):
    code: str
    where: str  # node id, edge label, or ""
    message: str


def _check_scope(box: BindingBox, node_id: str, findings: list[TreeFinding]) -> None:
    var_map = box.var_map()

    def need(var: str, kind: str, ctx: str) -> None:
        decl = var_map.get(var)
        if decl is None:
            findings.append(TreeFinding("UnboundVariable", node_id, f"{ctx} references undeclared variable {var!r}"))
        elif decl.kind != kind:
            findings.append(TreeFinding("KindMismatch", node_id, f"{ctx} needs a {kind} variable, {var!r} is {decl.kind}"))

    for where, preds in (("predicate", box.predicates), ("constraint", box.constraints)):
        for p in preds:
            if isinstance(p, E2O):
                need(p.ev, KIND_EVENT, f"{where} e2o")
                need(p.ob, KIND_OBJECT, f"{where} e2o")
            elif isinstance(p, O2O):
                need(p.ob, KIND_OBJECT, f"{where} o2o")
                need(p.ob2, KIND_OBJECT, f"{where} o2o")
            elif isinstance(p, TBE):
                need(p.ev_from, KIND_EVENT, f"{where} tbe")
                need(p.ev_to, KIND_EVENT, f"{where} tbe")


def validate_tree(tree: QueryTree) -> list[TreeFinding]:
    """Structural checks; an empty list means the tree is evaluable."""
    findings: list[TreeFinding] = []
    if tree.root not in tree.nodes:
        findings.append(TreeFinding("UnknownNode", tree.root, "root is not a declared node"))
        return findings

    seen_labels: set[str] = set()
    incoming: dict[str, int] = {n: 0 for n in tree.nodes}
    for e in tree.edges:
        if e.label in seen_labels:
            findings.append(TreeFinding("DuplicateEdgeLabel", e.label, "edge label used twice"))
        seen_labels.add(e.label)
        for end in (e.parent, e.child):
            if end not in tree.nodes:
                findings.append(TreeFinding("UnknownNode", end, f"edge {e.label!r} references undeclared node"))
        if e.child in incoming:
            incoming[e.child] += 1

    if incoming.get(tree.root, 0) > 0:
        findings.append(TreeFinding("NotATree", tree.root, "root has an incoming edge"))
    for n, count in incoming.items():
        if n != tree.root and count != 1:
            findings.append(TreeFinding("NotATree", n, f"node has {count} incoming edges, expected 1"))
    reachable = set(tree.node_order())
    for n in tree.nodes:
        if n not in reachable:
            findings.append(TreeFinding("NotATree", n, "node not reachable from the root"))
    if findings:
        return findings  # shape errors make the checks below ill-defined

    for node_id, box in tree.nodes.items():
        names = set()
        for decl in box.vars:
            if decl.name in names:
                findings.append(TreeFinding("DuplicateVariable", node_id, f"variable {decl.name!r} declared twice"))
            names.add(decl.name)
            if decl.kind not in (KIND_EVENT, KIND_OBJECT):
                findings.append(TreeFinding("KindMismatch", node_id, f"unknown kind {decl.kind!r}"))
            if not decl.types:
                findings.append(TreeFinding("EmptyTypeSet", node_id, f"variable {decl.name!r} has no types"))
        _check_scope(box, node_id, findings)

        out_labels = {e.label: e for e in tree.children(node_id)}
        for p in tuple(box.predicates) + tuple(box.constraints):
            if isinstance(p, CBS) and p.edge not in out_labels:
                findings.append(TreeFinding("UnknownEdgeLabel", node_id, f"cbs references edge {p.edge!r}"))
        label_names = set()
        for spec in box.labels:
            if spec.name in label_names:
                findings.append(TreeFinding("DuplicateLabelName", node_id, f"label {spec.name!r} declared twice"))
            label_names.add(spec.name)
            edge = out_labels.get(spec.edge)
            if edge is None:
                findings.append(TreeFinding("UnknownEdgeLabel", node_id, f"label {spec.name!r} references edge {spec.edge!r}"))
            elif spec.agg != AGG_COUNT:
                child_vars = tree.nodes[edge.child].var_map()
                for var in (spec.ev_from, spec.ev_to):
                    decl = child_vars.get(var)
                    if decl is None:
                        findings.append(
                            TreeFinding("UnboundVariable", node_id, f"label {spec.name!r} references {var!r} not bound in child")
                        )
                    elif decl.kind != KIND_EVENT:
                        findings.append(TreeFinding("KindMismatch", node_id, f"label {spec.name!r} needs event variables"))

    for e in tree.edges:
        if not is_refinement(tree.nodes[e.parent], tree.nodes[e.child]):
            findings.append(TreeFinding("RefinementViolation", e.label, f"node {e.child!r} does not refine {e.parent!r}"))
    return findings


def _qual_to_json(qual) -> Optional[str]:
    return None if qual is WILDCARD else qual


def _pred_to_json(p: Predicate) -> dict:
    if isinstance(p, E2O):
        return {"t": "e2o", "ev": p.ev, "ob": p.ob, "qual": _qual_to_json(p.qual)}
    if isinstance(p, O2O):
        return {"t": "o2o", "ob": p.ob, "ob2": p.ob2, "qual": _qual_to_json(p.qual)}
    if isinstance(p, TBE):
        return {"t": "tbe", "from": p.ev_from, "to": p.ev_to, "min": p.tmin, "max": p.tmax}
    if isinstance(p, CBS):
        return {"t": "cbs", "edge": p.edge, "min": p.nmin, "max": p.nmax}
    raise TypeError(f"unknown predicate {p!r}")


def _label_to_json(spec: LabelSpec) -> dict:
    out = {"name": spec.name, "agg": spec.agg, "edge": spec.edge}
    if spec.agg != AGG_COUNT:
        out["from"] = spec.ev_from
        out["to"] = spec.ev_to
    return out


def serialize_query(tree: QueryTree) -> bytes:
    doc = {
        "nodes": [
            {
                "id": node_id,
                "vars": [
                    {"name": v.name, "kind": v.kind, "types": sorted(v.types)} for v in box.vars
                ],
                "predicates": [_pred_to_json(p) for p in box.predicates],
                "constraints": [_pred_to_json(p) for p in box.constraints],
                "labels": [_label_to_json(s) for s in box.labels],
            }
            for node_id, box in tree.nodes.items()
        ],
        "edges": [{"from": e.parent, "to": e.child, "label": e.label} for e in tree.edges],
        "root": tree.root,
    }
    return json.dumps(doc, indent=2, ensure_ascii=False).encode("utf-8")


def _parse_pred(obj: Any, where: str) -> Predicate:
    if not isinstance(obj, dict) or "t" not in obj:
        raise ParseError(f"{where}: predicate must be an object with a 't' tag")
    tag = obj["t"]
    try:
        if tag == "e2o":
            qual = obj.get("qual")
            return E2O(str(obj["ev"]), str(obj["ob"]), WILDCARD if qual is None else str(qual))
        if tag == "o2o":
            qual = obj.get("qual")
            return O2O(str(obj["ob"]), str(obj["ob2"]), WILDCARD if qual is None else str(qual))
        if tag == "tbe":
            return TBE(
                str(obj["from"]),
                str(obj["to"]),
                parse_duration(obj.get("min")),
                parse_duration(obj.get("max")),
            )
        if tag == "cbs":
            nmax = obj.get("max")
            if not isinstance(obj.get("min"), int) or not (nmax is None or isinstance(nmax, int)):
                raise ParseError(f"{where}: cbs bounds must be integers")
            return CBS(str(obj["edge"]), obj["min"], nmax)
    except KeyError as exc:
        raise ParseError(f"{where}: {tag} predicate missing field {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from exc
    raise ParseError(f"{where}: unknown predicate tag {tag!r}")


def _parse_label(obj: Any, where: str) -> LabelSpec:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: label must be an object")
    try:
        agg = str(obj["agg"])
        spec = LabelSpec(
            str(obj["name"]),
            agg,
            str(obj["edge"]),
            str(obj["from"]) if obj.get("from") is not None else None,
            str(obj["to"]) if obj.get("to") is not None else None,
        )
    except KeyError as exc:
        raise ParseError(f"{where}: label missing field {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from exc
    return spec


def parse_query_json(data: Union[bytes, str, dict]) -> QueryTree:
    """Parse and validate; structural findings raise InvalidQuery."""
    if isinstance(data, (bytes, str)):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc}") from exc
    else:
        doc = data
    if not isinstance(doc, dict):
        raise ParseError("query must be a JSON object")
    for key in ("nodes", "edges", "root"):
        if key not in doc:
            raise ParseError(f"query missing {key!r}")

    nodes: dict[str, BindingBox] = {}
    for entry in doc["nodes"]:
        if not isinstance(entry, dict) or "id" not in entry:
            raise ParseError("node entries need an 'id'")
        node_id = str(entry["id"])
        if node_id in nodes:
            raise ParseError(f"duplicate node id {node_id!r}")
        vars_ = []
        for v in entry.get("vars", ()):
            try:
                kind = str(v["kind"])
                if kind not in (KIND_EVENT, KIND_OBJECT):
                    raise ParseError(f"node {node_id!r}: unknown variable kind {kind!r}")
                vars_.append(VarDecl(str(v["name"]), kind, frozenset(str(t) for t in v.get("types", ()))))
            except (KeyError, TypeError) as exc:
                raise ParseError(f"node {node_id!r}: bad variable declaration: {exc}") from exc
        where = f"node {node_id!r}"
        nodes[node_id] = BindingBox(
            vars=tuple(vars_),
            predicates=tuple(_parse_pred(p, where) for p in entry.get("predicates", ())),
            constraints=tuple(_parse_pred(p, where) for p in entry.get("constraints", ())),
            labels=tuple(_parse_label(s, where) for s in entry.get("labels", ())),
        )

    edges = []
    for e in doc["edges"]:
        try:
            edges.append(Edge(str(e["from"]), str(e["to"]), str(e["label"])))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad edge entry {e!r}: {exc}") from exc

    tree = QueryTree(nodes=nodes, root=str(doc["root"]), edges=tuple(edges))
    findings = validate_tree(tree)
    if findings:
        raise InvalidQuery(findings)
    return tree
