"""Brute-force reference evaluator.

Transcribes the definitions literally over the raw log: per parent binding,
every combination of the node's new variables over the per-type entity
lists is enumerated and checked against every basic predicate; child-set
predicates recurse.  Shares no code with the engine's planning or expansion
path.  Used to derive expected values and to cross-check the engine; the
engine is tested against this, never the other way around.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .errors import TooLargeForOracle
from .model import (
    AGG_COUNT,
    AGG_MAX_DUR,
    AGG_MEAN_DUR,
    AGG_MIN_DUR,
    Binding,
    CBS,
    E2O,
    KIND_EVENT,
    KIND_OBJECT,
    O2O,
    QueryTree,
    TBE,
)
from .oced import Oced, WILDCARD, objects_of, time_of

ORACLE_GUARD = 10_000_000


@dataclass(frozen=True, slots=True)
class OracleRow:
    binding: Binding
    parent: Optional[Binding]
    cbs_excluded: bool
    verdicts: tuple[bool, ...]
    labels: tuple[tuple[str, Optional[float]], ...]


@dataclass(slots=True)
class OracleNode:
    rows: list[OracleRow]

    @property
    def counts(self) -> tuple[int, int, int]:
        total = len(self.rows)
        satisfied = sum(1 for r in self.rows if not r.cbs_excluded and all(r.verdicts))
        violated = sum(1 for r in self.rows if not r.cbs_excluded and not all(r.verdicts))
        return total, satisfied, violated


@dataclass(slots=True)
class OracleResult:
    per_node: dict[str, OracleNode]


class _Oracle:
    def __init__(self, tree: QueryTree, log: Oced, guard: int) -> None:
        self.tree = tree
        self.log = log
        self.guard = guard
        self.events_by_type: dict[str, list[str]] = {}
        for ev in log.events.values():
            self.events_by_type.setdefault(ev.activity, []).append(ev.id)
        self.objects_by_type: dict[str, list[str]] = {}
        for ob in log.objects.values():
            self.objects_by_type.setdefault(ob.otype, []).append(ob.id)
        self.work: dict[str, int] = {}
        self.memo: dict[tuple, list[tuple[dict, bool]]] = {}
        self.rel_cache: dict[tuple, set[str]] = {}

    def _refs(self, entity: str, qual) -> set[str]:
        key = (entity, qual if qual is WILDCARD else str(qual))
        got = self.rel_cache.get(key)
        if got is None:
            got = objects_of(self.log, entity, qual)
            self.rel_cache[key] = got
        return got

    def _holds(self, b: dict, kinds: dict, p) -> bool:
        if isinstance(p, E2O):
            if kinds.get(p.ev) != KIND_EVENT or kinds.get(p.ob) != KIND_OBJECT:
                return False
            if p.ev not in b or p.ob not in b:
                return False
            return b[p.ob] in self._refs(b[p.ev], p.qual)
        if isinstance(p, O2O):
            if kinds.get(p.ob) != KIND_OBJECT or kinds.get(p.ob2) != KIND_OBJECT:
                return False
            if p.ob not in b or p.ob2 not in b:
                return False
            return b[p.ob2] in self._refs(b[p.ob], p.qual)
        if isinstance(p, TBE):
            if kinds.get(p.ev_from) != KIND_EVENT or kinds.get(p.ev_to) != KIND_EVENT:
                return False
            if p.ev_from not in b or p.ev_to not in b:
                return False
            d = time_of(self.log, b[p.ev_to]) - time_of(self.log, b[p.ev_from])
            return (p.tmin is None or d >= p.tmin) and (p.tmax is None or d <= p.tmax)
        raise TypeError(f"not a basic predicate: {p!r}")

    def _domain(self, decl) -> list[str]:
        pools = self.events_by_type if decl.kind == KIND_EVENT else self.objects_by_type
        out: list[str] = []
        for t in sorted(decl.types):
            out.extend(pools.get(t, ()))
        return out

    def child_rows(self, node_id: str, parent: dict) -> list[tuple[dict, bool]]:
        """All bindings of the node extending ``parent`` that satisfy the basic
        predicates, each flagged True when it fails a pred-level CBS."""
        key = (node_id, tuple(sorted(parent.items())))
        got = self.memo.get(key)
        if got is not None:
            return got
        box = self.tree.nodes[node_id]
        kinds = {v.name: v.kind for v in box.vars}
        delta = [v for v in box.vars if v.name not in parent]
        domains = [self._domain(v) for v in delta]
        work = 1
        for d in domains:
            work *= len(d)
        self.work[node_id] = self.work.get(node_id, 0) + work
        if self.work[node_id] > self.guard:
            raise TooLargeForOracle(
                f"node {node_id!r} needs more than {self.guard} candidate checks"
            )
        basics = [p for p in box.predicates if not isinstance(p, CBS)]
        cbs_preds = [p for p in box.predicates if isinstance(p, CBS)]
        rows: list[tuple[dict, bool]] = []
        for combo in itertools.product(*domains):
            b = dict(parent)
            for decl, entity in zip(delta, combo):
                b[decl.name] = entity
            if not all(self._holds(b, kinds, p) for p in basics):
                continue
            excluded = False
            for p in cbs_preds:
                n = self._cbs_count(node_id, p, b)
                if n < p.nmin or (p.nmax is not None and n > p.nmax):
                    excluded = True
            rows.append((b, excluded))
        self.memo[key] = rows
        return rows

    def _cbs_count(self, node_id: str, pred: CBS, b: dict) -> int:
        edge = next(e for e in self.tree.children(node_id) if e.label == pred.edge)
        return sum(1 for _, excl in self.child_rows(edge.child, b) if not excl)

    def _labels(self, node_id: str, b: dict) -> tuple[tuple[str, Optional[float]], ...]:
        box = self.tree.nodes[node_id]
        out = []
        for spec in box.labels:
            edge = next(e for e in self.tree.children(node_id) if e.label == spec.edge)
            live = [rb for rb, excl in self.child_rows(edge.child, b) if not excl]
            if spec.agg == AGG_COUNT:
                out.append((spec.name, float(len(live))))
                continue
            durations = [
                time_of(self.log, rb[spec.ev_to]) - time_of(self.log, rb[spec.ev_from])
                for rb in live
            ]
            if not durations:
                out.append((spec.name, None))
            elif spec.agg == AGG_MIN_DUR:
                out.append((spec.name, float(min(durations))))
            elif spec.agg == AGG_MAX_DUR:
                out.append((spec.name, float(max(durations))))
            elif spec.agg == AGG_MEAN_DUR:
                out.append((spec.name, sum(durations) / len(durations)))
        return tuple(out)

    def evaluate(self) -> OracleResult:
        per_node: dict[str, OracleNode] = {}
        for node_id in self.tree.node_order():
            box = self.tree.nodes[node_id]
            kinds = {v.name: v.kind for v in box.vars}
            parent_id = self.tree.parent_of(node_id)
            if parent_id is None:
                parents: list[Optional[dict]] = [None]
            else:
                parents = [
                    dict(
                        (var, entity)
                        for var, _, entity in row.binding.entries
                    )
                    for row in per_node[parent_id].rows
                ]
            rows: list[OracleRow] = []
            for parent in parents:
                for b, excluded in self.child_rows(node_id, parent or {}):
                    verdicts = []
                    for p in box.constraints:
                        if isinstance(p, CBS):
                            n = self._cbs_count(node_id, p, b)
                            verdicts.append(n >= p.nmin and (p.nmax is None or n <= p.nmax))
                        else:
                            verdicts.append(self._holds(b, kinds, p))
                    rows.append(
                        OracleRow(
                            binding=Binding.of({v: (kinds[v], e) for v, e in b.items()}),
                            parent=None
                            if parent is None
                            else Binding.of(
                                {
                                    v.name: (v.kind, parent[v.name])
                                    for v in self.tree.nodes[parent_id].vars
                                }
                            ),
                            cbs_excluded=excluded,
                            verdicts=tuple(verdicts),
                            labels=self._labels(node_id, b),
                        )
                    )
            rows.sort(key=lambda r: r.binding.entries)
            per_node[node_id] = OracleNode(rows)
        return OracleResult(per_node)


def brute_force_evaluate(tree: QueryTree, log: Oced, guard: int = ORACLE_GUARD) -> OracleResult:
    return _Oracle(tree, log, guard).evaluate()


def oracle_comparable(result: OracleResult, node_id: str) -> set[tuple]:
    """Rows as order-free comparable tuples."""
    return {
        (
            r.binding.entries,
            None if r.parent is None else r.parent.entries,
            r.cbs_excluded,
            r.verdicts,
            r.labels,
        )
        for r in result.per_node[node_id].rows
    }


def engine_comparable(result, node_id: str) -> set[tuple]:
    """Engine rows in the oracle's comparable shape."""
    res = result.per_node[node_id]
    parent_id = result.tree.parent_of(node_id)
    parent_res = result.per_node[parent_id] if parent_id is not None else None
    box = result.tree.nodes[node_id]
    label_names = [spec.name for spec in box.labels]
    out = set()
    for i in range(res.n_rows):
        if parent_res is None:
            parent_entries = None
        else:
            parent_entries = parent_res.binding_at(int(res.parent_idx[i]), result.idx).entries
        labels = tuple(
            (
                name,
                float(res.labels[name][0][i]) if bool(res.labels[name][1][i]) else None,
            )
            for name in label_names
        )
        verdicts = tuple(bool(v) for v in res.verdicts[:, i])
        out.add(
            (
                res.binding_at(i, result.idx).entries,
                parent_entries,
                bool(res.cbs_excluded[i]),
                verdicts,
                labels,
            )
        )
    return out


def results_match(engine_result, oracle_result: OracleResult) -> list[str]:
    """Node ids where the engine and oracle disagree (empty = exact match)."""
    mismatches = []
    engine_nodes = set(engine_result.per_node)
    oracle_nodes = set(oracle_result.per_node)
    for node_id in sorted(engine_nodes | oracle_nodes):
        if node_id not in engine_nodes or node_id not in oracle_nodes:
            mismatches.append(node_id)
            continue
        if engine_comparable(engine_result, node_id) != oracle_comparable(oracle_result, node_id):
            mismatches.append(node_id)
    return mismatches
