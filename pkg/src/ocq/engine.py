"""Recursive vectorized evaluation of query trees over an indexed log.

Each node expands its parent's rows by the planned binding steps, working on
whole numpy column tables.  Children are evaluated per parent-candidate
table (once, shared by pred- and constr-CBS), then child-set sizes drive
exclusion flags, constraint verdicts, and label columns.  Tables are sorted
canonically (lexicographic by entity code in variable declaration order), so
results are independent of thread budget and chunking.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from .errors import InvalidQuery, ResultTooLarge
from .index import IndexedLog, pack_pairs
from .model import (
    AGG_COUNT,
    AGG_MEAN_DUR,
    AGG_MIN_DUR,
    Binding,
    CBS,
    E2O,
    KIND_EVENT,
    O2O,
    Predicate,
    QueryTree,
    TBE,
    validate_tree,
)
from .oced import WILDCARD
from .plan import BindFromRelation, BindFromType, Step, plan

DEFAULT_MAX_ROWS = 10_000_000
_CHUNK = 8192  # constant so results never depend on the thread budget

_E64 = np.empty(0, dtype=np.int64)
_E32 = np.empty(0, dtype=np.int32)


@dataclass(slots=True)
class NodeResult:
    node_id: str
    var_names: tuple[str, ...]
    var_kinds: tuple[str, ...]
    columns: dict[str, np.ndarray]  # var -> int32 entity codes
    parent_idx: np.ndarray  # int64 row index into the parent's table; -1 at root
    cbs_excluded: np.ndarray  # bool; True = basic-only row (failed a pred-CBS)
    verdicts: np.ndarray  # bool, shape (n_constraints, n_rows)
    labels: dict[str, tuple[np.ndarray, np.ndarray]]  # name -> (values, present)

    @property
    def n_rows(self) -> int:
        return int(self.parent_idx.size)

    def satisfied_mask(self) -> np.ndarray:
        """Non-excluded rows whose constraint verdicts all hold."""
        return ~self.cbs_excluded & self.verdicts.all(axis=0)

    @property
    def counts(self) -> tuple[int, int, int]:
        """(rows satisfying the basic predicates, satisfied, violated)."""
        ok = self.satisfied_mask()
        included = ~self.cbs_excluded
        return self.n_rows, int(ok.sum()), int((included & ~ok).sum())

    def binding_at(self, i: int, idx: IndexedLog) -> Binding:
        it = idx.interner
        entries = []
        for var, kind in zip(self.var_names, self.var_kinds):
            code = int(self.columns[var][i])
            table = it.event_ids if kind == KIND_EVENT else it.object_ids
            entries.append((var, kind, table.name_of(code)))
        return Binding(tuple(sorted(entries)))


@dataclass(slots=True)
class EvaluationResult:
    per_node: dict[str, NodeResult]
    wall_time: float
    tree: QueryTree
    idx: IndexedLog


def _in_sorted(sorted_vals: np.ndarray, values: np.ndarray) -> np.ndarray:
    if sorted_vals.size == 0:
        return np.zeros(values.size, dtype=bool)
    if sorted_vals.size == 1:
        return values == sorted_vals[0]
    pos = np.searchsorted(sorted_vals, values)
    pos[pos == sorted_vals.size] = 0
    return sorted_vals[pos] == values


def _qual_code(idx: IndexedLog, qual) -> int:
    """Interned qualifier code; -1 = any; -2 = known to match nothing."""
    if qual is WILDCARD:
        return -1
    code = idx.interner.qualifiers.get(qual)
    return -2 if code is None else code


def _pair_table(idx: IndexedLog, pred) -> np.ndarray:
    pairs = idx.e2o_pairs if isinstance(pred, E2O) else idx.o2o_pairs
    qcode = _qual_code(idx, pred.qual)
    if qcode == -1:
        return pairs.all_pairs
    if qcode == -2:
        return _E64
    return pairs.lookup(qcode)


def _basic_mask(idx: IndexedLog, pred: Predicate, cols: dict[str, np.ndarray]) -> np.ndarray:
    if isinstance(pred, E2O):
        keys = pack_pairs(cols[pred.ev], cols[pred.ob])
        return K.pairs_in_table(keys, _pair_table(idx, pred))
    if isinstance(pred, O2O):
        keys = pack_pairs(cols[pred.ob], cols[pred.ob2])
        return K.pairs_in_table(keys, _pair_table(idx, pred))
    if isinstance(pred, TBE):
        d = idx.times[cols[pred.ev_to]] - idx.times[cols[pred.ev_from]]
        mask = np.ones(d.size, dtype=bool)
        if pred.tmin is not None:
            mask &= d >= pred.tmin
        if pred.tmax is not None:
            mask &= d <= pred.tmax
        return mask
    raise TypeError(f"not a basic predicate: {pred!r}")


class _TypeStep:
    __slots__ = ("var", "bucket")

    def __init__(self, var: str, bucket: np.ndarray) -> None:
        self.var = var
        self.bucket = bucket


class _RelStep:
    __slots__ = ("var", "source", "csr", "qual_code", "type_codes", "kind_codes")

    def __init__(self, var, source, csr, qual_code, type_codes, kind_codes) -> None:
        self.var = var
        self.source = source
        self.csr = csr
        self.qual_code = qual_code
        self.type_codes = type_codes  # sorted declared type codes
        self.kind_codes = kind_codes  # entity code -> type code for the var's kind


class _FilterStep:
    __slots__ = ("pred",)

    def __init__(self, pred: Predicate) -> None:
        self.pred = pred


def _prepare_steps(idx: IndexedLog, steps: list[Step]) -> list:
    """Resolve buckets, type-code arrays, and qualifier codes once per node."""
    prepared = []
    for step in steps:
        if isinstance(step, (BindFromType, BindFromRelation)):
            is_event = step.decl.kind == KIND_EVENT
            table = idx.interner.event_types if is_event else idx.interner.object_types
            codes = sorted(c for c in (table.get(t) for t in step.decl.types) if c is not None)
            if isinstance(step, BindFromType):
                prepared.append(_TypeStep(step.var, idx.bucket(is_event, codes)))
            else:
                prepared.append(
                    _RelStep(
                        step.var,
                        step.source,
                        idx.adj[step.relation],
                        _qual_code(idx, step.qual),
                        np.asarray(codes, dtype=np.int32),
                        idx.ev_type_codes if is_event else idx.ob_type_codes,
                    )
                )
        else:
            prepared.append(_FilterStep(step.pred))
    return prepared


def _expand_chunk(
    idx: IndexedLog,
    prepared: list,
    parent_cols: dict[str, np.ndarray],
    origin: np.ndarray,
    max_rows: int,
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Run the binding steps over one slice of parent rows."""
    cols = dict(parent_cols)
    org = origin
    for step in prepared:
        if isinstance(step, _TypeStep):
            m = org.size
            width = step.bucket.size
            if m * width > max_rows:
                raise ResultTooLarge(f"binding {step.var!r} would exceed {max_rows} rows")
            cols = {v: np.repeat(c, width) for v, c in cols.items()}
            org = np.repeat(org, width)
            cols[step.var] = np.tile(step.bucket, m)
        elif isinstance(step, _RelStep):
            if step.qual_code == -2:  # qualifier absent from the log
                row_idx, neighbors = _E64, _E32
            else:
                src = cols[step.source].astype(np.int64)
                row_idx, neighbors = K.expand_adjacency(
                    src, step.csr.offsets, step.csr.neighbor, step.csr.qual, step.qual_code
                )
            if row_idx.size > max_rows:
                raise ResultTooLarge(f"binding {step.var!r} would exceed {max_rows} rows")
            keep = _in_sorted(step.type_codes, step.kind_codes[neighbors])
            row_idx, neighbors = row_idx[keep], neighbors[keep]
            cols = {v: c[row_idx] for v, c in cols.items()}
            org = org[row_idx]
            cols[step.var] = neighbors
        else:
            mask = _basic_mask(idx, step.pred, cols)
            cols = {v: c[mask] for v, c in cols.items()}
            org = org[mask]
    return cols, org


def _expand_table(
    idx: IndexedLog,
    prepared: list,
    parent_cols: dict[str, np.ndarray],
    n_parents: int,
    max_rows: int,
    executor: Optional[ThreadPoolExecutor],
    var_order: tuple[str, ...],
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    origin = np.arange(n_parents, dtype=np.int64)
    if executor is None or n_parents <= _CHUNK:
        cols, org = _expand_chunk(idx, prepared, parent_cols, origin, max_rows)
    else:
        spans = [(lo, min(lo + _CHUNK, n_parents)) for lo in range(0, n_parents, _CHUNK)]
        futures = [
            executor.submit(
                _expand_chunk,
                idx,
                prepared,
                {v: c[lo:hi] for v, c in parent_cols.items()},
                origin[lo:hi],
                max_rows,
            )
            for lo, hi in spans
        ]
        parts = [f.result() for f in futures]
        keys = list(parent_cols.keys()) + [s.var for s in prepared if not isinstance(s, _FilterStep)]
        cols = {v: np.concatenate([p[0][v] for p in parts]) for v in keys}
        org = np.concatenate([p[1] for p in parts])
    if org.size > max_rows:
        raise ResultTooLarge(f"node table exceeds {max_rows} rows")
    # column dict in declaration order keeps downstream iteration canonical
    return {v: cols[v] for v in var_order}, org


class _Ctx:
    __slots__ = ("tree", "idx", "max_rows", "executor", "results")

    def __init__(self, tree, idx, max_rows, executor) -> None:
        self.tree = tree
        self.idx = idx
        self.max_rows = max_rows
        self.executor = executor
        self.results: dict[str, NodeResult] = {}


def _cbs_ok(pred: CBS, counts: np.ndarray) -> np.ndarray:
    ok = counts >= pred.nmin
    if pred.nmax is not None:
        ok &= counts <= pred.nmax
    return ok


def _eval_node(ctx: _Ctx, node_id: str, parent_cols: dict[str, np.ndarray], n_parents: int) -> None:
    tree, idx = ctx.tree, ctx.idx
    box = tree.nodes[node_id]
    parent_id = tree.parent_of(node_id)
    if parent_id is None:
        parent_decls: dict[str, object] = {}
        parent_basic = frozenset()
    else:
        parent_box = tree.nodes[parent_id]
        parent_decls = parent_box.var_map()
        parent_basic = parent_box.basic_predicates()

    delta_vars = {v.name: v for v in box.vars if v.name not in parent_decls}
    delta_preds = tuple(
        p for p in box.predicates if not isinstance(p, CBS) and p not in parent_basic
    )
    steps = plan(delta_vars, delta_preds, set(parent_decls), idx)
    var_order = tuple(v.name for v in box.vars)
    prepared = _prepare_steps(idx, steps)
    cols, origin = _expand_table(
        idx, prepared, parent_cols, n_parents, ctx.max_rows, ctx.executor, var_order
    )
    n = origin.size

    # children are evaluated over the unsorted candidate table, exactly once
    for edge in tree.children(node_id):
        _eval_node(ctx, edge.child, cols, n)

    counts: dict[str, np.ndarray] = {}
    for edge in tree.children(node_id):
        child = ctx.results[edge.child]
        live = child.parent_idx[~child.cbs_excluded]
        counts[edge.label] = K.group_count(live, n)

    excluded = np.zeros(n, dtype=bool)
    for pred in box.predicates:
        if isinstance(pred, CBS):
            excluded |= ~_cbs_ok(pred, counts[pred.edge])

    verdicts = np.ones((len(box.constraints), n), dtype=bool)
    for i, pred in enumerate(box.constraints):
        if isinstance(pred, CBS):
            verdicts[i] = _cbs_ok(pred, counts[pred.edge])
        else:
            verdicts[i] = _basic_mask(idx, pred, cols)

    labels: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for spec in box.labels:
        if spec.agg == AGG_COUNT:
            labels[spec.name] = (counts[spec.edge].astype(np.float64), np.ones(n, dtype=bool))
            continue
        edge = tree.edge_by_label(spec.edge)
        child = ctx.results[edge.child]
        live = ~child.cbs_excluded
        pidx = child.parent_idx[live]
        durations = idx.times[child.columns[spec.ev_to][live]] - idx.times[child.columns[spec.ev_from][live]]
        mn, mx, sm, cnt = K.group_duration_stats(pidx, durations, n)
        present = cnt > 0
        if spec.agg == AGG_MIN_DUR:
            values = mn.astype(np.float64)
        elif spec.agg == AGG_MEAN_DUR:
            values = np.divide(sm, cnt, out=np.zeros(n, dtype=np.float64), where=present)
        else:
            values = mx.astype(np.float64)
        values[~present] = 0.0
        labels[spec.name] = (values, present)

    if n and var_order:
        order = np.lexsort(tuple(cols[v] for v in reversed(var_order)))
    elif n:
        # variable-free node: at most one row per parent, parent order is canonical
        order = np.arange(n, dtype=np.int64)
    else:
        order = _E64
    inv = np.empty(n, dtype=np.int64)
    inv[order] = np.arange(n, dtype=np.int64)
    for edge in tree.children(node_id):
        child = ctx.results[edge.child]
        child.parent_idx = inv[child.parent_idx]

    ctx.results[node_id] = NodeResult(
        node_id=node_id,
        var_names=var_order,
        var_kinds=tuple(v.kind for v in box.vars),
        columns={v: np.ascontiguousarray(cols[v][order]) for v in var_order},
        parent_idx=origin[order],
        cbs_excluded=excluded[order],
        verdicts=verdicts[:, order],
        labels={k: (v[order], p[order]) for k, (v, p) in labels.items()},
    )


def evaluate_tree(
    tree: QueryTree,
    idx: IndexedLog,
    thread_budget: Optional[int] = None,
    max_rows: int = DEFAULT_MAX_ROWS,
) -> EvaluationResult:
    findings = validate_tree(tree)
    if findings:
        raise InvalidQuery(findings)
    budget = thread_budget if thread_budget else (os.cpu_count() or 1)
    started = time.perf_counter()
    executor = ThreadPoolExecutor(max_workers=budget) if budget > 1 else None
    ctx = _Ctx(tree, idx, max_rows, executor)
    try:
        _eval_node(ctx, tree.root, {}, 1)
    finally:
        if executor is not None:
            executor.shutdown(wait=False, cancel_futures=True)
    root = ctx.results[tree.root]
    root.parent_idx = np.full(root.n_rows, -1, dtype=np.int64)
    per_node = {node_id: ctx.results[node_id] for node_id in tree.node_order()}
    return EvaluationResult(per_node, time.perf_counter() - started, tree, idx)


def expand(parent: Binding, steps: list[Step], idx: IndexedLog) -> set[Binding]:
    """All extensions of one parent binding under the given steps."""
    cols: dict[str, np.ndarray] = {}
    kinds: dict[str, str] = {}
    for var, kind, entity in parent.entries:
        table = idx.interner.event_ids if kind == KIND_EVENT else idx.interner.object_ids
        code = table.get(entity)
        if code is None:
            return set()
        cols[var] = np.array([code], dtype=np.int32)
        kinds[var] = kind
    for step in steps:
        if isinstance(step, (BindFromType, BindFromRelation)):
            kinds[step.var] = step.decl.kind
    prepared = _prepare_steps(idx, steps)
    out_cols, _ = _expand_chunk(idx, prepared, cols, np.zeros(1, dtype=np.int64), DEFAULT_MAX_ROWS)
    n = next(iter(out_cols.values())).size if out_cols else 1
    out = set()
    for i in range(n):
        entries = []
        for var, col in out_cols.items():
            kind = kinds[var]
            table = idx.interner.event_ids if kind == KIND_EVENT else idx.interner.object_ids
            entries.append((var, kind, table.name_of(int(col[i]))))
        out.add(Binding(tuple(sorted(entries))))
    return out


def evaluate_node(
    node_id: str, parent: Binding, tree: QueryTree, idx: IndexedLog
) -> tuple[set[Binding], set[Binding]]:
    """Satisfied and basic-only extensions of one parent binding at a node."""
    parent_id = tree.parent_of(node_id)
    parent_cols: dict[str, np.ndarray] = {}
    if parent_id is not None:
        for decl in tree.nodes[parent_id].vars:
            got = parent.get(decl.name)
            if got is None:
                raise KeyError(f"parent binding misses {decl.name!r}")
            kind, entity = got
            table = idx.interner.event_ids if kind == KIND_EVENT else idx.interner.object_ids
            code = table.get(entity)
            if code is None:
                return set(), set()
            parent_cols[decl.name] = np.array([code], dtype=np.int32)
    ctx = _Ctx(tree, idx, DEFAULT_MAX_ROWS, None)
    _eval_node(ctx, node_id, parent_cols, 1)
    res = ctx.results[node_id]
    satisfied, basic_only = set(), set()
    for i in range(res.n_rows):
        b = res.binding_at(i, idx)
        (basic_only if res.cbs_excluded[i] else satisfied).add(b)
    return satisfied, basic_only
