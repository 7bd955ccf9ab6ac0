"""Binding-order planning for node expansion.

New variables reachable from an already-bound variable through an E2O/O2O
predicate are bound by walking adjacency (consuming that predicate); the
rest fall back to type-bucket scans.  Every remaining predicate becomes a
filter at the earliest step where all its variables are bound.  Ties are
broken by ascending estimated candidate count, then variable name.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .errors import UnboundVariableInPredicate
from .index import IndexedLog, Relation
from .model import BASIC_KINDS, E2O, KIND_EVENT, O2O, Predicate, TBE, VarDecl
from .oced import WILDCARD


@dataclass(frozen=True, slots=True)
class BindFromType:
    var: str
    decl: VarDecl


@dataclass(frozen=True, slots=True)
class BindFromRelation:
    var: str
    decl: VarDecl
    relation: Relation
    qual: object  # qualifier string, or WILDCARD
    source: str


@dataclass(frozen=True, slots=True)
class Filter:
    pred: Predicate


Step = Union[BindFromType, BindFromRelation, Filter]


def _pred_vars(p: Predicate) -> tuple[str, ...]:
    if isinstance(p, E2O):
        return (p.ev, p.ob)
    if isinstance(p, O2O):
        return (p.ob, p.ob2)
    if isinstance(p, TBE):
        return (p.ev_from, p.ev_to)
    raise TypeError(f"not a basic predicate: {p!r}")


def _type_estimate(decl: VarDecl, idx: Optional[IndexedLog]) -> int:
    if idx is None:
        return 0
    it = idx.interner
    table = it.event_types if decl.kind == KIND_EVENT else it.object_types
    buckets = idx.per_event_type if decl.kind == KIND_EVENT else idx.per_object_type
    total = 0
    for t in decl.types:
        code = table.get(t)
        if code is not None:
            total += buckets[code].size
    return total


def _relation_estimate(pred, idx: Optional[IndexedLog]) -> int:
    if idx is None:
        return 0
    pairs = idx.e2o_pairs if isinstance(pred, E2O) else idx.o2o_pairs
    if pred.qual is WILDCARD:
        return int(pairs.all_pairs.size)
    qcode = idx.interner.qualifiers.get(pred.qual)
    return 0 if qcode is None else int(pairs.lookup(qcode).size)


def plan(
    delta_vars: dict[str, VarDecl],
    delta_preds: Iterable[Predicate],
    bound_vars: set[str],
    idx: Optional[IndexedLog] = None,
) -> list[Step]:
    preds = [p for p in delta_preds]
    in_scope = bound_vars | delta_vars.keys()
    for p in preds:
        for v in _pred_vars(p):
            if v not in in_scope:
                raise UnboundVariableInPredicate(f"{p!r} references {v!r}")

    steps: list[Step] = []
    bound = set(bound_vars)
    remaining = dict(delta_vars)

    def flush_filters() -> None:
        for p in list(preds):
            if all(v in bound for v in _pred_vars(p)):
                steps.append(Filter(p))
                preds.remove(p)

    flush_filters()
    while remaining:
        candidates = []
        for var in remaining:
            for i, p in enumerate(preds):
                if isinstance(p, E2O):
                    if var == p.ob and p.ev in bound:
                        rel, src = Relation.E2O, p.ev
                    elif var == p.ev and p.ob in bound:
                        rel, src = Relation.E2O_REV, p.ob
                    else:
                        continue
                elif isinstance(p, O2O):
                    if var == p.ob2 and p.ob in bound:
                        rel, src = Relation.O2O, p.ob
                    elif var == p.ob and p.ob2 in bound:
                        rel, src = Relation.O2O_REV, p.ob2
                    else:
                        continue
                else:
                    continue
                est = _relation_estimate(p, idx)
                candidates.append((est, var, p.qual is WILDCARD, i, rel, p.qual, src))
        if candidates:
            est, var, _, i, rel, qual, src = min(candidates)
            steps.append(BindFromRelation(var, remaining.pop(var), rel, qual, src))
            del preds[i]
        else:
            est, var = min((_type_estimate(decl, idx), name) for name, decl in remaining.items())
            steps.append(BindFromType(var, remaining.pop(var)))
        bound.add(var)
        flush_filters()
    return steps
