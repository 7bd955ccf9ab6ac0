"""Seeded random small logs and random valid query trees.

Used for differential testing: every generated tree must pass validate_tree,
and its estimated brute-force enumeration cost is kept small enough that the
reference evaluator answers in milliseconds.
"""

from __future__ import annotations

import random
from collections import Counter

from ocq.model import (
    AGG_COUNT,
    AGG_MAX_DUR,
    AGG_MEAN_DUR,
    AGG_MIN_DUR,
    CBS,
    E2O,
    KIND_EVENT,
    KIND_OBJECT,
    O2O,
    TBE,
    BindingBox,
    Edge,
    LabelSpec,
    QueryTree,
    VarDecl,
    validate_tree,
)
from ocq.oced import Oced
from ocq.synthetic import (
    LoanConfig,
    SyntheticConfig,
    generate_loan_log,
    generate_synthetic,
)

MAX_EVENTS = 50
MAX_OBJECTS = 20
WORK_BUDGET = 120_000

_DAY = 86_400_000
_BOUND_CHOICES = (
    (None, None),
    (0, None),
    (None, 0),
    (1, None),
    (0, 28 * _DAY),
    (-7 * _DAY, 7 * _DAY),
    (3_600_000, 28 * _DAY),
)


def random_small_log(seed: int) -> Oced:
    """Deterministic log with at most 50 events and 20 objects."""
    for attempt in range(64):
        rng = random.Random(seed * 1_000_003 + attempt)
        if rng.random() < 0.5:
            log = generate_synthetic(
                SyntheticConfig(
                    num_customers=rng.randint(1, 2),
                    orders_per_customer=rng.randint(1, 2),
                    items_per_order=rng.randint(0, 3),
                    reminder_probability=rng.choice((0.0, 0.2, 0.4)),
                    skip_payment_probability=rng.choice((0.0, 0.3, 0.6)),
                    seed=rng.randrange(2**32),
                )
            )
        else:
            log = generate_loan_log(
                LoanConfig(
                    num_applications=rng.randint(1, 3),
                    max_offers_per_application=rng.randint(1, 3),
                    num_resources=rng.randint(1, 3),
                    p_second_submit=rng.choice((0.0, 0.5)),
                    p_skip_return=rng.choice((0.0, 0.5)),
                    p_multi_offer_return=rng.choice((0.0, 0.5)),
                    p_application_accepted=rng.choice((0.25, 0.75)),
                    p_no_offer_accept=rng.choice((0.0, 0.5)),
                    p_foreign_create=rng.choice((0.0, 0.5)),
                    padding_events_per_application=rng.randint(0, 2),
                    seed=rng.randrange(2**32),
                )
            )
        if log.num_events <= MAX_EVENTS and log.num_objects <= MAX_OBJECTS:
            return log
    raise AssertionError(f"no small log for seed {seed}")


class _Vocab:
    def __init__(self, log: Oced) -> None:
        self.ev_types = Counter(e.activity for e in log.events.values())
        self.ob_types = Counter(o.otype for o in log.objects.values())
        quals = {q for e in log.events.values() for q, _ in e.e2o}
        quals |= {q for o in log.objects.values() for q, _ in o.o2o}
        self.qualifiers = sorted(quals)

    def domain(self, decl: VarDecl) -> int:
        counts = self.ev_types if decl.kind == KIND_EVENT else self.ob_types
        return sum(counts.get(t, 0) for t in decl.types)


class _TreeBuilder:
    def __init__(self, rng: random.Random, vocab: _Vocab) -> None:
        self.rng = rng
        self.vocab = vocab
        self.nodes: dict[str, BindingBox] = {}
        self.edges: list[Edge] = []
        self.var_counter = 0
        self.label_counter = 0
        self.node_counter = 0

    def _pick_types(self, kind: str) -> frozenset[str]:
        pool = self.vocab.ev_types if kind == KIND_EVENT else self.vocab.ob_types
        names = list(pool)
        picked = set(self.rng.sample(names, k=min(len(names), self.rng.choice((1, 1, 2)))))
        if self.rng.random() < 0.06:
            picked.add("ghost-type")
        return frozenset(picked)

    def _qualifier(self):
        roll = self.rng.random()
        if roll < 0.5 or not self.vocab.qualifiers:
            return None
        if roll < 0.92:
            return self.rng.choice(self.vocab.qualifiers)
        return "q-bogus"

    def _tbe_bounds(self) -> tuple:
        return self.rng.choice(_BOUND_CHOICES)

    def _new_var(self, kind: str) -> VarDecl:
        self.var_counter += 1
        return VarDecl(f"v{self.var_counter}", kind, self._pick_types(kind))

    def _anchor_pred(self, new: VarDecl, in_scope: list[VarDecl]):
        events = [v for v in in_scope if v.kind == KIND_EVENT]
        objects = [v for v in in_scope if v.kind == KIND_OBJECT]
        if new.kind == KIND_EVENT:
            if objects and (not events or self.rng.random() < 0.7):
                return E2O(new.name, self.rng.choice(objects).name, self._qualifier())
            if events:
                return TBE(self.rng.choice(events).name, new.name, *self._tbe_bounds())
        else:
            if events and (not objects or self.rng.random() < 0.7):
                return E2O(self.rng.choice(events).name, new.name, self._qualifier())
            if objects:
                other = self.rng.choice(objects).name
                if self.rng.random() < 0.5:
                    return O2O(new.name, other, self._qualifier())
                return O2O(other, new.name, self._qualifier())
        return None

    def _random_pred(self, scope: list[VarDecl]):
        events = [v.name for v in scope if v.kind == KIND_EVENT]
        objects = [v.name for v in scope if v.kind == KIND_OBJECT]
        kinds = []
        if events and objects:
            kinds.append("e2o")
        if len(objects) >= 1:
            kinds.append("o2o")
        if len(events) >= 1:
            kinds.append("tbe")
        if not kinds:
            return None
        kind = self.rng.choice(kinds)
        if kind == "e2o":
            return E2O(self.rng.choice(events), self.rng.choice(objects), self._qualifier())
        if kind == "o2o":
            return O2O(self.rng.choice(objects), self.rng.choice(objects), self._qualifier())
        return TBE(self.rng.choice(events), self.rng.choice(events), *self._tbe_bounds())

    def _cbs_bounds(self) -> tuple[int, object]:
        nmin = self.rng.choice((0, 0, 1, 1, 2))
        nmax = self.rng.choice((nmin, nmin + 1, None, None))
        return nmin, nmax

    def build_node(self, node_id: str, parent: BindingBox | None, depth: int) -> None:
        rng = self.rng
        inherited_vars = parent.vars if parent else ()
        inherited_preds = tuple(parent.basic_predicates()) if parent else ()
        max_delta = 4 - len(inherited_vars)
        if parent is None:
            n_delta = rng.choices((1, 2, 3), (0.5, 0.35, 0.15))[0]
        else:
            n_delta = rng.choices((0, 1, 2), (0.2, 0.55, 0.25))[0]
        n_delta = max(0, min(n_delta, max_delta))

        all_vars = list(inherited_vars)
        preds = list(inherited_preds)
        for _ in range(n_delta):
            kind = KIND_EVENT if rng.random() < 0.5 else KIND_OBJECT
            pool = self.vocab.ev_types if kind == KIND_EVENT else self.vocab.ob_types
            if not pool:
                kind = KIND_OBJECT if kind == KIND_EVENT else KIND_EVENT
            decl = self._new_var(kind)
            if all_vars and rng.random() < 0.75:
                anchor = self._anchor_pred(decl, all_vars)
                if anchor is not None:
                    preds.append(anchor)
            all_vars.append(decl)
        for _ in range(rng.choices((0, 1, 2), (0.55, 0.3, 0.15))[0]):
            extra = self._random_pred(all_vars)
            if extra is not None and extra not in preds:
                preds.append(extra)

        constraints = []
        if all_vars and rng.random() < 0.25:
            pred = self._random_pred(all_vars)
            if pred is not None:
                constraints.append(pred)

        # children first decide the shape, CBS predicates then reference them
        if depth >= 3:
            n_children = 0
        elif parent is None:
            n_children = rng.choices((0, 1, 2), (0.25, 0.45, 0.3))[0]
        else:
            n_children = rng.choices((0, 1, 2), (0.55, 0.35, 0.1))[0]
        if self.node_counter + n_children > 5:
            n_children = max(0, 5 - self.node_counter)

        child_edges = []
        for _ in range(n_children):
            self.label_counter += 1
            self.node_counter += 1
            child_edges.append((f"n{self.node_counter}", f"L{self.label_counter}"))

        cbs_preds = []
        labels = []
        for _, edge_label in child_edges:
            if rng.random() < 0.4:
                cbs_preds.append(CBS(edge_label, *self._cbs_bounds()))
            if rng.random() < 0.35:
                constraints.append(CBS(edge_label, *self._cbs_bounds()))
            if rng.random() < 0.2:
                labels.append(LabelSpec(f"c{edge_label}", AGG_COUNT, edge_label))

        box = BindingBox(
            vars=tuple(all_vars),
            predicates=tuple(preds) + tuple(cbs_preds),
            constraints=tuple(constraints),
            labels=tuple(labels),
        )
        self.nodes[node_id] = box
        for child_id, edge_label in child_edges:
            self.edges.append(Edge(node_id, child_id, edge_label))
            self.build_node(child_id, box, depth + 1)
            # duration labels need two event variables bound in the child
            child_events = [v.name for v in self.nodes[child_id].vars if v.kind == KIND_EVENT]
            if len(child_events) >= 2 and rng.random() < 0.15:
                agg = rng.choice((AGG_MIN_DUR, AGG_MAX_DUR, AGG_MEAN_DUR))
                self.label_counter += 1
                labels.append(
                    LabelSpec(
                        f"d{self.label_counter}",
                        agg,
                        edge_label,
                        rng.choice(child_events),
                        rng.choice(child_events),
                    )
                )
        if labels and len(labels) > len(box.labels):
            self.nodes[node_id] = BindingBox(
                vars=box.vars,
                predicates=box.predicates,
                constraints=box.constraints,
                labels=tuple(labels),
            )


def _work_estimate(tree: QueryTree, vocab: _Vocab) -> float:
    """Upper bound on brute-force enumeration cost, anchored variables
    credited with their typical adjacency degree."""
    rows: dict[str, float] = {}
    total = 0.0
    for node_id in tree.node_order():
        box = tree.nodes[node_id]
        parent_id = tree.parent_of(node_id)
        if parent_id is None:
            parent_rows = 1.0
            parent_vars: frozenset[str] = frozenset()
            parent_preds: frozenset = frozenset()
        else:
            parent_rows = rows[parent_id]
            parent_vars = frozenset(tree.nodes[parent_id].var_map())
            parent_preds = tree.nodes[parent_id].basic_predicates()
        delta = [v for v in box.vars if v.name not in parent_vars]
        delta_preds = [p for p in box.basic_predicates() if p not in parent_preds]
        work = 1.0
        est = 1.0
        for decl in delta:
            dom = vocab.domain(decl)
            work *= dom
            anchored = any(
                isinstance(p, (E2O, O2O)) and decl.name in (getattr(p, "ev", None), getattr(p, "ob", None), getattr(p, "ob2", None))
                for p in delta_preds
            )
            est *= min(dom, 5) if anchored else dom
        total += parent_rows * max(work, 1.0)
        rows[node_id] = parent_rows * est
    return total


def random_tree(seed: int, log: Oced) -> QueryTree:
    """Deterministic valid query tree over the log's vocabulary, cheap
    enough for the brute-force evaluator."""
    vocab = _Vocab(log)
    for attempt in range(40):
        rng = random.Random(seed * 7_654_321 + attempt)
        builder = _TreeBuilder(rng, vocab)
        builder.build_node("n0", None, 0)
        tree = QueryTree(nodes=builder.nodes, root="n0", edges=tuple(builder.edges))
        if _work_estimate(tree, vocab) > WORK_BUDGET:
            continue
        findings = validate_tree(tree)
        assert findings == [], f"generator produced invalid tree: {findings}"
        return tree
    # fall back to the cheapest possible box
    kind = KIND_OBJECT if vocab.ob_types else KIND_EVENT
    pool = vocab.ob_types if vocab.ob_types else vocab.ev_types
    types = frozenset({min(pool, key=pool.get)}) if pool else frozenset({"ghost-type"})
    box = BindingBox(vars=(VarDecl("v1", kind, types),))
    return QueryTree(nodes={"n0": box}, root="n0", edges=())
