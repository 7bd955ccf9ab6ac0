"""Interned index: codes, buckets, adjacency, pair membership."""

import numpy as np
import pytest

from conftest import day
from ocq.errors import DanglingRef, UnknownRef
from ocq.index import InternTable, Relation, build_index, pack_pairs, related
from ocq.oced import Event, Object, Oced


class TestInternTable:
    def test_codes_assigned_first_seen(self):
        t = InternTable()
        assert [t.intern(x) for x in ("a", "b", "a", "c")] == [0, 1, 0, 2]
        assert len(t) == 3

    def test_lookup(self):
        t = InternTable()
        t.intern("a")
        assert t.code_of("a") == 0
        assert t.name_of(0) == "a"
        assert "a" in t and "b" not in t
        assert t.get("b") is None
        with pytest.raises(UnknownRef):
            t.code_of("b")


@pytest.fixture
def idx(minimal_order_log):
    return build_index(minimal_order_log)


def ev(idx, eid: str) -> int:
    return idx.interner.event_ids.code_of(eid)


def ob(idx, oid: str) -> int:
    return idx.interner.object_ids.code_of(oid)


class TestBuildIndex:
    def test_sizes(self, idx):
        assert idx.n_events == 6 and idx.n_objects == 4

    def test_times_in_code_order(self, idx):
        assert idx.times[ev(idx, "e3")] == day(3).ms
        assert list(idx.times) == [day(n).ms for n in range(1, 7)]

    def test_type_codes(self, idx):
        it = idx.interner
        assert idx.ev_type_codes[ev(idx, "e2")] == it.event_types.code_of("pack item")
        assert idx.ob_type_codes[ob(idx, "o3")] == it.object_types.code_of("items")

    def test_event_bucket_is_time_ordered(self, idx):
        pack = idx.interner.event_types.code_of("pack item")
        assert list(idx.per_event_type[pack]) == [ev(idx, "e2"), ev(idx, "e3")]

    def test_bucket_concatenates_types(self, idx):
        it = idx.interner
        codes = {it.event_types.code_of("pack item"), it.event_types.code_of("pay order")}
        got = idx.event_bucket(codes)
        assert sorted(got) == sorted([ev(idx, "e2"), ev(idx, "e3"), ev(idx, "e6")])

    def test_object_bucket(self, idx):
        items = idx.interner.object_types.code_of("items")
        assert list(idx.object_bucket({items})) == [ob(idx, "o3"), ob(idx, "o4")]
        assert idx.object_bucket(set()).size == 0

    def test_e2o_row_sorted_by_neighbor(self, idx):
        neighbors, quals = idx.adj[Relation.E2O].row(ev(idx, "e1"))
        assert list(neighbors) == sorted(ob(idx, o) for o in ("o1", "o2", "o3", "o4"))
        q = idx.interner.qualifiers
        assert quals[list(neighbors).index(ob(idx, "o3"))] == q.code_of("item")

    def test_e2o_rev_row(self, idx):
        neighbors, _ = idx.adj[Relation.E2O_REV].row(ob(idx, "o2"))
        assert sorted(neighbors) == sorted(ev(idx, e) for e in ("e1", "e5", "e6"))

    def test_o2o_rows(self, idx):
        neighbors, _ = idx.adj[Relation.O2O].row(ob(idx, "o2"))
        assert sorted(neighbors) == sorted([ob(idx, "o3"), ob(idx, "o4")])
        rev, _ = idx.adj[Relation.O2O_REV].row(ob(idx, "o2"))
        assert list(rev) == [ob(idx, "o1")]

    def test_adjacency_transposes(self, idx):
        assert idx.adj[Relation.E2O].neighbor.size == idx.adj[Relation.E2O_REV].neighbor.size
        assert idx.adj[Relation.O2O].neighbor.size == idx.adj[Relation.O2O_REV].neighbor.size

    def test_degree_sums_match_offsets(self, idx):
        for rel, csr in idx.adj.items():
            n = idx.n_events if rel == Relation.E2O else idx.n_objects
            assert csr.offsets[0] == 0 and csr.offsets[-1] == csr.neighbor.size
            assert sum(csr.degree(c) for c in range(n)) == csr.neighbor.size

    def test_exact_duplicate_edges_removed(self):
        log = Oced.of(
            [Event("e1", "a", day(1), {}, (("q", "o1"), ("q", "o1"), ("r", "o1")))],
            [Object("o1", "t")],
        )
        i = build_index(log)
        assert i.adj[Relation.E2O].degree(0) == 2  # one per distinct qualifier
        assert i.e2o_pairs.all_pairs.size == 1

    def test_dangling_reference_rejected(self):
        log = Oced.of([Event("e1", "a", day(1), {}, (("q", "ghost"),))], [])
        with pytest.raises(DanglingRef):
            build_index(log)
        log = Oced.of([], [Object("o1", "t", (("q", "ghost"),))])
        with pytest.raises(DanglingRef):
            build_index(log)


class TestPairSet:
    def test_pack_pairs(self):
        src = np.array([1], dtype=np.int64)
        dst = np.array([2], dtype=np.int64)
        assert pack_pairs(src, dst)[0] == (1 << 32) | 2

    def test_contains_respects_qualifier(self, idx):
        q = idx.interner.qualifiers
        src = np.array([ev(idx, "e1"), ev(idx, "e1")], dtype=np.int64)
        dst = np.array([ob(idx, "o3"), ob(idx, "o1")], dtype=np.int64)
        hit = idx.e2o_pairs.contains(q.code_of("item"), src, dst)
        assert list(hit) == [True, False]
        assert list(idx.e2o_pairs.contains(None, src, dst)) == [True, True]

    def test_contains_unknown_qualifier_empty(self, idx):
        src = np.array([ev(idx, "e1")], dtype=np.int64)
        dst = np.array([ob(idx, "o1")], dtype=np.int64)
        assert list(idx.e2o_pairs.contains(10_000, src, dst)) == [False]


class TestRelated:
    def test_wildcard(self, idx):
        got = related(idx, ev(idx, "e1"), Relation.E2O)
        assert got == sorted(ob(idx, o) for o in ("o1", "o2", "o3", "o4"))

    def test_qualifier_filter(self, idx):
        got = related(idx, ev(idx, "e1"), Relation.E2O, "item")
        assert got == sorted([ob(idx, "o3"), ob(idx, "o4")])
        assert related(idx, ev(idx, "e1"), Relation.E2O, "nope") == []

    def test_reverse_direction(self, idx):
        got = related(idx, ob(idx, "o2"), Relation.E2O_REV, "order")
        assert got == sorted(ev(idx, e) for e in ("e1", "e5", "e6"))

    def test_out_of_range_code(self, idx):
        with pytest.raises(UnknownRef):
            related(idx, 99, Relation.E2O)
