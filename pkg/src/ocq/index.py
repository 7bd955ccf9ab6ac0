"""Immutable interned index over a log.

Entities are interned to dense 32-bit codes.  Relationships live in CSR
adjacency (forward and reverse, rows sorted by neighbor then qualifier,
exact duplicates removed) plus sorted packed-pair arrays, one per qualifier
and one global, so that membership checks vectorize with searchsorted.
Type buckets hold entity codes per type; event buckets are time-ordered.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import DanglingRef, UnknownRef
from .oced import Oced, WILDCARD


class Relation(IntEnum):
    E2O = 0
    E2O_REV = 1
    O2O = 2
    O2O_REV = 3


class InternTable:
    """Bidirectional string<->dense-code table; codes assigned first-seen."""

    __slots__ = ("_by_name", "_names")

    def __init__(self) -> None:
        self._by_name: dict[str, int] = {}
        self._names: list[str] = []

    def intern(self, name: str) -> int:
        code = self._by_name.get(name)
        if code is None:
            code = len(self._names)
            self._by_name[name] = code
            self._names.append(name)
        return code

    def code_of(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownRef(name) from None

    def get(self, name: str):
        return self._by_name.get(name)

    def name_of(self, code: int) -> str:
        return self._names[code]

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name


@dataclass(slots=True)
class Interner:
    event_ids: InternTable = field(default_factory=InternTable)
    object_ids: InternTable = field(default_factory=InternTable)
    event_types: InternTable = field(default_factory=InternTable)
    object_types: InternTable = field(default_factory=InternTable)
    qualifiers: InternTable = field(default_factory=InternTable)
    attribute_names: InternTable = field(default_factory=InternTable)
    variables: InternTable = field(default_factory=InternTable)


@dataclass(slots=True)
class Csr:
    offsets: np.ndarray  # int64, len = rows + 1
    neighbor: np.ndarray  # int32
    qual: np.ndarray  # int32

    def row(self, code: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.offsets[code], self.offsets[code + 1]
        return self.neighbor[lo:hi], self.qual[lo:hi]

    def degree(self, code: int) -> int:
        return int(self.offsets[code + 1] - self.offsets[code])


def _build_csr(n_rows: int, src, qual, dst) -> Csr:
    src = np.asarray(src, dtype=np.int64)
    qual = np.asarray(qual, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if src.size:
        order = np.lexsort((qual, dst, src))
        src, qual, dst = src[order], qual[order], dst[order]
        keep = np.empty(src.size, dtype=bool)
        keep[0] = True
        keep[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1]) | (qual[1:] != qual[:-1])
        src, qual, dst = src[keep], qual[keep], dst[keep]
    offsets = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n_rows), out=offsets[1:])
    return Csr(offsets, dst.astype(np.int32), qual.astype(np.int32))


def pack_pairs(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    return (src.astype(np.int64) << 32) | dst.astype(np.int64)


@dataclass(slots=True)
class PairSet:
    """Sorted packed (src<<32|dst) arrays: one global, one per qualifier."""

    all_pairs: np.ndarray
    by_qual: dict[int, np.ndarray]

    def lookup(self, qual_code) -> np.ndarray:
        if qual_code is None:
            return self.all_pairs
        return self.by_qual.get(qual_code, _EMPTY_I64)

    def contains(self, qual_code, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
        table = self.lookup(qual_code)
        key = pack_pairs(src, dst)
        pos = np.searchsorted(table, key)
        pos[pos == table.size] = 0
        if table.size == 0:
            return np.zeros(key.shape, dtype=bool)
        return table[pos] == key


_EMPTY_I64 = np.empty(0, dtype=np.int64)
_EMPTY_I32 = np.empty(0, dtype=np.int32)


def _build_pairset(src, qual, dst) -> PairSet:
    src = np.asarray(src, dtype=np.int64)
    qual = np.asarray(qual, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    packed = np.unique(pack_pairs(src, dst)) if src.size else _EMPTY_I64
    by_qual: dict[int, np.ndarray] = {}
    for q in np.unique(qual) if qual.size else ():
        mask = qual == q
        by_qual[int(q)] = np.unique(pack_pairs(src[mask], dst[mask]))
    return PairSet(packed, by_qual)


@dataclass(slots=True)
class IndexedLog:
    interner: Interner
    times: np.ndarray  # int64 ms per event code
    ev_type_codes: np.ndarray  # int32 per event code
    ob_type_codes: np.ndarray  # int32 per object code
    per_event_type: dict[int, np.ndarray]  # type code -> event codes, time order
    per_object_type: dict[int, np.ndarray]  # type code -> object codes ascending
    adj: dict[Relation, Csr]
    e2o_pairs: PairSet  # packed (event, object)
    o2o_pairs: PairSet  # packed (source object, target object)

    @property
    def n_events(self) -> int:
        return int(self.times.size)

    @property
    def n_objects(self) -> int:
        return int(self.ob_type_codes.size)

    def event_bucket(self, type_codes) -> np.ndarray:
        parts = [self.per_event_type.get(t, _EMPTY_I32) for t in sorted(type_codes)]
        return np.concatenate(parts) if parts else _EMPTY_I32

    def object_bucket(self, type_codes) -> np.ndarray:
        parts = [self.per_object_type.get(t, _EMPTY_I32) for t in sorted(type_codes)]
        return np.concatenate(parts) if parts else _EMPTY_I32

    def bucket(self, kind_is_event: bool, type_codes) -> np.ndarray:
        return self.event_bucket(type_codes) if kind_is_event else self.object_bucket(type_codes)


def build_index(log: Oced) -> IndexedLog:
    it = Interner()
    for ob in log.objects.values():
        it.object_ids.intern(ob.id)
    n_ob = len(it.object_ids)

    times = np.empty(len(log.events), dtype=np.int64)
    ev_types = np.empty(len(log.events), dtype=np.int32)
    e2o_src: list[int] = []
    e2o_qual: list[int] = []
    e2o_dst: list[int] = []
    for ev in log.events.values():
        code = it.event_ids.intern(ev.id)
        times[code] = ev.time.ms
        ev_types[code] = it.event_types.intern(ev.activity)
        for qual, oid in ev.e2o:
            dst = it.object_ids.get(oid)
            if dst is None:
                raise DanglingRef(f"event {ev.id!r} references missing object {oid!r}")
            e2o_src.append(code)
            e2o_qual.append(it.qualifiers.intern(qual))
            e2o_dst.append(dst)
        for name in ev.attributes:
            it.attribute_names.intern(name)
    n_ev = len(it.event_ids)

    ob_types = np.empty(n_ob, dtype=np.int32)
    o2o_src: list[int] = []
    o2o_qual: list[int] = []
    o2o_dst: list[int] = []
    for ob in log.objects.values():
        code = it.object_ids.code_of(ob.id)
        ob_types[code] = it.object_types.intern(ob.otype)
        for qual, oid in ob.o2o:
            dst = it.object_ids.get(oid)
            if dst is None:
                raise DanglingRef(f"object {ob.id!r} references missing object {oid!r}")
            o2o_src.append(code)
            o2o_qual.append(it.qualifiers.intern(qual))
            o2o_dst.append(dst)
        for name, _, _ in ob.attributes:
            it.attribute_names.intern(name)

    per_event_type: dict[int, np.ndarray] = {}
    for t in range(len(it.event_types)):
        codes = np.nonzero(ev_types == t)[0]
        order = np.lexsort((codes, times[codes]))
        per_event_type[t] = codes[order].astype(np.int32)
    per_object_type: dict[int, np.ndarray] = {}
    all_ob = np.arange(n_ob, dtype=np.int32)
    for t in range(len(it.object_types)):
        per_object_type[t] = all_ob[ob_types == t]

    e2o_src_a = np.asarray(e2o_src, dtype=np.int64)
    e2o_qual_a = np.asarray(e2o_qual, dtype=np.int64)
    e2o_dst_a = np.asarray(e2o_dst, dtype=np.int64)
    o2o_src_a = np.asarray(o2o_src, dtype=np.int64)
    o2o_qual_a = np.asarray(o2o_qual, dtype=np.int64)
    o2o_dst_a = np.asarray(o2o_dst, dtype=np.int64)

    adj = {
        Relation.E2O: _build_csr(n_ev, e2o_src_a, e2o_qual_a, e2o_dst_a),
        Relation.E2O_REV: _build_csr(n_ob, e2o_dst_a, e2o_qual_a, e2o_src_a),
        Relation.O2O: _build_csr(n_ob, o2o_src_a, o2o_qual_a, o2o_dst_a),
        Relation.O2O_REV: _build_csr(n_ob, o2o_dst_a, o2o_qual_a, o2o_src_a),
    }
    return IndexedLog(
        interner=it,
        times=times,
        ev_type_codes=ev_types,
        ob_type_codes=ob_types,
        per_event_type=per_event_type,
        per_object_type=per_object_type,
        adj=adj,
        e2o_pairs=_build_pairset(e2o_src_a, e2o_qual_a, e2o_dst_a),
        o2o_pairs=_build_pairset(o2o_src_a, o2o_qual_a, o2o_dst_a),
    )


def related(idx: IndexedLog, code: int, relation: Relation, qual=WILDCARD) -> list[int]:
    """Distinct neighbor codes reachable from ``code``, ascending."""
    csr = idx.adj[relation]
    domain = idx.n_events if relation == Relation.E2O else idx.n_objects
    if not 0 <= code < domain:
        raise UnknownRef(f"code {code} out of range for {relation.name}")
    neighbors, quals = csr.row(code)
    if qual is not WILDCARD:
        qcode = qual if isinstance(qual, int) else idx.interner.qualifiers.get(qual)
        if qcode is None:
            return []
        neighbors = neighbors[quals == qcode]
    return [int(c) for c in np.unique(neighbors)]
