"""Object-centric event data: events, objects, and their qualified relationships.

A log holds a set of events and a set of objects.  Every event has exactly one
activity (its event type), a timestamp, and qualified references to objects.
Objects have exactly one object type, optional qualified references to other
objects, and timestamped attribute values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Iterable, Union

from .errors import ParseError, UnknownRef


class _Wildcard:
    """Qualifier wildcard: matches any relationship qualifier."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "*"


class _Absent:
    """Returned by lookups that found no value (distinct from a null value)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ABSENT"

    def __bool__(self) -> bool:
        return False


WILDCARD = _Wildcard()
ABSENT = _Absent()

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)

_RFC3339 = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})[Tt ]"
    r"(\d{2}):(\d{2}):(\d{2})(\.\d+)?"
    r"([Zz]|[+-]\d{2}:?\d{2})?$"
)


@dataclass(frozen=True, order=True, slots=True)
class Timestamp:
    """A point in time at millisecond resolution (epoch milliseconds, UTC)."""

    ms: int

    @classmethod
    def from_iso(cls, text: str) -> "Timestamp":
        """Parse an RFC 3339 string; sub-millisecond digits are truncated."""
        m = _RFC3339.match(text.strip())
        if not m:
            raise ParseError(f"not an RFC 3339 timestamp: {text!r}")
        year, month, day, hour, minute, second = (int(m.group(i)) for i in range(1, 7))
        frac = m.group(7)
        millis = int(frac[1:4].ljust(3, "0")) if frac else 0
        offset = m.group(8)
        try:
            dt = datetime(year, month, day, hour, minute, second, tzinfo=timezone.utc)
        except ValueError as exc:
            raise ParseError(f"invalid timestamp {text!r}: {exc}") from exc
        delta = dt - _EPOCH
        ms = (delta.days * 86_400_000) + delta.seconds * 1000 + millis
        if offset and offset not in ("Z", "z"):
            sign = 1 if offset[0] == "+" else -1
            digits = offset[1:].replace(":", "")
            ms -= sign * (int(digits[:2]) * 3600 + int(digits[2:4]) * 60) * 1000
        return cls(ms)

    def iso(self) -> str:
        """Format as RFC 3339 UTC with exactly three fractional digits."""
        dt = _EPOCH + timedelta(milliseconds=self.ms)
        return f"{dt:%Y-%m-%dT%H:%M:%S}.{self.ms % 1000:03d}Z"

    def __sub__(self, other: "Timestamp") -> int:
        """Difference in signed milliseconds."""
        return self.ms - other.ms

    def plus_ms(self, delta: int) -> "Timestamp":
        return Timestamp(self.ms + delta)


#: Attribute values are strings, numbers, booleans, timestamps, or null.
AttrValue = Union[str, int, float, bool, Timestamp, None]


@dataclass(slots=True)
class Event:
    id: str
    activity: str
    time: Timestamp
    attributes: dict[str, AttrValue] = field(default_factory=dict)
    #: qualified object references as (qualifier, object id) pairs
    e2o: tuple[tuple[str, str], ...] = ()


@dataclass(slots=True)
class Object:
    id: str
    otype: str
    #: qualified references to other objects as (qualifier, object id) pairs
    o2o: tuple[tuple[str, str], ...] = ()
    #: timestamped attribute writes as (name, time, value) triples
    attributes: tuple[tuple[str, Timestamp, AttrValue], ...] = ()


@dataclass(slots=True)
class Oced:
    """An immutable-by-convention log: do not mutate after construction."""

    events: dict[str, Event]
    objects: dict[str, Object]

    @classmethod
    def of(cls, events: Iterable[Event], objects: Iterable[Object]) -> "Oced":
        ev_map: dict[str, Event] = {}
        ob_map: dict[str, Object] = {}
        for ev in events:
            if ev.id in ev_map:
                raise ParseError(f"duplicate event id {ev.id!r}")
            ev_map[ev.id] = ev
        for ob in objects:
            if ob.id in ob_map:
                raise ParseError(f"duplicate object id {ob.id!r}")
            ob_map[ob.id] = ob
        return cls(ev_map, ob_map)

    @property
    def num_events(self) -> int:
        return len(self.events)

    @property
    def num_objects(self) -> int:
        return len(self.objects)


def type_of(log: Oced, ref: str) -> str:
    """Activity for an event id, object type for an object id."""
    ev = log.events.get(ref)
    if ev is not None:
        return ev.activity
    ob = log.objects.get(ref)
    if ob is not None:
        return ob.otype
    raise UnknownRef(ref)


def time_of(log: Oced, event_id: str) -> Timestamp:
    """Timestamp of an event; objects have no single timestamp."""
    ev = log.events.get(event_id)
    if ev is None:
        raise UnknownRef(event_id)
    return ev.time


def objects_of(log: Oced, ref: str, qual=WILDCARD) -> set[str]:
    """Object ids referenced from an event or object, filtered by qualifier."""
    ev = log.events.get(ref)
    if ev is not None:
        pairs = ev.e2o
    else:
        ob = log.objects.get(ref)
        if ob is None:
            raise UnknownRef(ref)
        pairs = ob.o2o
    if qual is WILDCARD:
        return {o for _, o in pairs}
    return {o for q, o in pairs if q == qual}


def attribute_at(log: Oced, object_id: str, attr: str, t: Timestamp):
    """Value of the last write to ``attr`` at or before ``t``; ABSENT if none."""
    ob = log.objects.get(object_id)
    if ob is None:
        raise UnknownRef(object_id)
    best_time = None
    best_value = ABSENT
    for name, when, value in ob.attributes:
        if name == attr and when <= t and (best_time is None or when >= best_time):
            best_time = when
            best_value = value
    return best_value
