"""OCEL 2.0 JSON import/export and log validation.

Only the JSON flavor of OCEL 2.0 is supported.  Lenient import keeps the data
verbatim (including dangling references and events without object references)
so that real-world files load; strict import rejects those findings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Union

from .errors import DanglingRef, EventWithoutObjects, ParseError
from .oced import AttrValue, Event, Object, Oced, Timestamp


class Finding(NamedTuple):
    code: str
    ref: str
    message: str


@dataclass(slots=True)
class ValidationReport:
    errors: list[Finding] = field(default_factory=list)
    warnings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def _require(entry: dict, key: str, where: str) -> Any:
    if key not in entry:
        raise ParseError(f"{where} missing required field {key!r}")
    return entry[key]


def _declared_time_attrs(section: Any) -> dict[str, set[str]]:
    """Map type name -> attribute names declared with a time type."""
    out: dict[str, set[str]] = {}
    if not isinstance(section, list):
        return out
    for decl in section:
        if not isinstance(decl, dict):
            continue
        names = {
            a.get("name")
            for a in decl.get("attributes", ())
            if isinstance(a, dict) and str(a.get("type", "")).lower() in ("time", "date", "timestamp")
        }
        out[str(decl.get("name"))] = {n for n in names if n}
    return out


def _coerce(value: Any, is_time: bool) -> AttrValue:
    if is_time and isinstance(value, str):
        return Timestamp.from_iso(value)
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    raise ParseError(f"unsupported attribute value {value!r}")


def _relationships(entry: dict, where: str) -> tuple[tuple[str, str], ...]:
    rels = entry.get("relationships", [])
    if not isinstance(rels, list):
        raise ParseError(f"{where}: relationships must be a list")
    out = []
    for rel in rels:
        target = _require(rel, "objectId", where)
        # qualifier-less OCEL relationships map to the empty-string qualifier
        out.append((str(rel.get("qualifier") or ""), str(target)))
    return tuple(out)


def import_ocel2_json(data: Union[bytes, str, dict], strict: bool = False) -> Oced:
    """Parse OCEL 2.0 JSON into a log.

    Strict mode raises DanglingRef / EventWithoutObjects on the first such
    finding; lenient mode keeps the data as-is.
    """
    if isinstance(data, (bytes, str)):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc}") from exc
    else:
        doc = data
    if not isinstance(doc, dict) or "events" not in doc or "objects" not in doc:
        raise ParseError("top-level keys 'events' and 'objects' are required")

    ev_time_attrs = _declared_time_attrs(doc.get("eventTypes"))
    ob_time_attrs = _declared_time_attrs(doc.get("objectTypes"))

    objects: list[Object] = []
    for entry in doc["objects"]:
        oid = str(_require(entry, "id", "object"))
        otype = str(_require(entry, "type", f"object {oid!r}"))
        time_attrs = ob_time_attrs.get(otype, set())
        attrs = []
        for att in entry.get("attributes", ()):
            name = str(_require(att, "name", f"object {oid!r} attribute"))
            when = Timestamp.from_iso(str(_require(att, "time", f"object {oid!r} attribute {name!r}")))
            attrs.append((name, when, _coerce(att.get("value"), name in time_attrs)))
        objects.append(Object(oid, otype, _relationships(entry, f"object {oid!r}"), tuple(attrs)))

    events: list[Event] = []
    for entry in doc["events"]:
        eid = str(_require(entry, "id", "event"))
        activity = str(_require(entry, "type", f"event {eid!r}"))
        time = Timestamp.from_iso(str(_require(entry, "time", f"event {eid!r}")))
        time_attrs = ev_time_attrs.get(activity, set())
        attrs: dict[str, AttrValue] = {}
        for att in entry.get("attributes", ()):
            name = str(_require(att, "name", f"event {eid!r} attribute"))
            attrs[name] = _coerce(att.get("value"), name in time_attrs)
        events.append(Event(eid, activity, time, attrs, _relationships(entry, f"event {eid!r}")))

    log = Oced.of(events, objects)
    if strict:
        report = validate(log, strict=True)
        for finding in report.errors:
            if finding.code == "DanglingRef":
                raise DanglingRef(f"{finding.ref}: {finding.message}")
            if finding.code == "EventWithoutObjects":
                raise EventWithoutObjects(finding.ref)
        if report.errors:
            raise ParseError("; ".join(f"{f.code} {f.ref}: {f.message}" for f in report.errors))
    return log


def validate(log: Oced, strict: bool = False) -> ValidationReport:
    """Check the mandatory log properties; findings carry the offending id.

    Dangling references are always errors.  Events without object references
    and event/object id collisions are warnings in lenient mode, errors in
    strict mode.
    """
    report = ValidationReport()
    for eid in log.events:
        if eid in log.objects:
            f = Finding("IdCollision", eid, "id used for both an event and an object")
            (report.errors if strict else report.warnings).append(f)
    for ev in log.events.values():
        if not ev.e2o:
            f = Finding("EventWithoutObjects", ev.id, "event references no objects")
            (report.errors if strict else report.warnings).append(f)
        for qual, oid in ev.e2o:
            if oid not in log.objects:
                report.errors.append(
                    Finding("DanglingRef", ev.id, f"references missing object {oid!r} (qualifier {qual!r})")
                )
    for ob in log.objects.values():
        for qual, oid in ob.o2o:
            if oid not in log.objects:
                report.errors.append(
                    Finding("DanglingRef", ob.id, f"references missing object {oid!r} (qualifier {qual!r})")
                )
    return report


def _attr_type_name(value: AttrValue) -> str:
    if isinstance(value, Timestamp):
        return "time"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, float):
        return "float"
    return "string"


def _json_value(value: AttrValue) -> Any:
    return value.iso() if isinstance(value, Timestamp) else value


def export_ocel2_json(log: Oced) -> dict:
    """Serialize to the OCEL 2.0 JSON layout; import(export(log)) == log."""
    ev_types: dict[str, dict[str, str]] = {}
    ob_types: dict[str, dict[str, str]] = {}

    events = []
    for ev in log.events.values():
        ev_types.setdefault(ev.activity, {})
        for name, value in ev.attributes.items():
            ev_types[ev.activity].setdefault(name, _attr_type_name(value))
        events.append(
            {
                "id": ev.id,
                "type": ev.activity,
                "time": ev.time.iso(),
                "attributes": [{"name": n, "value": _json_value(v)} for n, v in ev.attributes.items()],
                "relationships": [{"objectId": o, "qualifier": q} for q, o in ev.e2o],
            }
        )

    objects = []
    for ob in log.objects.values():
        ob_types.setdefault(ob.otype, {})
        for name, _, value in ob.attributes:
            ob_types[ob.otype].setdefault(name, _attr_type_name(value))
        objects.append(
            {
                "id": ob.id,
                "type": ob.otype,
                "attributes": [
                    {"name": n, "time": t.iso(), "value": _json_value(v)} for n, t, v in ob.attributes
                ],
                "relationships": [{"objectId": o, "qualifier": q} for q, o in ob.o2o],
            }
        )

    def type_section(types: dict[str, dict[str, str]]) -> list[dict]:
        return [
            {"name": tname, "attributes": [{"name": a, "type": t} for a, t in attrs.items()]}
            for tname, attrs in types.items()
        ]

    return {
        "eventTypes": type_section(ev_types),
        "objectTypes": type_section(ob_types),
        "events": events,
        "objects": objects,
    }
