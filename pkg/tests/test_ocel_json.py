"""JSON import/export and log validation."""

import json

import pytest

from conftest import build_minimal_order_log, day
from ocq.errors import DanglingRef, EventWithoutObjects, ParseError
from ocq.oced import Event, Object, Oced, Timestamp
from ocq.ocel_json import export_ocel2_json, import_ocel2_json, validate

MINIMAL = {
    "eventTypes": [{"name": "place order", "attributes": []}],
    "objectTypes": [{"name": "orders", "attributes": []}],
    "events": [
        {
            "id": "e1",
            "type": "place order",
            "time": "2024-01-01T00:00:00Z",
            "attributes": [{"name": "total", "value": 99.5}],
            "relationships": [{"objectId": "o1", "qualifier": "order"}],
        }
    ],
    "objects": [{"id": "o1", "type": "orders", "attributes": [], "relationships": []}],
}


def doc(**overrides) -> dict:
    out = json.loads(json.dumps(MINIMAL))
    out.update(overrides)
    return out


class TestImport:
    def test_accepts_dict_str_and_bytes(self):
        text = json.dumps(MINIMAL)
        for data in (MINIMAL, text, text.encode()):
            log = import_ocel2_json(data)
            assert log.num_events == 1 and log.num_objects == 1

    def test_event_fields(self):
        log = import_ocel2_json(MINIMAL)
        ev = log.events["e1"]
        assert ev.activity == "place order"
        assert ev.time == Timestamp.from_iso("2024-01-01T00:00:00Z")
        assert ev.attributes == {"total": 99.5}
        assert ev.e2o == (("order", "o1"),)

    def test_malformed_json(self):
        with pytest.raises(ParseError):
            import_ocel2_json("{not json")

    def test_top_level_keys_required(self):
        with pytest.raises(ParseError):
            import_ocel2_json({"events": []})
        with pytest.raises(ParseError):
            import_ocel2_json([])

    @pytest.mark.parametrize("field", ["id", "type", "time"])
    def test_missing_event_field(self, field):
        d = doc()
        del d["events"][0][field]
        with pytest.raises(ParseError):
            import_ocel2_json(d)

    def test_missing_relationship_target(self):
        d = doc()
        d["events"][0]["relationships"] = [{"qualifier": "order"}]
        with pytest.raises(ParseError):
            import_ocel2_json(d)

    def test_qualifierless_relationship_maps_to_empty_string(self):
        d = doc()
        d["events"][0]["relationships"] = [{"objectId": "o1"}]
        log = import_ocel2_json(d)
        assert log.events["e1"].e2o == (("", "o1"),)

    def test_null_qualifier_maps_to_empty_string(self):
        d = doc()
        d["events"][0]["relationships"] = [{"objectId": "o1", "qualifier": None}]
        log = import_ocel2_json(d)
        assert log.events["e1"].e2o == (("", "o1"),)

    def test_declared_time_attribute_coerced(self):
        d = doc(
            eventTypes=[
                {
                    "name": "place order",
                    "attributes": [{"name": "due", "type": "time"}],
                }
            ]
        )
        d["events"][0]["attributes"] = [{"name": "due", "value": "2024-02-01T00:00:00Z"}]
        log = import_ocel2_json(d)
        assert log.events["e1"].attributes["due"] == Timestamp.from_iso("2024-02-01T00:00:00Z")

    def test_undeclared_string_stays_string(self):
        d = doc()
        d["events"][0]["attributes"] = [{"name": "due", "value": "2024-02-01T00:00:00Z"}]
        log = import_ocel2_json(d)
        assert log.events["e1"].attributes["due"] == "2024-02-01T00:00:00Z"

    def test_object_attributes_need_time(self):
        d = doc()
        d["objects"][0]["attributes"] = [{"name": "city", "value": "Bonn"}]
        with pytest.raises(ParseError):
            import_ocel2_json(d)

    def test_object_attribute_triple(self):
        d = doc()
        d["objects"][0]["attributes"] = [
            {"name": "city", "time": "2020-01-01T00:00:00Z", "value": "Bonn"}
        ]
        log = import_ocel2_json(d)
        assert log.objects["o1"].attributes == (
            ("city", Timestamp.from_iso("2020-01-01T00:00:00Z"), "Bonn"),
        )

    def test_unsupported_attribute_value(self):
        d = doc()
        d["events"][0]["attributes"] = [{"name": "x", "value": {"nested": 1}}]
        with pytest.raises(ParseError):
            import_ocel2_json(d)

    def test_duplicate_ids_rejected(self):
        d = doc()
        d["objects"].append(dict(d["objects"][0]))
        with pytest.raises(ParseError):
            import_ocel2_json(d)


class TestStrictImport:
    def test_dangling_event_reference(self):
        d = doc()
        d["events"][0]["relationships"] = [{"objectId": "ghost", "qualifier": "order"}]
        assert import_ocel2_json(d).num_events == 1  # lenient keeps it
        with pytest.raises(DanglingRef):
            import_ocel2_json(d, strict=True)

    def test_event_without_objects(self):
        d = doc()
        d["events"][0]["relationships"] = []
        assert import_ocel2_json(d).num_events == 1
        with pytest.raises(EventWithoutObjects):
            import_ocel2_json(d, strict=True)


class TestValidate:
    def test_clean_log(self, minimal_order_log):
        report = validate(minimal_order_log)
        assert report.ok and report.warnings == []

    def test_dangling_is_always_error(self):
        log = Oced.of([Event("e1", "a", day(1), {}, (("q", "ghost"),))], [])
        report = validate(log)
        assert not report.ok
        assert report.errors[0].code == "DanglingRef"
        assert report.errors[0].ref == "e1"

    def test_dangling_o2o(self):
        log = Oced.of([], [Object("o1", "x", (("q", "ghost"),))])
        assert [f.code for f in validate(log).errors] == ["DanglingRef"]

    def test_event_without_objects_warning_then_error(self):
        log = Oced.of([Event("e1", "a", day(1))], [])
        assert [f.code for f in validate(log).warnings] == ["EventWithoutObjects"]
        assert [f.code for f in validate(log, strict=True).errors] == ["EventWithoutObjects"]

    def test_id_collision_warning_then_error(self):
        log = Oced.of([Event("x", "a", day(1), {}, (("q", "x"),))], [Object("x", "t")])
        assert [f.code for f in validate(log).warnings] == ["IdCollision"]
        assert "IdCollision" in [f.code for f in validate(log, strict=True).errors]


class TestExport:
    def test_round_trip_identity(self, minimal_order_log):
        log2 = import_ocel2_json(export_ocel2_json(minimal_order_log))
        assert log2 == minimal_order_log

    def test_round_trip_is_fixpoint(self, minimal_order_log):
        once = export_ocel2_json(minimal_order_log)
        twice = export_ocel2_json(import_ocel2_json(once))
        assert once == twice

    def test_export_declares_attribute_types(self):
        log = build_minimal_order_log()
        d = export_ocel2_json(log)
        reminder = next(t for t in d["eventTypes"] if t["name"] == "payment reminder")
        assert {"name": "fee", "type": "integer"} in reminder["attributes"]
        customers = next(t for t in d["objectTypes"] if t["name"] == "customers")
        assert {"name": "city", "type": "string"} in customers["attributes"]

    def test_export_serializes_timestamp_values(self):
        log = Oced.of(
            [Event("e1", "a", day(1), {"due": day(2)}, (("q", "o1"),))],
            [Object("o1", "t")],
        )
        d = export_ocel2_json(log)
        att = d["events"][0]["attributes"][0]
        assert att == {"name": "due", "value": day(2).iso()}
        decl = next(t for t in d["eventTypes"] if t["name"] == "a")
        assert decl["attributes"] == [{"name": "due", "type": "time"}]
        # and the declaration makes the value round-trip as a timestamp
        assert import_ocel2_json(d).events["e1"].attributes["due"] == day(2)

    def test_export_is_json_serializable(self, minimal_order_log):
        json.dumps(export_ocel2_json(minimal_order_log))
