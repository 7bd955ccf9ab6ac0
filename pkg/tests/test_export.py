"""CSV export and result summaries."""

import csv
import io

import pytest

from conftest import day, pay_and_reminder_children_tree, pay_exactly_once_tree
from ocq.engine import evaluate_tree
from ocq.errors import UnknownNode
from ocq.export import export_csv, format_percent, summarize, violation_percent
from ocq.index import build_index
from ocq.model import AGG_COUNT, AGG_MAX_DUR, BindingBox, E2O, Edge, KIND_EVENT, KIND_OBJECT, LabelSpec, QueryTree, VarDecl
from ocq.oced import Event, Object, Oced


def rows_of(data: bytes) -> list[list[str]]:
    return list(csv.reader(io.StringIO(data.decode("utf-8"))))


@pytest.fixture
def paid_result(paid_orders_idx):
    return evaluate_tree(pay_exactly_once_tree(), paid_orders_idx)


class TestExportCsv:
    def test_verdict_column(self, paid_result):
        got = rows_of(export_csv(paid_result, "v0"))
        assert got == [
            ["o1", "e1", "satisfied"],
            ["o1", "e1", "true"],
            ["o2", "e2", "true"],
            ["o3", "e3", "false"],
            ["o4", "e4", "false"],
        ]

    def test_child_node_without_constraints(self, paid_result):
        got = rows_of(export_csv(paid_result, "v1"))
        assert got[0] == ["o1", "e1", "e2"]
        assert got[1:] == [
            ["o1", "e1", "e7"],
            ["o2", "e2", "e8"],
            ["o3", "e3", "e9"],
            ["o3", "e3", "e10"],
        ]

    def test_unknown_node(self, paid_result):
        with pytest.raises(UnknownNode):
            export_csv(paid_result, "ghost")

    def test_excluded_rows_dropped_by_default(self, four_orders_idx):
        res = evaluate_tree(pay_and_reminder_children_tree(cbs_on_root=True), four_orders_idx)
        got = rows_of(export_csv(res, "v0"))
        assert got == [["o1", "e1"], ["o4", "e4"]]

    def test_include_basic_only_adds_column(self, four_orders_idx):
        res = evaluate_tree(pay_and_reminder_children_tree(cbs_on_root=True), four_orders_idx)
        got = rows_of(export_csv(res, "v0", include_basic_only=True))
        assert got[0] == ["o1", "e1", "cbs_excluded"]
        assert [r[2] for r in got[1:]] == ["true", "true", "true", "false"]

    def test_header_only_when_empty(self, four_orders_idx):
        tree = QueryTree(
            nodes={"a": BindingBox(vars=(VarDecl("x", KIND_OBJECT, frozenset({"ghost"})),))},
            root="a",
            edges=(),
        )
        res = evaluate_tree(tree, four_orders_idx)
        assert rows_of(export_csv(res, "a")) == [["x"]]

    def test_label_columns_and_absent_values(self, four_orders_idx):
        tree = pay_exactly_once_tree()
        nodes = dict(tree.nodes)
        nodes["v0"] = BindingBox(
            vars=nodes["v0"].vars,
            predicates=nodes["v0"].predicates,
            labels=(
                LabelSpec("pays", AGG_COUNT, "A"),
                LabelSpec("gap", AGG_MAX_DUR, "A", "e1", "e2"),
            ),
        )
        res = evaluate_tree(QueryTree(nodes=nodes, root="v0", edges=tree.edges), four_orders_idx)
        got = rows_of(export_csv(res, "v0"))
        assert got[0] == ["o1", "e1", "pays", "gap"]
        assert got[1] == ["o1", "e1", "0", ""]
        assert got[3] == ["o3", "e3", "2", str(17 * 86_400_000)]

    def test_labels_can_be_omitted(self, four_orders_idx):
        tree = pay_exactly_once_tree()
        nodes = dict(tree.nodes)
        nodes["v0"] = BindingBox(
            vars=nodes["v0"].vars,
            predicates=nodes["v0"].predicates,
            labels=(LabelSpec("pays", AGG_COUNT, "A"),),
        )
        res = evaluate_tree(QueryTree(nodes=nodes, root="v0", edges=tree.edges), four_orders_idx)
        assert rows_of(export_csv(res, "v0", include_labels=False))[0] == ["o1", "e1"]

    def test_rfc4180_quoting(self):
        log = Oced.of(
            [Event('e,"1"', "a", day(1), {}, (("q", "o;x"),))],
            [Object("o;x", "t")],
        )
        idx = build_index(log)
        tree = QueryTree(
            nodes={
                "n": BindingBox(
                    vars=(
                        VarDecl("e", KIND_EVENT, frozenset({"a"})),
                        VarDecl("o", KIND_OBJECT, frozenset({"t"})),
                    ),
                    predicates=(E2O("e", "o"),),
                )
            },
            root="n",
            edges=(),
        )
        data = export_csv(evaluate_tree(tree, idx), "n")
        assert b'"e,""1"""' in data
        assert rows_of(data)[1] == ['e,"1"', "o;x"]

    def test_row_count_conservation(self, paid_result):
        for node_id, res in paid_result.per_node.items():
            full = rows_of(export_csv(paid_result, node_id, include_basic_only=True))
            assert len(full) - 1 == res.n_rows
            kept = rows_of(export_csv(paid_result, node_id))
            assert len(kept) - 1 == int((~res.cbs_excluded).sum())


class TestSummaries:
    def test_violation_percent_rounding(self):
        assert violation_percent(0, 0) == 0.0
        assert violation_percent(2, 2) == 50.0
        assert violation_percent(2, 1) == 33.33
        assert violation_percent(1, 2) == 66.67
        assert violation_percent(5, 0) == 0.0
        assert violation_percent(0, 5) == 100.0

    def test_format_percent_two_decimals(self):
        assert format_percent(50.0) == "50.00"
        assert format_percent(33.33) == "33.33"
        assert format_percent(0.0) == "0.00"

    def test_summarize(self, paid_result):
        got = summarize(paid_result)
        assert got["v0"] == {
            "totalBasic": 4,
            "satisfied": 2,
            "violated": 2,
            "violationPercent": 50.0,
        }
        assert got["v1"] == {
            "totalBasic": 4,
            "satisfied": 4,
            "violated": 0,
            "violationPercent": 0.0,
        }

    def test_summarize_with_exclusion(self, four_orders_idx):
        res = evaluate_tree(pay_and_reminder_children_tree(cbs_on_root=True), four_orders_idx)
        got = summarize(res)
        assert got["v0"] == {
            "totalBasic": 4,
            "satisfied": 1,
            "violated": 0,
            "violationPercent": 0.0,
        }
