"""Shared fixtures: small hand-built logs whose query results are known by
construction, plus the seeded loan log used by the bundled example queries."""

from __future__ import annotations

import pytest

from ocq.index import IndexedLog, build_index
from ocq.model import (
    CBS,
    E2O,
    KIND_EVENT,
    KIND_OBJECT,
    TBE,
    BindingBox,
    Edge,
    QueryTree,
    VarDecl,
)
from ocq.oced import Event, Object, Oced, Timestamp
from ocq.synthetic import LoanConfig, generate_loan_log

FOUR_WEEKS_MS = 4 * 7 * 24 * 3600 * 1000

_ACCEPTANCE_LINES: list[str] = []


def register_acceptance_line(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def ts(iso: str) -> Timestamp:
    return Timestamp.from_iso(iso)


def day(n: int) -> Timestamp:
    """Midnight UTC of 2024-01-<n>."""
    return Timestamp(1_704_067_200_000 + (n - 1) * 86_400_000)


def build_minimal_order_log() -> Oced:
    """One customer places one order with two items; the order is packed,
    shipped, reminded about, and paid.  6 events, 4 objects."""
    objects = [
        Object(
            "o1",
            "customers",
            (("places", "o2"),),
            (
                ("city", ts("2016-01-06T14:15:00Z"), "Bonn"),
                ("city", ts("2018-09-03T10:32:00Z"), "Aachen"),
            ),
        ),
        Object("o2", "orders", (("contains", "o3"), ("contains", "o4"))),
        Object("o3", "items"),
        Object("o4", "items"),
    ]
    events = [
        Event(
            "e1",
            "place order",
            day(1),
            {},
            (("customer", "o1"), ("order", "o2"), ("item", "o3"), ("item", "o4")),
        ),
        Event("e2", "pack item", day(2), {}, (("item", "o3"),)),
        Event("e3", "pack item", day(3), {}, (("item", "o4"),)),
        Event("e4", "ship items", day(4), {}, (("ships", "o3"), ("ships", "o4"))),
        Event(
            "e5",
            "payment reminder",
            day(5),
            {"fee": 15},
            (("recipient", "o1"), ("order", "o2")),
        ),
        Event("e6", "pay order", day(6), {}, (("order", "o2"),)),
    ]
    return Oced.of(events, objects)


def build_four_orders_log() -> Oced:
    """Four confirmed orders: o1 and o2 get payment reminders, o3 is paid
    twice within four weeks and also reminded, o4 sees nothing."""
    objects = [Object(f"o{i}", "orders") for i in range(1, 5)]
    events = [
        Event("e1", "confirm order", day(1), {}, (("order", "o1"),)),
        Event("e2", "confirm order", day(2), {}, (("order", "o2"),)),
        Event("e3", "confirm order", day(3), {}, (("order", "o3"),)),
        Event("e4", "confirm order", day(4), {}, (("order", "o4"),)),
        Event("e5", "payment reminder", day(8), {}, (("order", "o1"),)),
        Event("e6", "payment reminder", day(9), {}, (("order", "o2"),)),
        Event("e7", "pay order", day(10), {}, (("order", "o3"),)),
        Event("e8", "pay order", day(20), {}, (("order", "o3"),)),
        Event("e9", "payment reminder", day(15), {}, (("order", "o3"),)),
    ]
    return Oced.of(events, objects)


def build_paid_orders_log() -> Oced:
    """Four confirmed orders: o1 and o2 are paid exactly once within four
    weeks, o3 twice, o4 never."""
    objects = [Object(f"o{i}", "orders") for i in range(1, 5)]
    events = [
        Event("e1", "confirm order", day(1), {}, (("order", "o1"),)),
        Event("e2", "confirm order", day(2), {}, (("order", "o2"),)),
        Event("e3", "confirm order", day(3), {}, (("order", "o3"),)),
        Event("e4", "confirm order", day(4), {}, (("order", "o4"),)),
        Event("e7", "pay order", day(6), {}, (("order", "o1"),)),
        Event("e8", "pay order", day(12), {}, (("order", "o2"),)),
        Event("e9", "pay order", day(11), {}, (("order", "o3"),)),
        Event("e10", "pay order", day(23), {}, (("order", "o3"),)),
    ]
    return Oced.of(events, objects)


def build_three_orders_log() -> Oced:
    """Three orders: o1 and o2 each have a place event, o1 additionally a
    confirm event.  Entity ids deliberately shadow the query variable names."""
    objects = [Object(f"o{i}", "orders") for i in range(1, 4)]
    events = [
        Event("e1", "place order", day(1), {}, (("order", "o1"),)),
        Event("e2", "place order", day(2), {}, (("order", "o2"),)),
        Event("e3", "confirm order", day(3), {}, (("order", "o1"),)),
    ]
    return Oced.of(events, objects)


def _confirm_vars() -> tuple[VarDecl, VarDecl]:
    return (
        VarDecl("o1", KIND_OBJECT, frozenset({"orders"})),
        VarDecl("e1", KIND_EVENT, frozenset({"confirm order"})),
    )


def pay_and_reminder_children_tree(*, cbs_on_root: bool = False) -> QueryTree:
    """Root: confirmed orders.  Child A: payments within four weeks.
    Child B: payment reminders.  With cbs_on_root both child sets must be
    empty for a root row to survive."""
    o1, e1 = _confirm_vars()
    root_preds: tuple = (E2O("e1", "o1"),)
    if cbs_on_root:
        root_preds += (CBS("A", 0, 0), CBS("B", 0, 0))
    pay = VarDecl("e2", KIND_EVENT, frozenset({"pay order"}))
    reminder = VarDecl("e2", KIND_EVENT, frozenset({"payment reminder"}))
    return QueryTree(
        nodes={
            "v0": BindingBox(vars=(o1, e1), predicates=root_preds),
            "v1": BindingBox(
                vars=(o1, e1, pay),
                predicates=(
                    E2O("e1", "o1"),
                    E2O("e2", "o1"),
                    TBE("e1", "e2", 0, FOUR_WEEKS_MS),
                ),
            ),
            "v2": BindingBox(
                vars=(o1, e1, reminder),
                predicates=(E2O("e1", "o1"), E2O("e2", "o1")),
            ),
        },
        root="v0",
        edges=(Edge("v0", "v1", "A"), Edge("v0", "v2", "B")),
    )


def pay_exactly_once_tree() -> QueryTree:
    """Constraint: every confirmed order is paid exactly once within four
    weeks.  CBS(A,1,1) annotates root rows instead of filtering them."""
    o1, e1 = _confirm_vars()
    pay = VarDecl("e2", KIND_EVENT, frozenset({"pay order"}))
    return QueryTree(
        nodes={
            "v0": BindingBox(
                vars=(o1, e1),
                predicates=(E2O("e1", "o1"),),
                constraints=(CBS("A", 1, 1),),
            ),
            "v1": BindingBox(
                vars=(o1, e1, pay),
                predicates=(
                    E2O("e1", "o1"),
                    E2O("e2", "o1"),
                    TBE("e1", "e2", 0, FOUR_WEEKS_MS),
                ),
            ),
        },
        root="v0",
        edges=(Edge("v0", "v1", "A"),),
    )


# Seeded loan log of roughly 2,000 events with every violation knob active,
# shared by the bundled q1..q7 queries and the acceptance suite.
LOAN_ACCEPTANCE_CONFIG = LoanConfig(
    num_applications=160,
    max_offers_per_application=3,
    num_resources=8,
    p_second_submit=0.08,
    p_skip_return=0.10,
    p_multi_offer_return=0.15,
    p_application_accepted=0.75,
    p_no_offer_accept=0.10,
    p_foreign_create=0.08,
    padding_events_per_application=4,
    seed=20240101,
)


@pytest.fixture
def minimal_order_log() -> Oced:
    return build_minimal_order_log()


@pytest.fixture
def four_orders_log() -> Oced:
    return build_four_orders_log()


@pytest.fixture
def four_orders_idx(four_orders_log) -> IndexedLog:
    return build_index(four_orders_log)


@pytest.fixture
def paid_orders_log() -> Oced:
    return build_paid_orders_log()


@pytest.fixture
def paid_orders_idx(paid_orders_log) -> IndexedLog:
    return build_index(paid_orders_log)


@pytest.fixture(scope="session")
def loan_log() -> Oced:
    return generate_loan_log(LOAN_ACCEPTANCE_CONFIG)


@pytest.fixture(scope="session")
def loan_idx(loan_log) -> IndexedLog:
    return build_index(loan_log)
