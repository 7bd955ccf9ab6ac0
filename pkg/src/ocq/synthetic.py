"""Seeded synthetic log generators for tests and benchmarks.

Two process shapes: a small order-management process (customers place orders
containing items) and a loan-application process (applications receive offers
handled by resources) whose knobs inject specific constraint violations.
Both are deterministic in the seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .oced import Event, Object, Oced, Timestamp

_ORDERS_BASE_MS = 1_451_606_400_000  # 2016-01-01T00:00:00Z
_LOAN_BASE_MS = 1_704_067_200_000  # 2024-01-01T00:00:00Z

_CITIES = ("Bonn", "Aachen", "Cologne", "Liege", "Maastricht")


def _check_prob(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {p}")


def _check_count(name: str, n: int) -> None:
    if n < 0:
        raise ValueError(f"{name} must be >= 0, got {n}")


@dataclass(frozen=True, slots=True)
class SyntheticConfig:
    num_customers: int = 1
    orders_per_customer: int = 1
    items_per_order: int = 2
    reminder_probability: float = 0.0
    skip_payment_probability: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        _check_count("num_customers", self.num_customers)
        _check_count("orders_per_customer", self.orders_per_customer)
        _check_count("items_per_order", self.items_per_order)
        _check_prob("reminder_probability", self.reminder_probability)
        _check_prob("skip_payment_probability", self.skip_payment_probability)


def generate_synthetic(cfg: SyntheticConfig) -> Oced:
    """Order process: place/confirm order, pack item per item, ship items,
    optional payment reminders, then pay order unless payment is skipped."""
    rng = random.Random(cfg.seed)
    events: list[Event] = []
    objects: list[Object] = []
    eid = 0

    def emit(activity: str, t: int, e2o: list[tuple[str, str]], attrs=None) -> None:
        nonlocal eid
        eid += 1
        events.append(Event(f"e{eid}", activity, Timestamp(t), attrs or {}, tuple(e2o)))

    order_no = 0
    for c in range(1, cfg.num_customers + 1):
        cid = f"c{c}"
        t = _ORDERS_BASE_MS + (c - 1) * 7 * 86_400_000 + rng.randrange(0, 86_400_000)
        city_writes = [("city", Timestamp(t - 3_600_000), rng.choice(_CITIES))]
        if rng.random() < 0.3:
            city_writes.append(("city", Timestamp(t + 30 * 86_400_000), rng.choice(_CITIES)))
        customer_o2o: list[tuple[str, str]] = []

        for _ in range(cfg.orders_per_customer):
            order_no += 1
            oid = f"o{order_no}"
            customer_o2o.append(("places", oid))
            item_ids = [f"i{order_no}_{k}" for k in range(1, cfg.items_per_order + 1)]
            objects.extend(Object(i, "items") for i in item_ids)
            objects.append(Object(oid, "orders", tuple(("contains", i) for i in item_ids)))

            def step() -> int:
                nonlocal t
                t += rng.randrange(3_600_000, 3 * 86_400_000)
                return t

            emit(
                "place order",
                step(),
                [("customer", cid), ("order", oid)] + [("item", i) for i in item_ids],
            )
            emit("confirm order", step(), [("order", oid)])
            for i in item_ids:
                emit("pack item", step(), [("item", i)])
            if item_ids:
                emit("ship items", step(), [("ships", i) for i in item_ids])
            while rng.random() < cfg.reminder_probability:
                emit(
                    "payment reminder",
                    step(),
                    [("recipient", cid), ("order", oid)],
                    {"fee": 15},
                )
            if rng.random() >= cfg.skip_payment_probability:
                emit("pay order", step(), [("order", oid)])

        objects.append(Object(cid, "customers", tuple(customer_o2o), tuple(city_writes)))

    return Oced.of(events, objects)


@dataclass(frozen=True, slots=True)
class LoanConfig:
    """Loan-application process with violation knobs.

    Each application is handled by one resource: submit, validate, offers
    created (normally by the handling resource), offers returned, then the
    application is possibly accepted, after which offers are accepted or
    cancelled.  Probabilities inject violations of the bundled constraint
    queries: duplicate submits, offers never returned, returns touching two
    offers, accepted applications with no accepted offer, offers created by
    a foreign resource.
    """

    num_applications: int = 80
    max_offers_per_application: int = 3
    num_resources: int = 8
    p_second_submit: float = 0.0
    p_skip_return: float = 0.0
    p_multi_offer_return: float = 0.0
    p_application_accepted: float = 0.75
    p_no_offer_accept: float = 0.0
    p_foreign_create: float = 0.0
    padding_events_per_application: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        _check_count("num_applications", self.num_applications)
        _check_count("num_resources", self.num_resources)
        _check_count("padding_events_per_application", self.padding_events_per_application)
        if self.max_offers_per_application < 1:
            raise ValueError("max_offers_per_application must be >= 1")
        for name in (
            "p_second_submit",
            "p_skip_return",
            "p_multi_offer_return",
            "p_application_accepted",
            "p_no_offer_accept",
            "p_foreign_create",
        ):
            _check_prob(name, getattr(self, name))


def generate_loan_log(cfg: LoanConfig) -> Oced:
    if cfg.num_applications and not cfg.num_resources:
        raise ValueError("num_resources must be >= 1 when applications exist")
    rng = random.Random(cfg.seed)
    events: list[Event] = []
    objects: list[Object] = [Object(f"r{i}", "resource") for i in range(1, cfg.num_resources + 1)]
    resource_ids = [ob.id for ob in objects]
    eid = 0

    for a in range(1, cfg.num_applications + 1):
        app = f"app{a}"
        objects.append(Object(app, "application"))
        handler = rng.choice(resource_ids)
        t = _LOAN_BASE_MS + (a - 1) * 6 * 3_600_000 + rng.randrange(0, 3_600_000)

        def emit(activity: str, e2o: list[tuple[str, str]]) -> str:
            nonlocal eid, t
            eid += 1
            t += rng.randrange(60_000, 12 * 3_600_000)
            events.append(Event(f"e{eid}", activity, Timestamp(t), {}, tuple(e2o)))
            return f"e{eid}"

        emit("submit application", [("application", app)])
        if rng.random() < cfg.p_second_submit:
            emit("submit application", [("application", app)])
        emit("validate documents", [("application", app), ("resource", handler)])

        offers = []
        for k in range(1, rng.randint(1, cfg.max_offers_per_application) + 1):
            off = f"off{a}_{k}"
            objects.append(Object(off, "offer", (("for", app),)))
            creator = handler
            if rng.random() < cfg.p_foreign_create and len(resource_ids) > 1:
                creator = rng.choice([r for r in resource_ids if r != handler])
            emit("create offer", [("offer", off), ("application", app), ("resource", creator)])
            offers.append(off)

        for i, off in enumerate(offers):
            if rng.random() < cfg.p_skip_return:
                continue
            refs = [("offer", off)]
            if i > 0 and rng.random() < cfg.p_multi_offer_return:
                refs.append(("offer", offers[i - 1]))
            emit("return offer", refs)

        accepted = rng.random() < cfg.p_application_accepted
        if accepted:
            emit("accept application", [("application", app), ("resource", handler)])
            if rng.random() < cfg.p_no_offer_accept:
                winners: set[str] = set()
            else:
                winners = {off for off in offers if rng.random() < 0.6}
                if not winners:
                    winners = {rng.choice(offers)}
            for off in offers:
                emit("accept offer" if off in winners else "cancel offer", [("offer", off)])
        else:
            for off in offers:
                emit("cancel offer", [("offer", off)])

        for _ in range(cfg.padding_events_per_application):
            emit("call customer", [("application", app)])

    return Oced.of(events, objects)
