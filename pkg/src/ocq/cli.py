"""Command-line interface: run queries, validate logs, generate synthetic data,
serve the HTTP API.

Exit codes: 0 success, 2 validation or parse failure, 3 result-size guard,
1 anything else (including oracle mismatches).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from pathlib import Path

from .errors import InvalidQuery, OcqError, ParseError, ResultTooLarge
from .export import export_csv, format_percent, summarize
from .index import build_index
from .model import parse_query_json
from .ocel_json import export_ocel2_json, import_ocel2_json, validate
from .synthetic import LoanConfig, SyntheticConfig, generate_loan_log, generate_synthetic

_log = logging.getLogger("ocq")

_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_TOO_LARGE = 3


def _setup_logging() -> None:
    level = os.environ.get("OCPQ_LOG_LEVEL", "warn").strip().lower()
    if level not in _LEVELS:
        print(f"ignoring unknown OCPQ_LOG_LEVEL {level!r}", file=sys.stderr)
        level = "warn"
    logging.basicConfig(level=_LEVELS[level], format="%(levelname)s %(name)s: %(message)s")


def _safe_filename(node_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", node_id) or "node"


def cmd_run(args: argparse.Namespace) -> int:
    try:
        log = import_ocel2_json(Path(args.log).read_bytes(), strict=args.strict)
        report = validate(log, strict=args.strict)
        if report.errors:
            for f in report.errors:
                print(f"{f.code} {f.ref}: {f.message}", file=sys.stderr)
            return EXIT_VALIDATION
        tree = parse_query_json(Path(args.query).read_bytes())
    except InvalidQuery as exc:
        for f in exc.findings:
            print(f"{f.code} {f.where}: {f.message}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OcqError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    from .engine import evaluate_tree

    idx = build_index(log)
    try:
        result = evaluate_tree(tree, idx, thread_budget=args.threads, max_rows=args.max_rows)
    except ResultTooLarge as exc:
        print(f"ResultTooLarge: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE

    if args.oracle:
        from .oracle import brute_force_evaluate, results_match

        mismatches = results_match(result, brute_force_evaluate(tree, log))
        if mismatches:
            print(f"oracle mismatch at nodes: {', '.join(mismatches)}", file=sys.stderr)
            return EXIT_FAILURE

    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for node_id in result.per_node:
            data = export_csv(result, node_id, include_basic_only=args.include_basic_only)
            (out_dir / f"{_safe_filename(node_id)}.csv").write_bytes(data)

    summaries = summarize(result)
    print("node\trows\tsatisfied\tviolated\tpercent\twall_s")
    for node_id, s in summaries.items():
        print(
            f"{node_id}\t{s['totalBasic']}\t{s['satisfied']}\t{s['violated']}"
            f"\t{format_percent(s['violationPercent'])}%\t{result.wall_time:.3f}"
        )
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        log = import_ocel2_json(Path(args.log).read_bytes())
    except (OcqError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    report = validate(log, strict=args.strict)
    for f in report.warnings:
        print(f"warning: {f.code} {f.ref}: {f.message}", file=sys.stderr)
    if report.errors:
        for f in report.errors:
            print(f"{f.code} {f.ref}: {f.message}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"OK, {log.num_events} events, {log.num_objects} objects")
    return EXIT_OK


_ORDERS_KEYS = {
    "numCustomers": "num_customers",
    "ordersPerCustomer": "orders_per_customer",
    "itemsPerOrder": "items_per_order",
    "reminderProbability": "reminder_probability",
    "skipPaymentProbability": "skip_payment_probability",
    "seed": "seed",
}

_LOAN_KEYS = {
    "numApplications": "num_applications",
    "maxOffersPerApplication": "max_offers_per_application",
    "numResources": "num_resources",
    "pSecondSubmit": "p_second_submit",
    "pSkipReturn": "p_skip_return",
    "pMultiOfferReturn": "p_multi_offer_return",
    "pApplicationAccepted": "p_application_accepted",
    "pNoOfferAccept": "p_no_offer_accept",
    "pForeignCreate": "p_foreign_create",
    "paddingEventsPerApplication": "padding_events_per_application",
    "seed": "seed",
}


def _config_from_doc(doc: dict, seed_override) -> object:
    kind = doc.get("kind", "orders")
    keys = _ORDERS_KEYS if kind == "orders" else _LOAN_KEYS if kind == "loan" else None
    if keys is None:
        raise ParseError(f"unknown generator kind {kind!r}")
    fields = {}
    for key, value in doc.items():
        if key == "kind":
            continue
        if key not in keys:
            raise ParseError(f"unknown config key {key!r} for kind {kind!r}")
        fields[keys[key]] = value
    if seed_override is not None:
        fields["seed"] = seed_override
    cls = SyntheticConfig if kind == "orders" else LoanConfig
    try:
        return cls(**fields)
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from exc


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        doc = json.loads(Path(args.config).read_text()) if args.config else {}
        if not isinstance(doc, dict):
            raise ParseError("config must be a JSON object")
        cfg = _config_from_doc(doc, args.seed)
    except (OcqError, OSError, json.JSONDecodeError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    log = generate_synthetic(cfg) if isinstance(cfg, SyntheticConfig) else generate_loan_log(cfg)
    payload = json.dumps(export_ocel2_json(log), indent=2, ensure_ascii=False)
    Path(args.out).write_text(payload + "\n")
    _log.info("wrote %s events, %s objects to %s", log.num_events, log.num_objects, args.out)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import run_server

    port = args.port if args.port is not None else int(os.environ.get("OCPQ_PORT", "8000"))
    run_server(host=args.host, port=port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ocq", description="Query and constraint engine for object-centric event data")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a query over a log")
    run.add_argument("--log", required=True, help="OCEL 2.0 JSON log file")
    run.add_argument("--query", required=True, help="query JSON file")
    run.add_argument("--out", help="directory for per-node CSV files")
    run.add_argument("--format", choices=["csv"], default="csv")
    run.add_argument("--threads", type=int, default=None, help="thread budget (default: all cores)")
    run.add_argument("--strict", action="store_true", help="reject logs with validation findings")
    run.add_argument("--oracle", action="store_true", help="cross-check against the brute-force evaluator")
    run.add_argument("--max-rows", type=int, default=10_000_000, help="per-node row cap")
    run.add_argument("--include-basic-only", action="store_true", help="keep CBS-excluded rows in CSVs")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check a log file")
    val.add_argument("--log", required=True)
    val.add_argument("--strict", action="store_true")
    val.set_defaults(func=cmd_validate)

    gen = sub.add_parser("generate", help="write a synthetic OCEL 2.0 JSON log")
    gen.add_argument("--config", help="generator config JSON file")
    gen.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    serve = sub.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=None, help="default: OCPQ_PORT or 8000")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResultTooLarge as exc:
        print(f"ResultTooLarge: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except OcqError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except KeyboardInterrupt:
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
