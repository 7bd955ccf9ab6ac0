"""Compare the JIT kernels against the pure-numpy fallback.

Evaluates the bundled loan queries plus a dense event-pair query on a
generated log, once per backend.  Each backend runs in its own process
because the kernel implementation is chosen when ocq is imported.

    python3 benchmarks/compare_backends.py --apps 3000 --repeat 3
"""

import argparse
import json
import os
import subprocess
import sys
import time

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
QUERY_NAMES = ("q1", "q2", "q4", "q6", "q7", "pairs")


def _trees():
    sys.path.insert(0, os.path.join(ROOT, "tests"))
    from qdefs import BUNDLED_QUERIES

    from ocq.model import TBE, BindingBox, Edge, KIND_EVENT, QueryTree, VarDecl

    s1 = VarDecl("e1", KIND_EVENT, frozenset({"submit application"}))
    s2 = VarDecl("e2", KIND_EVENT, frozenset({"submit application"}))
    pairs = QueryTree(
        nodes={
            "all": BindingBox(vars=(s1,)),
            "close": BindingBox(
                vars=(s1, s2), predicates=(TBE("e1", "e2", 0, 3_600_000),)
            ),
        },
        root="all",
        edges=(Edge("all", "close", "A"),),
    )
    trees = {name: BUNDLED_QUERIES[name]() for name in QUERY_NAMES if name != "pairs"}
    trees["pairs"] = pairs
    return trees


def run_worker(apps: int, repeat: int) -> None:
    from ocq._kernels import BACKEND_NAME
    from ocq.engine import evaluate_tree
    from ocq.index import build_index
    from ocq.synthetic import LoanConfig, generate_loan_log

    from ocq.errors import ResultTooLarge

    log = generate_loan_log(LoanConfig(num_applications=apps, seed=20240101))
    idx = build_index(log)
    timings = {}
    for name, tree in _trees().items():
        try:
            evaluate_tree(tree, idx)  # warm up, pays any JIT compilation cost
            timings[name] = min(
                _timed(evaluate_tree, tree, idx) for _ in range(repeat)
            )
        except ResultTooLarge:
            timings[name] = None
    print(
        json.dumps(
            {
                "backend": BACKEND_NAME,
                "events": log.num_events,
                "objects": log.num_objects,
                "timings": timings,
            }
        )
    )


def _timed(fn, *args) -> float:
    start = time.perf_counter()
    fn(*args)
    return time.perf_counter() - start


def run_backend(backend: str, apps: int, repeat: int) -> dict:
    env = dict(os.environ, OCPQ_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--worker", "--apps", str(apps), "--repeat", str(repeat)],
        capture_output=True,
        text=True,
        env=env,
        cwd=ROOT,
        check=True,
    )
    return json.loads(proc.stdout.splitlines()[-1])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--apps", type=int, default=3000, help="loan applications to generate")
    parser.add_argument("--repeat", type=int, default=3, help="runs per query, best is kept")
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.worker:
        run_worker(args.apps, args.repeat)
        return

    results = {name: run_backend(name, args.apps, args.repeat) for name in ("numpy", "numba")}
    numpy_res, numba_res = results["numpy"], results["numba"]
    print(
        f"log: {numpy_res['events']:,} events, {numpy_res['objects']:,} objects; "
        f"best of {args.repeat} runs"
    )
    if numba_res["backend"] != "numba":
        print("note: numba unavailable, second column fell back to", numba_res["backend"])
    print(f"{'query':<8}{'numpy':>10}{'numba':>10}{'speedup':>10}")
    for name in QUERY_NAMES:
        a = numpy_res["timings"][name]
        b = numba_res["timings"][name]
        if a is None or b is None:
            print(f"{name:<8}{'exceeds the row cap at this size':>30}")
            continue
        ratio = a / b if b > 0 else float("inf")
        print(f"{name:<8}{a:>9.4f}s{b:>9.4f}s{ratio:>9.2f}x")


if __name__ == "__main__":
    main()
