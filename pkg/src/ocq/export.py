"""CSV export and per-node summaries of evaluation results."""

from __future__ import annotations

import csv
import io

import numpy as np

from .engine import EvaluationResult, NodeResult
from .errors import UnknownNode
from .model import KIND_EVENT


def _id_strings(result: EvaluationResult, res: NodeResult, var: str) -> list[str]:
    kind = res.var_kinds[res.var_names.index(var)]
    it = result.idx.interner
    table = it.event_ids if kind == KIND_EVENT else it.object_ids
    return [table.name_of(int(c)) for c in res.columns[var]]


def _format_value(value: float, present: bool) -> str:
    if not present:
        return ""
    if value == int(value):
        return str(int(value))
    return repr(float(value))


def export_csv(
    result: EvaluationResult,
    node_id: str,
    include_basic_only: bool = False,
    include_labels: bool = True,
) -> bytes:
    res = result.per_node.get(node_id)
    if res is None:
        raise UnknownNode(node_id)
    box = result.tree.nodes[node_id]
    label_names = [spec.name for spec in box.labels] if include_labels else []

    header = list(res.var_names) + label_names
    if box.constraints:
        header.append("satisfied")
    if include_basic_only:
        header.append("cbs_excluded")

    keep = np.arange(res.n_rows) if include_basic_only else np.nonzero(~res.cbs_excluded)[0]
    columns = [_id_strings(result, res, var) for var in res.var_names]
    satisfied = res.satisfied_mask()

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\r\n")
    writer.writerow(header)
    for i in keep:
        row = [col[i] for col in columns]
        for name in label_names:
            values, present = res.labels[name]
            row.append(_format_value(float(values[i]), bool(present[i])))
        if box.constraints:
            row.append("true" if satisfied[i] else "false")
        if include_basic_only:
            row.append("true" if res.cbs_excluded[i] else "false")
        writer.writerow(row)
    return out.getvalue().encode("utf-8")


def violation_percent(satisfied: int, violated: int) -> float:
    denominator = satisfied + violated
    if denominator == 0:
        return 0.0
    return round(100.0 * violated / denominator, 2)


def summarize(result: EvaluationResult) -> dict[str, dict]:
    """Per-node row and verdict counts with the violation percentage."""
    out = {}
    for node_id, res in result.per_node.items():
        total, satisfied, violated = res.counts
        out[node_id] = {
            "totalBasic": total,
            "satisfied": satisfied,
            "violated": violated,
            "violationPercent": violation_percent(satisfied, violated),
        }
    return out


def format_percent(value: float) -> str:
    return f"{value:.2f}"
