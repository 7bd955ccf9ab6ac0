"""Small assertions helpers shared across test modules."""

from __future__ import annotations

from ocq.engine import EvaluationResult, NodeResult
from ocq.index import IndexedLog
from ocq.model import KIND_EVENT


def decode_rows(node: NodeResult, idx: IndexedLog) -> list[tuple[str, ...]]:
    """Node rows as tuples of original entity ids, in table order."""
    tables = [
        idx.interner.event_ids if kind == KIND_EVENT else idx.interner.object_ids
        for kind in node.var_kinds
    ]
    cols = [node.columns[name] for name in node.var_names]
    return [
        tuple(tables[j].name_of(int(cols[j][i])) for j in range(len(cols)))
        for i in range(node.n_rows)
    ]


def result_fingerprint(result: EvaluationResult) -> bytes:
    """Byte-exact digest of every table, order and values included."""
    parts: list[bytes] = []
    for node_id, node in result.per_node.items():
        parts.append(node_id.encode())
        parts.append(",".join(node.var_names).encode())
        for name in node.var_names:
            parts.append(node.columns[name].tobytes())
        parts.append(node.parent_idx.tobytes())
        parts.append(node.cbs_excluded.tobytes())
        parts.append(node.verdicts.tobytes())
        for name in sorted(node.labels):
            values, present = node.labels[name]
            parts.append(name.encode())
            parts.append(values.tobytes())
            parts.append(present.tobytes())
    return b"\x00".join(parts)
