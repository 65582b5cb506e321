"""Edge-list input, vertex-value and metrics output."""
from __future__ import annotations

import json
import math
from typing import IO

from .engine import RunResult


class ParseError(ValueError):
    def __init__(self, lineno: int, line: str, reason: str):
        super().__init__(f"line {lineno}: {reason}: {line!r}")
        self.lineno = lineno


def parse_edge_list(text: str) -> tuple[list[tuple[str, str, float]], dict[str, float]]:
    """Parse ``src dst [weight]`` lines and ``v <label> <value>`` lines.

    A three-token line whose first token is ``v`` is always a value line.
    """
    edges = []
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        if tok[0] == "v" and len(tok) == 3:
            try:
                values[tok[1]] = float(tok[2])
            except ValueError:
                raise ParseError(lineno, raw, "vertex value is not a number") from None
            continue
        if len(tok) not in (2, 3):
            raise ParseError(lineno, raw, "expected 'src dst [weight]'")
        w = 1.0
        if len(tok) == 3:
            try:
                w = float(tok[2])
            except ValueError:
                raise ParseError(lineno, raw, "weight is not a number") from None
            if math.isnan(w) or w < 0:
                raise ParseError(lineno, raw, "weight must be non-negative")
        edges.append((tok[0], tok[1], w))
    return edges, values


def format_value(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def label_sort_key(label):
    s = str(label)
    try:
        return (0, int(s), s)
    except ValueError:
        return (1, 0, s)


def write_vertex_values(result: RunResult, labels=None, sink: IO[str] | None = None) -> str:
    """One ``label<TAB>value`` line per live vertex, sorted by label.

    Integer-like labels sort numerically and come before other labels.
    """
    labels = labels if labels is not None else result.graph.labels
    rows = sorted(((labels[v], x) for v, x in result.values.items()), key=lambda r: label_sort_key(r[0]))
    text = "".join(f"{lab}\t{format_value(x)}\n" for lab, x in rows)
    if sink is not None:
        sink.write(text)
    return text


def write_metrics(result: RunResult, sink: IO[str] | None = None) -> str:
    """JSON lines: one record per executed superstep, then a summary."""
    lines = [
        json.dumps({
            "superstep": m.superstep,
            "active": m.active,
            "messages_sent": m.messages_sent,
            "wall_ms": round(m.wall_ms, 3),
        })
        for m in result.metrics
    ]
    lines.append(json.dumps({
        "supersteps_executed": result.supersteps_executed,
        "recoveries": result.recoveries,
    }))
    text = "\n".join(lines) + "\n"
    if sink is not None:
        sink.write(text)
    return text


def write_edge_list(edges, values: dict | None = None) -> str:
    """Inverse of ``parse_edge_list``."""
    out = [f"{s} {d} {format_value(float(w))}\n" for s, d, w in edges]
    for label, x in (values or {}).items():
        out.append(f"v {label} {format_value(float(x))}\n")
    return "".join(out)
