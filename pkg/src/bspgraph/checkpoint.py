"""Binary checkpoint blobs taken at superstep barriers.

Layout, little-endian::

    b"PGLC"  u32 version  u64 superstep  u64 n
    then seven sections, each ``u64 byte_length`` followed by its bytes:
      values        n x f64
      halted        bitmap, ceil(n/8) bytes
      alive         bitmap, ceil(n/8) bytes
      inbox         (u64 target, u64 sender, f64 payload) triples
      aggregators   repeated (u32 name_len, utf-8 name, f64 value)
      edges         (u64 src, u64 dst, f64 weight) triples, adjacency order
      labels        utf-8 JSON list, one entry per id
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .messages import MessageBatch

MAGIC = b"PGLC"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")
_LEN = struct.Struct("<Q")
_TRIPLE = np.dtype([("a", "<u8"), ("b", "<u8"), ("x", "<f8")])


class CheckpointError(ValueError):
    pass


@dataclass
class EngineState:
    """Everything needed to resume a run at the start of ``superstep``."""

    superstep: int
    graph: Graph
    values: np.ndarray
    halted: np.ndarray
    inbox: MessageBatch
    aggregates: dict[str, float]


def _triples(a, b, x) -> bytes:
    arr = np.empty(len(a), dtype=_TRIPLE)
    arr["a"], arr["b"], arr["x"] = a, b, x
    return arr.tobytes()


def checkpoint(state: EngineState) -> bytes:
    g = state.graph
    n = g.n
    agg = b"".join(
        struct.pack("<I", len(k := name.encode())) + k + struct.pack("<d", float(v))
        for name, v in sorted(state.aggregates.items())
    )
    sections = [
        np.asarray(state.values, dtype="<f8").tobytes(),
        np.packbits(np.asarray(state.halted, dtype=bool), bitorder="little").tobytes(),
        np.packbits(g.alive, bitorder="little").tobytes(),
        _triples(state.inbox.targets, state.inbox.senders, state.inbox.payloads),
        agg,
        _triples(g.sources(), g.targets, g.weights),
        json.dumps(g.labels).encode(),
    ]
    out = [_HEADER.pack(MAGIC, VERSION, state.superstep, n)]
    for sec in sections:
        out.append(_LEN.pack(len(sec)))
        out.append(sec)
    return b"".join(out)


def restore(blob: bytes) -> EngineState:
    if len(blob) < _HEADER.size:
        raise CheckpointError("blob shorter than header")
    magic, version, superstep, n = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"unsupported version {version}")

    pos = _HEADER.size
    sections = []
    for i in range(7):
        if pos + _LEN.size > len(blob):
            raise CheckpointError(f"truncated before section {i}")
        (size,) = _LEN.unpack_from(blob, pos)
        pos += _LEN.size
        if pos + size > len(blob):
            raise CheckpointError(f"section {i} claims {size} bytes, {len(blob) - pos} remain")
        sections.append(blob[pos:pos + size])
        pos += size
    if pos != len(blob):
        raise CheckpointError(f"{len(blob) - pos} trailing bytes")

    values_b, halted_b, alive_b, inbox_b, agg_b, edges_b, labels_b = sections
    nbits = (n + 7) // 8
    if len(values_b) != 8 * n or len(halted_b) != nbits or len(alive_b) != nbits:
        raise CheckpointError("vertex section length does not match n")
    if len(inbox_b) % _TRIPLE.itemsize or len(edges_b) % _TRIPLE.itemsize:
        raise CheckpointError("triple section length not a multiple of 24")

    values = np.frombuffer(values_b, dtype="<f8").astype(np.float64)
    halted = np.unpackbits(np.frombuffer(halted_b, np.uint8), count=n, bitorder="little").astype(bool)
    alive = np.unpackbits(np.frombuffer(alive_b, np.uint8), count=n, bitorder="little").astype(bool)

    ib = np.frombuffer(inbox_b, dtype=_TRIPLE)
    inbox = MessageBatch(ib["a"].astype(np.int64), ib["b"].astype(np.int64), ib["x"].astype(np.float64))

    aggregates = {}
    p = 0
    try:
        while p < len(agg_b):
            (k,) = struct.unpack_from("<I", agg_b, p)
            name = agg_b[p + 4:p + 4 + k].decode()
            (v,) = struct.unpack_from("<d", agg_b, p + 4 + k)
            aggregates[name] = v
            p += 4 + k + 8
    except (struct.error, UnicodeDecodeError) as exc:
        raise CheckpointError(f"corrupt aggregator table: {exc}") from exc

    eb = np.frombuffer(edges_b, dtype=_TRIPLE)
    try:
        labels = json.loads(labels_b)
    except ValueError as exc:
        raise CheckpointError(f"corrupt label table: {exc}") from exc
    if len(labels) != n:
        raise CheckpointError("label table length does not match n")
    graph = Graph.from_arrays(
        n, eb["a"].astype(np.int64), eb["b"].astype(np.int64), eb["x"].astype(np.float64),
        labels=labels, alive=alive,
    )
    return EngineState(superstep, graph, values, halted, inbox, aggregates)
