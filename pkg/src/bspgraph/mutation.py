"""Topology mutation applied at superstep barriers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, GraphError

PHASES = ("remove_edge", "remove_vertex", "add_vertex", "add_edge")


@dataclass(frozen=True)
class Mutation:
    kind: str
    src: int = -1
    dst: int = -1
    weight: float = 1.0
    vertex: int = -1
    value: float | None = None
    label: object = None

    def __post_init__(self):
        if self.kind not in PHASES:
            raise ValueError(f"unknown mutation kind {self.kind!r}")

    @classmethod
    def add_edge(cls, src, dst, weight=1.0):
        return cls("add_edge", src=src, dst=dst, weight=float(weight))

    @classmethod
    def remove_edge(cls, src, dst):
        return cls("remove_edge", src=src, dst=dst)

    @classmethod
    def add_vertex(cls, vertex, value=None, label=None):
        return cls("add_vertex", vertex=vertex, value=value, label=label)

    @classmethod
    def remove_vertex(cls, vertex):
        return cls("remove_vertex", vertex=vertex)


def apply_mutations(requests, g: Graph) -> Graph:
    """Apply a batch of mutations and return the new graph.

    Phases run in a fixed order: remove_edge, remove_vertex, add_vertex,
    add_edge; within a phase, requests apply in the order given.
    ``remove_edge(u, v)`` drops every parallel ``u -> v`` edge. Removing
    something absent and re-adding a live vertex are no-ops; repeated
    ``add_edge`` requests create parallel edges.
    """
    by_kind = {k: [] for k in PHASES}
    for r in requests:
        by_kind[r.kind].append(r)

    n = g.n
    src, dst, w = g.sources(), g.targets, g.weights
    alive = g.alive.copy()
    keep = np.ones(len(dst), dtype=bool)

    pairs = {(r.src, r.dst) for r in by_kind["remove_edge"]}
    pairs = [(s, d) for s, d in pairs if 0 <= s < n and 0 <= d < n]
    if pairs:
        keys = np.array([s * n + d for s, d in pairs], dtype=np.int64)
        keep &= ~np.isin(src * n + dst, keys)

    gone = [r.vertex for r in by_kind["remove_vertex"] if 0 <= r.vertex < n and alive[r.vertex]]
    if gone:
        alive[gone] = False
        keep &= alive[src] & alive[dst]

    src, dst, w = src[keep], dst[keep], w[keep]

    labels = list(g.labels)
    label_index = dict(g.label_index)
    for r in by_kind["add_vertex"]:
        v = r.vertex
        if v < 0:
            raise GraphError(f"add_vertex: invalid id {v}")
        if v < n and alive[v]:
            continue
        if v >= n:
            # ids between the old bound and v stay dead
            alive = np.concatenate([alive, np.zeros(v + 1 - n, dtype=bool)])
            labels.extend(None for _ in range(v + 1 - n))
            n = v + 1
        alive[v] = True
        if labels[v] is None or r.label is not None:
            label = v if r.label is None else r.label
            owner = label_index.get(label)
            if owner is not None and owner != v:
                raise GraphError(f"add_vertex {v}: label {label!r} already names vertex {owner}")
            labels[v] = label
            label_index[label] = v

    add = by_kind["add_edge"]
    for r in add:
        for end in (r.src, r.dst):
            if not (0 <= end < n and alive[end]):
                raise GraphError(f"add_edge {r.src} -> {r.dst}: vertex {end} does not exist")
        if not r.weight >= 0:
            raise GraphError(f"add_edge {r.src} -> {r.dst}: negative weight {r.weight}")
    if add:
        src = np.concatenate([src, [r.src for r in add]])
        dst = np.concatenate([dst, [r.dst for r in add]])
        w = np.concatenate([w, [r.weight for r in add]])

    values = g.values
    if values is not None and len(values) < n:
        values = np.concatenate([values, np.full(n - len(values), np.nan)])
    return Graph.from_arrays(n, src, dst, w, labels=labels, alive=alive, values=values)
