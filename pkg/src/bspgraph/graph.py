"""Directed multigraph in compressed adjacency form, plus partitioning."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    weight: float = 1.0


@dataclass
class Graph:
    """Compressed out-adjacency (CSR) over the id space ``[0, n)``.

    ``alive`` marks which ids are live vertices; it is all-true after
    construction and only gains holes through topology mutation.
    Edge order within a vertex's slice is input order.
    """

    n: int
    offsets: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    labels: list
    alive: np.ndarray
    values: np.ndarray | None = None
    label_index: dict = field(default=None, repr=False)

    def __post_init__(self):
        if self.label_index is None:
            self.label_index = {lab: i for i, lab in enumerate(self.labels) if lab is not None}

    @classmethod
    def from_arrays(cls, n, src, dst, weights=None, labels=None, alive=None, values=None):
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise GraphError("src and dst arrays differ in length")
        if weights is None:
            weights = np.ones(len(src))
        weights = np.asarray(weights, dtype=np.float64)
        if len(src) and (src.min() < 0 or src.max() >= n or dst.min() < 0 or dst.max() >= n):
            raise GraphError("edge endpoint outside [0, n)")
        bad = np.flatnonzero(~(weights >= 0))
        if len(bad):
            i = int(bad[0])
            raise GraphError(f"edge {i} ({src[i]} -> {dst[i]}) has negative weight {weights[i]}")
        # stable sort keeps input order within each source
        order = np.argsort(src, kind="stable")
        counts = np.bincount(src, minlength=n)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        if labels is None:
            labels = list(range(n))
        if alive is None:
            alive = np.ones(n, dtype=bool)
        return cls(n, offsets, dst[order], weights[order], list(labels),
                   np.asarray(alive, dtype=bool), values)

    @property
    def num_edges(self) -> int:
        return int(self.offsets[-1])

    @property
    def num_vertices(self) -> int:
        """Live vertex count (``NumVertices()`` for programs)."""
        return int(self.alive.sum())

    @property
    def out_degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def dangling_count(self) -> int:
        return int(((self.out_degrees == 0) & self.alive).sum())

    def out_degree(self, v: int) -> int:
        self._check(v)
        return int(self.offsets[v + 1] - self.offsets[v])

    def sources(self) -> np.ndarray:
        """Source id of every edge, aligned with ``targets``."""
        return np.repeat(np.arange(self.n, dtype=np.int64), self.out_degrees)

    def _check(self, v):
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range [0, {self.n})")

    def edges(self) -> list[Edge]:
        src = self.sources().tolist()
        return [Edge(s, d, w) for s, d, w in zip(src, self.targets.tolist(), self.weights.tolist())]


def build_graph(
    edges: Iterable[Sequence],
    directed: bool = True,
    values: dict | None = None,
) -> Graph:
    """Build a dense-id graph from ``(src_label, dst_label[, weight])`` tuples.

    Ids are assigned in order of first appearance; labels that only occur in
    ``values`` are appended afterwards. Parallel edges and self-loops are kept.
    """
    index: dict[Hashable, int] = {}
    labels: list = []

    def vid(label):
        i = index.get(label)
        if i is None:
            i = index[label] = len(labels)
            labels.append(label)
        return i

    src, dst, wts = [], [], []
    for lineno, e in enumerate(edges, 1):
        if len(e) not in (2, 3):
            raise GraphError(f"edge {lineno}: expected (src, dst[, weight]), got {e!r}")
        w = 1.0 if len(e) == 2 or e[2] is None else float(e[2])
        if not w >= 0 or math.isnan(w):
            raise GraphError(f"edge {lineno} {e!r}: weight must be non-negative")
        s, d = vid(e[0]), vid(e[1])
        src.append(s)
        dst.append(d)
        wts.append(w)
        if not directed:
            src.append(d)
            dst.append(s)
            wts.append(w)

    vals = None
    if values:
        for label in values:
            vid(label)
        vals = np.full(len(labels), np.nan)
        for label, x in values.items():
            vals[index[label]] = float(x)

    return Graph.from_arrays(len(labels), src, dst, wts, labels=labels, values=vals)


def out_edges(g: Graph, v: int) -> list[Edge]:
    g._check(v)
    lo, hi = int(g.offsets[v]), int(g.offsets[v + 1])
    return [Edge(v, d, w) for d, w in zip(g.targets[lo:hi].tolist(), g.weights[lo:hi].tolist())]


@dataclass(frozen=True)
class ValidationReport:
    num_vertices: int
    num_edges: int
    dangling_count: int
    self_loops: int
    max_out_degree: int


def validate(g: Graph) -> ValidationReport:
    deg = g.out_degrees[g.alive]
    return ValidationReport(
        num_vertices=g.num_vertices,
        num_edges=g.num_edges,
        dangling_count=g.dangling_count,
        self_loops=int((g.sources() == g.targets).sum()),
        max_out_degree=int(deg.max()) if len(deg) else 0,
    )


@dataclass(frozen=True)
class PartitionMap:
    num_workers: int
    n: int

    def worker_of(self, v: int) -> int:
        return v % self.num_workers

    def members(self, worker: int) -> range:
        return range(worker, self.n, self.num_workers)


def assign_partitions(g: Graph, workers: int) -> PartitionMap:
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    return PartitionMap(workers, g.n)


def random_graph(
    n: int,
    avg_degree: float,
    seed: int = 0,
    sinkless: bool = False,
    max_weight: int | None = None,
) -> Graph:
    """Uniform random directed multigraph with about ``n * avg_degree`` edges.

    ``sinkless`` adds a ring ``v -> v+1`` so no vertex is dangling.
    ``max_weight`` draws integer weights in ``[0, max_weight]``; otherwise
    every weight is 1.
    """
    rng = np.random.default_rng(seed)
    m = int(round(n * avg_degree))
    if sinkless:
        m = max(m - n, 0)
    src = rng.integers(0, n, m)
    dst = rng.integers(0, n, m)
    if sinkless:
        ring = np.arange(n)
        src = np.concatenate([ring, src])
        dst = np.concatenate([(ring + 1) % n, dst])
    w = None
    if max_weight is not None:
        w = rng.integers(0, max_weight + 1, len(src)).astype(np.float64)
    return Graph.from_arrays(n, src, dst, w)


def symmetrize(g: Graph) -> Graph:
    """Every edge plus its reverse, keeping labels and values."""
    src = g.sources()
    return Graph.from_arrays(
        g.n,
        np.concatenate([src, g.targets]),
        np.concatenate([g.targets, src]),
        np.concatenate([g.weights, g.weights]),
        labels=g.labels,
        alive=g.alive.copy(),
        values=g.values,
    )
