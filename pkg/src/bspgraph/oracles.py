"""Sequential reference implementations.

Nothing here imports the engine, the message layer or the built-in
programs; these only read a ``Graph`` through its plain edge list.
"""
from __future__ import annotations

import heapq
import math
from collections import Counter, deque

from .graph import Graph, GraphError


def _adjacency(g: Graph) -> list[list[tuple[int, float]]]:
    adj: list[list[tuple[int, float]]] = [[] for _ in range(g.n)]
    for e in g.edges():
        adj[e.src].append((e.dst, e.weight))
    return adj


def pagerank_power_iteration(g: Graph, teleport: float = 0.15, iters: int = 30, init: float | None = None) -> list[float]:
    """Damped power iteration with dangling mass dropped.

    Each vertex's incoming contributions are summed left to right in
    ascending source-id order.
    """
    n = g.num_vertices
    live = [bool(a) for a in g.alive]
    x = [(1.0 / n if init is None else init) if live[v] else math.nan for v in range(g.n)]
    adj = _adjacency(g)
    incoming: list[list[int]] = [[] for _ in range(g.n)]
    for u in range(g.n):
        for v, _ in adj[u]:
            incoming[v].append(u)
    outdeg = [len(a) for a in adj]
    damping = 1 - teleport
    base = teleport / n
    for _ in range(iters):
        share = [x[u] / outdeg[u] if outdeg[u] else 0.0 for u in range(g.n)]
        nxt = []
        for v in range(g.n):
            if not live[v]:
                nxt.append(math.nan)
                continue
            total = 0.0
            for u in sorted(incoming[v]):
                total += share[u]
            nxt.append(base + damping * total)
        x = nxt
    return x


def dijkstra(g: Graph, source: int) -> list[float]:
    adj = _adjacency(g)
    for row in adj:
        for _, w in row:
            if w < 0:
                raise GraphError("dijkstra needs non-negative weights")
    dist = [math.inf] * g.n
    dist[source] = 0.0
    heap = [(0.0, source)]
    done = [False] * g.n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def bfs_levels(g: Graph, source: int) -> list[float]:
    adj = _adjacency(g)
    level = [math.inf] * g.n
    level[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        for v, _ in adj[u]:
            if level[v] == math.inf:
                level[v] = level[u] + 1
                q.append(v)
    return [float(x) for x in level]


def components_union_find(g: Graph) -> list[int]:
    """Weak-component label per vertex: the smallest id in its component."""
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in g.edges():
        a, b = find(e.src), find(e.dst)
        if a != b:
            # smaller root wins so every root is its component's min id
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
    return [find(v) for v in range(g.n)]


def global_max(values):
    values = list(values)
    if not values:
        raise ValueError("global_max of an empty sequence")
    best = values[0]
    for x in values[1:]:
        if x > best:
            best = x
    return best


def reachable_max(g: Graph, values) -> list[float]:
    """For each vertex, the largest value among vertices that can reach it.

    Sources are flooded in descending value order; a vertex is claimed by the
    first flood to reach it, so every vertex is visited once.
    """
    adj = _adjacency(g)
    out = [None] * g.n
    for s in sorted(range(g.n), key=lambda v: -values[v]):
        if out[s] is not None:
            continue
        out[s] = values[s]
        q = deque([s])
        while q:
            u = q.popleft()
            for v, _ in adj[u]:
                if out[v] is None:
                    out[v] = values[s]
                    q.append(v)
    return out


def label_propagation_reference(g: Graph, max_rounds: int = 10) -> list[float]:
    """Synchronous majority-label rounds, lowest label on ties, until stable."""
    adj = _adjacency(g)
    labels = list(range(g.n))
    for _ in range(max_rounds):
        inbox: list[list[int]] = [[] for _ in range(g.n)]
        for u in range(g.n):
            for v, _ in adj[u]:
                inbox[v].append(labels[u])
        nxt = []
        for v in range(g.n):
            if inbox[v]:
                counts = Counter(inbox[v])
                top = max(counts.values())
                nxt.append(min(k for k, c in counts.items() if c == top))
            else:
                nxt.append(labels[v])
        if nxt == labels:
            break
        labels = nxt
    return [float(x) for x in labels]
