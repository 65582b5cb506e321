"""Message buffers, routing and combining."""
from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph import PartitionMap


@dataclass
class MessageBatch:
    targets: np.ndarray
    senders: np.ndarray
    payloads: np.ndarray

    @classmethod
    def empty(cls) -> MessageBatch:
        return cls(np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0, np.float64))

    @classmethod
    def of(cls, triples) -> MessageBatch:
        """Build from ``(target, sender, payload)`` triples."""
        triples = list(triples)
        if not triples:
            return cls.empty()
        t, s, p = zip(*triples)
        return cls(np.array(t, np.int64), np.array(s, np.int64), np.array(p, np.float64))

    @classmethod
    def concat(cls, batches) -> MessageBatch:
        batches = [b for b in batches if len(b)]
        if not batches:
            return cls.empty()
        if len(batches) == 1:
            return batches[0]
        return cls(
            np.concatenate([b.targets for b in batches]),
            np.concatenate([b.senders for b in batches]),
            np.concatenate([b.payloads for b in batches]),
        )

    def __len__(self):
        return len(self.targets)

    def take(self, idx) -> MessageBatch:
        return MessageBatch(self.targets[idx], self.senders[idx], self.payloads[idx])

    def triples(self) -> list[tuple[int, int, float]]:
        return list(zip(self.targets.tolist(), self.senders.tolist(), self.payloads.tolist()))


@dataclass(frozen=True)
class Combiner:
    """Commutative, associative reduce over the payloads bound for one vertex.

    ``kind`` names a vectorized equivalent ("sum", "min" or "max"); a
    combiner without one is folded in Python.
    """

    fn: Callable[[float, float], float]
    kind: str | None = None


SUM = Combiner(operator.add, "sum")
MIN = Combiner(min, "min")
MAX = Combiner(max, "max")


def deliver_messages(
    outboxes: list[MessageBatch], pmap: PartitionMap, deterministic: bool = True
) -> list[MessageBatch]:
    """Route every outgoing message to the inbox of its target's worker.

    In deterministic mode each inbox is ordered by (target, sender, payload),
    so each target sees its messages sorted by (sender, payload) no matter
    how the graph was partitioned.
    """
    batch = MessageBatch.concat(outboxes)
    W = pmap.num_workers
    if not len(batch):
        return [MessageBatch.empty() for _ in range(W)]
    if deterministic:
        batch = batch.take(np.lexsort((batch.payloads, batch.senders, batch.targets)))
    if W == 1:
        return [batch]
    owner = batch.targets % W
    order = np.argsort(owner, kind="stable")
    bounds = np.searchsorted(owner[order], np.arange(W + 1))
    return [batch.take(order[bounds[w]:bounds[w + 1]]) for w in range(W)]


def apply_combiner(payloads, combiner: Combiner) -> float:
    """Left fold of one target's inbox into a single payload."""
    it = iter(payloads)
    acc = next(it)
    for x in it:
        acc = combiner.fn(acc, x)
    return acc


def combine_inbox(inbox: MessageBatch, combiner: Combiner) -> tuple[list[int], list[float]]:
    """Combine a worker inbox per target; returns (targets, one payload each).

    Sums run as a sequential fold in inbox order (``bincount`` accumulates in
    input order) so results match a plain left fold exactly.
    """
    if not len(inbox):
        return [], []
    uniq, inv = np.unique(inbox.targets, return_inverse=True)
    if combiner.kind == "sum":
        out = np.bincount(inv, weights=inbox.payloads, minlength=len(uniq))
    elif combiner.kind == "min":
        out = np.full(len(uniq), np.inf)
        np.minimum.at(out, inv, inbox.payloads)
    elif combiner.kind == "max":
        out = np.full(len(uniq), -np.inf)
        np.maximum.at(out, inv, inbox.payloads)
    else:
        grouped = group_inbox(inbox)
        keys = sorted(grouped)
        return keys, [apply_combiner(grouped[t], combiner) for t in keys]
    return uniq.tolist(), out.tolist()


def group_inbox(inbox: MessageBatch) -> dict[int, list[float]]:
    groups: dict[int, list[float]] = {}
    for t, p in zip(inbox.targets.tolist(), inbox.payloads.tolist()):
        g = groups.get(t)
        if g is None:
            groups[t] = [p]
        else:
            g.append(p)
    return groups
