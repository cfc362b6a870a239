"""Louvain modularity optimization: local moving plus graph aggregation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .objective import modularity
from .partition import Partition


@dataclass
class LouvainConfig:
    seed: int = 0
    shuffle: bool = True
    tolerance: float = 1e-6

    def __post_init__(self):
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")


def aggregate(g: Graph, p) -> Graph:
    """Condense each community into one node; internal weight becomes a self-loop."""
    labels = np.asarray(getattr(p, "labels", p))
    k = int(labels.max()) + 1
    rows = np.repeat(np.arange(g.n), np.diff(g.indptr))
    cu, cv = labels[rows], labels[g.indices]
    lo, hi = np.minimum(cu, cv), np.maximum(cu, cv)
    merged: dict[tuple[int, int], float] = {}
    # every undirected edge sits twice in CSR, so each copy carries half its weight
    for a, b, w in zip(lo.tolist(), hi.tolist(), (g.weights / 2.0).tolist()):
        merged[(a, b)] = merged.get((a, b), 0.0) + w
    for c, w in zip(labels.tolist(), g.selfloop.tolist()):
        if w > 0:
            merged[(c, c)] = merged.get((c, c), 0.0) + w
    return Graph._build(k, merged, None)


def _local_moving(g: Graph, rng, cfg: LouvainConfig) -> tuple[np.ndarray, bool]:
    n = g.n
    m = g.total_weight
    k = g.strength
    labels = np.arange(n)
    tot = k.astype(float).copy()
    indptr, indices, weights = g.indptr, g.indices, g.weights
    moved_any = False
    while True:
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        improvement = 0.0
        for u in order.tolist():
            own = labels[u]
            lo, hi = indptr[u], indptr[u + 1]
            links: dict[int, float] = {}
            for v, w in zip(indices[lo:hi].tolist(), weights[lo:hi].tolist()):
                c = labels[v]
                links[c] = links.get(c, 0.0) + w
            ku = k[u]
            tot[own] -= ku
            # gain of inserting u into c, up to a constant shared by all candidates
            best_c = own
            best = links.get(own, 0.0) - ku * tot[own] / (2.0 * m)
            for c in sorted(links):
                if c == own:
                    continue
                gain = links[c] - ku * tot[c] / (2.0 * m)
                if gain > best + 1e-12:
                    best, best_c = gain, c
            tot[best_c] += ku
            if best_c != own:
                delta = (best - (links.get(own, 0.0) - ku * tot[own] / (2.0 * m))) / m
                improvement += delta
                labels[u] = best_c
                moved_any = True
        if improvement <= cfg.tolerance:
            break
    return labels, moved_any


def louvain(g: Graph, cfg: LouvainConfig | None = None) -> tuple[Partition, float]:
    """Multi-level Louvain; returns the final partition and its modularity."""
    cfg = cfg or LouvainConfig()
    rng = np.random.default_rng(cfg.seed)
    membership = np.arange(g.n)
    level = g
    best = modularity(g, membership)
    while True:
        labels, moved = _local_moving(level, rng, cfg)
        if not moved:
            break
        dense = Partition(labels).labels
        candidate = dense[membership]
        q = modularity(g, candidate)
        if q <= best + cfg.tolerance:
            if q > best:
                membership, best = candidate, q
            break
        membership, best = candidate, q
        level = aggregate(level, dense)
        if level.n == 1:
            break
    p = Partition(membership)
    return p, modularity(g, p)
