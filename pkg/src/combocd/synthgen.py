"""Planted-partition graphs with a mixing parameter and known ground truth."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .graph import Graph, write_edge_list
from .partition import Partition, write_partition_csv


class InfeasibleSpecError(ValueError):
    pass


@dataclass(frozen=True)
class PlantedSpec:
    n: int
    k: int
    avg_degree: float
    mu: float
    seed: int = 0

    def validate(self) -> None:
        if not (self.n >= self.k >= 1):
            raise InfeasibleSpecError(f"need n >= k >= 1, got n={self.n}, k={self.k}")
        if self.avg_degree < 1:
            raise InfeasibleSpecError(f"avg_degree must be >= 1, got {self.avg_degree}")
        if not (0 <= self.mu < 1):
            raise InfeasibleSpecError(f"mu must lie in [0, 1), got {self.mu}")
        smallest = self.n // self.k
        inner = (1 - self.mu) * self.avg_degree
        if inner > smallest - 1:
            raise InfeasibleSpecError(
                f"intra-community degree {inner:g} exceeds community size - 1 = {smallest - 1}"
            )
        if self.k == 1 and self.mu > 0:
            raise InfeasibleSpecError("mu > 0 needs at least two communities")
        outer = self.mu * self.avg_degree
        if self.k > 1 and outer > self.n - (self.n + self.k - 1) // self.k:
            raise InfeasibleSpecError(f"inter-community degree {outer:g} is not attainable")


@dataclass
class PlantedGraph:
    graph: Graph
    truth: Partition
    spec: PlantedSpec
    meta: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.graph, self.truth))

    def write(self, prefix: str) -> tuple[str, str, str]:
        """Write ``<prefix>.edges``, ``<prefix>.truth.csv`` and ``<prefix>.meta.json``."""
        paths = (f"{prefix}.edges", f"{prefix}.truth.csv", f"{prefix}.meta.json")
        write_edge_list(self.graph, paths[0])
        write_partition_csv(self.truth, paths[1], self.graph.labels)
        with open(paths[2], "w") as fh:
            json.dump(self.meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return paths


def _sample_block(rng, rows: np.ndarray, cols: np.ndarray, p: float, same: bool):
    hit = rng.random((len(rows), len(cols))) < p
    if same:
        hit = np.triu(hit, 1)
    i, j = np.nonzero(hit)
    return rows[i], cols[j]


def generate(spec: PlantedSpec) -> PlantedGraph:
    """Sample a planted-partition graph; components are bridged until connected."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n, k = spec.n, spec.k
    truth = np.repeat(np.arange(k), [n // k + (1 if c < n % k else 0) for c in range(k)])
    blocks = [np.flatnonzero(truth == c) for c in range(k)]
    us, vs = [], []
    for a in range(k):
        size = len(blocks[a])
        p_in = (1 - spec.mu) * spec.avg_degree / (size - 1) if size > 1 else 0.0
        u, v = _sample_block(rng, blocks[a], blocks[a], min(p_in, 1.0), True)
        us.append(u)
        vs.append(v)
        outside = n - size
        if outside == 0:
            continue
        p_out = spec.mu * spec.avg_degree / outside
        for b in range(a + 1, k):
            u, v = _sample_block(rng, blocks[a], blocks[b], p_out, False)
            us.append(u)
            vs.append(v)
    u = np.concatenate(us)
    v = np.concatenate(vs)

    added_intra, added_cross = 0, 0
    adj = coo_matrix((np.ones(len(u)), (u, v)), shape=(n, n))
    n_comp, comp = connected_components(adj, directed=False)
    if n_comp > 1:
        main = np.bincount(comp).argmax()
        extra_u, extra_v = [], []
        in_main = comp == main
        for c in range(n_comp):
            if c == main:
                continue
            members = np.flatnonzero(comp == c)
            x = int(rng.choice(members))
            # prefer a partner from the same planted community
            partners = np.flatnonzero(in_main & (truth == truth[x]))
            if len(partners):
                added_intra += 1
            else:
                partners = np.flatnonzero(in_main)
                added_cross += 1
            y = int(rng.choice(partners))
            extra_u.append(x)
            extra_v.append(y)
            in_main[members] = True
        u = np.concatenate([u, extra_u]).astype(np.int64)
        v = np.concatenate([v, extra_v]).astype(np.int64)

    g = Graph.from_edges(n, zip(u.tolist(), v.tolist(), [1.0] * len(u)))
    cross = int((truth[u] != truth[v]).sum())
    meta = {
        "spec": asdict(spec),
        "edges": int(len(u)),
        "realized_mu": cross / len(u) if len(u) else 0.0,
        "cross_edges": cross,
        "components_before_fix": int(n_comp),
        "bridges_added": added_intra + added_cross,
        "bridges_intra": added_intra,
        "bridges_cross": added_cross,
    }
    return PlantedGraph(g, Partition(truth), spec, meta)
