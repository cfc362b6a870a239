"""Partitions of a node set and their comparison by normalized mutual information."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np


class PartitionMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Partition:
    """Community label per node. Always stored compacted: ids are 0..k-1."""

    labels: np.ndarray

    def __init__(self, labels):
        object.__setattr__(self, "labels", _compact_labels(labels))
        self.labels.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def communities(self) -> list[np.ndarray]:
        order = np.argsort(self.labels, kind="stable")
        bounds = np.cumsum(np.bincount(self.labels, minlength=self.k))[:-1]
        return np.split(order, bounds)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())

    def __repr__(self) -> str:
        return f"Partition(n={self.n}, k={self.k})"

    @classmethod
    def single(cls, n: int) -> "Partition":
        return cls(np.zeros(n, dtype=np.int64))

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(np.arange(n))


def _compact_labels(labels) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    if len(labels) == 0:
        return labels.astype(np.int64)
    # ids are assigned in order of first appearance
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    return rank[inverse.ravel()]


def compact(p) -> Partition:
    """Relabel to dense ids 0..k-1, preserving the grouping."""
    return Partition(getattr(p, "labels", p))


def _entropy_terms(counts: np.ndarray, n: int) -> float:
    counts = counts[counts > 0]
    return float(-(counts * np.log(counts / n)).sum())


def nmi(p1, p2) -> float:
    """Normalized mutual information in the Danon et al. form, natural log.

    Both partitions trivial gives 1; exactly one trivial gives 0.
    """
    a = compact(p1).labels
    b = compact(p2).labels
    if len(a) != len(b):
        raise PartitionMismatchError(f"partition sizes differ: {len(a)} vs {len(b)}")
    n = len(a)
    if n == 0:
        raise PartitionMismatchError("empty partitions")
    if np.array_equal(a, b):
        return 1.0
    ka, kb = a.max() + 1, b.max() + 1
    joint = np.bincount(a * kb + b, minlength=ka * kb).reshape(ka, kb).astype(float)
    na = joint.sum(axis=1)
    nb = joint.sum(axis=0)
    ha = _entropy_terms(na, n)
    hb = _entropy_terms(nb, n)
    if ha + hb == 0.0:
        return 1.0
    i, j = np.nonzero(joint)
    nab = joint[i, j]
    mutual = float((nab * np.log(nab * n / (na[i] * nb[j]))).sum())
    value = 2.0 * mutual / (ha + hb)
    return min(1.0, max(0.0, value))


def write_partition_csv(p, path, node_labels=None) -> None:
    labels = getattr(p, "labels", p)
    if node_labels is None:
        node_labels = range(len(labels))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "community"])
        for node, c in zip(node_labels, labels):
            w.writerow([node, int(c)])


def read_partition_csv(path: str | os.PathLike, node_labels=None) -> Partition:
    """Read a ``node,community`` CSV.

    With ``node_labels`` the rows are aligned to that node order and the
    node sets must match exactly; otherwise rows are taken in file order.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["node", "community"]:
            raise ValueError(f"{path}: expected header 'node,community'")
        rows = [(r[0].strip(), r[1].strip()) for r in reader if r]
    mapping = dict(rows)
    if len(mapping) != len(rows):
        raise ValueError(f"{path}: duplicate node entries")
    if node_labels is None:
        return Partition([c for _, c in rows])
    node_labels = [str(x) for x in node_labels]
    if set(node_labels) != set(mapping):
        raise PartitionMismatchError(f"{path}: node set does not match")
    return Partition([mapping[x] for x in node_labels])


def read_partition_pair(path1, path2) -> tuple[Partition, Partition, list[str]]:
    """Read two partition files over the same node set, aligned by node label."""
    with open(path1, newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        nodes = [r[0].strip() for r in reader if r]
    return read_partition_csv(path1, nodes), read_partition_csv(path2, nodes), nodes
