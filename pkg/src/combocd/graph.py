"""Immutable sparse weighted undirected graphs and text-format readers."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

import numpy as np


class GraphParseError(ValueError):
    """Malformed graph input; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class UnsupportedFeatureError(GraphParseError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected weighted graph in CSR form.

    Self-loops are kept out of the CSR arrays and stored in ``selfloop``;
    they count twice towards ``strength``.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    selfloop: np.ndarray
    strength: np.ndarray
    total_weight: float
    labels: tuple = field(default=())

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int, float]],
        labels: Sequence | None = None,
    ) -> "Graph":
        merged: dict[tuple[int, int], float] = {}
        for u, v, w in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            w = float(w)
            if not w > 0:
                raise ValueError(f"edge ({u}, {v}) has non-positive weight {w}")
            key = (u, v) if u <= v else (v, u)
            merged[key] = merged.get(key, 0.0) + w
        return cls._build(n, merged, labels)

    @classmethod
    def _build(cls, n, merged, labels):
        if n <= 0:
            raise ValueError("graph has no nodes")
        selfloop = np.zeros(n)
        rows, cols, vals = [], [], []
        for (u, v), w in merged.items():
            if u == v:
                selfloop[u] += w
            else:
                rows += [u, v]
                cols += [v, u]
                vals += [w, w]
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        indptr = np.cumsum(indptr)
        strength = np.bincount(rows, weights=vals, minlength=n) + 2.0 * selfloop
        total = float(vals.sum() / 2.0 + selfloop.sum())
        if labels is None:
            labels = tuple(range(n))
        else:
            labels = tuple(labels)
            if len(labels) != n:
                raise ValueError("label count does not match node count")
        for arr in (indptr, cols, vals, selfloop, strength):
            arr.setflags(write=False)
        return cls(n, indptr, cols, vals, selfloop, strength, total, labels)

    @property
    def m(self) -> float:
        return self.total_weight

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        """Each undirected edge once, as ``(u, v, w)`` with ``u <= v``."""
        out = [(i, i, float(w)) for i, w in enumerate(self.selfloop) if w > 0]
        for u in range(self.n):
            for p in range(self.indptr[u], self.indptr[u + 1]):
                v = int(self.indices[p])
                if u < v:
                    out.append((u, v, float(self.weights[p])))
        out.sort()
        return out

    @property
    def adjacency(self) -> list[list[tuple[int, float]]]:
        return [self.neighbors(u) for u in range(self.n)]

    def neighbors(self, u: int) -> list[tuple[int, float]]:
        lo, hi = self.indptr[u], self.indptr[u + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.weights[lo:hi].tolist()))

    def degree(self, u: int) -> int:
        return int(self.indptr[u + 1] - self.indptr[u])

    def label_index(self) -> dict:
        return {str(lab): i for i, lab in enumerate(self.labels)}

    def to_dense(self) -> np.ndarray:
        """Symmetric weight matrix with the self-loop weight on the diagonal."""
        a = np.zeros((self.n, self.n))
        for u in range(self.n):
            lo, hi = self.indptr[u], self.indptr[u + 1]
            a[u, self.indices[lo:hi]] = self.weights[lo:hi]
        a[np.diag_indices(self.n)] = self.selfloop
        return a

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={len(self.indices) // 2 + int((self.selfloop > 0).sum())}, m={self.total_weight:g})"


def weight_to_communities(g: Graph, v: int, labels) -> dict[int, float]:
    """Total edge weight from ``v`` into each community, self-loop excluded."""
    labels = getattr(labels, "labels", labels)
    out: dict[int, float] = {}
    lo, hi = g.indptr[v], g.indptr[v + 1]
    for u, w in zip(g.indices[lo:hi], g.weights[lo:hi]):
        c = int(labels[u])
        out[c] = out.get(c, 0.0) + float(w)
    return out


def _is_comment(line: str) -> bool:
    return not line or line[0] in "#%"


def parse_edge_list(text) -> Graph:
    """Parse ``u v [w]`` lines. Labels are arbitrary tokens, ids follow first appearance."""
    if isinstance(text, str):
        text = io.StringIO(text)
    ids: dict[str, int] = {}
    edges = []
    for lineno, raw in enumerate(text, start=1):
        line = raw.strip()
        if _is_comment(line):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphParseError(f"expected 'u v' or 'u v w', got {line!r}", lineno)
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise GraphParseError(f"bad weight {parts[2]!r}", lineno) from None
            if not w > 0:
                raise GraphParseError(f"weight must be positive, got {parts[2]}", lineno)
        else:
            w = 1.0
        u = ids.setdefault(parts[0], len(ids))
        v = ids.setdefault(parts[1], len(ids))
        edges.append((u, v, w))
    if not edges:
        raise GraphParseError("no edges in input")
    return Graph.from_edges(len(ids), edges, labels=list(ids))


def parse_pajek(text) -> Graph:
    """Read the ``*Vertices`` / ``*Edges`` subset of the Pajek .net format."""
    if isinstance(text, str):
        text = io.StringIO(text)
    section = None
    n = None
    names: dict[int, str] = {}
    edges = []
    for lineno, raw in enumerate(text, start=1):
        line = raw.strip()
        if _is_comment(line):
            continue
        if line.startswith("*"):
            head = line.split()
            key = head[0].lower()
            if key == "*vertices":
                if len(head) < 2:
                    raise GraphParseError("*Vertices needs a count", lineno)
                n = int(head[1])
                section = "v"
            elif key == "*edges":
                if n is None:
                    raise GraphParseError("*Edges before *Vertices", lineno)
                section = "e"
            else:
                raise UnsupportedFeatureError(f"unsupported Pajek section {head[0]}", lineno)
            continue
        parts = line.split(maxsplit=1) if section == "v" else line.split()
        if section == "v":
            idx = int(parts[0])
            name = parts[1].strip().strip('"') if len(parts) > 1 else parts[0]
            names[idx] = name
        elif section == "e":
            if len(parts) not in (2, 3):
                raise GraphParseError(f"bad edge line {line!r}", lineno)
            u, v = int(parts[0]), int(parts[1])
            if not (1 <= u <= n and 1 <= v <= n):
                raise GraphParseError(f"vertex id out of range in {line!r}", lineno)
            w = float(parts[2]) if len(parts) == 3 else 1.0
            if not w > 0:
                raise GraphParseError(f"weight must be positive, got {w}", lineno)
            edges.append((u - 1, v - 1, w))
        else:
            raise GraphParseError("data before any section header", lineno)
    if not n:
        raise GraphParseError("no vertices in input")
    labels = [names.get(i + 1, str(i + 1)) for i in range(n)]
    return Graph.from_edges(n, edges, labels=labels)


def read_graph(path: str | os.PathLike) -> Graph:
    path = os.fspath(path)
    with open(path) as fh:
        if path.lower().endswith(".net"):
            return parse_pajek(fh)
        return parse_edge_list(fh)


def serialize_edge_list(g: Graph) -> str:
    return "".join(f"{g.labels[u]} {g.labels[v]} {w!r}\n" for u, v, w in g.edges)


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_edge_list(g))


def karate_club() -> Graph:
    """Zachary's karate club, unweighted (34 nodes, 78 edges)."""
    text = resources.files("combocd").joinpath("data/karate.txt").read_text()
    return parse_edge_list(text)
