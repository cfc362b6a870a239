"""Objective functions: modularity and map-equation code length.

Each has a from-scratch scorer over ``(graph, partition)`` and an incremental
state keeping per-community internal weight ``W`` and total strength ``S``.
Gains are signed so that positive always means improvement; for code length
(minimized) the gain of a move is ``L_before - L_after``.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from . import _kernels
from .graph import Graph
from .partition import Partition

NEW = -1


class ObjectiveKind(enum.IntEnum):
    MODULARITY = _kernels.MODULARITY
    CODELENGTH = _kernels.CODELENGTH

    @classmethod
    def parse(cls, value) -> "ObjectiveKind":
        if isinstance(value, cls):
            return value
        try:
            return cls[str(value).upper()]
        except KeyError:
            raise ValueError(f"unknown objective {value!r}") from None

    @property
    def maximize(self) -> bool:
        return self is ObjectiveKind.MODULARITY


def _labels(p) -> np.ndarray:
    return np.asarray(getattr(p, "labels", p))


def _check(g: Graph, labels: np.ndarray) -> None:
    if g.total_weight <= 0:
        raise ValueError("graph has no edge weight")
    if len(labels) != g.n:
        raise ValueError(f"partition covers {len(labels)} nodes, graph has {g.n}")


def _edge_rows(g: Graph) -> np.ndarray:
    return np.repeat(np.arange(g.n), np.diff(g.indptr))


def modularity(g: Graph, p) -> float:
    """Newman modularity, Q = sum_c [W_c/m - (S_c/2m)^2]."""
    labels = _labels(p)
    _check(g, labels)
    m = g.total_weight
    rows = _edge_rows(g)
    same = labels[rows] == labels[g.indices]
    k = int(labels.max()) + 1
    internal = np.bincount(labels[rows][same], weights=g.weights[same], minlength=k) / 2.0
    internal += np.bincount(labels, weights=g.selfloop, minlength=k)
    total = np.bincount(labels, weights=g.strength, minlength=k)
    return float((internal / m).sum() - ((total / (2.0 * m)) ** 2).sum())


def _entropy2(probs: np.ndarray) -> float:
    probs = probs[probs > 0]
    return float(-(probs * np.log2(probs)).sum())


def codelength(g: Graph, p) -> float:
    """Two-level map equation for an undirected walk, in bits.

    L = q H(Q) + sum_c p_c H(P_c), with visit rates strength/2m and no
    teleportation.
    """
    labels = _labels(p)
    _check(g, labels)
    two_m = 2.0 * g.total_weight
    visit = g.strength / two_m
    rows = _edge_rows(g)
    cross = labels[rows] != labels[g.indices]
    k = int(labels.max()) + 1
    exit_ = np.bincount(labels[rows][cross], weights=g.weights[cross], minlength=k) / two_m
    q = exit_.sum()
    index_term = q * _entropy2(exit_ / q) if q > 0 else 0.0
    module_term = 0.0
    for c in range(k):
        inside = visit[labels == c]
        rate = exit_[c] + inside.sum()
        if rate <= 0:
            continue
        module_term += rate * _entropy2(np.append(inside, exit_[c]) / rate)
    return float(index_term + module_term)


def score(g: Graph, p, kind) -> float:
    kind = ObjectiveKind.parse(kind)
    return modularity(g, p) if kind is ObjectiveKind.MODULARITY else codelength(g, p)


class CommunityState:
    """Incrementally maintained per-community sufficient statistics.

    Communities are never renumbered implicitly; a move can leave one empty
    (zero statistics) until :meth:`remove_community` drops it.
    """

    kind: ObjectiveKind

    def __init__(self, g: Graph, p=None):
        self.g = g
        labels = np.zeros(g.n, dtype=np.int64) if p is None else Partition(_labels(p)).labels
        _check(g, labels)
        self.labels = labels.astype(np.int64).copy()
        self.m = g.total_weight
        self.k = int(self.labels.max()) + 1
        self._cap = max(self.k + 1, 16)
        self.W = np.zeros(self._cap)
        self.S = np.zeros(self._cap)
        self.W[: self.k], self.S[: self.k] = self._recount()
        self.size = np.zeros(self._cap, dtype=np.int64)
        self.size[: self.k] = np.bincount(self.labels, minlength=self.k)

    def _recount(self) -> tuple[np.ndarray, np.ndarray]:
        g, labels, k = self.g, self.labels, self.k
        rows = _edge_rows(g)
        same = labels[rows] == labels[g.indices]
        W = np.bincount(labels[rows][same], weights=g.weights[same], minlength=k) / 2.0
        W += np.bincount(labels, weights=g.selfloop, minlength=k)
        S = np.bincount(labels, weights=g.strength, minlength=k)
        return W, S

    @classmethod
    def for_kind(cls, g: Graph, p, kind) -> "CommunityState":
        kind = ObjectiveKind.parse(kind)
        klass = ModularityState if kind is ObjectiveKind.MODULARITY else CodeLengthState
        return klass(g, p)

    def copy(self) -> "CommunityState":
        other = object.__new__(type(self))
        other.__dict__.update(self.__dict__)
        other.labels = self.labels.copy()
        other.W = self.W.copy()
        other.S = self.S.copy()
        other.size = self.size.copy()
        return other

    def rebuild(self) -> "CommunityState":
        """Fresh statistics recounted from the current labels, for consistency checks."""
        fresh = self.copy()
        fresh.W[:] = 0.0
        fresh.S[:] = 0.0
        fresh.W[: self.k], fresh.S[: self.k] = self._recount()
        fresh.size[:] = 0
        fresh.size[: self.k] = np.bincount(self.labels, minlength=self.k)
        return fresh

    def matches(self, other: "CommunityState", rtol: float = 1e-9) -> bool:
        if self.k != other.k or not np.array_equal(self.labels, other.labels):
            return False
        scale = max(self.m, 1.0)
        return bool(
            np.allclose(self.W[: self.k], other.W[: self.k], rtol=rtol, atol=rtol * scale)
            and np.allclose(self.S[: self.k], other.S[: self.k], rtol=rtol, atol=rtol * scale)
        )

    def partition(self) -> Partition:
        return Partition(self.labels)

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.labels == c)

    def _grow(self) -> None:
        self._cap *= 2
        self.W = np.resize(self.W, self._cap)
        self.S = np.resize(self.S, self._cap)
        self.size = np.resize(self.size, self._cap)
        self.W[self.k:] = 0.0
        self.S[self.k:] = 0.0
        self.size[self.k:] = 0

    def new_community(self) -> int:
        if self.k >= self._cap:
            self._grow()
        c = self.k
        self.W[c] = 0.0
        self.S[c] = 0.0
        self.size[c] = 0
        self.k += 1
        return c

    def remove_community(self, c: int) -> None:
        """Drop an empty community and shift higher ids down by one."""
        if self.size[c]:
            raise ValueError(f"community {c} is not empty")
        self.W[c : self.k - 1] = self.W[c + 1 : self.k].copy()
        self.S[c : self.k - 1] = self.S[c + 1 : self.k].copy()
        self.size[c : self.k - 1] = self.size[c + 1 : self.k].copy()
        self.W[self.k - 1] = 0.0
        self.S[self.k - 1] = 0.0
        self.size[self.k - 1] = 0
        self.labels[self.labels > c] -= 1
        self.k -= 1

    def q_total(self) -> float:
        cut = self.S[: self.k] - 2.0 * self.W[: self.k]
        return float(np.clip(cut, 0.0, None).sum() / (2.0 * self.m))

    def _q_of(self, c: int) -> float:
        if c < 0:
            return 0.0
        return max(0.0, (self.S[c] - 2.0 * self.W[c]) / (2.0 * self.m))

    def q_rest(self, a: int, b: int) -> float:
        """Total exit rate of all communities other than ``a`` and ``b``."""
        if self.kind is not ObjectiveKind.CODELENGTH:
            return 0.0
        return max(0.0, self.q_total() - self._q_of(a) - (self._q_of(b) if b != a else 0.0))

    def _stats(self, c: int) -> tuple[float, float]:
        return (0.0, 0.0) if c < 0 else (float(self.W[c]), float(self.S[c]))

    def pair_value(self, a: int, b: int, q_rest: float | None = None) -> float:
        if q_rest is None:
            q_rest = self.q_rest(a, b)
        wa, sa = self._stats(a)
        wb, sb = self._stats(b)
        return _kernels.pair_value(int(self.kind), self.m, q_rest, wa, sa, wb, sb)

    def weight_to(self, v: int) -> dict[int, float]:
        g = self.g
        lo, hi = g.indptr[v], g.indptr[v + 1]
        comms = self.labels[g.indices[lo:hi]]
        out: dict[int, float] = {}
        for c, w in zip(comms.tolist(), g.weights[lo:hi].tolist()):
            out[c] = out.get(c, 0.0) + w
        return out

    def move_gain(self, v: int, dest: int) -> float:
        src = int(self.labels[v])
        if dest == src:
            return 0.0
        to = self.weight_to(v)
        k = float(self.g.strength[v])
        sl = float(self.g.selfloop[v])
        q_rest = self.q_rest(src, dest)
        before = self.pair_value(src, dest, q_rest)
        wa, sa = self._stats(src)
        wb, sb = self._stats(dest)
        after = _kernels.pair_value(
            int(self.kind), self.m, q_rest,
            wa - to.get(src, 0.0) - sl, sa - k,
            wb + (to.get(dest, 0.0) if dest >= 0 else 0.0) + sl, sb + k,
        )
        return after - before

    def apply_move(self, v: int, dest: int) -> int:
        """Move ``v`` to ``dest`` (``NEW`` opens a community). Returns the destination id."""
        src = int(self.labels[v])
        if dest == NEW:
            dest = self.new_community()
        if dest == src:
            return dest
        to = self.weight_to(v)
        k = float(self.g.strength[v])
        sl = float(self.g.selfloop[v])
        self.W[src] -= to.get(src, 0.0) + sl
        self.S[src] -= k
        self.W[dest] += to.get(dest, 0.0) + sl
        self.S[dest] += k
        self.labels[v] = dest
        self.size[src] -= 1
        self.size[dest] += 1
        if self.size[src] == 0:
            # exact zeros for an emptied community
            self.W[src] = 0.0
            self.S[src] = 0.0
        return dest

    def set_move_gain(self, nodes, dest: int) -> float:
        """Gain of moving ``nodes`` together, by replaying single-node moves on a copy."""
        probe = self.copy()
        before = probe.value()
        target = dest
        for v in nodes:
            target = probe.apply_move(int(v), target)
        return probe.value() - before

    def value(self) -> float:
        """Objective in maximize sense (minus code length for code length)."""
        s = self.score()
        return s if self.kind.maximize else -s

    def score(self) -> float:
        raise NotImplementedError


class ModularityState(CommunityState):
    kind = ObjectiveKind.MODULARITY

    def score(self) -> float:
        W = self.W[: self.k]
        S = self.S[: self.k]
        return float((W / self.m).sum() - ((S / (2.0 * self.m)) ** 2).sum())


class CodeLengthState(CommunityState):
    kind = ObjectiveKind.CODELENGTH

    def __init__(self, g: Graph, p=None):
        super().__init__(g, p)
        self.visit_rates = g.strength / (2.0 * g.total_weight)
        p = self.visit_rates[self.visit_rates > 0]
        self._node_entropy = float(-(p * np.log2(p)).sum())

    @property
    def exit_probabilities(self) -> np.ndarray:
        return np.clip(self.S[: self.k] - 2.0 * self.W[: self.k], 0.0, None) / (2.0 * self.m)

    @property
    def inside_rates(self) -> np.ndarray:
        return self.S[: self.k] / (2.0 * self.m)

    def score(self) -> float:
        q = self.exit_probabilities
        p = self.inside_rates
        plogp = _kernels.plogp
        total = plogp(float(q.sum()))
        for qc, pc in zip(q.tolist(), p.tolist()):
            total += -2.0 * plogp(qc) + plogp(qc + pc)
        return float(total + self._node_entropy)


def make_state(g: Graph, p=None, kind=ObjectiveKind.MODULARITY) -> CommunityState:
    return CommunityState.for_kind(g, p, kind)


def move_gain(state: CommunityState, v: int, dest: int, src: int | None = None) -> float:
    if src is not None and src != state.labels[v]:
        raise ValueError(f"node {v} is not in community {src}")
    return state.move_gain(v, dest)


def apply_move(state: CommunityState, v: int, dest: int) -> int:
    return state.apply_move(v, dest)


# --- exhaustive oracle -------------------------------------------------------

BRUTE_FORCE_MAX_N = 12


def set_partitions(n: int) -> np.ndarray:
    """All set partitions of n items as restricted growth strings, one per row."""
    rgs = np.zeros((1, 1), dtype=np.int8)
    top = np.zeros(1, dtype=np.int8)
    for _ in range(1, n):
        counts = top.astype(np.int64) + 2
        idx = np.repeat(np.arange(len(rgs)), counts)
        offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        nxt = offsets.astype(np.int8)
        rgs = np.hstack([rgs[idx], nxt[:, None]])
        top = np.maximum(top[idx], nxt)
    return rgs[:, :n] if n > 0 else rgs[:0, :0]


def _batch_scores(g: Graph, rgs: np.ndarray, kind: ObjectiveKind) -> np.ndarray:
    n = g.n
    A = g.to_dense()
    k = g.strength
    two_m = 2.0 * g.total_weight
    same = rgs[:, :, None] == rgs[:, None, :]
    if kind is ObjectiveKind.MODULARITY:
        adj = A + np.diag(g.selfloop)  # diagonal holds 2x self-loop, matching strength
        B = adj - np.outer(k, k) / two_m
        return np.einsum("pij,ij->p", same, B) / two_m
    # code length: exit rate per community from the cross-community weight
    kmax = int(rgs.max()) + 1
    onehot = rgs[:, :, None] == np.arange(kmax)[None, None, :]
    off = A - np.diag(np.diag(A))
    cross = off[None, :, :] * ~same
    exit_ = np.einsum("pic,pij->pc", onehot, cross) / two_m
    visit = k / two_m
    inside = np.einsum("pic,i->pc", onehot, visit)
    q = exit_.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        qn = np.where(exit_ > 0, exit_ / q[:, None], 1.0)
        index_term = -(exit_ * np.log2(qn)).sum(axis=1)
        rate = exit_ + inside
        er = np.where(exit_ > 0, exit_ / np.where(rate > 0, rate, 1.0), 1.0)
        exit_part = -(exit_ * np.log2(er)).sum(axis=1)
        vr = visit[None, :, None] / np.where(rate > 0, rate, 1.0)[:, None, :]
        vr = np.where(onehot & (visit[None, :, None] > 0), vr, 1.0)
        node_part = -(visit[None, :, None] * onehot * np.log2(vr)).sum(axis=(1, 2))
    return index_term + exit_part + node_part


def brute_force_best(g: Graph, kind=ObjectiveKind.MODULARITY, chunk: int = 20000) -> tuple[Partition, float]:
    """Global optimum by enumerating every set partition (n <= 12)."""
    kind = ObjectiveKind.parse(kind)
    if g.n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force refused for n={g.n} > {BRUTE_FORCE_MAX_N}")
    rgs = set_partitions(g.n)
    best_val = -math.inf
    best_row = None
    sign = 1.0 if kind.maximize else -1.0
    for lo in range(0, len(rgs), chunk):
        batch = rgs[lo : lo + chunk]
        vals = sign * _batch_scores(g, batch, kind)
        i = int(np.argmax(vals))
        if vals[i] > best_val + 1e-12:
            best_val = float(vals[i])
            best_row = batch[i]
    return Partition(best_row), sign * best_val
