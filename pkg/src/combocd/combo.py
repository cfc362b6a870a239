"""Combo: greedy best-recombination search over community pairs.

Every ordered pair (origin, dest), dest possibly a new empty community,
keeps the best known redistribution of origin's nodes towards dest. The
single best one is applied, the pairs touching the two changed communities
are re-evaluated, and the loop stops once no gain exceeds the threshold.
Mergers, splits and partial recombinations are all special cases.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from .graph import Graph
from .objective import NEW, CommunityState, ObjectiveKind, make_state, score as objective_score
from .partition import Partition

log = logging.getLogger(__name__)


class CacheInvalidationError(RuntimeError):
    """A cached redistribution no longer matches the current partition."""


@dataclass
class ComboConfig:
    objective: ObjectiveKind = ObjectiveKind.MODULARITY
    max_communities: int | None = None
    threshold: float = 1e-6
    tries: int = 2
    seed: int = 0
    max_sweeps: int | None = None
    debug: bool = False

    def __post_init__(self):
        self.objective = ObjectiveKind.parse(self.objective)
        if self.tries < 0:
            raise ValueError("tries must be >= 0")
        if self.threshold < 0:
            raise ValueError("threshold must be >= 0")
        if self.max_communities is not None and self.max_communities < 1:
            raise ValueError("max_communities must be positive")


@dataclass
class CacheEntry:
    gain: float
    nodes: np.ndarray
    fresh: bool = True


@dataclass
class GainCache:
    """Best known redistribution for each ordered (origin, dest) pair; dest may be NEW."""

    entries: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, key) -> CacheEntry:
        return self.entries[key]

    def __contains__(self, key) -> bool:
        return key in self.entries

    def set(self, origin: int, dest: int, gain: float, nodes: np.ndarray) -> None:
        self.entries[(origin, dest)] = CacheEntry(float(gain), nodes)

    def drop_community(self, c: int) -> None:
        """Forget pairs involving ``c`` and shift higher community ids down by one."""
        shift = lambda x: x - 1 if x > c else x  # noqa: E731
        self.entries = {
            (shift(o), shift(d)): e for (o, d), e in self.entries.items() if o != c and d != c
        }

    def mark_stale(self, keep=()) -> None:
        keep = set(keep)
        for key, e in self.entries.items():
            if key not in keep:
                e.fresh = False

    def stale_keys(self) -> list:
        return [k for k, e in self.entries.items() if not e.fresh]


def _tie_key(key):
    o, d = key
    return (o, d if d >= 0 else np.inf)


def best_gain(cache: GainCache) -> tuple[int, int, float, np.ndarray]:
    """Entry with the largest gain; ties go to lower origin, then lower dest, NEW last."""
    if not cache.entries:
        raise ValueError("gain cache is empty")
    key = min(cache.entries, key=lambda k: (-cache.entries[k].gain, _tie_key(k)))
    e = cache.entries[key]
    return key[0], key[1], e.gain, e.nodes


def pair_seed(seed: int, origin: int, dest: int, sweep: int) -> int:
    ss = np.random.SeedSequence([int(seed), int(origin), int(dest) + 1, int(sweep)])
    return int(ss.generate_state(1)[0])


def recalculate_gain(
    state: CommunityState,
    origin: int,
    dest: int,
    cfg: ComboConfig,
    sweep: int = 0,
    pos: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Best gain from moving a subset of ``origin`` into ``dest`` and the nodes to move."""
    empty = np.empty(0, dtype=np.int64)
    if dest == origin:
        return 0.0, empty
    if dest == NEW and cfg.max_communities is not None and state.k >= cfg.max_communities:
        return 0.0, empty
    g = state.g
    nodes = state.members(origin)
    if len(nodes) == 0:
        return 0.0, empty
    if pos is None:
        pos = np.full(g.n, -1, dtype=np.int64)
    wo, so = state._stats(origin)
    wd, sd = state._stats(dest)
    gain, side = _kernels.recalc_pair(
        g.indptr, g.indices, g.weights, g.strength, g.selfloop, state.labels, nodes, dest,
        wo, so, wd, sd, int(state.kind), state.m, state.q_rest(origin, dest), cfg.tries,
        pair_seed(cfg.seed, origin, dest, sweep), pos,
    )
    if gain <= 0.0:
        return 0.0, empty
    return float(gain), nodes[side == 1]


@dataclass
class ShiftChain:
    """Switch order of one Kernighan-Lin pass with the cumulative gain after each switch."""

    nodes: list
    gains: list
    best_prefix: int

    @property
    def best_gain(self) -> float:
        return self.gains[self.best_prefix - 1] if self.best_prefix else 0.0


def _fixed_stats(state: CommunityState, c: int, exclude: np.ndarray) -> tuple[float, float]:
    if c < 0:
        return 0.0, 0.0
    g = state.g
    fixed = np.setdiff1d(state.members(c), exclude)
    inside = np.zeros(g.n, dtype=bool)
    inside[fixed] = True
    w = float(g.selfloop[fixed].sum())
    for u in fixed:
        lo, hi = g.indptr[u], g.indptr[u + 1]
        w += 0.5 * float(g.weights[lo:hi][inside[g.indices[lo:hi]]].sum())
    return w, float(g.strength[fixed].sum())


def kernighan_lin_pass(state: CommunityState, origin: int, dest: int, nodes=None) -> ShiftChain:
    """Run one shift pass between ``origin`` and ``dest`` and apply its best prefix.

    ``nodes`` are the switchable nodes, by default origin's members; each must
    currently sit in origin or dest and every origin member must be included.
    Each switches to the other side exactly once, largest gain (or smallest
    loss) first.
    """
    g = state.g
    nodes = state.members(origin) if nodes is None else np.asarray(sorted(nodes), dtype=np.int64)
    labels = state.labels
    if not np.all((labels[nodes] == origin) | ((labels[nodes] == dest) & (dest >= 0))):
        raise ValueError("switchable nodes must lie in origin or dest")
    if not np.all(np.isin(state.members(origin), nodes)):
        raise ValueError("all origin members must be switchable")
    side = (labels[nodes] != origin).astype(np.int8)
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[nodes] = np.arange(len(nodes))
    wd, sd = _fixed_stats(state, dest, nodes)
    s = len(nodes)
    wa, wb, stats = np.empty(s), np.empty(s), np.empty(4)
    _kernels.init_pair(g.indptr, g.indices, g.weights, g.strength, g.selfloop, labels, nodes, side,
                       dest, wd, sd, wa, wb, pos, stats)
    q_rest = state.q_rest(origin, dest)
    start = _kernels.pair_value(int(state.kind), state.m, q_rest, *stats)
    order = np.empty(s, dtype=np.int64)
    values = np.empty(s)
    best_len, _ = _kernels.kl_pass(g.indptr, g.indices, g.weights, g.strength, g.selfloop, nodes,
                                   side, wa, wb, pos, stats, int(state.kind), state.m, q_rest,
                                   order, values)
    target = dest
    for i in np.flatnonzero(side != (labels[nodes] != origin)):
        v = int(nodes[i])
        if side[i]:
            target = state.apply_move(v, target)
        else:
            state.apply_move(v, origin)
    return ShiftChain(nodes[order].tolist(), (values - start).tolist(), int(best_len))


def perform_move(state: CommunityState, origin: int, dest: int, nodes) -> tuple[int, bool]:
    """Move ``nodes`` from origin to dest; drop origin if it empties.

    Returns the destination id after compaction and whether origin was removed.
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    if len(nodes) == 0:
        raise ValueError("empty redistribution")
    if not np.all(state.labels[nodes] == origin):
        raise CacheInvalidationError(f"stale move: nodes no longer all in community {origin}")
    target = dest
    for v in nodes.tolist():
        target = state.apply_move(v, target)
    removed = bool(state.size[origin] == 0)
    if removed:
        state.remove_community(origin)
        if target > origin:
            target -= 1
    return target, removed


class TraceRow(NamedTuple):
    sweep: int
    origin: int
    dest: int
    moved: int
    gain: float
    score: float


class ComboResult(NamedTuple):
    partition: Partition
    score: float
    trace: list


def write_trace(trace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TraceRow._fields)
        for row in trace:
            w.writerow([row.sweep, row.origin, "new" if row.dest == NEW else row.dest,
                        row.moved, repr(row.gain), repr(row.score)])


class ComboOptimizer:
    """Stepwise driver; :func:`optimize` runs it to completion."""

    def __init__(self, g: Graph, cfg: ComboConfig | None = None, init=None):
        self.cfg = cfg or ComboConfig()
        self.g = g
        labels = None if init is None else getattr(init, "labels", init)
        if labels is not None and self.cfg.max_communities is not None:
            if Partition(labels).k > self.cfg.max_communities:
                raise ValueError("initial partition exceeds max_communities")
        self.state = make_state(g, labels, self.cfg.objective)
        self.cache = GainCache()
        self.sweep = 0
        self.trace: list[TraceRow] = []
        self._pos = np.full(g.n, -1, dtype=np.int64)
        self._value = self.state.value()
        self.done = False
        for o in range(self.state.k):
            for d in self._dests(o):
                self._recalc(o, d)

    def _dests(self, o: int):
        return [d for d in range(self.state.k) if d != o] + [NEW]

    def _recalc(self, o: int, d: int) -> None:
        gain, nodes = recalculate_gain(self.state, o, d, self.cfg, self.sweep, self._pos)
        self.cache.set(o, d, gain, nodes)

    def _refresh(self, key) -> None:
        o, d = key
        e = self.cache[key]
        if len(e.nodes):
            e.gain = self.state.set_move_gain(e.nodes, d)
        e.fresh = True

    def full_cache(self) -> GainCache:
        """All pair gains recomputed from scratch against the current partition."""
        full = GainCache()
        for o in range(self.state.k):
            for d in self._dests(o):
                gain, nodes = recalculate_gain(self.state, o, d, self.cfg, self.sweep, self._pos)
                full.set(o, d, gain, nodes)
        return full

    def _select(self):
        """Best cached entry whose gain is current; refreshes stale entries lazily."""
        while True:
            o, d, gain, nodes = best_gain(self.cache)
            if gain > self.cfg.threshold and not self.cache[(o, d)].fresh:
                self._refresh((o, d))
                continue
            if gain <= self.cfg.threshold:
                stale = self.cache.stale_keys()
                if stale:
                    # the global exit-rate term shifts every pair; re-derive before stopping
                    for key in stale:
                        self._recalc(*key)
                    continue
                return None
            return o, d, gain, nodes

    def step(self) -> bool:
        """Apply the best move. Returns False once no gain exceeds the threshold."""
        if self.done:
            return False
        if self.cfg.max_sweeps is not None and self.sweep >= self.cfg.max_sweeps:
            self.done = True
            return False
        chosen = self._select()
        if chosen is None:
            self.done = True
            return False
        o, d, gain, nodes = chosen
        k_before = self.state.k
        self.sweep += 1
        target, removed = perform_move(self.state, o, d, nodes)
        if removed:
            self.cache.drop_community(o)
        touched = {target} if removed else {o, target}
        recomputed = set()
        for t in touched:
            for c in range(self.state.k):
                if c != t:
                    for key in ((t, c), (c, t)):
                        if key not in recomputed:
                            self._recalc(*key)
                            recomputed.add(key)
            self._recalc(t, NEW)
            recomputed.add((t, NEW))
        maxc = self.cfg.max_communities
        if maxc is not None and (k_before >= maxc) != (self.state.k >= maxc):
            for c in range(self.state.k):
                if (c, NEW) not in recomputed:
                    self._recalc(c, NEW)
                    recomputed.add((c, NEW))
        if self.state.kind is ObjectiveKind.CODELENGTH:
            self.cache.mark_stale(keep=recomputed)
        self._value += gain
        score = self._value if self.state.kind.maximize else -self._value
        self.trace.append(TraceRow(self.sweep, o, d, len(nodes), gain, score))
        if self.cfg.debug:
            self._check(gain)
        return True

    def _check(self, gain: float) -> None:
        fresh = self.state.rebuild()
        if not self.state.matches(fresh):
            raise AssertionError("incremental statistics drifted from recount")
        exact = fresh.value()
        if abs(exact - self._value) > 1e-9 * max(1.0, abs(exact)):
            raise AssertionError(f"score {exact} differs from accumulated gains {self._value}")
        self._value = exact

    def run(self) -> ComboResult:
        while self.step():
            pass
        p = self.state.partition()
        return ComboResult(p, objective_score(self.g, p, self.state.kind), list(self.trace))


def optimize(g: Graph, cfg: ComboConfig | None = None, init=None) -> ComboResult:
    """Run Combo from ``init`` (default: a single community) until no gain exceeds the threshold."""
    return ComboOptimizer(g, cfg, init).run()
