"""Compiled inner loops: pair scoring, Kernighan-Lin shift passes, pair recombination.

Both objectives are functions of per-community internal weight W and total
strength S; for code length the global exit rate enters too, passed here as
the exit rate of every community outside the working pair (``q_rest``).
"""

import numpy as np
from numba import njit

MODULARITY = 0
CODELENGTH = 1

# improvements at or below this are treated as float noise
EPS = 1e-12


@njit(cache=True)
def plogp(x):
    if x <= 1e-300:
        return 0.0
    return x * np.log2(x)


@njit(cache=True)
def pair_value(kind, m, q_rest, wa, sa, wb, sb):
    """Contribution of communities A and B to the objective, in maximize sense.

    For code length this is minus the part of L that depends on A and B;
    the node-entropy term is constant and omitted.
    """
    if kind == MODULARITY:
        return (wa + wb) / m - (sa * sa + sb * sb) / (4.0 * m * m)
    two_m = 2.0 * m
    qa = (sa - 2.0 * wa) / two_m
    qb = (sb - 2.0 * wb) / two_m
    if qa < 0.0:
        qa = 0.0
    if qb < 0.0:
        qb = 0.0
    pa = sa / two_m
    pb = sb / two_m
    q = q_rest + qa + qb
    return -(plogp(q) - 2.0 * plogp(qa) - 2.0 * plogp(qb) + plogp(qa + pa) + plogp(qb + pb))


@njit(cache=True)
def _switch(i, indptr, indices, weights, strength, selfloop, nodes, side, wa, wb, pos, stats):
    u = nodes[i]
    k = strength[u]
    sl = selfloop[u]
    if side[i] == 0:
        stats[0] -= wa[i] + sl
        stats[1] -= k
        stats[2] += wb[i] + sl
        stats[3] += k
        side[i] = 1
        for p in range(indptr[u], indptr[u + 1]):
            j = pos[indices[p]]
            if j >= 0:
                wa[j] -= weights[p]
                wb[j] += weights[p]
    else:
        stats[2] -= wb[i] + sl
        stats[3] -= k
        stats[0] += wa[i] + sl
        stats[1] += k
        side[i] = 0
        for p in range(indptr[u], indptr[u + 1]):
            j = pos[indices[p]]
            if j >= 0:
                wb[j] -= weights[p]
                wa[j] += weights[p]


@njit(cache=True)
def kl_pass(indptr, indices, weights, strength, selfloop, nodes, side, wa, wb, pos, stats,
            kind, m, q_rest, order, values):
    """One shift chain over ``nodes``: every node switches side once, greedily.

    The best prefix of the chain stays applied. ``order``/``values`` receive
    the switched node positions and the pair value after each switch.
    Returns (best prefix length, improvement of the pair value).
    """
    s = len(nodes)
    avail = np.ones(s, dtype=np.bool_)
    start = pair_value(kind, m, q_rest, stats[0], stats[1], stats[2], stats[3])
    best_val = start
    best_len = 0
    best_stats = stats.copy()
    for step in range(s):
        bi = -1
        bv = -np.inf
        wa_, sa_, wb_, sb_ = stats[0], stats[1], stats[2], stats[3]
        for i in range(s):
            if not avail[i]:
                continue
            u = nodes[i]
            k = strength[u]
            sl = selfloop[u]
            if side[i] == 0:
                v = pair_value(kind, m, q_rest, wa_ - wa[i] - sl, sa_ - k, wb_ + wb[i] + sl, sb_ + k)
            else:
                v = pair_value(kind, m, q_rest, wa_ + wa[i] + sl, sa_ + k, wb_ - wb[i] - sl, sb_ - k)
            if v > bv:
                bv = v
                bi = i
        _switch(bi, indptr, indices, weights, strength, selfloop, nodes, side, wa, wb, pos, stats)
        avail[bi] = False
        order[step] = bi
        values[step] = bv
        if bv > best_val + EPS:
            best_val = bv
            best_len = step + 1
            best_stats[:] = stats
    for step in range(s - 1, best_len - 1, -1):
        _switch(order[step], indptr, indices, weights, strength, selfloop, nodes, side, wa, wb, pos, stats)
    stats[:] = best_stats
    return best_len, best_val - start


@njit(cache=True)
def init_pair(indptr, indices, weights, strength, selfloop, labels, nodes, side, dest, wd_, sd_,
              wa, wb, pos, stats):
    """Fill per-node weights towards each side and the pair statistics for ``side``."""
    s = len(nodes)
    sa = 0.0
    sb = sd_
    wa_tot = 0.0
    wb_tot = wd_
    for i in range(s):
        u = nodes[i]
        x = 0.0
        y = 0.0
        to_dest = 0.0
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            j = pos[v]
            if j >= 0:
                if side[j] == 0:
                    x += weights[p]
                else:
                    y += weights[p]
            elif labels[v] == dest:
                y += weights[p]
                to_dest += weights[p]
        wa[i] = x
        wb[i] = y
        if side[i] == 0:
            sa += strength[u]
            wa_tot += selfloop[u] + 0.5 * x
        else:
            sb += strength[u]
            wb_tot += selfloop[u] + 0.5 * (y + to_dest)
    stats[0] = wa_tot
    stats[1] = sa
    stats[2] = wb_tot
    stats[3] = sb


@njit(cache=True)
def recalc_pair(indptr, indices, weights, strength, selfloop, labels, nodes, dest,
                wo, so, wd_, sd_, kind, m, q_rest, tries, seed, pos):
    """Best redistribution of ``nodes`` (the origin community) towards ``dest``.

    ``dest`` < 0 denotes a new, empty community. Starting configurations are
    the original split, the whole origin moved (existing dest only) and
    ``tries`` fair-coin splits, each refined by shift chains until a chain
    stops improving. Returns (gain, side) with side[i] = 1 for moved nodes.
    """
    s = len(nodes)
    for i in range(s):
        pos[nodes[i]] = i
    base = pair_value(kind, m, q_rest, wo, so, wd_, sd_)
    best_gain = 0.0
    best_side = np.zeros(s, dtype=np.int8)
    side = np.zeros(s, dtype=np.int8)
    wa = np.empty(s)
    wb = np.empty(s)
    stats = np.empty(4)
    order = np.empty(s, dtype=np.int64)
    values = np.empty(s)
    np.random.seed(seed)
    n_conf = 1 + tries + (1 if dest >= 0 else 0)
    for c in range(n_conf):
        if c == 0:
            side[:] = 0
        elif c == 1 and dest >= 0:
            side[:] = 1
        else:
            for i in range(s):
                side[i] = 1 if np.random.random() < 0.5 else 0
        init_pair(indptr, indices, weights, strength, selfloop, labels, nodes, side, dest,
                  wd_, sd_, wa, wb, pos, stats)
        while True:
            _, improvement = kl_pass(indptr, indices, weights, strength, selfloop, nodes, side,
                                     wa, wb, pos, stats, kind, m, q_rest, order, values)
            if improvement <= EPS:
                break
        gain = pair_value(kind, m, q_rest, stats[0], stats[1], stats[2], stats[3]) - base
        if gain > best_gain + EPS:
            best_gain = gain
            best_side[:] = side
    for i in range(s):
        pos[nodes[i]] = -1
    return best_gain, best_side
