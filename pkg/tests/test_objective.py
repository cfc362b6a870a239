import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from combocd.graph import Graph
from combocd.objective import (
    NEW,
    CodeLengthState,
    ModularityState,
    ObjectiveKind,
    apply_move,
    brute_force_best,
    codelength,
    make_state,
    modularity,
    move_gain,
    set_partitions,
)
from combocd.partition import Partition

from .conftest import four_cycle, graph_and_labels, random_connected_graph, triangle, two_triangles

TRIANGLES = [0, 0, 0, 1, 1, 1]


def entropy2(ps):
    return -sum(p * math.log2(p) for p in ps if p > 0)


def test_modularity_single_community_is_zero(karate):
    assert modularity(karate, np.zeros(34, dtype=int)) == pytest.approx(0.0, abs=1e-15)


def test_modularity_two_triangles():
    # W_c = 3, S_c = 7, m = 7
    assert modularity(two_triangles(), TRIANGLES) == pytest.approx(5 / 14, abs=1e-12)


def test_modularity_with_self_loop_by_hand():
    # edges: 0-0 (w=2), 0-1 (w=1), 1-2 (w=3); m = 6, strengths 5, 4, 3
    g = Graph.from_edges(3, [(0, 0, 2), (0, 1, 1), (1, 2, 3)])
    expected = (2 / 6 - (5 / 12) ** 2) + (3 / 6 - (7 / 12) ** 2)
    assert modularity(g, [0, 1, 1]) == pytest.approx(expected, abs=1e-12)


def test_codelength_single_community_is_visit_entropy(karate):
    p = karate.strength / karate.strength.sum()
    assert codelength(karate, np.zeros(34, dtype=int)) == pytest.approx(entropy2(p), abs=1e-12)


def test_codelength_four_cycle():
    g = four_cycle()
    # single: entropy of four equal rates; singletons: q_c = 1/4, index 2 bits + 4 * (1/2) * 1 bit
    assert codelength(g, [0, 0, 0, 0]) == pytest.approx(2.0, abs=1e-12)
    assert codelength(g, [0, 1, 2, 3]) == pytest.approx(4.0, abs=1e-12)


def test_codelength_two_triangles_by_hand():
    g = two_triangles()
    p = np.array([2, 2, 3, 3, 2, 2]) / 14
    single = entropy2(p)
    q_c = 1 / 14
    rate = q_c + 7 / 14
    module = rate * entropy2([q_c / rate, 2 / 14 / rate, 2 / 14 / rate, 3 / 14 / rate])
    split = 2 * q_c * entropy2([0.5, 0.5]) + 2 * module
    assert codelength(g, TRIANGLES) == pytest.approx(split, abs=1e-12)
    assert codelength(g, [0] * 6) == pytest.approx(single, abs=1e-12)
    assert split < single


def test_state_scores_match_scratch(karate):
    rng = np.random.default_rng(3)
    labels = rng.integers(0, 5, size=34)
    assert ModularityState(karate, labels).score() == pytest.approx(modularity(karate, labels), abs=1e-12)
    assert CodeLengthState(karate, labels).score() == pytest.approx(codelength(karate, labels), abs=1e-12)


def test_codelength_state_rates(karate):
    s = CodeLengthState(karate, None)
    assert s.visit_rates.sum() == pytest.approx(1.0, abs=1e-12)
    assert s.q_total() == 0.0
    s2 = CodeLengthState(karate, np.arange(34) % 3)
    assert np.all(s2.exit_probabilities > 0)
    assert s2.inside_rates.sum() == pytest.approx(1.0)


def test_move_to_new_from_singleton_is_zero():
    g = two_triangles()
    for kind in ObjectiveKind:
        s = make_state(g, [0, 1, 1, 2, 2, 2], kind)
        assert move_gain(s, 0, NEW) == pytest.approx(0.0, abs=1e-12)


def test_move_gain_same_community_is_zero():
    s = make_state(two_triangles(), TRIANGLES)
    assert move_gain(s, 0, 0) == 0.0
    with pytest.raises(ValueError):
        move_gain(s, 0, 1, src=1)


@pytest.mark.parametrize("kind", list(ObjectiveKind))
@settings(max_examples=300, deadline=None)
@given(case=graph_and_labels(), data=st.data())
def test_move_gain_matches_rescoring(kind, case, data):
    g, labels = case
    s = make_state(g, labels, kind)
    v = data.draw(st.integers(0, g.n - 1))
    dest = data.draw(st.sampled_from(list(range(s.k)) + [NEW]))
    before = s.score()
    gain = move_gain(s, v, dest)
    after_labels = s.labels.copy()
    after_labels[v] = s.k if dest == NEW else dest
    scorer = modularity if kind is ObjectiveKind.MODULARITY else codelength
    delta = scorer(g, after_labels) - scorer(g, s.labels)
    expected = delta if kind.maximize else -delta
    assert gain == pytest.approx(expected, abs=1e-9 * max(1.0, abs(before)))


@pytest.mark.parametrize("kind", list(ObjectiveKind))
def test_apply_then_reverse_restores_state(kind, karate):
    s = make_state(karate, np.arange(34) % 4, kind)
    ref = s.copy()
    apply_move(s, 5, 2)
    apply_move(s, 5, 1)  # node 5 started in community 5 % 4 = 1
    assert s.matches(ref)


def test_apply_move_on_triangle_matches_recount():
    s = make_state(triangle(), [0, 0, 0])
    apply_move(s, 0, NEW)
    assert s.W[:2].tolist() == [1.0, 0.0]
    assert s.S[:2].tolist() == [4.0, 2.0]
    assert s.matches(s.rebuild())


@pytest.mark.parametrize("kind", list(ObjectiveKind))
def test_many_random_moves_match_recount(kind):
    rng = np.random.default_rng(7)
    g = random_connected_graph(rng, 50, p=0.1, selfloops=True)
    s = make_state(g, rng.integers(0, 6, size=50), kind)
    for _ in range(100):
        v = int(rng.integers(50))
        dest = int(rng.integers(-1, s.k))
        apply_move(s, v, dest)
    assert s.matches(s.rebuild())
    assert s.score() == pytest.approx(s.rebuild().score(), abs=1e-9)


def test_remove_community_compacts():
    s = make_state(two_triangles(), [0, 1, 1, 2, 2, 2])
    apply_move(s, 0, 1)
    s.remove_community(0)
    assert s.k == 2
    assert s.labels.tolist() == TRIANGLES
    assert s.matches(s.rebuild())
    with pytest.raises(ValueError):
        s.remove_community(0)


def test_set_partitions_counts_bell_numbers():
    assert [len(set_partitions(n)) for n in range(1, 9)] == [1, 2, 5, 15, 52, 203, 877, 4140]
    rows = set_partitions(4)
    assert len({tuple(r) for r in rows}) == 15


def test_brute_force_triangle():
    p, q = brute_force_best(triangle())
    assert p.k == 1
    assert q == pytest.approx(0.0, abs=1e-12)


def test_brute_force_two_triangles():
    p, q = brute_force_best(two_triangles())
    assert p == Partition(TRIANGLES)
    assert q == pytest.approx(5 / 14, abs=1e-12)


def test_brute_force_four_cycle():
    # one community and two adjacent pairs both score 0; opposite pairs score -1/2
    _, q = brute_force_best(four_cycle())
    assert q == pytest.approx(0.0, abs=1e-12)


def test_brute_force_codelength_agrees_with_scratch():
    rng = np.random.default_rng(11)
    for _ in range(5):
        g = random_connected_graph(rng, 7)
        p, L = brute_force_best(g, "codelength")
        assert L == pytest.approx(codelength(g, p), abs=1e-9)
        rows = set_partitions(7)
        sample = rows[rng.choice(len(rows), 200)]
        assert all(codelength(g, r) >= L - 1e-9 for r in sample)


def test_brute_force_refuses_large():
    g = Graph.from_edges(13, [(i, i + 1, 1.0) for i in range(12)])
    with pytest.raises(ValueError):
        brute_force_best(g)


def test_brute_force_argmax_scale_invariant():
    rng = np.random.default_rng(5)
    for _ in range(5):
        g = random_connected_graph(rng, 7)
        scaled = Graph.from_edges(g.n, [(u, v, 3.7 * w) for u, v, w in g.edges])
        p1, q1 = brute_force_best(g)
        p2, q2 = brute_force_best(scaled)
        assert p1 == p2
        assert q1 == pytest.approx(q2, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(graph_and_labels())
def test_modularity_bounds(case):
    g, labels = case
    q = modularity(g, labels)
    assert -0.5 - 1e-12 <= q < 1


@settings(max_examples=100, deadline=None)
@given(graph_and_labels())
def test_codelength_positive(case):
    g, labels = case
    assert codelength(g, labels) >= 0
