import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from movnet.digraph import (
    WeightedDigraph,
    cycle_gcd,
    is_strongly_connected,
    out_degrees,
    transition_matrix,
)
from movnet.exceptions import NotStronglyConnected, ShapeMismatch, ZeroOutDegree

from _oracles import closed_walk_gcd, random_ergodic_digraph, transitive_closure


def cycle(m, loops=()):
    W = np.zeros((m, m))
    for i in range(m):
        W[i, (i + 1) % m] = 1.0
    for i in loops:
        W[i, i] = 1.0
    return WeightedDigraph(W)


@st.composite
def weight_matrices(draw, max_m=8, density=0.4):
    m = draw(st.integers(1, max_m))
    mask = draw(st.lists(st.booleans(), min_size=m * m, max_size=m * m))
    vals = draw(st.lists(st.floats(0.1, 5.0), min_size=m * m, max_size=m * m))
    W = np.array([v if k else 0.0 for k, v in zip(mask, vals)]).reshape(m, m)
    return W


class TestOutDegrees:
    def test_single_loop(self):
        assert out_degrees(WeightedDigraph([[1.0]])).tolist() == [1.0]

    def test_row_sums(self):
        assert out_degrees(WeightedDigraph([[0, 2], [3, 0]])).tolist() == [2.0, 3.0]

    def test_empty_row(self):
        with pytest.raises(ZeroOutDegree) as info:
            out_degrees(WeightedDigraph([[0, 0], [1, 0]]))
        assert info.value.node == 0


def test_construction_rejects_bad_weights():
    with pytest.raises(ValueError):
        WeightedDigraph([[1, -1], [1, 1]])
    with pytest.raises(ValueError):
        WeightedDigraph([[np.nan]])
    with pytest.raises(ShapeMismatch):
        WeightedDigraph([[1, 2, 3]])


def test_pathological_graph_constructs_but_has_no_walk():
    g = WeightedDigraph([[0, 0], [1, 0]])
    assert g.m == 2
    with pytest.raises(ZeroOutDegree):
        transition_matrix(g)


class TestStrongConnectivity:
    def test_three_cycle(self):
        assert is_strongly_connected(cycle(3))

    def test_one_way_arc(self):
        assert not is_strongly_connected(WeightedDigraph([[1, 1], [0, 1]]))

    def test_single_node(self):
        assert is_strongly_connected(WeightedDigraph([[1.0]]))

    @settings(max_examples=200, deadline=None)
    @given(weight_matrices())
    def test_matches_transitive_closure(self, W):
        expected = bool(transitive_closure(W).all())
        assert is_strongly_connected(WeightedDigraph(W)) == expected


class TestCycleGcd:
    def test_three_cycle(self):
        assert cycle_gcd(cycle(3)) == 3

    def test_three_cycle_with_loop(self):
        assert cycle_gcd(cycle(3, loops=[0])) == 1

    def test_bidirected_edge(self):
        assert cycle_gcd(WeightedDigraph([[0, 1], [1, 0]])) == 2

    def test_requires_strong_connectivity(self):
        with pytest.raises(NotStronglyConnected):
            cycle_gcd(WeightedDigraph([[1, 1], [0, 1]]))

    @settings(max_examples=200, deadline=None)
    @given(weight_matrices(density=0.5))
    def test_matches_closed_walks(self, W):
        g = WeightedDigraph(W)
        if not is_strongly_connected(g):
            return
        assert cycle_gcd(g) == closed_walk_gcd(W)

    @settings(max_examples=100, deadline=None)
    @given(weight_matrices(), st.randoms(use_true_random=False))
    def test_relabeling_invariance(self, W, random):
        g = WeightedDigraph(W)
        if not is_strongly_connected(g):
            return
        perm = list(range(g.m))
        random.shuffle(perm)
        assert cycle_gcd(g.permuted(perm)) == cycle_gcd(g)

    def test_period_six_and_four(self):
        # cycles of length 4 and 6 sharing nodes: period 2
        W = np.zeros((6, 6))
        for a, b in [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (4, 5), (5, 1)]:
            W[a, b] = 1
        g = WeightedDigraph(W)
        assert cycle_gcd(g) == closed_walk_gcd(W) == 2


class TestTransitionMatrix:
    def test_single_node(self):
        assert transition_matrix(WeightedDigraph([[1.0]])).tolist() == [[1.0]]

    def test_even_split(self):
        Q = transition_matrix(WeightedDigraph([[2, 2], [1, 0]]))
        assert Q[0].tolist() == [0.5, 0.5]

    def test_hand_example(self):
        Q = transition_matrix(WeightedDigraph([[0, 1], [3, 1]]))
        np.testing.assert_array_equal(Q, [[0, 1], [0.75, 0.25]])

    @settings(max_examples=200, deadline=None)
    @given(weight_matrices())
    def test_rows_stochastic(self, W):
        g = WeightedDigraph(W)
        if np.any(W.sum(axis=1) == 0):
            with pytest.raises(ZeroOutDegree):
                transition_matrix(g)
            return
        Q = transition_matrix(g)
        np.testing.assert_allclose(Q.sum(axis=1), 1.0, rtol=0, atol=1e-12)
        assert np.all((Q >= 0) & (Q <= 1))


def test_aperiodic_iff_subdominant_eigenvalues_inside_unit_circle():
    rng = np.random.default_rng(7)
    seen = set()
    for trial in range(300):
        m = int(rng.integers(1, 9))
        W = (rng.random((m, m)) < 0.3) * rng.uniform(0.1, 2, (m, m))
        g = WeightedDigraph(W)
        if np.any(W.sum(axis=1) == 0) or not is_strongly_connected(g):
            continue
        moduli = np.sort(np.abs(np.linalg.eigvals(transition_matrix(g))))[::-1]
        inside = bool(np.all(moduli[1:] < 1 - 1e-9))
        aperiodic = cycle_gcd(g) == 1
        assert aperiodic == inside
        seen.add(aperiodic)
    bipartite = np.zeros((6, 6))
    bipartite[:3, 3:] = rng.uniform(0.5, 1.5, (3, 3))
    bipartite[3:, :3] = rng.uniform(0.5, 1.5, (3, 3))
    for W in (random_ergodic_digraph(rng, 5), cycle(4).weights, cycle(7).weights, bipartite):
        g = WeightedDigraph(W)
        moduli = np.sort(np.abs(np.linalg.eigvals(transition_matrix(g))))[::-1]
        aperiodic = cycle_gcd(g) == 1
        assert aperiodic == bool(np.all(moduli[1:] < 1 - 1e-9))
        seen.add(aperiodic)
    assert seen == {True, False}


def test_graph_is_immutable():
    g = cycle(3)
    with pytest.raises(ValueError):
        g.weights[0, 0] = 5.0
