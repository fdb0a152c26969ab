import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smpnet.errors import ContractError, DimensionError
from smpnet.graph import (
    Graph,
    Permutation,
    apply_permutation,
    complete_graph,
    cycle_graph,
    disjoint_union,
    graph_from_adjacency,
    path_graph,
)


def test_edges_are_canonical():
    g = Graph(4, ((2, 1), (0, 3), (1, 2), (3, 0)))
    assert g.edges == ((0, 3), (1, 2))
    assert g.m == 2
    assert g.d_avg == pytest.approx(1.0)
    assert g.d_max == 1


@pytest.mark.parametrize("edges", [((0, 0),), ((0, 5),), ((-1, 2),)])
def test_bad_edges_rejected(edges):
    with pytest.raises(ContractError):
        Graph(4, edges)


def test_feature_shapes_checked():
    with pytest.raises(DimensionError):
        Graph(3, ((0, 1),), x=np.zeros((2, 1)))
    with pytest.raises(ContractError):
        Graph(3, ((0, 1), (1, 2)), y={(0, 1): [1.0]})


def test_empty_graph_degree_stats():
    g = Graph(0)
    assert g.d_avg == 0.0
    assert g.d_max == 0


def test_adjacency_symmetric():
    a = cycle_graph(5).adjacency()
    np.testing.assert_array_equal(a, a.T)
    np.testing.assert_array_equal(a.sum(axis=1), np.full(5, 2))


def test_builders():
    assert path_graph(3).edges == ((0, 1), (1, 2))
    assert complete_graph(4).m == 6
    u = disjoint_union(cycle_graph(3), cycle_graph(3))
    assert u.n == 6 and u.m == 6
    assert (3, 5) in u.edges
    assert graph_from_adjacency(cycle_graph(6).adjacency()) == cycle_graph(6)


def test_record_round_trip_with_features():
    g = Graph(3, ((0, 1), (1, 2)), x=np.arange(6.0).reshape(3, 2), y={(1, 0): [1.0, 2.0], (1, 2): [3.0, 4.0]})
    back = Graph.from_record(g.to_record())
    assert back == g
    y = back.edge_feature_tensor()
    np.testing.assert_array_equal(y[1, 0], [1.0, 2.0])
    np.testing.assert_array_equal(y[0, 1], y[1, 0])


# ---------------------------------------------------------------- permutations
def test_identity_leaves_objects_unchanged():
    rng = np.random.default_rng(0)
    t = rng.standard_normal((4, 4, 2))
    np.testing.assert_array_equal(apply_permutation(Permutation.identity(4), t), t)


def test_swap_on_k2():
    a = np.array([[0, 1], [1, 0]])
    np.testing.assert_array_equal(apply_permutation(Permutation([1, 0]), a), a)


def test_cyclic_shift_on_rows():
    x = np.array([["a"], ["b"], ["c"]])
    out = apply_permutation(Permutation([1, 2, 0]), x, node_axes=1)
    np.testing.assert_array_equal(out[:, 0], ["c", "a", "b"])


def test_not_a_permutation():
    with pytest.raises(ContractError):
        Permutation([0, 0, 1])


def test_length_mismatch():
    with pytest.raises(DimensionError):
        apply_permutation(Permutation.identity(3), np.zeros((4, 2)))
    with pytest.raises(DimensionError):
        apply_permutation(Permutation.identity(3), cycle_graph(4))


def test_graph_permutation_matches_adjacency_permutation():
    rng = np.random.default_rng(1)
    g = Graph(5, ((0, 1), (1, 2), (2, 4)), x=rng.standard_normal((5, 2)))
    perm = Permutation.random(5, rng)
    h = apply_permutation(perm, g)
    np.testing.assert_array_equal(h.adjacency(), apply_permutation(perm, g.adjacency()))
    np.testing.assert_array_equal(h.x, apply_permutation(perm, g.x, node_axes=1))


perm_pairs = st.integers(1, 9).flatmap(
    lambda n: st.tuples(st.permutations(range(n)), st.permutations(range(n)))
)


@settings(max_examples=100, deadline=None)
@given(perm_pairs)
def test_composition_is_sequential_application(pair):
    p, q = Permutation(pair[0]), Permutation(pair[1])
    n = p.n
    t = np.arange(n * n * 2, dtype=float).reshape(n, n, 2)
    both = apply_permutation(p, apply_permutation(q, t))
    np.testing.assert_array_equal(apply_permutation(p.compose(q), t), both)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 9).flatmap(lambda n: st.permutations(range(n))))
def test_inverse_undoes(mapping):
    p = Permutation(mapping)
    x = np.arange(len(mapping), dtype=float)[:, None]
    np.testing.assert_array_equal(apply_permutation(p.inverse(), apply_permutation(p, x)), x)
    assert p.compose(p.inverse()) == Permutation.identity(p.n)
