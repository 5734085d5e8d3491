import warnings

import numpy as np
import pytest

from conedefense import network
from conedefense.network import Digraph

import generators as gen
import oracles

L6 = np.array([[1.5, -1.5, 0, 0, 0, 0],
                 [0, 2.8, -0.3, -2.5, 0, 0],
                 [-2, 0, 3.5, -1.5, 0, 0],
                 [0, 0, 0, 0.1, -0.1, 0],
                 [0, 0, 0, 0, 1, -1],
                 [0, 0, 0, -2.7, 0, 2.7]])


@pytest.fixture
def g6():
    return Digraph.from_laplacian(L6)


# construction ------------------------------------------------------------------------

def test_digraph_validation():
    with pytest.raises(ValueError, match="self-loop"):
        Digraph(2, {(0, 0): 1.0})
    with pytest.raises(ValueError, match="nonpositive"):
        Digraph(2, {(0, 1): 0.0})
    with pytest.raises(ValueError, match="outside"):
        Digraph(2, {(0, 2): 1.0})


def test_orientation_helpers():
    g = Digraph(3, {(0, 1): 1.0, (2, 1): 2.0})
    assert g.sources_of(0) == [1]
    assert g.influenced_by(1) == [0, 2]
    assert g.reversed().weights == {(1, 0): 1.0, (1, 2): 2.0}


# laplacian ------------------------------------------------------------------------------

def test_laplacian_two_cycle():
    g = Digraph(2, {(0, 1): 1.0, (1, 0): 1.0})
    np.testing.assert_array_equal(network.laplacian(g), [[1.0, -1.0], [-1.0, 1.0]])


def test_laplacian_single_node():
    np.testing.assert_array_equal(network.laplacian(Digraph(1)), [[0.0]])


def test_laplacian_six_node_round_trip(g6):
    np.testing.assert_array_equal(network.laplacian(g6), L6)


def test_laplacian_properties():
    rng = np.random.default_rng(0)
    for _ in range(100):
        L = network.laplacian(gen.random_graph(rng, int(rng.integers(1, 9)), p=0.5))
        scale = max(1.0, np.abs(L).max())
        assert np.abs(L.sum(axis=1)).max() <= 1e-12 * scale
        off = L[~np.eye(L.shape[0], dtype=bool)]
        assert np.all(off <= 0)


# strongly connected components ---------------------------------------------------------

def test_scc_six_node(g6):
    d = network.scc_decompose(g6)
    assert d.components == ((0, 1, 2), (3, 4, 5))
    assert d.component_of == (0, 0, 0, 1, 1, 1)


def test_scc_complete_and_path():
    assert network.scc_decompose(Digraph.complete(4)).n_components == 1
    g = Digraph.path(3)
    assert oracles.sccs(g.adjacency()) == {frozenset([0]), frozenset([1]), frozenset([2])}
    assert sorted(network.scc_decompose(g).components) == [(0,), (1,), (2,)]


def test_scc_matches_reachability_oracle():
    rng = np.random.default_rng(1)
    for _ in range(500):
        g = gen.random_graph(rng, int(rng.integers(1, 7)), p=float(rng.uniform(0.1, 0.6)))
        d = network.scc_decompose(g)
        assert {frozenset(c) for c in d.components} == oracles.sccs(g.adjacency())
        # receivers precede their sources: the permuted Laplacian is block upper triangular
        for (i, j) in g.weights:
            assert d.component_of[i] <= d.component_of[j]


def test_scc_block_triangular(g6):
    d = network.scc_decompose(g6)
    blocks, perm = network.component_index_sets(d)
    P = L6[np.ix_(perm, perm)]
    assert not P[np.ix_(blocks[1], blocks[0])].any()


# reachability ---------------------------------------------------------------------------

def test_influence_reachable_examples(g6):
    assert all(network.influence_reachable(g6, v, v) for v in range(6))
    # a_24 = 2.5 > 0: node 4 influences node 2
    assert network.influence_reachable(g6, 3, 1)
    assert not network.influence_reachable(g6, 0, 4)
    with pytest.raises(IndexError):
        network.influence_reachable(g6, 0, 6)


def test_influence_matches_oracle():
    rng = np.random.default_rng(2)
    for _ in range(100):
        g = gen.random_graph(rng, int(rng.integers(1, 7)))
        R = oracles.reach_matrix(g.adjacency())
        for p in range(g.n_nodes):
            for q in range(g.n_nodes):
                assert network.influence_reachable(g, q, p) == R[p, q]


def test_universal_sink_examples(g6):
    assert network.universal_sink_component(Digraph.cycle(4)) == frozenset(range(4))
    assert oracles.universal_sink(g6.adjacency()) == frozenset({0, 1, 2})
    assert network.universal_sink_component(g6) == frozenset({0, 1, 2})
    two = Digraph(4, {(0, 1): 1.0, (1, 0): 1.0, (2, 3): 1.0, (3, 2): 1.0})
    assert network.universal_sink_component(two) is None


def test_universal_sink_matches_oracle():
    rng = np.random.default_rng(3)
    for _ in range(300):
        g = gen.random_graph(rng, int(rng.integers(1, 7)), p=float(rng.uniform(0.1, 0.5)))
        assert network.universal_sink_component(g) == oracles.universal_sink(g.adjacency())
        rev = oracles.universal_sink(g.reversed().adjacency())
        assert network.universal_source_component(g) == rev


# index sets -------------------------------------------------------------------------------

def test_component_index_sets(g6):
    blocks, perm = network.component_index_sets(network.scc_decompose(g6))
    assert blocks == [[0, 1, 2], [3, 4, 5]] and perm == [0, 1, 2, 3, 4, 5]
    blocks, _ = network.component_index_sets(network.scc_decompose(Digraph.complete(4)))
    assert blocks == [[0, 1, 2, 3]]
    blocks, perm = network.component_index_sets(network.scc_decompose(Digraph.path(3)))
    assert blocks == [[0], [1], [2]] and sorted(perm) == [0, 1, 2]


# image of the Laplacian ---------------------------------------------------------------------

def test_basis_image_two_cycle():
    assert not network.basis_image_check(np.array([[1.0, -1.0], [-1.0, 1.0]]), 0)


def test_basis_image_six_node_block():
    block = L6[3:, 3:] - np.diag(L6[3:, 3:].sum(axis=1))
    assert np.allclose(block.sum(axis=1), 0)
    for i in range(3):
        assert not network.basis_image_check(block, i)


def test_basis_image_six_node_full():
    # exact rank tests: e_1..e_3 lie in Im(L), e_4..e_6 do not; nothing lies in Im(L^T)
    expected = [True, True, True, False, False, False]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        assert [network.basis_image_check(L6, i) for i in range(6)] == expected
        assert not any(network.basis_image_check(L6, i, transpose=True) for i in range(6))
    with pytest.warns(RuntimeWarning, match="not strongly connected"):
        assert network.basis_image_check(L6, 4) is False


def test_basis_image_strongly_connected_property():
    rng = np.random.default_rng(4)
    for _ in range(100):
        L = network.laplacian(gen.strongly_connected_graph(rng, int(rng.integers(2, 11))))
        for i in range(L.shape[0]):
            assert not network.basis_in_image(L, i)
            assert not network.basis_in_image(L, i, transpose=True)
