import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphpade.errors import EdgeListError, InvalidParameterError
from graphpade.graph import Graph, build_laplacian, generate_block_graph, read_edge_list, write_edge_list
from graphpade.spectral import decompose


def test_single_edge_laplacian():
    L = build_laplacian(Graph(2, [(0, 1)]))
    np.testing.assert_array_equal(L, [[1, -1], [-1, 1]])


def test_edgeless_laplacian_is_zero():
    np.testing.assert_array_equal(build_laplacian(Graph(3, np.empty((0, 2)))), np.zeros((3, 3)))


def test_complete_graph_k4():
    g = Graph.from_pairs(4, [(u, v) for u in range(4) for v in range(u + 1, 4)])
    L = build_laplacian(g)
    assert np.all(np.diag(L) == 3)
    assert np.all(L[~np.eye(4, dtype=bool)] == -1)
    # spectrum of K_n is {0, n (n-1 times)}
    np.testing.assert_allclose(decompose(L).lambdas, [0, 4, 4, 4], atol=1e-12)


def test_graph_rejects_bad_edges():
    with pytest.raises(InvalidParameterError):
        Graph(3, [(0, 0)])
    with pytest.raises(InvalidParameterError):
        Graph(3, [(0, 1), (1, 0)])
    with pytest.raises(InvalidParameterError):
        Graph(3, [(0, 3)])
    with pytest.raises(InvalidParameterError):
        Graph(0, [])


def test_from_pairs_collapses_duplicates():
    g = Graph.from_pairs(3, [(0, 1), (1, 0), (1, 2)])
    assert g.num_edges == 2


@given(st.integers(2, 25), st.floats(0.0, 1.0), st.integers(0, 10_000))
def test_laplacian_invariants(n, p, seed):
    rng = np.random.default_rng(seed)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    g = Graph.from_pairs(n, pairs)
    L = build_laplacian(g)
    np.testing.assert_array_equal(L, L.T)
    np.testing.assert_array_equal(L.sum(axis=1), np.zeros(n))
    np.testing.assert_array_equal(np.diag(L), g.degrees())
    off = L[~np.eye(n, dtype=bool)]
    assert set(np.unique(off)) <= {0.0, -1.0}
    assert decompose(L).lambdas.min() >= -1e-9


def test_block_graph_500_nodes_and_degree_cap():
    g = generate_block_graph(1, 500, 8, 3, seed=3)
    assert g.n == 500
    # a vertex keeps its own draws and can be picked by others; inter draws
    # have no partners with a single group
    assert g.degrees().min() >= 0


def test_block_graph_edgeless():
    g = generate_block_graph(2, 2, 0, 0, seed=5)
    assert g.n == 4 and g.num_edges == 0


def test_block_graph_deterministic():
    a = generate_block_graph(5, 100, 8, 3, seed=7)
    b = generate_block_graph(5, 100, 8, 3, seed=7)
    c = generate_block_graph(5, 100, 8, 3, seed=8)
    np.testing.assert_array_equal(a.edges, b.edges)
    assert a.content_hash() == b.content_hash() != c.content_hash()


def test_block_graph_respects_groups():
    g = generate_block_graph(4, 10, 3, 0, seed=2)
    grp = g.edges // 10
    assert np.all(grp[:, 0] == grp[:, 1])


def test_block_graph_invalid_group():
    with pytest.raises(InvalidParameterError):
        generate_block_graph(3, 1, 2, 0)


def test_edge_list_round_trip(tmp_path):
    g = generate_block_graph(3, 10, 4, 2, seed=1)
    g = Graph(g.n + 2, g.edges)  # trailing isolated vertices
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    h, dropped = read_edge_list(path)
    assert dropped == 0 and h.n == g.n
    np.testing.assert_array_equal(h.edges, g.edges)


def test_edge_list_drops_loops_and_duplicates(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# comment\n0 1\n1 0\n2 2\n\n1 2\n")
    g, dropped = read_edge_list(path)
    assert (g.n, g.num_edges, dropped) == (3, 2, 2)


@pytest.mark.parametrize("line", ["0 1 2", "a b", "0", "-1 2"])
def test_edge_list_malformed(tmp_path, line):
    path = tmp_path / "g.txt"
    path.write_text(f"0 1\n{line}\n")
    with pytest.raises(EdgeListError, match=":2"):
        read_edge_list(path)


def test_edge_list_missing_and_empty(tmp_path):
    with pytest.raises(EdgeListError):
        read_edge_list(tmp_path / "absent.txt")
    empty = tmp_path / "e.txt"
    empty.write_text("# nothing\n")
    with pytest.raises(EdgeListError):
        read_edge_list(empty)
