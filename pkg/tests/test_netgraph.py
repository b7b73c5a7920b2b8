import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from pydantic import ValidationError

from chiralwalk.errors import DimensionError, InvalidArgumentError
from chiralwalk.netgraph import (
    Edge,
    GaugeTransform,
    PhasedGraph,
    apply_gauge,
    eliminate_tree_phases,
    generate_barabasi_albert,
    generate_cycle,
    generate_path,
    generate_triangle_chain,
    generate_watts_strogatz,
    is_bipartite,
    loop_sums,
    random_connected_graph,
    random_tree,
    triangle_chain_control_edges,
    wrap_phase,
)


@pytest.fixture
def phased_path():
    """Three-site path with phases 0.3 and -0.7"""
    return PhasedGraph(
        n_sites=3,
        edges=(Edge(n=0, m=1, theta=0.3), Edge(n=1, m=2, theta=-0.7)),
    )


def test_wrap_phase_range():
    """Test wrapping into (-pi, pi]"""
    assert wrap_phase(np.pi) == pytest.approx(np.pi)
    assert wrap_phase(-np.pi) == pytest.approx(np.pi)
    assert wrap_phase(1.5 * np.pi) == pytest.approx(-0.5 * np.pi)
    assert wrap_phase(0.2) == 0.2


def test_edge_canonical_orientation():
    """Test that a reversed edge is stored as n < m with negated phase"""
    edge = Edge(n=2, m=0, theta=0.3)
    assert edge.key == (0, 2)
    assert edge.theta == pytest.approx(-0.3)


def test_self_loop_rejected():
    """Test that self-loops are refused"""
    with pytest.raises(ValidationError):
        Edge(n=1, m=1)


def test_duplicate_edge_rejected():
    """Test that the same edge cannot appear twice"""
    with pytest.raises(ValidationError):
        PhasedGraph(n_sites=2, edges=(Edge(n=0, m=1), Edge(n=1, m=0)))


def test_edge_outside_graph_rejected():
    """Test that edges must reference existing sites"""
    with pytest.raises(ValidationError):
        PhasedGraph(n_sites=2, edges=(Edge(n=0, m=2),))


def test_oriented_phase(phased_path):
    """Test the phase read along each orientation"""
    assert phased_path.oriented_phase(0, 1) == pytest.approx(0.3)
    assert phased_path.oriented_phase(1, 0) == pytest.approx(-0.3)
    assert phased_path.oriented_phase(2, 1) == pytest.approx(0.7)


def test_with_phases_reversed_key(phased_path):
    """Test that a reversed key sets the phase of H[m][n]"""
    updated = phased_path.with_phases({(2, 1): 0.5})
    assert updated.oriented_phase(1, 2) == pytest.approx(-0.5)
    assert updated.oriented_phase(0, 1) == pytest.approx(0.3)


def test_with_phases_unknown_edge(phased_path):
    """Test that phases on missing edges are refused"""
    with pytest.raises(InvalidArgumentError):
        phased_path.with_phases({(0, 2): 0.1})


def test_gauge_zeroes_path_phases(phased_path):
    """Test that alpha = (0, 0.3, -0.4) removes both path phases"""
    gauged = apply_gauge(phased_path, GaugeTransform(alphas=(0.0, 0.3, -0.4)))
    assert np.allclose(gauged.phases, 0.0, atol=1e-12)


def test_gauge_dimension_mismatch(phased_path):
    """Test that the gauge must cover every site"""
    with pytest.raises(DimensionError):
        apply_gauge(phased_path, GaugeTransform.identity(2))


def test_gauge_inverse(phased_path):
    """Test that applying a gauge and its inverse restores the phases"""
    gauge = GaugeTransform(alphas=(0.4, -1.1, 2.0))
    restored = apply_gauge(apply_gauge(phased_path, gauge), gauge.inverse())
    assert np.allclose(restored.phases, phased_path.phases, atol=1e-12)


def test_tree_phases_eliminated():
    """Test that every phase on a tree can be gauged away"""
    tree = random_tree(7, rng_seed=3)
    reduced, gauge = eliminate_tree_phases(tree)
    assert np.allclose(reduced.phases, 0.0, atol=1e-12)
    assert len(gauge.alphas) == 7


def test_elimination_keeps_loop_sum():
    """Test that gauge elimination leaves the triangle's loop sum on its loop edge"""
    triangle = PhasedGraph(
        n_sites=3,
        edges=(Edge(n=0, m=1, theta=0.4), Edge(n=0, m=2, theta=-0.2), Edge(n=1, m=2, theta=0.9)),
    )
    reduced, _ = eliminate_tree_phases(triangle)
    assert loop_sums(reduced).sums[0] == pytest.approx(loop_sums(triangle).sums[0])
    assert np.count_nonzero(np.abs(reduced.phases) > 1e-12) == 1


@given(
    N=st.integers(min_value=3, max_value=12),
    phi=st.floats(min_value=-np.pi, max_value=np.pi, allow_nan=False, allow_infinity=False),
)
@settings(max_examples=200, deadline=None)
def test_cycle_loop_sum(N, phi):
    """Test that the polygon's only loop carries N * phi (mod 2 pi)"""
    basis = loop_sums(generate_cycle(N, 1.0, phi))
    assert len(basis.sums) == 1
    expected = wrap_phase(N * phi)
    assert np.angle(np.exp(1j * (basis.sums[0] - expected))) == pytest.approx(0.0, abs=1e-9)


@given(seed=st.integers(min_value=0, max_value=10_000))
@settings(max_examples=200, deadline=None)
def test_loop_sums_gauge_invariant(seed):
    """Test that random gauges leave every loop sum unchanged"""
    graph = random_connected_graph(6, 0.6, rng_seed=seed)
    alphas = np.random.default_rng(seed).uniform(-np.pi, np.pi, graph.n_sites)
    gauged = apply_gauge(graph, GaugeTransform(alphas=tuple(alphas)))
    before, after = loop_sums(graph).sums, loop_sums(gauged).sums
    assert np.allclose(np.exp(1j * np.array(before)), np.exp(1j * np.array(after)), atol=1e-9)


def test_bipartite_detection():
    """Test two-coloring of even cycles and its absence on triangles"""
    ok, coloring = is_bipartite(generate_cycle(6))
    assert ok
    assert coloring[0] != coloring[1]
    assert is_bipartite(generate_cycle(5)) == (False, None)


def test_triangle_chain_layout():
    """Test site count, edges, control edges and marks of the sawtooth chain"""
    chain = generate_triangle_chain(3, theta_control=-np.pi / 2)
    assert chain.n_sites == 7
    assert chain.n_edges == 9
    assert chain.marks == {"S": 0, "E": 6}
    assert triangle_chain_control_edges(3) == [(1, 2), (3, 4), (5, 6)]
    for key in triangle_chain_control_edges(3):
        assert chain.oriented_phase(*key) == pytest.approx(-np.pi / 2)


def test_triangle_chain_loops():
    """Test that every triangle's loop 2i -> 2i+2 -> 2i+1 carries -theta"""
    chain = generate_triangle_chain(2, theta_control=0.7)
    for i in range(2):
        a, b, c = 2 * i, 2 * i + 2, 2 * i + 1
        total = chain.oriented_phase(a, b) + chain.oriented_phase(b, c) + chain.oriented_phase(c, a)
        assert total == pytest.approx(-0.7)


def test_path_generator():
    """Test path size and marks"""
    path = generate_path(5)
    assert path.n_edges == 4
    assert path.marks == {"S": 0, "E": 4}
    with pytest.raises(InvalidArgumentError):
        generate_path(1)


def test_watts_strogatz_connected_and_seeded():
    """Test that Watts-Strogatz graphs are connected and reproducible"""
    first = generate_watts_strogatz(32, 4, 0.2, rng_seed=11)
    second = generate_watts_strogatz(32, 4, 0.2, rng_seed=11)
    assert first == second
    assert first.n_sites == 32
    assert nx.is_connected(first.to_networkx())


def test_watts_strogatz_invalid_parameters():
    """Test parameter checks of the Watts-Strogatz generator"""
    with pytest.raises(InvalidArgumentError):
        generate_watts_strogatz(10, 3, 0.1, rng_seed=0)
    with pytest.raises(InvalidArgumentError):
        generate_watts_strogatz(10, 4, 1.5, rng_seed=0)


@pytest.mark.parametrize("N", [16, 32])
@pytest.mark.parametrize("seed", range(5))
def test_watts_strogatz_unrewired_lattice(N, seed):
    """Test that p = 0 leaves the ring lattice with degree k and N k / 2 edges"""
    graph = generate_watts_strogatz(N, 4, 0.0, rng_seed=seed)
    assert graph.n_edges == N * 4 // 2
    assert all(degree == 4 for _, degree in graph.to_networkx().degree())


@pytest.mark.parametrize("m", [1, 2, 3])
def test_barabasi_albert_edge_count(m):
    """Test the preferential-attachment edge count"""
    graph = generate_barabasi_albert(20, m, rng_seed=5)
    assert graph.n_edges == m * (20 - m) + m * (m - 1) // 2


def test_json_round_trip(phased_path):
    """Test that graphs survive JSON serialization"""
    assert PhasedGraph.from_json(phased_path.to_json()) == phased_path


def test_networkx_conversion(phased_path):
    """Test conversion to networkx and back"""
    assert PhasedGraph.from_networkx(phased_path.to_networkx()) == phased_path


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
