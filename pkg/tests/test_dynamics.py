import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from pydantic import ValidationError
from scipy import integrate

from chiralwalk.dynamics import (
    DensityMatrix,
    HermitianOperator,
    JumpOperator,
    LindbladModel,
    Trajectory,
    evolve_lindblad,
    evolve_unitary,
    first_maximum,
    first_peak_index,
    half_arrival_time,
    hamiltonian_from_graph,
    sink_augmented_model,
    time_reverse,
    transfer_probability,
    transport_speed,
    unitary_propagator,
)
from chiralwalk.errors import DimensionError, InvalidArgumentError
from chiralwalk.netgraph import (
    GaugeTransform,
    apply_gauge,
    generate_cycle,
    random_bipartite_graph,
    random_connected_graph,
    random_tree,
)

GRID = np.linspace(0.0, 5.0, 101)


def _occupancies(graph, start=0, grid=GRID):
    return evolve_unitary(hamiltonian_from_graph(graph), start, grid).site_occupancies


def test_hamiltonian_entries():
    """Test H[n][m] = J exp(i theta) and its conjugate"""
    H = hamiltonian_from_graph(generate_cycle(3, 2.0, 0.4)).matrix
    assert H[0, 1] == pytest.approx(2.0 * np.exp(0.4j))
    assert H[1, 0] == pytest.approx(2.0 * np.exp(-0.4j))
    assert np.allclose(H, H.conj().T)


def test_onsite_energies():
    """Test that on-site energies go on the diagonal"""
    H = hamiltonian_from_graph(generate_cycle(3), onsite=[1.0, -2.0, 0.5]).matrix
    assert np.allclose(np.diag(H).real, [1.0, -2.0, 0.5])
    with pytest.raises(DimensionError):
        hamiltonian_from_graph(generate_cycle(3), onsite=[1.0])


def test_non_hermitian_rejected():
    """Test that non-Hermitian matrices are refused"""
    with pytest.raises(ValidationError):
        HermitianOperator(matrix=[[0, 1], [0, 0]])


def test_density_matrix_checks():
    """Test the trace and positivity checks on states"""
    with pytest.raises(ValidationError):
        DensityMatrix(matrix=np.eye(2))
    with pytest.raises(ValidationError):
        DensityMatrix(matrix=np.diag([1.5, -0.5]))
    rho = DensityMatrix.from_vector([1.0, 1.0j])
    assert np.trace(rho.matrix).real == pytest.approx(1.0)


def test_negative_rate_rejected():
    """Test that jump rates must be nonnegative"""
    with pytest.raises(ValidationError):
        JumpOperator.transition(2, 0, 1, -1.0)


def test_unitary_propagator_is_unitary():
    """Test exp(-iHt) U^dagger U = 1"""
    U = unitary_propagator(hamiltonian_from_graph(random_connected_graph(5, 0.7, rng_seed=2)), 1.3)
    assert np.allclose(U.conj().T @ U, np.eye(5), atol=1e-12)


def test_unitary_initial_condition():
    """Test that at t = 0 the walker sits on the start site"""
    traj = evolve_unitary(hamiltonian_from_graph(generate_cycle(5)), 2, GRID)
    assert np.allclose(traj.site_occupancies[0], np.eye(5)[2])
    assert np.allclose(traj.trace_total, 1.0, atol=1e-9)


def test_unitary_bad_inputs():
    """Test start-site and grid checks"""
    H = hamiltonian_from_graph(generate_cycle(4))
    with pytest.raises(InvalidArgumentError):
        evolve_unitary(H, 4, GRID)
    with pytest.raises(InvalidArgumentError):
        evolve_unitary(H, 0, [0.0, 2.0, 1.0])


@given(seed=st.integers(min_value=0, max_value=100_000))
@settings(max_examples=200, deadline=None)
def test_gauge_invariance(seed):
    """Test that gauge transformations leave all occupancies unchanged"""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    graph = random_connected_graph(n, 0.5, rng_seed=seed)
    gauge = GaugeTransform(alphas=tuple(rng.uniform(-np.pi, np.pi, n)))
    start = int(rng.integers(n))
    assert np.allclose(_occupancies(graph, start), _occupancies(apply_gauge(graph, gauge), start), atol=1e-9)


@given(seed=st.integers(min_value=0, max_value=100_000))
@settings(max_examples=200, deadline=None)
def test_tree_phase_insensitive(seed):
    """Test that phases on a tree do not change the dynamics"""
    tree = random_tree(int(np.random.default_rng(seed).integers(2, 9)), rng_seed=seed)
    achiral = tree.with_phases({key: 0.0 for key in tree.edge_keys()})
    assert np.allclose(_occupancies(tree), _occupancies(achiral), atol=1e-9)


@given(seed=st.integers(min_value=0, max_value=100_000))
@settings(max_examples=200, deadline=None)
def test_bipartite_symmetry(seed):
    """Test P_{S->E}(t) = P_{E->S}(t) on phased bipartite graphs"""
    rng = np.random.default_rng(seed)
    graph = random_bipartite_graph(int(rng.integers(1, 5)), int(rng.integers(1, 5)), 0.7, rng_seed=seed)
    S, E = rng.integers(graph.n_sites, size=2)
    forward = _occupancies(graph, int(S))[:, E]
    backward = _occupancies(graph, int(E))[:, S]
    assert np.allclose(forward, backward, atol=1e-9)


@given(seed=st.integers(min_value=0, max_value=100_000))
@settings(max_examples=200, deadline=None)
def test_time_reversal_identity(seed):
    """Test that the conjugated Hamiltonian carries S -> E like the original carries E -> S"""
    rng = np.random.default_rng(seed)
    graph = random_connected_graph(int(rng.integers(3, 9)), 0.6, rng_seed=seed)
    H = hamiltonian_from_graph(graph)
    S, E = (int(x) for x in rng.integers(graph.n_sites, size=2))
    reversed_walk = evolve_unitary(time_reverse(H), S, GRID).site_occupancies[:, E]
    backward = evolve_unitary(H, E, GRID).site_occupancies[:, S]
    assert np.allclose(reversed_walk, backward, atol=1e-9)


def test_sink_augmented_model_layout():
    """Test sink indices, dimension and jump count"""
    H = hamiltonian_from_graph(generate_cycle(4))
    model, sinks = sink_augmented_model(H, [("a", [(1, 0.5)]), ("b", [(2, 1.0), (3, 1.0)])], dephasing=0.2)
    assert sinks == {"a": 4, "b": 5}
    assert model.dim == 6
    assert len(model.jumps) == 4 + 3
    assert np.allclose(model.H.matrix[4:, :], 0.0)


def test_sink_augmented_model_bad_source():
    """Test that channel sources must be graph sites"""
    H = hamiltonian_from_graph(generate_cycle(4))
    with pytest.raises(InvalidArgumentError):
        sink_augmented_model(H, [("a", [(7, 1.0)])])


def test_lindblad_zero_rates_match_unitary():
    """Test that a model without active jumps reproduces the unitary walk"""
    H = hamiltonian_from_graph(random_connected_graph(5, 0.6, rng_seed=8))
    model = LindbladModel(H=H, jumps=(JumpOperator.transition(5, 0, 1, 0.0),))
    open_traj = evolve_lindblad(model, DensityMatrix.site(5, 0), GRID)
    closed = evolve_unitary(H, 0, GRID)
    assert np.allclose(open_traj.site_occupancies, closed.site_occupancies, atol=1e-7)


def test_lindblad_trace_and_monotone_sink():
    """Test trace conservation and a nondecreasing sink under dephasing and trapping"""
    H = hamiltonian_from_graph(generate_cycle(5))
    model, sinks = sink_augmented_model(H, [("sink", [(2, 1.0)])], dephasing=0.5)
    traj = evolve_lindblad(model, DensityMatrix.site(model.dim, 0), GRID)
    assert np.allclose(traj.trace_total, 1.0, atol=1e-7)
    assert np.all(np.diff(transfer_probability(traj, sinks["sink"])) >= -1e-12)


@given(seed=st.integers(min_value=0, max_value=100_000))
@settings(max_examples=200, deadline=None)
def test_gauge_invariance_open(seed):
    """Test that gauge transformations leave occupancies unchanged under dephasing and trapping"""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 7))
    graph = random_connected_graph(n, 0.5, rng_seed=seed)
    gauged = apply_gauge(graph, GaugeTransform(alphas=tuple(rng.uniform(-np.pi, np.pi, n))))
    target = int(rng.integers(n))
    rate, dephasing = (float(x) for x in rng.uniform(0.1, 1.5, size=2))

    def occupancies(g):
        model, _ = sink_augmented_model(hamiltonian_from_graph(g), [("sink", [(target, rate)])], dephasing)
        return evolve_lindblad(model, DensityMatrix.site(model.dim, 0), GRID).site_occupancies

    assert np.allclose(occupancies(graph), occupancies(gauged), atol=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_spectral_propagator_matches_ode(seed):
    """Test exp(-iHt) against a tightly integrated Schroedinger equation"""
    graph = random_connected_graph(6, 0.5, rng_seed=seed)
    H = hamiltonian_from_graph(graph)
    psi0 = np.eye(graph.n_sites, dtype=complex)[0]
    solution = integrate.solve_ivp(
        lambda t, psi: -1j * (H.matrix @ psi), (0.0, GRID[-1]), psi0,
        method="DOP853", t_eval=GRID, rtol=1e-12, atol=1e-12,
    )
    integrated = np.abs(solution.y.T) ** 2
    assert np.max(np.abs(evolve_unitary(H, 0, GRID).site_occupancies - integrated)) < 1e-7


def test_lindblad_grid_must_start_at_zero():
    """Test that Lindblad grids start at t = 0"""
    H = hamiltonian_from_graph(generate_cycle(3))
    model = LindbladModel(H=H)
    with pytest.raises(InvalidArgumentError):
        evolve_lindblad(model, DensityMatrix.site(3, 0), [0.5, 1.0])
    with pytest.raises(DimensionError):
        evolve_lindblad(model, DensityMatrix.site(4, 0), GRID)


def test_keep_states():
    """Test that full density matrices are kept on request"""
    H = hamiltonian_from_graph(generate_cycle(3))
    model, _ = sink_augmented_model(H, dephasing=1.0)
    traj = evolve_lindblad(model, DensityMatrix.site(3, 0), GRID, keep_states=True)
    assert traj.states.shape == (GRID.size, 3, 3)
    assert np.allclose(np.real(np.einsum("tii->ti", traj.states)), traj.site_occupancies, atol=1e-12)


def test_half_arrival_interpolation():
    """Test linear interpolation of the half-arrival crossing"""
    assert half_arrival_time([0.0, 0.4, 0.6], [0.0, 1.0, 2.0]) == pytest.approx(1.5)
    assert half_arrival_time([0.0, 0.1, 0.2], [0.0, 1.0, 2.0]) is None
    with pytest.raises(DimensionError):
        half_arrival_time([0.0, 1.0], [0.0, 1.0, 2.0])


def test_transport_speed():
    """Test nu = 1 / tau and its edge cases"""
    assert transport_speed(4.0) == pytest.approx(0.25)
    assert transport_speed(None) is None
    with pytest.raises(InvalidArgumentError):
        transport_speed(0.0)


def test_first_maximum_refined():
    """Test the parabolic refinement of the first maximum"""
    grid = np.linspace(0.0, 3.0, 31)
    peak = first_maximum(np.sin(grid), grid)
    assert not peak.boundary
    assert peak.time == pytest.approx(np.pi / 2, abs=1e-3)
    assert peak.value == pytest.approx(1.0, abs=1e-3)


def test_first_maximum_skips_rounding_ripples():
    """Test that sub-floor wiggles before the real rise are not taken as the first peak"""
    grid = np.linspace(0.0, 3.0, 301)
    series = 0.5 * np.sin(grid) ** 4
    series[1:3] = [2e-32, 1e-32]
    peak = first_maximum(series, grid)
    assert not peak.boundary
    assert peak.time == pytest.approx(np.pi / 2, abs=1e-3)
    assert peak.value == pytest.approx(0.5, abs=1e-4)


def test_first_maximum_relative_floor():
    """Test that a ripple far below an earlier maximum is skipped in favour of the next real peak"""
    grid = np.linspace(0.0, 6.0, 601)
    series = np.exp(-20.0 * grid)
    series[100:103] += [1e-5, 3e-5, 1e-5]
    series[300:] += 0.6 * np.sin((grid[300:] - 3.0) * np.pi / 2) ** 2
    assert first_peak_index(series, rel_floor=0.0) == 101
    peak = first_maximum(series, grid)
    assert peak.time == pytest.approx(4.0, abs=1e-3)
    assert peak.value == pytest.approx(0.6, abs=1e-4)


def test_first_maximum_boundary():
    """Test that monotone series report their last point"""
    grid = np.linspace(0.0, 1.0, 11)
    peak = first_maximum(grid, grid)
    assert peak.boundary
    assert peak.time == 1.0


def test_trajectory_csv(tmp_path):
    """Test the trajectory CSV header and row count"""
    traj = evolve_unitary(hamiltonian_from_graph(generate_cycle(3)), 0, GRID)
    path = traj.to_csv(tmp_path / "traj.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "t,site_0,site_1,site_2,trace"
    assert len(lines) == GRID.size + 1


def test_trajectory_json():
    """Test that a trajectory restored from JSON carries the same occupancies"""
    traj = evolve_unitary(hamiltonian_from_graph(generate_cycle(4, phi_per_edge=0.3)), 0, GRID)
    restored = Trajectory.from_json(traj.to_json())
    assert np.array_equal(restored.times, traj.times)
    assert np.array_equal(restored.site_occupancies, traj.site_occupancies)
    assert restored.states is None


def test_trajectory_shape_checks():
    """Test that malformed trajectories are refused"""
    with pytest.raises(ValidationError):
        Trajectory(times=[0.0, 1.0], site_occupancies=[[1.0]], trace_total=[1.0, 1.0])


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
