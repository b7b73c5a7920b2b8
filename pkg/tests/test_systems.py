import networkx as nx
import numpy as np
import pytest
from pydantic import ValidationError

from chiralwalk.dynamics import first_maximum, hamiltonian_from_graph, transfer_probability
from chiralwalk.errors import ConfigurationError, InvalidArgumentError
from chiralwalk.netgraph import generate_path
from chiralwalk.systems.base import ExperimentSystem, TrapChannel
from chiralwalk.systems.chain import build_triangle_chain
from chiralwalk.systems.fmo import (
    CM_INV_TO_RAD_PER_PS,
    PHASE_TABLE_A1,
    build_fmo,
    load_fmo_hamiltonian,
    phase_table,
)
from chiralwalk.systems.smallworld import build_ba_experiment, build_ws_experiment, target_edges
from chiralwalk.systems.switch import build_switch, control_edge, switch_efficiency, switch_graph

GRID = np.linspace(0.0, 20.0, 801)


def _switch_curves(theta, arm_length=2):
    system = build_switch(theta, arm_length)
    traj = system.run(GRID)
    marks = system.graph.marks
    return transfer_probability(traj, marks["E"]), transfer_probability(traj, marks["F"])


# ---------------------------------------------------------------------------
# ExperimentSystem
# ---------------------------------------------------------------------------

def test_system_validates_sites():
    """Test start, target and channel site checks"""
    with pytest.raises(ValidationError):
        ExperimentSystem(name="bad", graph=generate_path(3), start_site=0, target_site=3, horizon=1.0)
    with pytest.raises(ValidationError):
        ExperimentSystem(
            name="bad",
            graph=generate_path(3),
            start_site=0,
            target_site=2,
            channels=(TrapChannel.single("sink", 5, 1.0),),
            horizon=1.0,
        )
    with pytest.raises(ValidationError):
        TrapChannel.single("sink", 0, -1.0)


def test_system_unknown_channel():
    """Test that sink lookups by unknown name fail"""
    system = build_triangle_chain(2)
    assert system.sink_index("sink") == system.graph.n_sites
    with pytest.raises(InvalidArgumentError):
        system.sink_index("drain")


def test_describe_round_trip():
    """Test that system descriptors restore the same system"""
    system = build_switch(0.4, with_traps=True)
    assert ExperimentSystem.from_description(system.describe()) == system


def test_phase_shifts_respect_reference():
    """Test that shifts add to the reference phase"""
    system = build_triangle_chain(1, theta=0.5)
    shifted = system.with_phase_shifts({(1, 2): 0.25})
    assert shifted.graph.oriented_phase(1, 2) == pytest.approx(0.75)
    assert shifted.graph.oriented_phase(2, 1) == pytest.approx(-0.75)


# ---------------------------------------------------------------------------
# Switch
# ---------------------------------------------------------------------------

def test_switch_layout():
    """Test switch marks and the control edge"""
    graph = switch_graph(0.3, arm_length=2)
    assert graph.n_sites == 9
    assert graph.marks == {"S": 0, "A": 2, "B": 3, "C": 4, "E": 6, "F": 8}
    assert graph.oriented_phase(*control_edge(2)) == pytest.approx(0.3)
    with pytest.raises(InvalidArgumentError):
        switch_graph(0.0, arm_length=0)


def test_achiral_switch_symmetric():
    """Test that without a phase E and F receive the same occupancy"""
    p_e, p_f = _switch_curves(0.0)
    assert np.allclose(p_e, p_f, atol=1e-9)


@pytest.mark.parametrize("theta", [np.pi / 2, 0.7, -1.2])
def test_switch_reflection(theta):
    """Test P_{S->E}(theta) = P_{S->F}(-theta)"""
    p_e, _ = _switch_curves(theta)
    _, p_f_reversed = _switch_curves(-theta)
    assert np.allclose(p_e, p_f_reversed, atol=1e-9)


def test_switch_routes_towards_e():
    """Test that positive theta raises the first maximum at E over the achiral switch"""
    chiral, _ = _switch_curves(np.pi / 2)
    achiral, _ = _switch_curves(0.0)
    assert first_maximum(chiral, GRID).value > first_maximum(achiral, GRID).value


def test_trapped_switch_conserves_trace():
    """Test trace conservation and monotone sinks in the trapped switch"""
    system = build_switch(np.pi / 2, with_traps=True)
    traj = system.run(GRID)
    assert np.allclose(traj.trace_total, 1.0, atol=1e-7)
    for name in ("sink_E", "sink_F"):
        assert np.all(np.diff(transfer_probability(traj, system.sink_index(name))) >= -1e-12)


def test_switch_efficiency_prefers_e():
    """Test that positive theta routes most of the walker into the E sink"""
    chiral = switch_efficiency(build_switch(np.pi / 2, with_traps=True), 200.0)
    reverse = switch_efficiency(build_switch(-np.pi / 2, with_traps=True), 200.0)
    assert chiral > reverse
    assert 0.0 < chiral < 1.0


def test_switch_efficiency_needs_traps():
    """Test that efficiency is only defined with traps"""
    with pytest.raises(InvalidArgumentError):
        switch_efficiency(build_switch(0.0), 10.0)


SWITCH_GRID = np.linspace(0.0, 30.0, 3001)


def _first_max_at_e(theta, arm_length):
    system = build_switch(theta, arm_length)
    series = transfer_probability(system.run(SWITCH_GRID), system.graph.marks["E"])
    return first_maximum(series, SWITCH_GRID).value


@pytest.mark.parametrize("arm_length", [2, 3, 4, 6])
def test_switch_enhancement_independent_of_arm(arm_length):
    """Test the +134% first maximum at E for theta = pi/2 on every arm length"""
    ratio = _first_max_at_e(np.pi / 2, arm_length) / _first_max_at_e(0.0, arm_length)
    assert ratio == pytest.approx(2.34, rel=0.03)


def test_switch_suppression():
    """Test that theta = -pi/2 removes about 91% of the first maximum at E"""
    reduction = 1.0 - _first_max_at_e(-np.pi / 2, 2) / _first_max_at_e(0.0, 2)
    assert reduction == pytest.approx(0.91, abs=0.03)


@pytest.mark.parametrize("arm_length", [1, 2, 3, 4])
def test_switch_efficiency_value(arm_length):
    """Test the fraction routed into the E sink at theta = pi/2"""
    system = build_switch(np.pi / 2, arm_length, with_traps=True)
    assert switch_efficiency(system, 200.0) == pytest.approx(0.814, abs=0.02)


def test_half_arrival_grid_converged():
    """Test that halving the time step moves tau_1/2 by less than 0.1%"""
    coarse = build_switch(np.pi / 2, with_traps=True, grid_points=2001).half_arrival_time(refine=False)
    fine = build_switch(np.pi / 2, with_traps=True, grid_points=4001).half_arrival_time(refine=False)
    assert coarse == pytest.approx(4.24, abs=0.05)
    assert coarse == pytest.approx(fine, rel=1e-3)


# ---------------------------------------------------------------------------
# Triangle chain
# ---------------------------------------------------------------------------

def test_chain_layout():
    """Test chain size, trap and readout"""
    system = build_triangle_chain(4, theta=-np.pi / 2)
    assert system.graph.n_sites == 9
    assert system.target_site == 8
    assert system.dim == 10
    assert system.readout == "sink"
    with pytest.raises(InvalidArgumentError):
        build_triangle_chain(0)


def test_chain_chiral_faster():
    """Test that theta = -pi/2 reaches the trap sooner than the achiral chain"""
    chiral = build_triangle_chain(3, theta=-np.pi / 2, horizon=60.0, grid_points=1201)
    achiral = build_triangle_chain(3, theta=0.0, horizon=60.0, grid_points=1201)
    tau_chiral = chiral.half_arrival_time()
    tau_achiral = achiral.half_arrival_time()
    assert tau_chiral is not None
    assert tau_achiral is None or tau_chiral < tau_achiral


def test_chain_acceptance_times():
    """Test tau_1/2 of the eight-triangle chain with and without the control phase"""
    tau_achiral = build_triangle_chain(8, theta=0.0).half_arrival_time()
    tau_chiral = build_triangle_chain(8, theta=-np.pi / 2).half_arrival_time()
    assert tau_achiral == pytest.approx(38.1, rel=0.02)
    assert tau_chiral == pytest.approx(5.2, rel=0.02)
    assert tau_achiral / tau_chiral == pytest.approx(7.33, rel=0.03)


def test_untrapped_chain_is_unitary():
    """Test that dropping the trap also drops the dephasing"""
    system = build_triangle_chain(3, with_trap=False)
    assert system.dephasing == 0.0
    assert system.channels == ()


def test_half_arrival_refinement():
    """Test that the refined crossing hits one half exactly"""
    system = build_triangle_chain(2, theta=-np.pi / 2, horizon=60.0, grid_points=601)
    tau = system.half_arrival_time()
    at_tau = transfer_probability(system.run([0.0, tau]), system.observable_site)[-1]
    assert at_tau == pytest.approx(0.5, abs=1e-9)
    coarse = system.half_arrival_time(refine=False)
    assert coarse == pytest.approx(tau, abs=0.1)


# ---------------------------------------------------------------------------
# FMO
# ---------------------------------------------------------------------------

def test_unit_conversion():
    """Test 1 cm^-1 in rad/ps"""
    assert CM_INV_TO_RAD_PER_PS == pytest.approx(0.188365, rel=1e-5)


def test_fmo_table_loads():
    """Test the packaged Hamiltonian table"""
    data = load_fmo_hamiltonian()
    couplings = np.asarray(data.couplings)
    assert data.units == "cm-1"
    assert couplings.shape == (7, 7)
    assert np.allclose(couplings, couplings.T)


def test_fmo_table_rejected():
    """Test that malformed tables raise configuration errors"""
    with pytest.raises(ConfigurationError):
        load_fmo_hamiltonian({"units": "cm-1", "energies": [0.0] * 6, "couplings": [[0.0] * 7] * 7})
    with pytest.raises(ConfigurationError):
        load_fmo_hamiltonian({"units": "eV", "energies": [0.0] * 7, "couplings": [[0.0] * 7] * 7})


def test_fmo_negative_couplings_keep_sign():
    """Test that negative couplings enter as magnitude with reference phase pi"""
    system = build_fmo()
    H = hamiltonian_from_graph(system.graph, system.onsite_energies).matrix
    table = load_fmo_hamiltonian()
    assert H[0, 1].real == pytest.approx(table.couplings[0][1] * CM_INV_TO_RAD_PER_PS)
    assert abs(H[0, 1].imag) < 1e-12
    assert np.trace(H).real == pytest.approx(0.0, abs=1e-9)


def test_fmo_layout():
    """Test drain and sink placement"""
    system = build_fmo()
    assert system.dim == 9
    assert system.sink_index("drain") == 7
    assert system.sink_index("sink") == 8
    assert system.observable_site == 8
    assert system.start_site == 0
    assert system.time_unit == "ps"


def test_fmo_open_dynamics():
    """Test trace conservation and monotone sink and drain"""
    system = build_fmo(horizon=2.0, grid_points=201)
    traj = system.run()
    assert np.allclose(traj.trace_total, 1.0, atol=1e-7)
    for index in (7, 8):
        assert np.all(np.diff(transfer_probability(traj, index)) >= -1e-10)


def test_fmo_zero_rates_unitary():
    """Test that all-zero rates leave a trace-preserving unitary walk with empty sinks"""
    system = build_fmo(dephasing=0.0, recombination=0.0, trapping=0.0, horizon=2.0, grid_points=101)
    traj = system.run()
    assert np.allclose(traj.trace_total, 1.0, atol=1e-9)
    assert np.allclose(traj.site_occupancies[:, 7:], 0.0, atol=1e-10)


def test_phase_table_conversion():
    """Test 1-based pairs in units of pi to 0-based radians"""
    phases = phase_table(PHASE_TABLE_A1)
    assert (2, 3) in phases
    assert phases[(2, 3)] == pytest.approx(1.31484899 * np.pi)
    assert all(n < m for n, m in phases)


def test_fmo_phase_table_edges_exist():
    """Test that every tabulated phase sits on an FMO coupling"""
    system = build_fmo()
    for n, m in phase_table(PHASE_TABLE_A1):
        assert system.graph.has_edge(n, m)


# ---------------------------------------------------------------------------
# Random networks
# ---------------------------------------------------------------------------

def test_ws_experiment_layout():
    """Test S = 0, E = N/2 and the sink on E"""
    system = build_ws_experiment(N=16, k=4, p=0.2, seed=3)
    assert system.start_site == 0
    assert system.target_site == 8
    assert system.channels[0].sources == ((8, 1.0),)
    assert all(8 in key for key in target_edges(system))
    assert len(target_edges(system)) >= 1


def test_ws_experiment_deterministic():
    """Test that the same seed gives the same graph and trajectory"""
    first = build_ws_experiment(N=16, seed=4, horizon=10.0, grid_points=101)
    second = build_ws_experiment(N=16, seed=4, horizon=10.0, grid_points=101)
    assert first == second
    assert np.array_equal(first.run().site_occupancies, second.run().site_occupancies)


def test_ba_target_is_farthest():
    """Test that the BA target maximizes the distance from S"""
    system = build_ba_experiment(N=20, m=1, seed=2)
    distances = nx.single_source_shortest_path_length(system.graph.to_networkx(), 0)
    assert distances[system.target_site] == max(distances.values())


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
