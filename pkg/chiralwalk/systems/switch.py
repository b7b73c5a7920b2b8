"""
The quantum switch: an input wire into a triangle junction whose control edge
carries the tunable phase, with one output wire hanging off each of the two
remaining triangle corners.

Site layout for arm length a (sites per wire):

    S = 0 - 1 - ... - (a-1) - A
                              | \\
                              B - C        control edge (B, C)
                              |   |
                            E arm F arm

A = a, B = a+1, C = a+2, the E wire continues from B and the F wire from C.
Mirroring B <-> C maps theta to -theta, so P_{S->E}(theta) = P_{S->F}(-theta).
Positive theta routes towards E.
"""

from typing import List, Sequence

import numpy as np

from chiralwalk.config import settings
from chiralwalk.dynamics import transfer_probability
from chiralwalk.errors import InvalidArgumentError
from chiralwalk.netgraph import Edge, EdgeKey, PhasedGraph
from chiralwalk.systems.base import ExperimentSystem, TrapChannel
from chiralwalk.utils.logger import logger


def switch_graph(theta: float = 0.0, arm_length: int = 2, J: float = 1.0) -> PhasedGraph:
    if arm_length < 1:
        raise InvalidArgumentError(f"Switch arms need at least one site, got {arm_length}")
    a = arm_length
    A, B, C = a, a + 1, a + 2
    e_arm = list(range(a + 3, 2 * a + 3))
    f_arm = list(range(2 * a + 3, 3 * a + 3))

    pairs = [(i, i + 1) for i in range(a)]  # input wire ending in A
    pairs += [(A, B), (A, C)]
    pairs += list(zip([B] + e_arm[:-1], e_arm))
    pairs += list(zip([C] + f_arm[:-1], f_arm))

    edges = [Edge(n=n, m=m, J=J) for n, m in pairs]
    edges.append(Edge(n=B, m=C, J=J, theta=theta))
    edges.sort(key=lambda e: e.key)
    return PhasedGraph(
        n_sites=3 * a + 3,
        edges=tuple(edges),
        marks={"S": 0, "A": A, "B": B, "C": C, "E": e_arm[-1], "F": f_arm[-1]},
    )


def control_edge(arm_length: int = 2) -> EdgeKey:
    return (arm_length + 1, arm_length + 2)


def build_switch(
    theta: float = 0.0,
    arm_length: int = 2,
    with_traps: bool = False,
    trap_rate: float = None,
    horizon: float = None,
    grid_points: int = None,
) -> ExperimentSystem:
    """
    Switch system; with traps, E and F each feed their own sink and the E sink is read out.

    Args:
        theta: Phase on the control edge
        arm_length: Sites per wire (input, E and F arms)
        with_traps: Attach sinks to E and F
        trap_rate: Sink absorption rate (defaults to settings.SWITCH_TRAP_RATE)
        horizon: Final time in units of 1/J

    Returns:
        ExperimentSystem starting at S and targeting E
    """
    graph = switch_graph(theta, arm_length)
    trap_rate = settings.SWITCH_TRAP_RATE if trap_rate is None else trap_rate
    channels = ()
    if with_traps:
        channels = (
            TrapChannel.single("sink_E", graph.marks["E"], trap_rate),
            TrapChannel.single("sink_F", graph.marks["F"], trap_rate),
        )
    return ExperimentSystem(
        name="switch",
        graph=graph,
        start_site=graph.marks["S"],
        target_site=graph.marks["E"],
        channels=channels,
        readout="sink_E" if with_traps else None,
        horizon=horizon or settings.SWITCH_HORIZON,
        grid_points=grid_points or settings.GRID_POINTS,
    )


def switch_efficiency(system: ExperimentSystem, horizon: float) -> float:
    """Occupancy of the E sink at a long time, i.e. the fraction routed to E."""
    if system.readout != "sink_E":
        raise InvalidArgumentError("Efficiency needs a switch built with traps")
    traj = system.run([0.0, horizon])
    return float(transfer_probability(traj, system.sink_index("sink_E"))[-1])


def trap_rate_sensitivity(
    rates: Sequence[float],
    theta: float = np.pi / 2,
    arm_length: int = 2,
    horizon: float = None,
) -> List[float]:
    """Efficiency at the given control phase for each trap rate."""
    horizon = horizon or 10.0 * settings.SWITCH_HORIZON
    values = []
    for rate in rates:
        system = build_switch(theta, arm_length, with_traps=True, trap_rate=rate)
        values.append(switch_efficiency(system, horizon))
    logger.info(f"Switch efficiency at theta={theta:.4f} over trap rates {list(rates)}: {values}")
    return values
