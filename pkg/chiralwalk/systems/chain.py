from chiralwalk.config import settings
from chiralwalk.errors import InvalidArgumentError
from chiralwalk.netgraph import generate_triangle_chain
from chiralwalk.systems.base import ExperimentSystem, TrapChannel


def build_triangle_chain(
    n: int = 8,
    theta: float = 0.0,
    with_trap: bool = True,
    trap_rate: float = None,
    dephasing: float = None,
    horizon: float = None,
    grid_points: int = None,
) -> ExperimentSystem:
    """
    Sawtooth chain of n corner-sharing triangles from S = 0 to E = 2n.

    All control edges carry theta; theta = -pi/2 is the enhancing sign. With
    a trap, E feeds a sink that is read out and every site dephases weakly;
    without dephasing the achiral chain keeps a dark component that holds the
    trapped population just under one half. The untrapped chain is unitary.
    """
    if n < 1:
        raise InvalidArgumentError(f"Chain needs at least one triangle, got {n}")
    graph = generate_triangle_chain(n, theta)
    trap_rate = settings.CHAIN_TRAP_RATE if trap_rate is None else trap_rate
    dephasing = settings.CHAIN_DEPHASING if dephasing is None else dephasing
    return ExperimentSystem(
        name="triangle_chain",
        graph=graph,
        start_site=graph.marks["S"],
        target_site=graph.marks["E"],
        dephasing=dephasing if with_trap else 0.0,
        channels=(TrapChannel.single("sink", graph.marks["E"], trap_rate),) if with_trap else (),
        readout="sink" if with_trap else None,
        horizon=horizon or settings.CHAIN_HORIZON,
        grid_points=grid_points or settings.GRID_POINTS,
    )
