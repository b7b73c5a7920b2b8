from typing import List

import networkx as nx

from chiralwalk.config import settings
from chiralwalk.netgraph import EdgeKey, PhasedGraph, generate_barabasi_albert, generate_watts_strogatz
from chiralwalk.systems.base import ExperimentSystem, TrapChannel


def _transport_system(
    name: str,
    graph: PhasedGraph,
    start: int,
    target: int,
    sink_rate: float,
    horizon: float,
    grid_points: int,
) -> ExperimentSystem:
    marked = PhasedGraph(n_sites=graph.n_sites, edges=graph.edges, marks={"S": start, "E": target})
    return ExperimentSystem(
        name=name,
        graph=marked,
        start_site=start,
        target_site=target,
        channels=(TrapChannel.single("sink", target, sink_rate),),
        readout="sink",
        horizon=horizon or settings.WS_HORIZON,
        grid_points=grid_points or settings.GRID_POINTS,
    )


def build_ws_experiment(
    N: int = 32,
    k: int = 4,
    p: float = 0.2,
    seed: int = 0,
    sink_rate: float = 1.0,
    horizon: float = None,
    grid_points: int = None,
) -> ExperimentSystem:
    """
    Connected Watts-Strogatz graph with S = 0 and E = N/2 across the original ring.

    E feeds a sink at `sink_rate`, which is the read-out site.
    """
    graph = generate_watts_strogatz(N, k, p, rng_seed=seed)
    return _transport_system("watts_strogatz", graph, 0, N // 2, sink_rate, horizon, grid_points)


def build_ba_experiment(
    N: int = 32,
    m: int = 2,
    seed: int = 0,
    sink_rate: float = 1.0,
    horizon: float = None,
    grid_points: int = None,
) -> ExperimentSystem:
    """Barabasi-Albert graph with S = 0 and E the site farthest from S (lowest index on ties)."""
    graph = generate_barabasi_albert(N, m, rng_seed=seed)
    distances = nx.single_source_shortest_path_length(graph.to_networkx(), 0)
    farthest = max(distances.values())
    target = min(site for site, d in distances.items() if d == farthest)
    return _transport_system("barabasi_albert", graph, 0, target, sink_rate, horizon, grid_points)


def target_edges(system: ExperimentSystem) -> List[EdgeKey]:
    """Edges incident to the target site, the ones whose phases get optimized."""
    return system.graph.incident_edges(system.target_site)
