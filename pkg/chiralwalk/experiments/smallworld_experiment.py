"""
Ensembles of random transport networks with phases optimized next to the sink.

For each realization the achiral half-arrival time tau_QW is found first;
the phases on the edges incident to the target are then tuned to maximize
the sink occupancy at tau_QW, and the chiral half-arrival time is measured
on the tuned network. Raising the occupancy at tau_QW above 1/2 moves the
crossing earlier, so no realization gets slower.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from chiralwalk.config import settings
from chiralwalk.experiments.base import ExperimentConfig, ExperimentReport, OutputWriter
from chiralwalk.netgraph import EdgeKey
from chiralwalk.phaseopt import Objective, ObjectiveKind, optimize
from chiralwalk.systems.base import ExperimentSystem
from chiralwalk.systems.smallworld import build_ba_experiment, build_ws_experiment, target_edges
from chiralwalk.utils.logger import logger

FULL_SCALE_REALIZATIONS = 200
MAX_HORIZON_DOUBLINGS = 5


class EnsembleConfig(ExperimentConfig):
    N: int = Field(32, ge=4)
    realizations: int = Field(20, ge=1)
    full_scale: bool = Field(False, description=f"Run {FULL_SCALE_REALIZATIONS} realizations")
    restarts: int = Field(8, ge=1)
    sink_rate: float = Field(1.0, ge=0.0)

    @property
    def n_realizations(self) -> int:
        return FULL_SCALE_REALIZATIONS if self.full_scale else self.realizations


class WSConfig(EnsembleConfig):
    k: int = Field(4, ge=2)
    p_values: List[float] = Field(default_factory=lambda: [0.2])


class BAConfig(EnsembleConfig):
    m: int = Field(2, ge=1)


class Realization(BaseModel):
    p: Optional[float] = None
    index: int
    graph_seed: int
    target: int
    edges: List[EdgeKey]
    phases: List[float]
    horizon: float = Field(..., description="Horizon at which tau_achiral was found")
    tau_achiral: float
    tau_chiral: float
    reduction: float = Field(..., description="(tau_achiral - tau_chiral) / tau_achiral")


class EnsembleSummary(BaseModel):
    p: Optional[float] = None
    realizations: int
    extended: int = Field(0, description="Realizations that needed a longer horizon")
    skipped: int = Field(..., description="Realizations that never reached 1/2")
    mean_reduction: Optional[float]
    min_reduction: Optional[float]
    max_reduction: Optional[float]


class EnsembleReport(ExperimentReport):
    summaries: List[EnsembleSummary]
    rows: List[Realization]


def _seeds(master: int, count: int) -> List[tuple]:
    """(graph seed, optimizer seed) pairs from independent child streams of the master seed."""
    children = np.random.SeedSequence(master).spawn(count)
    return [tuple(int(x) for x in child.generate_state(2)) for child in children]


def reach_half(
    system: ExperimentSystem, max_doublings: int = MAX_HORIZON_DOUBLINGS
) -> Tuple[ExperimentSystem, Optional[float]]:
    """
    Achiral half-arrival time, doubling the horizon until the sink reaches 1/2.

    Returns the system at the horizon that worked together with tau, or
    tau = None when 2**max_doublings times the horizon still falls short.
    """
    for _ in range(max_doublings + 1):
        tau = system.half_arrival_time()
        if tau is not None:
            return system, tau
        logger.debug(f"'{system.name}' below 1/2 at t = {system.horizon:g}; doubling the horizon")
        system = system.model_copy(update={"horizon": 2.0 * system.horizon})
    return system, None


def _optimize_realization(
    system: ExperimentSystem,
    index: int,
    graph_seed: int,
    opt_seed: int,
    restarts: int,
    p: Optional[float],
) -> Optional[Realization]:
    base_horizon = system.horizon
    system, tau_qw = reach_half(system)
    if tau_qw is None:
        logger.error(
            f"Realization {index} (seed {graph_seed}) never reaches half occupancy within "
            f"t = {system.horizon / 2:g}; skipped"
        )
        return None
    if system.horizon > base_horizon:
        logger.info(f"Realization {index}: horizon extended to {system.horizon:g}, tau_1/2 = {tau_qw:.4f}")

    edges = target_edges(system)
    objective = Objective(kind=ObjectiveKind.OCCUPANCY_AT_TIME, direction="maximize", time=tau_qw)
    result = optimize(system, edges, objective, restarts=restarts, rng_seed=opt_seed, workers=1)
    tuned = system.with_phase_shifts(dict(zip(result.edges, result.phases)))
    tau_cqw = tuned.half_arrival_time()
    if tau_cqw is None or result.objective >= 0.5:
        # sink occupancy is monotone, so reaching 1/2 by tau_qw bounds the crossing
        tau_cqw = tau_qw if tau_cqw is None else min(tau_cqw, tau_qw)

    logger.debug(f"Realization {index}: tau {tau_qw:.4f} -> {tau_cqw:.4f}")
    return Realization(
        p=p,
        index=index,
        graph_seed=graph_seed,
        target=system.target_site,
        edges=result.edges,
        phases=result.phases,
        horizon=system.horizon,
        tau_achiral=tau_qw,
        tau_chiral=tau_cqw,
        reduction=(tau_qw - tau_cqw) / tau_qw,
    )


def _summarize(p: Optional[float], rows: List[Realization], total: int, base_horizon: float) -> EnsembleSummary:
    reductions = np.array([row.reduction for row in rows])
    skipped = total - len(rows)
    if skipped:
        logger.warning(f"{skipped} of {total} realizations never reached 1/2 and are left out of the summary")
    return EnsembleSummary(
        p=p,
        realizations=len(rows),
        extended=sum(row.horizon > base_horizon for row in rows),
        skipped=skipped,
        mean_reduction=float(reductions.mean()) if rows else None,
        min_reduction=float(reductions.min()) if rows else None,
        max_reduction=float(reductions.max()) if rows else None,
    )


def run_ensemble(
    name: str,
    config: EnsembleConfig,
    builder: Callable[[int, int], ExperimentSystem],
    p: Optional[float] = None,
    seed_offset: int = 0,
) -> List[Optional[Realization]]:
    """Build and optimize every realization; `builder(index, graph_seed)` returns its system."""
    count = config.n_realizations
    seeds = _seeds(config.seed + seed_offset, count)

    def task(index: int) -> Optional[Realization]:
        graph_seed, opt_seed = seeds[index]
        system = builder(index, graph_seed)
        return _optimize_realization(system, index, graph_seed, opt_seed, config.restarts, p)

    logger.info(f"{name}: {count} realizations, restarts={config.restarts}, workers={config.workers}")
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(task, range(count)))
    return [task(index) for index in range(count)]


def _write_rows(writer: OutputWriter, name: str, rows: List[Realization]) -> None:
    writer.curves(
        name,
        {
            "p": [np.nan if row.p is None else row.p for row in rows],
            "index": [row.index for row in rows],
            "horizon": [row.horizon for row in rows],
            "tau_achiral": [row.tau_achiral for row in rows],
            "tau_chiral": [row.tau_chiral for row in rows],
            "reduction": [row.reduction for row in rows],
        },
    )


class WSExperiment:
    """Watts-Strogatz ensemble over the rewiring probabilities in the config"""

    @staticmethod
    def run(config: WSConfig) -> EnsembleReport:
        writer = OutputWriter("ws", config)
        grid = config.time_grid(settings.WS_HORIZON)
        summaries, rows = [], []
        for offset, p in enumerate(config.p_values):
            def builder(index: int, graph_seed: int, p=p) -> ExperimentSystem:
                return build_ws_experiment(
                    config.N, config.k, p, seed=graph_seed, sink_rate=config.sink_rate,
                    horizon=grid[-1], grid_points=grid.size,
                )

            results = run_ensemble("Watts-Strogatz", config, builder, p=p, seed_offset=offset)
            kept = [row for row in results if row is not None]
            summaries.append(_summarize(p, kept, len(results), grid[-1]))
            rows.extend(kept)
            logger.info(f"Watts-Strogatz p={p}: mean reduction {summaries[-1].mean_reduction}")

        _write_rows(writer, "ws_realizations", rows)
        return writer.finish(EnsembleReport(experiment="ws", summaries=summaries, rows=rows))


class BAExperiment:
    """Barabasi-Albert ensemble with the sink on the site farthest from the start"""

    @staticmethod
    def run(config: BAConfig) -> EnsembleReport:
        writer = OutputWriter("ba", config)
        grid = config.time_grid(settings.WS_HORIZON)

        def builder(index: int, graph_seed: int) -> ExperimentSystem:
            return build_ba_experiment(
                config.N, config.m, seed=graph_seed, sink_rate=config.sink_rate,
                horizon=grid[-1], grid_points=grid.size,
            )

        results = run_ensemble("Barabasi-Albert", config, builder)
        kept = [row for row in results if row is not None]
        summary = _summarize(None, kept, len(results), grid[-1])
        logger.info(f"Barabasi-Albert: mean reduction {summary.mean_reduction}")

        _write_rows(writer, "ba_realizations", kept)
        return writer.finish(EnsembleReport(experiment="ba", summaries=[summary], rows=kept))
