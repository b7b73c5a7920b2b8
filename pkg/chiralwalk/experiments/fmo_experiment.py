from typing import List, Literal, Optional

import numpy as np
from pydantic import Field

from chiralwalk.config import settings
from chiralwalk.dynamics import transfer_probability, transport_speed
from chiralwalk.experiments.base import ExperimentConfig, ExperimentReport, OutputWriter, ratio
from chiralwalk.netgraph import EdgeKey
from chiralwalk.phaseopt import Objective, ObjectiveKind, OptimizationReport, optimize
from chiralwalk.systems.fmo import (
    DEPHASING_RATE,
    PHASE_TABLE_A1,
    PHASE_TABLE_A2,
    RECOMBINATION_RATE,
    TRAPPING_RATE,
    build_fmo,
    phase_table,
)
from chiralwalk.utils.logger import logger

PHASE_TABLES = {"A1": PHASE_TABLE_A1, "A2": PHASE_TABLE_A2}


class FMOConfig(ExperimentConfig):
    phases: Literal["A1", "A2", "none"] = "A1"
    optimize: bool = Field(False, description="Refine the phases by minimizing tau_1/2, seeded with the table")
    restarts: int = Field(8, ge=1)
    dephasing: float = Field(DEPHASING_RATE, ge=0.0)
    recombination: float = Field(RECOMBINATION_RATE, ge=0.0)
    trapping: float = Field(TRAPPING_RATE, ge=0.0)


class FMOReport(ExperimentReport):
    experiment: str = "fmo"
    phases: str
    edges: List[EdgeKey]
    applied_phases: List[float]
    tau_achiral: Optional[float]
    tau_chiral: Optional[float]
    speed_enhancement_percent: Optional[float] = Field(None, description="100 (nu_chiral / nu_achiral - 1)")
    occupancy_gain_percent: Optional[float] = Field(
        None, description="Sink occupancy gain at the achiral tau_1/2, relative to 1/2"
    )
    final_trace_deviation: float
    optimization: Optional[OptimizationReport] = None


class FMOExperiment:
    """Sink arrival in the FMO monomer with and without a phase set"""

    @staticmethod
    def run(config: FMOConfig) -> FMOReport:
        logger.info(f"FMO: phases={config.phases}, optimize={config.optimize}")
        writer = OutputWriter("fmo", config)
        grid = config.time_grid(settings.FMO_HORIZON)
        system = build_fmo(
            dephasing=config.dephasing,
            recombination=config.recombination,
            trapping=config.trapping,
            horizon=grid[-1],
            grid_points=grid.size,
        )

        shifts = phase_table(PHASE_TABLES[config.phases]) if config.phases != "none" else {}
        edges = list(shifts)
        values = [float(np.angle(np.exp(1j * v))) for v in shifts.values()]

        optimization = None
        if config.optimize:
            if not edges:
                edges = system.graph.edge_keys()
                values = [0.0] * len(edges)
            optimization = optimize(
                system,
                edges,
                Objective(kind=ObjectiveKind.HALF_ARRIVAL_TIME, direction="minimize"),
                restarts=config.restarts,
                rng_seed=config.seed,
                seeds=[values] if any(values) else (),
                workers=config.workers,
            )
            edges, values = optimization.edges, optimization.phases

        chiral = system.with_phase_shifts(dict(zip(edges, values))) if edges else system
        baseline_traj = system.run(grid)
        chiral_traj = chiral.run(grid)
        tau_achiral = system.half_arrival_time(baseline_traj)
        tau_chiral = chiral.half_arrival_time(chiral_traj)

        sink = system.observable_site
        p_achiral = transfer_probability(baseline_traj, sink)
        p_chiral = transfer_probability(chiral_traj, sink)
        writer.curves(
            "fmo_sink",
            {
                "t": grid,
                "achiral": p_achiral,
                "chiral": p_chiral,
                "difference": p_chiral - p_achiral,
                "drain_achiral": transfer_probability(baseline_traj, system.sink_index("drain")),
            },
        )
        writer.trajectory("fmo_chiral_trajectory", chiral_traj)

        speed_gain = ratio(transport_speed(tau_chiral), transport_speed(tau_achiral))
        occupancy_gain = None
        if tau_achiral is not None:
            at_tau = float(transfer_probability(chiral.run([0.0, tau_achiral]), sink)[-1])
            occupancy_gain = 100.0 * (at_tau - 0.5) / 0.5

        report = FMOReport(
            phases=config.phases,
            edges=edges,
            applied_phases=values,
            tau_achiral=tau_achiral,
            tau_chiral=tau_chiral,
            speed_enhancement_percent=None if speed_gain is None else 100.0 * (speed_gain - 1.0),
            occupancy_gain_percent=occupancy_gain,
            final_trace_deviation=float(np.max(np.abs(chiral_traj.trace_total - 1.0))),
            optimization=optimization,
        )
        logger.info(
            f"FMO: tau achiral={tau_achiral}, chiral={tau_chiral}, "
            f"speed enhancement={report.speed_enhancement_percent}%"
        )
        return writer.finish(report)
