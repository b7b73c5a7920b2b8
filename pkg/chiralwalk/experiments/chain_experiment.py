from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from chiralwalk.analytic import LinearFit, chain_scaling
from chiralwalk.config import settings
from chiralwalk.dynamics import transfer_probability, transport_speed
from chiralwalk.experiments.base import ExperimentConfig, ExperimentReport, OutputWriter, ratio
from chiralwalk.netgraph import triangle_chain_control_edges
from chiralwalk.phaseopt import Objective, ObjectiveKind, landscape_scan
from chiralwalk.systems.chain import build_triangle_chain
from chiralwalk.utils.logger import logger


class ChainConfig(ExperimentConfig):
    n: int = Field(8, ge=1, description="Number of triangles")
    thetas: List[float] = Field(default_factory=lambda: [0.0, -np.pi / 2])
    trap: bool = True
    trap_rate: float = Field(default_factory=lambda: settings.CHAIN_TRAP_RATE, ge=0.0)
    dephasing: float = Field(default_factory=lambda: settings.CHAIN_DEPHASING, ge=0.0)
    sweep_points: int = Field(0, ge=0, description="Phase sweep resolution over (-pi, pi]; 0 skips it")
    scaling_sizes: List[int] = Field(default_factory=list, description="Chain lengths for the scaling fit")
    scaling_theta: float = -np.pi / 2


class ChainPoint(BaseModel):
    theta: float
    tau_half: Optional[float]
    speed: Optional[float]


class ChainReport(ExperimentReport):
    experiment: str = "chain"
    n: int
    points: List[ChainPoint]
    speed_ratio: Optional[float] = Field(None, description="Speed at the last theta over the first")
    sweep: Dict[str, List[Optional[float]]] = Field(default_factory=dict)
    scaling: Optional[LinearFit] = None
    scaling_taus: List[Optional[float]] = Field(default_factory=list)


class ChainExperiment:
    """Half-arrival times along the triangle chain"""

    @staticmethod
    def run(config: ChainConfig) -> ChainReport:
        logger.info(f"Chain: n={config.n}, thetas={config.thetas}, trap={config.trap}")
        writer = OutputWriter("chain", config)
        grid = config.time_grid(settings.CHAIN_HORIZON)

        def system_for(n: int, theta: float):
            return build_triangle_chain(
                n, theta, with_trap=config.trap, trap_rate=config.trap_rate, dephasing=config.dephasing,
                horizon=grid[-1], grid_points=grid.size,
            )

        curves = {"t": grid}
        points = []
        for theta in config.thetas:
            system = system_for(config.n, theta)
            traj = system.run(grid)
            curves[f"theta={theta:.6g}"] = transfer_probability(traj, system.observable_site)
            tau = system.half_arrival_time(traj)
            points.append(ChainPoint(theta=theta, tau_half=tau, speed=transport_speed(tau)))
            logger.info(f"Chain n={config.n} theta={theta:.4f}: tau_1/2={tau}")
        writer.curves("chain_occupancy", curves)

        sweep: Dict[str, List[Optional[float]]] = {}
        if config.sweep_points:
            thetas = np.linspace(-np.pi, np.pi, config.sweep_points + 1)[1:]
            objective = Objective(kind=ObjectiveKind.HALF_ARRIVAL_TIME, direction="minimize")
            taus = landscape_scan(
                system_for(config.n, 0.0),
                triangle_chain_control_edges(config.n),
                thetas,
                objective,
                workers=config.workers,
            )
            writer.curves("chain_sweep", {"theta": thetas, "tau_half": taus})
            sweep = {
                "theta": thetas.tolist(),
                "tau_half": [float(x) if np.isfinite(x) else None for x in taus],
            }

        scaling = None
        scaling_taus: List[Optional[float]] = []
        if config.scaling_sizes:
            scaling_taus = [system_for(n, config.scaling_theta).half_arrival_time() for n in config.scaling_sizes]
            pairs = [(n, tau) for n, tau in zip(config.scaling_sizes, scaling_taus) if tau is not None]
            if len(pairs) >= 2:
                scaling = chain_scaling([n for n, _ in pairs], [tau for _, tau in pairs])
            writer.curves(
                "chain_scaling",
                {
                    "n": [n for n, _ in pairs],
                    "tau_half": [tau for _, tau in pairs],
                },
            )

        report = ChainReport(
            n=config.n,
            points=points,
            speed_ratio=ratio(points[-1].speed, points[0].speed) if len(points) > 1 else None,
            sweep=sweep,
            scaling=scaling,
            scaling_taus=scaling_taus,
        )
        return writer.finish(report)
