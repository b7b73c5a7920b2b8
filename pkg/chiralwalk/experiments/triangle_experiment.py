from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from chiralwalk.analytic import (
    TrianglePeak,
    optimal_triangle_phase,
    triangle_analytic_peak,
    triangle_curve,
    triangle_theta_scan,
)
from chiralwalk.experiments.base import ExperimentConfig, ExperimentReport, OutputWriter
from chiralwalk.utils.logger import logger

TRIANGLE_HORIZON = 10.0


class TriangleConfig(ExperimentConfig):
    J12: float = Field(1.0, gt=0.0)
    J23: float = Field(1.3, gt=0.0)
    J13: float = Field(0.5, gt=0.0)
    thetas: List[float] = Field(default_factory=lambda: [0.0, np.pi / 2, -np.pi / 2])
    scan_points: int = Field(181, ge=2)
    scan_time: Optional[float] = Field(None, gt=0.0, description="Defaults to the achiral first-peak time")
    find_optimum: bool = True


class TriangleCurvePeak(BaseModel):
    theta: float
    peak: TrianglePeak


class TriangleReport(ExperimentReport):
    experiment: str = "triangle"
    peaks: List[TriangleCurvePeak]
    scan_time: float
    optimal_theta: Optional[float] = None
    optimal_peak: Optional[TrianglePeak] = None


class TriangleExperiment:
    """Transfer 1 -> 2 on an inhomogeneous triangle as the loop phase varies"""

    @staticmethod
    def run(config: TriangleConfig) -> TriangleReport:
        J = (config.J12, config.J23, config.J13)
        logger.info(f"Triangle: J12={J[0]}, J23={J[1]}, J13={J[2]}")
        writer = OutputWriter("triangle", config)
        grid = config.time_grid(TRIANGLE_HORIZON)

        curves = {"t": grid}
        peaks = []
        for theta in config.thetas:
            curves[f"theta={theta:.6g}"] = triangle_curve(*J, theta, grid)
            peaks.append(TriangleCurvePeak(theta=theta, peak=triangle_analytic_peak(*J, theta)))
        writer.curves("triangle_curves", curves)

        scan_time = config.scan_time or triangle_analytic_peak(*J, 0.0).time
        thetas = np.linspace(-np.pi, np.pi, config.scan_points + 1)[1:]
        writer.curves("triangle_theta_scan", {"theta": thetas, "P_12": triangle_theta_scan(*J, scan_time, thetas)})

        optimal_theta = optimal_peak = None
        if config.find_optimum:
            optimal_theta, optimal_peak = optimal_triangle_phase(*J)
            logger.info(f"Triangle: best loop phase {optimal_theta:.4f}, peak {optimal_peak.probability:.4f}")

        report = TriangleReport(
            peaks=peaks,
            scan_time=scan_time,
            optimal_theta=optimal_theta,
            optimal_peak=optimal_peak,
        )
        return writer.finish(report)
