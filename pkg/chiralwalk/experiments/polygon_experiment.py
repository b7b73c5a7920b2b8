from typing import List

import numpy as np
from pydantic import Field

from chiralwalk.analytic import PolygonSpec, polygon_numeric_stp, polygon_spectrum, polygon_stp
from chiralwalk.config import settings
from chiralwalk.experiments.base import ExperimentConfig, ExperimentReport, OutputWriter
from chiralwalk.utils.logger import logger


class PolygonConfig(ExperimentConfig):
    N: int = Field(4, ge=3)
    phi: float = Field(np.pi / 4, description="Per-edge phase; the loop carries N * phi")
    S: int = Field(0, ge=0)
    E: int = Field(2, ge=0)


class PolygonReport(ExperimentReport):
    experiment: str = "polygon"
    N: int
    loop_phase: float
    spectrum: List[float]
    max_deviation: float = Field(..., description="Closed form versus spectral propagator")
    max_probability: float


class PolygonExperiment:
    """Closed-form polygon transfer probability overlaid on the numerical one"""

    @staticmethod
    def run(config: PolygonConfig) -> PolygonReport:
        spec = PolygonSpec(N=config.N, phi=config.phi, S=config.S, E=config.E)
        writer = OutputWriter("polygon", config)
        grid = config.time_grid(settings.SWITCH_HORIZON)

        analytic = polygon_stp(spec, grid)
        numeric = polygon_numeric_stp(spec, grid)
        writer.curves("polygon_overlay", {"t": grid, "analytic": analytic, "numeric": numeric})

        report = PolygonReport(
            N=spec.N,
            loop_phase=spec.loop_phase,
            spectrum=polygon_spectrum(spec),
            max_deviation=float(np.max(np.abs(analytic - numeric))),
            max_probability=float(np.max(numeric)),
        )
        logger.info(f"Polygon N={spec.N}, loop phase {spec.loop_phase:.4f}: deviation {report.max_deviation:.2e}")
        return writer.finish(report)
