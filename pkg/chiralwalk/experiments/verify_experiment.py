from typing import Dict, List

from pydantic import Field

from chiralwalk.analytic import verify_oracles
from chiralwalk.experiments.base import ExperimentConfig, ExperimentReport, OutputWriter


class VerifyConfig(ExperimentConfig):
    even_sizes: List[int] = Field(default_factory=lambda: [4, 6, 8, 10])
    random_cases: int = Field(500, ge=0)


class VerifyReport(ExperimentReport):
    experiment: str = "verify"
    deviations: Dict[str, float]
    passed: bool


class VerifyExperiment:
    """Even-cycle suppression and polygon oracle checks with their worst deviations"""

    SUPPRESSION_TOL = 1e-10
    ORACLE_TOL = 1e-9

    @staticmethod
    def run(config: VerifyConfig) -> VerifyReport:
        writer = OutputWriter("verify", config)
        deviations = verify_oracles(
            even_sizes=config.even_sizes,
            n_random=config.random_cases,
            grid_points=config.grid_points,
            horizon=config.horizon or 20.0,
            rng_seed=config.seed,
        )
        passed = all(
            value <= (VerifyExperiment.ORACLE_TOL if key == "polygon_oracle" else VerifyExperiment.SUPPRESSION_TOL)
            for key, value in deviations.items()
        )
        return writer.finish(VerifyReport(deviations=deviations, passed=passed))
