from chiralwalk.experiments.base import ExperimentConfig, ExperimentReport
from chiralwalk.experiments.chain_experiment import ChainConfig, ChainExperiment
from chiralwalk.experiments.fmo_experiment import FMOConfig, FMOExperiment
from chiralwalk.experiments.ion_experiment import IonConfig, IonExperiment
from chiralwalk.experiments.polygon_experiment import PolygonConfig, PolygonExperiment
from chiralwalk.experiments.smallworld_experiment import BAConfig, BAExperiment, WSConfig, WSExperiment
from chiralwalk.experiments.switch_experiment import SwitchConfig, SwitchExperiment
from chiralwalk.experiments.triangle_experiment import TriangleConfig, TriangleExperiment
from chiralwalk.experiments.verify_experiment import VerifyConfig, VerifyExperiment

# name -> (config model, runner)
EXPERIMENTS = {
    "switch": (SwitchConfig, SwitchExperiment),
    "chain": (ChainConfig, ChainExperiment),
    "polygon": (PolygonConfig, PolygonExperiment),
    "fmo": (FMOConfig, FMOExperiment),
    "ws": (WSConfig, WSExperiment),
    "ba": (BAConfig, BAExperiment),
    "ion": (IonConfig, IonExperiment),
    "triangle": (TriangleConfig, TriangleExperiment),
    "verify": (VerifyConfig, VerifyExperiment),
}

__all__ = ["EXPERIMENTS", "ExperimentConfig", "ExperimentReport"] + [
    cls.__name__ for pair in EXPERIMENTS.values() for cls in pair
]
