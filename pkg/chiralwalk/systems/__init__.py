"""Builders for the experimental systems"""

from .base import ExperimentSystem, TrapChannel
from .chain import build_triangle_chain
from .fmo import build_fmo
from .ion import IonModel, build_ion_walk, ion_coupling
from .smallworld import build_ba_experiment, build_ws_experiment
from .switch import build_switch

__all__ = [
    "ExperimentSystem",
    "TrapChannel",
    "build_switch",
    "build_triangle_chain",
    "build_fmo",
    "build_ws_experiment",
    "build_ba_experiment",
    "IonModel",
    "build_ion_walk",
    "ion_coupling",
]
