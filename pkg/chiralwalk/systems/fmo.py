"""
Seven-site Fenna-Matthews-Olson monomer with dephasing, recombination and trapping.

Sites 0..6 are the pigments (site 1 of the usual numbering is index 0).
Two extra sites follow: the recombination drain (index 7), fed from every
pigment at rate gamma, and the reaction-centre sink (index 8), fed from
pigment 3 (index 2) at rate tau. Energies are shifted by their mean and
converted from cm^-1 to rad/ps, so time is in ps.
"""

import json
from importlib import resources
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ValidationError, field_validator, model_validator

from chiralwalk.config import settings
from chiralwalk.errors import ConfigurationError
from chiralwalk.netgraph import Edge, EdgeKey, PhasedGraph
from chiralwalk.systems.base import ExperimentSystem, TrapChannel
from chiralwalk.utils.logger import logger

SPEED_OF_LIGHT_CM_PER_S = 2.99792458e10
# 1 cm^-1 = 2 pi c [cm/s] rad/s, expressed per ps
CM_INV_TO_RAD_PER_PS = 2.0 * np.pi * SPEED_OF_LIGHT_CM_PER_S * 1e-12

N_PIGMENTS = 7
START_SITE = 0
TRAP_SITE = 2

DEPHASING_RATE = 9.0
RECOMBINATION_RATE = 0.001
TRAPPING_RATE = 1.0

# Optimized phase sets in units of pi, 1-based pigment pairs
PHASE_TABLE_A1 = {
    (3, 4): 1.31484899,
    (4, 5): 1.66997830,
    (6, 7): 1.8406103,
    (2, 7): 1.2949616,
    (1, 6): 1.67543320,
    (1, 3): 0.04222214,
    (3, 6): 0.8761298,
}
PHASE_TABLE_A2 = {
    (3, 4): 1.58371001,
    (4, 5): 1.39551582,
    (6, 7): 0.1338368,
}


class FMOHamiltonianData(BaseModel):
    """Schema of the packaged Hamiltonian table"""

    units: str
    energies: List[float]
    couplings: List[List[float]]
    source: Optional[str] = None

    @field_validator("units")
    @classmethod
    def check_units(cls, v):
        if v != "cm-1":
            raise ValueError(f"Expected units 'cm-1', got '{v}'")
        return v

    @model_validator(mode="after")
    def check_shape(self):
        if len(self.energies) != N_PIGMENTS:
            raise ValueError(f"Expected {N_PIGMENTS} site energies, got {len(self.energies)}")
        couplings = np.asarray(self.couplings, dtype=float)
        if couplings.shape != (N_PIGMENTS, N_PIGMENTS):
            raise ValueError(f"Expected a {N_PIGMENTS}x{N_PIGMENTS} coupling table, got {couplings.shape}")
        if not np.allclose(couplings, couplings.T):
            raise ValueError("Coupling table is not symmetric")
        if np.any(np.diag(couplings) != 0):
            raise ValueError("Coupling table must have a zero diagonal")
        return self


def load_fmo_hamiltonian(payload: Optional[Dict] = None) -> FMOHamiltonianData:
    """Validate a table, or load the packaged one when none is given."""
    try:
        if payload is None:
            text = resources.files("chiralwalk.data").joinpath("fmo_hamiltonian.json").read_text()
            payload = json.loads(text)
        return FMOHamiltonianData.model_validate(payload)
    except (ValidationError, json.JSONDecodeError, OSError) as e:
        raise ConfigurationError(f"Invalid FMO Hamiltonian table: {e}") from e


def phase_table(table: Dict[tuple, float]) -> Dict[EdgeKey, float]:
    """Convert a 1-based table in units of pi into 0-based edge phases in radians."""
    return {(n - 1, m - 1): value * np.pi for (n, m), value in table.items()}


def build_fmo(
    hamiltonian_data: Optional[Dict] = None,
    dephasing: float = DEPHASING_RATE,
    recombination: float = RECOMBINATION_RATE,
    trapping: float = TRAPPING_RATE,
    horizon: float = None,
    grid_points: int = None,
) -> ExperimentSystem:
    """
    FMO system read out at the reaction-centre sink.

    Negative couplings enter the graph as magnitude |V| with reference phase pi.
    """
    data = load_fmo_hamiltonian(hamiltonian_data)
    couplings = np.asarray(data.couplings, dtype=float) * CM_INV_TO_RAD_PER_PS
    energies = np.asarray(data.energies, dtype=float)
    onsite = (energies - energies.mean()) * CM_INV_TO_RAD_PER_PS

    edges = []
    for n in range(N_PIGMENTS):
        for m in range(n + 1, N_PIGMENTS):
            V = couplings[n, m]
            if V != 0.0:
                edges.append(Edge(n=n, m=m, J=abs(V), theta=0.0 if V > 0 else np.pi))
    graph = PhasedGraph(n_sites=N_PIGMENTS, edges=tuple(edges), marks={"S": START_SITE, "E": TRAP_SITE})

    logger.debug(
        f"FMO Hamiltonian: {len(edges)} couplings, rates dephasing={dephasing}, "
        f"recombination={recombination}, trapping={trapping} /ps"
    )
    return ExperimentSystem(
        name="fmo",
        graph=graph,
        start_site=START_SITE,
        target_site=TRAP_SITE,
        onsite_energies=tuple(onsite.tolist()),
        dephasing=dephasing,
        channels=(
            TrapChannel(name="drain", sources=tuple((n, recombination) for n in range(N_PIGMENTS))),
            TrapChannel.single("sink", TRAP_SITE, trapping),
        ),
        readout="sink",
        horizon=horizon or settings.FMO_HORIZON,
        grid_points=grid_points or settings.GRID_POINTS,
        time_unit="ps",
    )
