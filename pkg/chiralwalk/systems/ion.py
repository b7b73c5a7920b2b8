"""
Four-site chiral walk encoded in three trapped-ion spins.

The spin-spin Hamiltonian J_COM (s1 s2 + s2 s3 + s1 s3) + J_Br s1 s3, with
s = cos(phi) sigma_x + sin(phi) sigma_y, flips spins in pairs and so
preserves the odd-parity sector {up-down-down, down-up-down,
down-down-up, up-up-up}. Restricted to it, walk sites 1..3 couple with
real strengths and the hopping into site n from site 4 carries an extra
exp(-2i phi), so H[n][4] holds the phase.
"""

from functools import reduce
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from chiralwalk.dynamics import HermitianOperator
from chiralwalk.errors import InvalidArgumentError, NumericalError
from chiralwalk.utils.logger import logger

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

# |down> = (1, 0) is the ground state; computational index 4*b1 + 2*b2 + b3 with b = 1 for up
WALK_BASIS = (4, 2, 1, 7)
WALK_LABELS = ("up,down,down", "down,up,down", "down,down,up", "up,up,up")

# Laser and trap parameters of the three-ion 40Ca+ proposal
RABI_FREQUENCY = 2 * np.pi * 100e3
COM_FREQUENCY = 2 * np.pi * 1.0e6
BREATHING_FREQUENCY = np.sqrt(3.0) * COM_FREQUENCY
COM_DETUNING = 2 * np.pi * 100e3
BREATHING_DETUNING = 2 * np.pi * 50e3
LAMB_DICKE_COM = 0.0476
LAMB_DICKE_BREATHING = LAMB_DICKE_COM / 3 ** 0.25


class IonModel(BaseModel):
    """Coupling strengths and bichromatic phases of one walk, with optional laser parameters"""

    model_config = ConfigDict(frozen=True)

    J_COM: float
    J_Br: float
    phi1: float
    phi2: float
    rabi: Optional[float] = Field(None, gt=0.0, description="Laser coupling strength Omega")
    eta: Optional[float] = Field(None, gt=0.0, description="Lamb-Dicke parameter")
    mode_frequency: Optional[float] = Field(None, gt=0.0)
    detuning: Optional[float] = None

    @model_validator(mode="after")
    def check_pole(self):
        if self.detuning is not None and self.mode_frequency is not None:
            if np.isclose(abs(self.detuning), self.mode_frequency):
                raise ValueError("Detuning equals the mode frequency; the coupling diverges")
        return self


ION_ROWS: Dict[str, IonModel] = {
    "CQW1": IonModel(J_COM=2.0, J_Br=-3.0, phi1=np.pi / 2, phi2=0.304 * np.pi),
    "CQW2": IonModel(J_COM=2.0, J_Br=-3.0, phi1=np.pi / 2, phi2=-0.304 * np.pi),
    "QW": IonModel(J_COM=-2.0, J_Br=1.0, phi1=np.pi / 2, phi2=0.0),
}


def ion_coupling(rabi: float, eta: float, omega: float, detuning: float) -> float:
    """J = Omega^2 eta^2 omega / (Delta^2 - omega^2); negative inside the mode frequency."""
    denominator = detuning ** 2 - omega ** 2
    if np.isclose(denominator, 0.0, atol=1e-12 * omega ** 2):
        raise InvalidArgumentError(f"Detuning {detuning} sits on the mode frequency {omega}")
    return rabi ** 2 * eta ** 2 * omega / denominator


def adiabaticity_ratio(detuning_from_mode: float, eta: float, rabi: float) -> float:
    """|omega_m - mu| / (eta Omega): how far the bichromat sits from the sideband in units of its strength."""
    return abs(detuning_from_mode) / (eta * rabi)


def _sigma_phi(phi: float) -> np.ndarray:
    return np.cos(phi) * SIGMA_X + np.sin(phi) * SIGMA_Y


def _pair(op: np.ndarray, i: int, j: int) -> np.ndarray:
    factors = [op if k in (i, j) else IDENTITY for k in range(3)]
    return reduce(np.kron, factors)


def spin_hamiltonian(params: IonModel) -> np.ndarray:
    """Full 8x8 three-spin Hamiltonian H_COM(phi1) + H_Br(phi2)."""
    s1 = _sigma_phi(params.phi1)
    s2 = _sigma_phi(params.phi2)
    h_com = params.J_COM * (_pair(s1, 0, 1) + _pair(s1, 1, 2) + _pair(s1, 0, 2))
    h_br = params.J_Br * _pair(s2, 0, 2)
    return h_com + h_br


def subspace_projector() -> np.ndarray:
    P = np.zeros((8, 8), dtype=complex)
    for index in WALK_BASIS:
        P[index, index] = 1.0
    return P


def build_ion_walk(params: IonModel) -> HermitianOperator:
    """
    Effective 4x4 walk Hamiltonian on the odd-parity spin sector.

    Raises NumericalError if the sector is not invariant to 1e-12.
    """
    H = spin_hamiltonian(params)
    P = subspace_projector()
    leak = np.max(np.abs(P @ H - H @ P))
    if leak > 1e-12:
        raise NumericalError(f"Walk subspace not invariant under the spin Hamiltonian (leak {leak:.3e})")

    V = np.eye(8, dtype=complex)[:, list(WALK_BASIS)]
    effective = V.conj().T @ H @ V
    logger.debug(f"Ion walk J_COM={params.J_COM}, J_Br={params.J_Br}, leak={leak:.1e}")
    return HermitianOperator(matrix=effective)


def coupling_from_lasers(params: IonModel) -> Tuple[float, float]:
    """(J, adiabaticity ratio) implied by the laser parameters of `params`."""
    if None in (params.rabi, params.eta, params.mode_frequency, params.detuning):
        raise InvalidArgumentError("Laser parameters rabi, eta, mode_frequency and detuning are all required")
    J = ion_coupling(params.rabi, params.eta, params.mode_frequency, params.detuning)
    ratio = adiabaticity_ratio(params.mode_frequency - abs(params.detuning), params.eta, params.rabi)
    return J, ratio


def proposal_ratios() -> Dict[str, float]:
    """Adiabaticity ratios of the COM and breathing bichromats in the three-ion proposal."""
    return {
        "COM": adiabaticity_ratio(COM_DETUNING, LAMB_DICKE_COM, RABI_FREQUENCY),
        "breathing": adiabaticity_ratio(BREATHING_DETUNING, LAMB_DICKE_BREATHING, RABI_FREQUENCY),
    }
