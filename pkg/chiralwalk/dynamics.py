"""
Hamiltonians, propagation and transport metrics.

Unitary walks are propagated spectrally (eigendecomposition of H). Open
systems go through one of the Lindblad propagators in
chiralwalk.services.propagators; sinks are explicit extra sites so the
total trace stays 1.
"""

import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from chiralwalk.config import settings
from chiralwalk.errors import DimensionError, InvalidArgumentError, NumericalError
from chiralwalk.netgraph import PhasedGraph
from chiralwalk.services import storage_service
from chiralwalk.services.propagators import select_propagator
from chiralwalk.utils.logger import logger


def _frozen_array(value, dtype=complex) -> np.ndarray:
    array = np.array(value, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class HermitianOperator(BaseModel):
    """Dense Hermitian matrix over the site basis"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def check_hermitian(cls, v):
        v = _frozen_array(v)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"Operator must be square, got shape {v.shape}")
        deviation = np.max(np.abs(v - v.conj().T)) if v.size else 0.0
        if deviation > settings.HERMITICITY_TOL:
            raise ValueError(f"Operator is not Hermitian (max deviation {deviation:.3e})")
        return v

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


class DensityMatrix(BaseModel):
    """Hermitian, unit-trace, positive semidefinite state"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def check_state(cls, v):
        v = _frozen_array(v)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"Density matrix must be square, got shape {v.shape}")
        if np.max(np.abs(v - v.conj().T)) > settings.HERMITICITY_TOL:
            raise ValueError("Density matrix is not Hermitian")
        if abs(np.trace(v) - 1.0) > settings.UNITARY_TOL:
            raise ValueError(f"Density matrix trace is {np.trace(v).real:.12f}, expected 1")
        if np.min(np.linalg.eigvalsh(v)) < -settings.UNITARY_TOL:
            raise ValueError("Density matrix has negative eigenvalues")
        return v

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def site(cls, dim: int, index: int) -> "DensityMatrix":
        if not 0 <= index < dim:
            raise InvalidArgumentError(f"Site {index} outside [0, {dim})")
        rho = np.zeros((dim, dim), dtype=complex)
        rho[index, index] = 1.0
        return cls(matrix=rho)

    @classmethod
    def from_vector(cls, psi: Sequence[complex]) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(matrix=np.outer(psi, psi.conj()))


class JumpOperator(BaseModel):
    """Lindblad jump operator L with nonnegative rate c"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    L: np.ndarray
    rate: float = Field(..., ge=0.0)

    @field_validator("L", mode="before")
    @classmethod
    def freeze(cls, v):
        return _frozen_array(v)

    @classmethod
    def transition(cls, dim: int, to: int, frm: int, rate: float) -> "JumpOperator":
        """|to><frm|; to == frm gives the dephasing projector."""
        L = np.zeros((dim, dim), dtype=complex)
        L[to, frm] = 1.0
        return cls(L=L, rate=rate)


class LindbladModel(BaseModel):
    """Hamiltonian plus jump operators of the Kossakowski-Lindblad generator"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    H: HermitianOperator
    jumps: Tuple[JumpOperator, ...] = Field(default_factory=tuple)

    @model_validator(mode="after")
    def check_dims(self):
        for jump in self.jumps:
            if jump.L.shape != self.H.matrix.shape:
                raise ValueError(
                    f"Jump operator shape {jump.L.shape} does not match H {self.H.matrix.shape}"
                )
        return self

    @property
    def dim(self) -> int:
        return self.H.dim

    @property
    def active_jumps(self) -> List[JumpOperator]:
        return [jump for jump in self.jumps if jump.rate > 0.0]

    def effective_hamiltonian(self) -> np.ndarray:
        """H - (i/2) sum c L^dagger L, the generator of the no-jump evolution."""
        h_eff = self.H.matrix.astype(complex)
        for jump in self.active_jumps:
            h_eff = h_eff - 0.5j * jump.rate * (jump.L.conj().T @ jump.L)
        return h_eff

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        """d(rho)/dt in matrix form."""
        H = self.H.matrix
        out = -1j * (H @ rho - rho @ H)
        for jump in self.active_jumps:
            L = jump.L
            LdL = L.conj().T @ L
            out = out + jump.rate * (L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL))
        return out

    def liouvillian(self) -> np.ndarray:
        """
        Superoperator acting on column-stacked vec(rho).

        Uses vec(A rho B) = (B^T kron A) vec(rho).
        """
        d = self.dim
        eye = np.eye(d)
        H = self.H.matrix
        sup = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
        for jump in self.active_jumps:
            L = jump.L
            LdL = L.conj().T @ L
            sup = sup + jump.rate * (
                np.kron(L.conj(), L) - 0.5 * np.kron(eye, LdL) - 0.5 * np.kron(LdL.T, eye)
            )
        return sup


class Trajectory(BaseModel):
    """Time grid with per-site occupancies and total trace of one evolution"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    site_occupancies: np.ndarray
    trace_total: np.ndarray
    states: Optional[np.ndarray] = Field(None, exclude=True, description="Full density matrices, if kept")

    @model_validator(mode="before")
    @classmethod
    def freeze_arrays(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            for key in ("times", "site_occupancies", "trace_total"):
                if key in data:
                    data[key] = _frozen_array(data[key], dtype=float)
        return data

    @model_validator(mode="after")
    def check_shapes(self):
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise ValueError("Trajectory times must be a strictly ascending 1-D grid")
        if self.site_occupancies.shape[0] != self.times.shape[0]:
            raise ValueError("One occupancy row per time point is required")
        if self.trace_total.shape != self.times.shape:
            raise ValueError("One trace value per time point is required")
        tol = settings.UNITARY_TOL
        if self.site_occupancies.size and (
            self.site_occupancies.min() < -tol or self.site_occupancies.max() > 1.0 + tol
        ):
            raise ValueError("Occupancies outside [0, 1]")
        return self

    @property
    def n_sites(self) -> int:
        return self.site_occupancies.shape[1]

    def to_csv(self, path: Path) -> Path:
        return storage_service.write_trajectory_csv(
            path, self.times, self.site_occupancies, self.trace_total
        )

    def to_dict(self) -> Dict[str, list]:
        return {
            "t": self.times.tolist(),
            "site_occupancies": self.site_occupancies.tolist(),
            "trace": self.trace_total.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, payload: str) -> "Trajectory":
        data = json.loads(payload)
        return cls(times=data["t"], site_occupancies=data["site_occupancies"], trace_total=data["trace"])


PEAK_ABS_FLOOR = 1e-6
PEAK_REL_FLOOR = 1e-3


class FirstMaximum(BaseModel):
    time: float
    value: float
    boundary: bool = Field(False, description="True when no interior maximum exists")


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------

def hamiltonian_from_graph(g: PhasedGraph, onsite: Optional[Sequence[float]] = None) -> HermitianOperator:
    """H[n][m] = J exp(i theta), H[m][n] its conjugate, optional on-site energies on the diagonal."""
    H = np.zeros((g.n_sites, g.n_sites), dtype=complex)
    for edge in g.edges:
        H[edge.n, edge.m] = edge.J * np.exp(1j * edge.theta)
        H[edge.m, edge.n] = np.conj(H[edge.n, edge.m])
    if onsite is not None:
        onsite = np.asarray(onsite, dtype=float)
        if onsite.shape != (g.n_sites,):
            raise DimensionError(f"{onsite.shape[0]} on-site energies for {g.n_sites} sites")
        H[np.diag_indices(g.n_sites)] = onsite
    return HermitianOperator(matrix=H)


def time_reverse(H: HermitianOperator) -> HermitianOperator:
    """T H T: complex conjugation in the site basis (theta -> -theta)."""
    return HermitianOperator(matrix=H.matrix.conj())


def pad_operator(H: HermitianOperator, n_extra: int) -> HermitianOperator:
    """Append n_extra decoupled sites (sinks, drains) with zero rows and columns."""
    d = H.dim
    padded = np.zeros((d + n_extra, d + n_extra), dtype=complex)
    padded[:d, :d] = H.matrix
    return HermitianOperator(matrix=padded)


def sink_augmented_model(
    H: HermitianOperator,
    channels: Sequence[Tuple[str, Sequence[Tuple[int, float]]]] = (),
    dephasing: float = 0.0,
) -> Tuple[LindbladModel, Dict[str, int]]:
    """
    Enlarge H with one sink site per channel and build the jump list.

    Each channel is (name, [(source_site, rate), ...]); every source feeds
    the channel's sink through |sink><source|. Dephasing adds |n><n| on all
    original sites at the given rate. Returns the model and name -> sink index.
    """
    if dephasing < 0:
        raise InvalidArgumentError(f"Dephasing rate must be nonnegative, got {dephasing}")
    n_graph = H.dim
    full = pad_operator(H, len(channels))
    dim = full.dim

    jumps: List[JumpOperator] = []
    if dephasing > 0:
        jumps.extend(JumpOperator.transition(dim, n, n, dephasing) for n in range(n_graph))

    sinks: Dict[str, int] = {}
    for offset, (name, sources) in enumerate(channels):
        sink = n_graph + offset
        sinks[name] = sink
        for source, rate in sources:
            if not 0 <= source < n_graph:
                raise InvalidArgumentError(f"Channel '{name}' source {source} outside [0, {n_graph})")
            if rate < 0:
                raise InvalidArgumentError(f"Channel '{name}' rate must be nonnegative, got {rate}")
            jumps.append(JumpOperator.transition(dim, sink, source, rate))

    return LindbladModel(H=full, jumps=tuple(jumps)), sinks


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------

def _as_grid(times: Sequence[float]) -> np.ndarray:
    grid = np.asarray(times, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidArgumentError("Time grid must be a non-empty 1-D sequence")
    if np.any(np.diff(grid) <= 0):
        raise InvalidArgumentError("Time grid must be strictly ascending")
    return grid


def unitary_propagator(H: HermitianOperator, t: float) -> np.ndarray:
    """exp(-i H t) from the eigendecomposition of H."""
    try:
        energies, vectors = np.linalg.eigh(H.matrix)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Eigendecomposition failed: {e}") from e
    return (vectors * np.exp(-1j * energies * t)) @ vectors.conj().T


def evolve_unitary(H: HermitianOperator, initial_site: int, times: Sequence[float]) -> Trajectory:
    """Site occupancies |<m| exp(-iHt) |S>|^2 from the spectral propagator."""
    if not 0 <= initial_site < H.dim:
        raise InvalidArgumentError(f"Initial site {initial_site} outside [0, {H.dim})")
    grid = _as_grid(times)

    try:
        energies, vectors = np.linalg.eigh(H.matrix)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Eigendecomposition failed: {e}") from e

    # psi(t) = V exp(-i E t) V^dagger |S>
    overlaps = vectors[initial_site, :].conj()
    phases = np.exp(-1j * np.outer(grid, energies))
    amplitudes = (phases * overlaps) @ vectors.T
    occupancies = np.abs(amplitudes) ** 2
    totals = occupancies.sum(axis=1)

    drift = np.max(np.abs(totals - 1.0))
    if drift > settings.UNITARY_TOL:
        raise NumericalError(f"Unitary evolution lost normalization ({drift:.3e})")

    logger.debug(f"Unitary evolution: dim={H.dim}, {grid.size} time points, start={initial_site}")
    return Trajectory(times=grid, site_occupancies=occupancies, trace_total=totals)


def evolve_lindblad(
    model: LindbladModel,
    initial_state: DensityMatrix,
    times: Sequence[float],
    propagator=None,
    keep_states: bool = False,
) -> Trajectory:
    """
    Integrate the Lindblad equation on the given grid (which must start at 0).

    The propagator defaults to the automatic choice of
    services.propagators.select_propagator.
    """
    grid = _as_grid(times)
    if grid[0] != 0.0:
        raise InvalidArgumentError(f"Lindblad time grid must start at 0, got {grid[0]}")
    if initial_state.dim != model.dim:
        raise DimensionError(f"State dim {initial_state.dim} does not match model dim {model.dim}")

    propagator = propagator or select_propagator(model, grid)
    logger.debug(
        f"Lindblad evolution: dim={model.dim}, {len(model.active_jumps)} jumps, "
        f"{grid.size} points, propagator={propagator.name}"
    )
    states = propagator.propagate(model, np.asarray(initial_state.matrix), grid)

    occupancies = np.real(np.einsum("tii->ti", states))
    totals = occupancies.sum(axis=1)
    drift = np.max(np.abs(totals - 1.0))
    if drift > settings.LINDBLAD_TOL:
        raise NumericalError(f"Lindblad evolution lost trace ({drift:.3e}) with {propagator.name}")

    return Trajectory(
        times=grid,
        # roundoff can leave populations a hair below zero
        site_occupancies=np.clip(occupancies, 0.0, None),
        trace_total=totals,
        states=states if keep_states else None,
    )


# ---------------------------------------------------------------------------
# Transport metrics
# ---------------------------------------------------------------------------

def transfer_probability(traj: Trajectory, target: int) -> np.ndarray:
    """<target| rho(t) |target> on the trajectory grid."""
    if not 0 <= target < traj.n_sites:
        raise InvalidArgumentError(f"Target site {target} outside [0, {traj.n_sites})")
    return np.array(traj.site_occupancies[:, target])


def half_arrival_time(series: Sequence[float], grid: Sequence[float]) -> Optional[float]:
    """Earliest time the series reaches 1/2, linearly interpolated; None if it never does."""
    series = np.asarray(series, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if series.shape != grid.shape:
        raise DimensionError(f"Series of length {series.size} on a grid of length {grid.size}")

    above = np.nonzero(series >= 0.5)[0]
    if above.size == 0:
        return None
    i = int(above[0])
    if i == 0:
        return float(grid[0])
    s0, s1 = series[i - 1], series[i]
    t0, t1 = grid[i - 1], grid[i]
    return float(t0 + (0.5 - s0) * (t1 - t0) / (s1 - s0))


def transport_speed(tau: Optional[float]) -> Optional[float]:
    """nu_1/2 = 1 / tau_1/2; a missing half-arrival time propagates as None."""
    if tau is None:
        return None
    if tau <= 0:
        raise InvalidArgumentError(f"Half-arrival time must be positive, got {tau}")
    return 1.0 / tau


def first_maximum(series: Sequence[float], grid: Sequence[float]) -> FirstMaximum:
    """
    First interior local maximum, refined by a parabola through the three bracketing samples.

    Plateaus resolve to their earliest sample. Series without an interior
    maximum return the final point with boundary=True.
    """
    series = np.asarray(series, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if series.size == 0:
        raise InvalidArgumentError("Series is empty")
    if series.shape != grid.shape:
        raise DimensionError(f"Series of length {series.size} on a grid of length {grid.size}")

    i = first_peak_index(series)
    if i is None:
        return FirstMaximum(time=float(grid[-1]), value=float(series[-1]), boundary=True)

    t3, s3 = grid[i - 1:i + 2], series[i - 1:i + 2]
    a, b, c = np.polyfit(t3 - grid[i], s3, 2)
    if a < 0:
        offset = float(np.clip(-b / (2 * a), t3[0] - grid[i], t3[2] - grid[i]))
        return FirstMaximum(time=float(grid[i] + offset), value=float(np.polyval((a, b, c), offset)))
    return FirstMaximum(time=float(grid[i]), value=float(series[i]))


def first_peak_index(
    series: np.ndarray,
    abs_floor: float = PEAK_ABS_FLOOR,
    rel_floor: float = PEAK_REL_FLOOR,
) -> Optional[int]:
    """
    Index of the first interior sample that rises above its left and holds against its right.

    Local maxima below abs_floor, or below rel_floor times the largest value
    seen so far, are rounding ripples and are skipped.
    """
    rising = series[1:-1] > series[:-2]
    holding = series[1:-1] >= series[2:]
    floor = np.maximum(abs_floor, rel_floor * np.maximum.accumulate(series)[1:-1])
    hits = np.nonzero(rising & holding & (series[1:-1] >= floor))[0]
    return int(hits[0]) + 1 if hits.size else None
