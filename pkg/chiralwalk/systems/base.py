from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import optimize

from chiralwalk.config import settings
from chiralwalk.dynamics import (
    DensityMatrix,
    LindbladModel,
    Trajectory,
    evolve_lindblad,
    evolve_unitary,
    hamiltonian_from_graph,
    half_arrival_time,
    sink_augmented_model,
    transfer_probability,
)
from chiralwalk.errors import InvalidArgumentError
from chiralwalk.netgraph import EdgeKey, PhasedGraph
from chiralwalk.utils.logger import logger


class TrapChannel(BaseModel):
    """One sink site fed from graph sites through |sink><source| at the given rates"""

    model_config = ConfigDict(frozen=True)

    name: str
    sources: Tuple[Tuple[int, float], ...]

    @model_validator(mode="after")
    def check_rates(self):
        for source, rate in self.sources:
            if rate < 0:
                raise ValueError(f"Channel '{self.name}' has negative rate {rate} from site {source}")
        return self

    @classmethod
    def single(cls, name: str, source: int, rate: float) -> "TrapChannel":
        return cls(name=name, sources=((source, rate),))


class ExperimentSystem(BaseModel):
    """
    A phased graph together with everything needed to run one experiment on it.

    Sink and drain sites are appended after the graph sites, one per channel,
    in channel order. `readout` names the channel whose sink occupancy is the
    observable of interest; without it the target graph site is read out.
    """

    model_config = ConfigDict(frozen=True)

    name: str
    graph: PhasedGraph
    start_site: int = Field(..., ge=0)
    target_site: int = Field(..., ge=0)
    onsite_energies: Optional[Tuple[float, ...]] = None
    dephasing: float = Field(0.0, ge=0.0)
    channels: Tuple[TrapChannel, ...] = ()
    readout: Optional[str] = None
    horizon: float = Field(..., gt=0.0)
    grid_points: int = Field(default_factory=lambda: settings.GRID_POINTS, ge=2)
    time_unit: str = "1/J"

    @model_validator(mode="after")
    def check_sites(self):
        n = self.graph.n_sites
        if self.start_site >= n or self.target_site >= n:
            raise ValueError(f"Start {self.start_site} or target {self.target_site} outside [0, {n})")
        if self.onsite_energies is not None and len(self.onsite_energies) != n:
            raise ValueError(f"{len(self.onsite_energies)} on-site energies for {n} sites")
        names = [channel.name for channel in self.channels]
        if len(set(names)) != len(names):
            raise ValueError(f"Duplicate channel names: {names}")
        for channel in self.channels:
            for source, _ in channel.sources:
                if not 0 <= source < n:
                    raise ValueError(f"Channel '{channel.name}' source {source} outside [0, {n})")
        if self.readout is not None and self.readout not in names:
            raise ValueError(f"Readout channel '{self.readout}' not among {names}")
        return self

    @property
    def is_open(self) -> bool:
        return self.dephasing > 0 or any(rate > 0 for c in self.channels for _, rate in c.sources)

    @property
    def dim(self) -> int:
        return self.graph.n_sites + len(self.channels)

    def sink_index(self, name: str) -> int:
        for offset, channel in enumerate(self.channels):
            if channel.name == name:
                return self.graph.n_sites + offset
        raise InvalidArgumentError(f"No channel named '{name}'")

    @property
    def observable_site(self) -> int:
        return self.sink_index(self.readout) if self.readout else self.target_site

    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.grid_points)

    def with_phases(self, phases: Dict[EdgeKey, float]) -> "ExperimentSystem":
        return self.model_copy(update={"graph": self.graph.with_phases(phases)})

    def with_phase_shifts(self, shifts: Dict[EdgeKey, float]) -> "ExperimentSystem":
        """Add phases on top of the reference couplings; a negative real coupling sits at theta = pi."""
        return self.with_phases(
            {(u, v): self.graph.oriented_phase(u, v) + shift for (u, v), shift in shifts.items()}
        )

    def lindblad_model(self) -> LindbladModel:
        H = hamiltonian_from_graph(self.graph, self.onsite_energies)
        model, _ = sink_augmented_model(
            H,
            [(channel.name, channel.sources) for channel in self.channels],
            dephasing=self.dephasing,
        )
        return model

    def run(self, times: Optional[Sequence[float]] = None, keep_states: bool = False) -> Trajectory:
        """
        Evolve from the start site.

        Closed systems without channels use the spectral propagator; anything
        else goes through the Lindblad propagators.
        """
        grid = self.time_grid() if times is None else np.asarray(times, dtype=float)
        if not self.channels and self.dephasing == 0:
            H = hamiltonian_from_graph(self.graph, self.onsite_energies)
            return evolve_unitary(H, self.start_site, grid)

        model = self.lindblad_model()
        return evolve_lindblad(
            model, DensityMatrix.site(model.dim, self.start_site), grid, keep_states=keep_states
        )

    def describe(self) -> Dict[str, Any]:
        """JSON-serializable descriptor; `ExperimentSystem.from_description` restores it."""
        payload = self.model_dump(mode="json")
        logger.debug(f"Described system '{self.name}' ({self.dim} sites incl. sinks)")
        return payload

    @classmethod
    def from_description(cls, payload: Dict[str, Any]) -> "ExperimentSystem":
        return cls.model_validate(payload)

    def half_arrival_time(
        self,
        traj: Optional[Trajectory] = None,
        site: Optional[int] = None,
        refine: bool = True,
    ) -> Optional[float]:
        """
        Earliest time the observable reaches 1/2.

        The grid crossing is located by linear interpolation and, with
        `refine`, polished by Brent's method on exact single-time propagations.
        """
        traj = traj if traj is not None else self.run()
        site = self.observable_site if site is None else site
        series = transfer_probability(traj, site)
        tau = half_arrival_time(series, traj.times)
        if tau is None or not refine:
            return tau

        i = int(np.nonzero(series >= 0.5)[0][0])
        if i == 0:
            return tau

        def excess(t: float) -> float:
            if t <= 0.0:
                return float(series[0]) - 0.5
            return float(transfer_probability(self.run([0.0, t]), site)[-1]) - 0.5

        lo, hi = float(traj.times[i - 1]), float(traj.times[i])
        if excess(lo) * excess(hi) > 0:
            return tau
        return float(optimize.brentq(excess, lo, hi, xtol=1e-12))
