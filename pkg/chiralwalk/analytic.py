"""
Closed-form oracles for the numerical engine.

The regular polygon with H[n][n+1] = exp(i phi) is diagonalized by the
Fourier basis, which gives its spectrum and site-to-site transfer
probabilities in closed form. Triangles with inhomogeneous couplings have
no tidy closed form, so their first maxima are located numerically.
"""

from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import optimize, stats

from chiralwalk.dynamics import (
    evolve_unitary,
    first_peak_index,
    hamiltonian_from_graph,
    transfer_probability,
)
from chiralwalk.errors import InvalidArgumentError
from chiralwalk.netgraph import Edge, PhasedGraph, generate_cycle
from chiralwalk.utils.logger import logger

TimeLike = Union[float, Sequence[float], np.ndarray]


class PolygonSpec(BaseModel):
    """Regular homogeneous polygon with unit couplings, per-edge phase phi, start S and end E"""

    model_config = ConfigDict(frozen=True)

    N: int = Field(..., ge=3)
    phi: float = 0.0
    S: int = Field(0, ge=0)
    E: int = Field(1, ge=0)

    @model_validator(mode="after")
    def check_sites(self):
        if self.S >= self.N or self.E >= self.N:
            raise ValueError(f"Sites S={self.S}, E={self.E} outside [0, {self.N})")
        return self

    @property
    def loop_phase(self) -> float:
        return self.N * self.phi

    def graph(self) -> PhasedGraph:
        return generate_cycle(self.N, 1.0, self.phi)


class TrianglePeak(BaseModel):
    time: float
    probability: float


class LinearFit(BaseModel):
    slope: float
    intercept: float
    r_squared: float


# ---------------------------------------------------------------------------
# Polygons
# ---------------------------------------------------------------------------

def polygon_spectrum(spec: PolygonSpec) -> List[float]:
    """E_k = 2 cos(2 pi k / N - phi), k = 0..N-1."""
    k = np.arange(spec.N)
    return (2.0 * np.cos(2.0 * np.pi * k / spec.N - spec.phi)).tolist()


def polygon_stp(spec: PolygonSpec, t: TimeLike) -> Union[float, np.ndarray]:
    """
    |1/N sum_k exp(-i(2t cos(2 pi k/N - phi) + 2 pi k (E - S)/N))|^2

    Accepts a scalar time or an array of times.
    """
    k = np.arange(spec.N)
    energies = 2.0 * np.cos(2.0 * np.pi * k / spec.N - spec.phi)
    shift = 2.0 * np.pi * k * (spec.E - spec.S) / spec.N

    times = np.atleast_1d(np.asarray(t, dtype=float))
    amplitude = np.exp(-1j * (np.outer(times, energies) + shift)).sum(axis=1) / spec.N
    probability = np.abs(amplitude) ** 2
    return float(probability[0]) if np.ndim(t) == 0 else probability


def polygon_numeric_stp(spec: PolygonSpec, grid: Sequence[float]) -> np.ndarray:
    H = hamiltonian_from_graph(spec.graph())
    return transfer_probability(evolve_unitary(H, spec.S, grid), spec.E)


def polygon_oracle_deviation(spec: PolygonSpec, grid: Sequence[float]) -> float:
    """Largest gap between the closed form and the spectral propagator on a grid."""
    return float(np.max(np.abs(polygon_stp(spec, grid) - polygon_numeric_stp(spec, grid))))


def achiral_polygon_mirror(N: int, S: int, E: int) -> int:
    """Reflection of E through S on the N-cycle; achiral STPs to E and to the mirror agree."""
    return (N - E + 2 * S) % N


def even_cycle_suppression_check(N: int, t_grid: Sequence[float], loop_phase: float = np.pi) -> float:
    """
    Largest antipodal transfer probability from site 0 to N/2 on the grid.

    At loop phase pi the two ways around the cycle interfere destructively and
    the result stays at roundoff level.
    """
    if N % 2:
        raise InvalidArgumentError(f"Antipodal suppression needs an even cycle, got N={N}")
    spec = PolygonSpec(N=N, phi=loop_phase / N, S=0, E=N // 2)
    worst = float(np.max(polygon_numeric_stp(spec, t_grid)))
    logger.debug(f"Antipodal STP on the {N}-cycle at loop phase {loop_phase:.4f}: max {worst:.3e}")
    return worst


# ---------------------------------------------------------------------------
# Triangles
# ---------------------------------------------------------------------------

def triangle_graph(J12: float, J23: float, J13: float, theta: float) -> PhasedGraph:
    """
    Sites 0, 1, 2 with the whole loop phase on edge (1, 2).

    The loop 0 -> 1 -> 2 -> 0 sums to theta, and positive theta favors 0 -> 1.
    """
    if min(J12, J23, J13) <= 0:
        raise InvalidArgumentError("Triangle couplings must be positive")
    return PhasedGraph(
        n_sites=3,
        edges=(
            Edge(n=0, m=1, J=J12),
            Edge(n=0, m=2, J=J13),
            Edge(n=1, m=2, J=J23, theta=theta),
        ),
    )


def triangle_curve(J12: float, J23: float, J13: float, theta: float, grid: Sequence[float]) -> np.ndarray:
    """P_{1->2}(t), i.e. site 0 to site 1, on the grid."""
    H = hamiltonian_from_graph(triangle_graph(J12, J23, J13, theta))
    return transfer_probability(evolve_unitary(H, 0, grid), 1)


def triangle_theta_scan(J12: float, J23: float, J13: float, t: float, thetas: Sequence[float]) -> np.ndarray:
    """P_{1->2} at fixed time t as a function of the loop phase."""
    return np.array([triangle_curve(J12, J23, J13, theta, [0.0, t])[-1] for theta in thetas])


def triangle_analytic_peak(
    J12: float,
    J23: float,
    J13: float,
    theta: float,
    horizon: Optional[float] = None,
) -> TrianglePeak:
    """
    First maximum of P_{1->2}(t) on the three-site graph with loop phase theta.

    A coarse scan with step 1e-3 of the fastest hopping period brackets the
    first peak, and a bounded golden-section search refines it.
    """
    graph = triangle_graph(J12, J23, J13, theta)
    period = 2.0 * np.pi / max(J12, J23, J13)
    horizon = horizon or 4.0 * np.pi / min(J12, J23, J13)
    grid = np.arange(0.0, horizon, 1e-3 * period)

    H = hamiltonian_from_graph(graph)
    series = transfer_probability(evolve_unitary(H, 0, grid), 1)
    i = first_peak_index(series)
    if i is None:
        logger.warning(f"No interior peak within t < {horizon:.3f}, returning the horizon value")
        return TrianglePeak(time=float(grid[-1]), probability=float(series[-1]))

    def negative(t: float) -> float:
        return -float(transfer_probability(evolve_unitary(H, 0, [0.0, t]), 1)[-1])

    result = optimize.minimize_scalar(
        negative, bounds=(grid[i - 1], grid[i + 1]), method="bounded", options={"xatol": 1e-12}
    )
    return TrianglePeak(time=float(result.x), probability=-float(result.fun))


def optimal_triangle_phase(J12: float, J23: float, J13: float) -> Tuple[float, TrianglePeak]:
    """Loop phase in (-pi, pi] that maximizes the first peak of P_{1->2}."""
    thetas = np.linspace(-np.pi, np.pi, 73)[1:]
    peaks = [triangle_analytic_peak(J12, J23, J13, theta).probability for theta in thetas]
    best = int(np.argmax(peaks))
    step = thetas[1] - thetas[0]

    result = optimize.minimize_scalar(
        lambda theta: -triangle_analytic_peak(J12, J23, J13, theta).probability,
        bounds=(thetas[best] - step, thetas[best] + step),
        method="bounded",
        options={"xatol": 1e-8},
    )
    theta = float(np.angle(np.exp(1j * result.x)))
    refined = triangle_analytic_peak(J12, J23, J13, theta)
    if refined.probability < peaks[best]:
        return float(thetas[best]), triangle_analytic_peak(J12, J23, J13, thetas[best])
    return theta, refined


# ---------------------------------------------------------------------------
# Scaling
# ---------------------------------------------------------------------------

def chain_scaling(n_values: Sequence[int], half_times: Sequence[float]) -> LinearFit:
    """Least-squares line through half-arrival time versus number of triangles."""
    if len(n_values) != len(half_times) or len(n_values) < 2:
        raise InvalidArgumentError("Need at least two (n, tau) pairs of equal length")
    fit = stats.linregress(np.asarray(n_values, dtype=float), np.asarray(half_times, dtype=float))
    return LinearFit(slope=float(fit.slope), intercept=float(fit.intercept), r_squared=float(fit.rvalue ** 2))


def verify_oracles(
    even_sizes: Sequence[int] = (4, 6, 8, 10),
    n_random: int = 500,
    grid_points: int = 2000,
    horizon: float = 20.0,
    rng_seed: int = 0,
) -> Dict[str, float]:
    """Run the even-cycle suppression and random polygon comparisons; report the worst deviations."""
    grid = np.linspace(0.0, horizon, grid_points)
    report: Dict[str, float] = {}
    for N in even_sizes:
        report[f"suppression_N{N}"] = even_cycle_suppression_check(N, grid)

    rng = np.random.default_rng(rng_seed)
    worst = 0.0
    short_grid = np.linspace(0.0, horizon, 100)
    for _ in range(n_random):
        N = int(rng.integers(3, 13))
        spec = PolygonSpec(
            N=N,
            phi=float(rng.uniform(-np.pi, np.pi)),
            S=int(rng.integers(N)),
            E=int(rng.integers(N)),
        )
        worst = max(worst, polygon_oracle_deviation(spec, short_grid))
    report["polygon_oracle"] = worst

    logger.info(f"Oracle verification: {report}")
    return report
