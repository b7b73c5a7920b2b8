"""
Multistart optimization of edge phases.

Each restart runs an adaptive Nelder-Mead simplex on the torus of phases:
the objective is evaluated on wrapped phases, so the simplex may wander
outside (-pi, pi] without leaving the landscape. Restart 0 always starts
from the all-zero assignment, so the result is never worse than the
achiral baseline. Assigned phases are shifts on top of the system's reference
couplings, so the zero assignment is always the unmodified system.
"""

from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import optimize as scipy_optimize
from scipy import stats

from chiralwalk.config import settings
from chiralwalk.dynamics import first_maximum, half_arrival_time, transfer_probability
from chiralwalk.errors import InvalidArgumentError
from chiralwalk.netgraph import EdgeKey, canonical_key, wrap_phase
from chiralwalk.systems.base import ExperimentSystem
from chiralwalk.utils.logger import logger

SPREAD_WINDOW = 1e-3


class ObjectiveKind(str, Enum):
    OCCUPANCY_AT_TIME = "occupancy_at_time"
    HALF_ARRIVAL_TIME = "half_arrival_time"
    FIRST_MAX = "first_max"


class Direction(str, Enum):
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


class PhaseAssignment(BaseModel):
    """Phases for a subset of edges, stored on canonical orientation"""

    model_config = ConfigDict(frozen=True)

    edge_ids: Tuple[EdgeKey, ...] = ()
    values: Tuple[float, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def canonicalize(cls, data):
        if isinstance(data, dict):
            edges = [tuple(e) for e in data.get("edge_ids", ())]
            values = list(data.get("values", ()))
            if len(edges) != len(values):
                raise ValueError(f"{len(edges)} edges but {len(values)} phase values")
            data = {
                "edge_ids": tuple(canonical_key(u, v) for u, v in edges),
                "values": tuple(wrap_phase(x if u < v else -x) for (u, v), x in zip(edges, values)),
            }
        return data

    @field_validator("edge_ids")
    @classmethod
    def check_unique(cls, v):
        if len(set(v)) != len(v):
            raise ValueError(f"Duplicate edges in assignment: {v}")
        return v

    @classmethod
    def zeros(cls, edge_ids: Sequence[EdgeKey]) -> "PhaseAssignment":
        return cls(edge_ids=tuple(edge_ids), values=(0.0,) * len(edge_ids))

    def as_dict(self) -> Dict[EdgeKey, float]:
        return dict(zip(self.edge_ids, self.values))


class Objective(BaseModel):
    """
    What to read from a run.

    `site` indexes the full model (graph sites followed by sinks); None
    means the system's own observable (its readout sink or target site).
    `time` is required for occupancy_at_time.
    """

    model_config = ConfigDict(frozen=True)

    kind: ObjectiveKind
    direction: Direction = Direction.MAXIMIZE
    site: Optional[int] = Field(None, ge=0)
    time: Optional[float] = Field(None, gt=0.0)

    @model_validator(mode="after")
    def check_time(self):
        if self.kind is ObjectiveKind.OCCUPANCY_AT_TIME and self.time is None:
            raise ValueError("occupancy_at_time needs a time")
        return self


class OptimizationReport(BaseModel):
    edges: List[EdgeKey]
    phases: List[float]
    objective: float
    baseline: float
    restarts: int
    seed: int
    spread: List[float] = Field(default_factory=list, description="Circular std of each phase over near-best restarts")
    restart_values: List[float] = Field(default_factory=list)

    @property
    def assignment(self) -> PhaseAssignment:
        return PhaseAssignment(edge_ids=tuple(self.edges), values=tuple(self.phases))


def _check_assignment(system: ExperimentSystem, assignment: PhaseAssignment) -> None:
    for n, m in assignment.edge_ids:
        if not system.graph.has_edge(n, m):
            raise InvalidArgumentError(f"Edge {(n, m)} not in system '{system.name}'")


def evaluate(system: ExperimentSystem, assignment: PhaseAssignment, objective: Objective) -> float:
    """
    Apply the phases, propagate and read the objective.

    Half-arrival objectives that never reach 1/2 within the horizon score +inf.
    """
    _check_assignment(system, assignment)
    phased = system.with_phase_shifts(assignment.as_dict()) if assignment.edge_ids else system
    site = system.observable_site if objective.site is None else objective.site
    if site >= system.dim:
        raise InvalidArgumentError(f"Objective site {site} outside [0, {system.dim})")

    if objective.kind is ObjectiveKind.OCCUPANCY_AT_TIME:
        traj = phased.run([0.0, objective.time])
        return float(transfer_probability(traj, site)[-1])

    traj = phased.run()
    series = transfer_probability(traj, site)
    if objective.kind is ObjectiveKind.HALF_ARRIVAL_TIME:
        tau = half_arrival_time(series, traj.times)
        return float("inf") if tau is None else tau
    return first_maximum(series, traj.times).value


def _run_simplex(cost, x0: np.ndarray, maxiter: int, ftol: float) -> Tuple[np.ndarray, float]:
    """Nelder-Mead from x0, restarted from its own optimum until it stops improving."""
    dim = x0.size
    x_best, f_best = x0, cost(x0)
    for _ in range(3):
        simplex = np.vstack([x_best, x_best + 0.5 * np.eye(dim)])
        result = scipy_optimize.minimize(
            cost,
            x_best,
            method="Nelder-Mead",
            options={
                "maxiter": maxiter,
                "fatol": ftol,
                "xatol": 1e-6,
                "adaptive": True,
                "initial_simplex": simplex,
            },
        )
        improved = f_best - result.fun
        if result.fun < f_best:
            x_best, f_best = result.x, float(result.fun)
        if improved <= ftol:
            break
    return np.array([wrap_phase(x) for x in x_best]), f_best


def optimize(
    system: ExperimentSystem,
    edge_ids: Sequence[EdgeKey],
    objective: Objective,
    restarts: int = None,
    rng_seed: int = 0,
    seeds: Sequence[Sequence[float]] = (),
    workers: int = None,
    maxiter: int = None,
    ftol: float = None,
) -> OptimizationReport:
    """
    Multistart simplex search over the phases of `edge_ids`.

    Args:
        system: System whose graph carries the edges
        edge_ids: Edges to optimize (canonical or reversed keys)
        objective: Objective and direction
        restarts: Number of starting points (zero assignment plus seeds plus uniform draws)
        rng_seed: Seed for the uniform draws
        seeds: Extra starting assignments, tried right after the zero assignment
        workers: Threads evaluating restarts concurrently

    Returns:
        OptimizationReport with the best phases; ties go to the lowest restart index
    """
    restarts = settings.OPT_RESTARTS if restarts is None else restarts
    workers = workers or settings.WORKERS
    maxiter = maxiter or settings.OPT_MAXITER
    ftol = ftol if ftol is not None else settings.OPT_FTOL
    if restarts < 1:
        raise InvalidArgumentError(f"restarts must be >= 1, got {restarts}")

    zero = PhaseAssignment.zeros(edge_ids)
    edges = list(zero.edge_ids)
    _check_assignment(system, zero)
    baseline = evaluate(system, zero, objective)
    sign = -1.0 if objective.direction is Direction.MAXIMIZE else 1.0

    logger.info(
        f"Optimizing {len(edges)} phases on '{system.name}' ({objective.kind.value}, "
        f"{objective.direction.value}), baseline={baseline:.6g}, restarts={restarts}"
    )

    if not edges:
        return OptimizationReport(
            edges=[], phases=[], objective=baseline, baseline=baseline, restarts=0, seed=rng_seed
        )

    for seed in seeds:
        if len(seed) != len(edges):
            raise InvalidArgumentError(f"Seed assignment has {len(seed)} phases for {len(edges)} edges")

    rng = np.random.default_rng(rng_seed)
    starts = [np.zeros(len(edges))] + [np.asarray(s, dtype=float) for s in seeds]
    while len(starts) < restarts:
        starts.append(rng.uniform(-np.pi, np.pi, size=len(edges)))

    def cost(x: np.ndarray) -> float:
        assignment = PhaseAssignment(edge_ids=tuple(edges), values=tuple(wrap_phase(v) for v in x))
        return sign * evaluate(system, assignment, objective)

    def run_restart(x0: np.ndarray) -> Tuple[np.ndarray, float]:
        return _run_simplex(cost, x0, maxiter, ftol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_restart, starts))
    else:
        results = [run_restart(x0) for x0 in starts]

    best = 0
    for i, (_, value) in enumerate(results):
        if value < results[best][1]:
            best = i
    phases, best_cost = results[best]
    values = [sign * value for _, value in results]

    near_best = np.array([x for x, value in results if abs(value - best_cost) <= SPREAD_WINDOW])
    spread = [float(stats.circstd(near_best[:, j], high=np.pi, low=-np.pi)) for j in range(len(edges))]

    report = OptimizationReport(
        edges=edges,
        phases=phases.tolist(),
        objective=sign * best_cost,
        baseline=baseline,
        restarts=len(starts),
        seed=rng_seed,
        spread=spread,
        restart_values=values,
    )
    logger.info(f"Optimization done: objective={report.objective:.6g} (restart {best}), baseline={baseline:.6g}")
    return report


def landscape_scan(
    system: ExperimentSystem,
    edge_ids: Union[EdgeKey, Sequence[EdgeKey]],
    grid: Sequence[float],
    objective: Objective,
    workers: int = None,
) -> np.ndarray:
    """
    Objective value for each phase in the grid.

    `edge_ids` may be one edge or several edges that all receive the same phase.
    """
    if len(edge_ids) == 2 and all(isinstance(x, (int, np.integer)) for x in edge_ids):
        edge_ids = [edge_ids]
    edge_ids = [tuple(e) for e in edge_ids]

    grid = np.asarray(grid, dtype=float)
    if grid.size and (grid.min() <= -np.pi or grid.max() > np.pi):
        raise InvalidArgumentError("Landscape grid must lie within (-pi, pi]")

    def point(theta: float) -> float:
        assignment = PhaseAssignment(edge_ids=tuple(edge_ids), values=(float(theta),) * len(edge_ids))
        return evaluate(system, assignment, objective)

    workers = workers or settings.WORKERS
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(point, grid))
    else:
        values = [point(theta) for theta in grid]

    logger.debug(f"Landscape scan on '{system.name}': {grid.size} points over {len(edge_ids)} edges")
    return np.array(values)
