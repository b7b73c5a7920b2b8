from abc import ABC, abstractmethod
from typing import Dict

import numpy as np
from scipy import linalg
from scipy.integrate import solve_ivp

from chiralwalk.errors import NumericalError
from chiralwalk.utils.logger import logger


def is_uniform(times: np.ndarray, rtol: float = 1e-9) -> bool:
    steps = np.diff(times)
    if steps.size == 0:
        return True
    return bool(np.allclose(steps, steps[0], rtol=rtol, atol=0.0))


def _step_cache(generator: np.ndarray, times: np.ndarray) -> Dict[float, np.ndarray]:
    """One matrix exponential per distinct step length."""
    cache: Dict[float, np.ndarray] = {}
    for dt in np.diff(times):
        key = round(float(dt), 12)
        if key not in cache:
            cache[key] = linalg.expm(generator * dt)
    return cache


class LindbladPropagator(ABC):
    """
    Abstract base class for Lindblad propagation.

    Implementations take a LindbladModel, an initial density matrix and a
    time grid starting at 0, and return the density matrices on that grid
    as an array of shape (T, d, d).
    """

    name: str = "abstract"

    @abstractmethod
    def propagate(self, model, rho0: np.ndarray, times: np.ndarray) -> np.ndarray:
        pass


class SuperoperatorPropagator(LindbladPropagator):
    """
    Exponentiates the d^2 x d^2 Liouvillian.

    On a uniform grid a single expm(L dt) is applied repeatedly; other grids
    get one exponential per distinct step.
    """

    name = "superoperator"

    def propagate(self, model, rho0: np.ndarray, times: np.ndarray) -> np.ndarray:
        d = model.dim
        generator = model.liouvillian()
        steps = _step_cache(generator, times)

        states = np.empty((times.size, d, d), dtype=complex)
        vec = rho0.reshape(-1, order="F").astype(complex)
        states[0] = rho0
        for i, dt in enumerate(np.diff(times), start=1):
            vec = steps[round(float(dt), 12)] @ vec
            states[i] = vec.reshape((d, d), order="F")
        return states


class AdaptivePropagator(LindbladPropagator):
    """Dormand-Prince 8(5,3) integration of the matrix-form master equation."""

    name = "adaptive"

    def __init__(self, rtol: float = 1e-10, atol: float = 1e-12):
        self.rtol = rtol
        self.atol = atol

    def propagate(self, model, rho0: np.ndarray, times: np.ndarray) -> np.ndarray:
        d = model.dim

        def rhs(_t, y):
            return model.rhs(y.reshape((d, d))).reshape(-1)

        solution = solve_ivp(
            rhs,
            (float(times[0]), float(times[-1])),
            rho0.astype(complex).reshape(-1),
            method="DOP853",
            t_eval=times,
            rtol=self.rtol,
            atol=self.atol,
        )
        if not solution.success:
            raise NumericalError(f"Adaptive integration failed: {solution.message}")
        return solution.y.T.reshape((times.size, d, d))


class NoJumpPropagator(LindbladPropagator):
    """
    Exact propagation for models whose only jumps are |sink><s| into one shared sink.

    Then rho(t) = K rho0 K^dagger + w(t) |sink><sink| with K = exp(-i H_eff t)
    and w(t) the trace lost by the no-jump part. Pure Hamiltonian models
    (no active jumps) are the special case w = 0.
    """

    name = "no-jump"

    @staticmethod
    def sink_of(model):
        """The shared sink index, -1 for a jump-free model, None if the model does not qualify."""
        jumps = model.active_jumps
        if not jumps:
            return -1

        sinks = set()
        sources = set()
        for jump in jumps:
            rows, cols = np.nonzero(jump.L)
            if rows.size != 1 or rows[0] == cols[0]:
                return None
            sinks.add(int(rows[0]))
            sources.add(int(cols[0]))
        if len(sinks) != 1:
            return None
        sink = sinks.pop()
        H = model.H.matrix
        if sink in sources or np.any(H[sink, :] != 0) or np.any(H[:, sink] != 0):
            return None
        return sink

    @classmethod
    def supports(cls, model) -> bool:
        return cls.sink_of(model) is not None

    def propagate(self, model, rho0: np.ndarray, times: np.ndarray) -> np.ndarray:
        sink = self.sink_of(model)
        if sink is None:
            raise NumericalError("Model has jumps that the no-jump propagator cannot represent")

        steps = _step_cache(-1j * model.effective_hamiltonian(), times)
        initial_trace = np.trace(rho0)

        states = np.empty((times.size,) + rho0.shape, dtype=complex)
        states[0] = rho0
        K = np.eye(model.dim, dtype=complex)
        for i, dt in enumerate(np.diff(times), start=1):
            K = steps[round(float(dt), 12)] @ K
            rho = K @ rho0 @ K.conj().T
            if sink >= 0:
                rho[sink, sink] += initial_trace - np.trace(rho)
            states[i] = rho
        return states


def select_propagator(model, times: np.ndarray) -> LindbladPropagator:
    """No-jump when the model allows it, superoperator on uniform grids, adaptive otherwise."""
    if NoJumpPropagator.supports(model):
        propagator: LindbladPropagator = NoJumpPropagator()
    elif is_uniform(times):
        propagator = SuperoperatorPropagator()
    else:
        propagator = AdaptivePropagator()
    logger.debug(f"Selected {propagator.name} propagator for dim={model.dim}")
    return propagator
