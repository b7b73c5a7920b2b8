"""Services for Lindblad propagation and result storage"""

from .propagators import (
    AdaptivePropagator,
    LindbladPropagator,
    NoJumpPropagator,
    SuperoperatorPropagator,
    select_propagator,
)

__all__ = [
    "LindbladPropagator",
    "SuperoperatorPropagator",
    "AdaptivePropagator",
    "NoJumpPropagator",
    "select_propagator",
]
