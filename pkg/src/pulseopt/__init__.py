"""Spectral-pulse optimization.

Gradient flow with a frequency-filtered, constraint-projected update for
differentiable quantum-control objectives, and a mixed-strategy
differential evolution for black-box shaper signals.
"""

__version__ = "0.1.0"

from .gradient_flow import (ConstraintSet, EndpointConstraint, FilterFunction,  # noqa: E402
                            GradientFlowOptimizer, constrained_update_direction,
                            run_gradient_flow)
from .msde import MixedStrategyDE, SearchSpace, run_msde  # noqa: E402
from .objectives import (ShaperProblem, StateTransferProblem, SurrogateParams,  # noqa: E402
                         evaluate_surrogate_ratio, evaluate_tpa, negative_sphere,
                         rb_transfer_problem)
from .pulse import SpectralField, fit_quadratic_phase, synthesize  # noqa: E402
from .quantum import Observable, QuantumSystem, propagate, rb_benchmark_system  # noqa: E402
from .units import UNITS, FrequencyGrid, TimeGrid, make_grids  # noqa: E402

__all__ = [
    "__version__",
    "ConstraintSet",
    "EndpointConstraint",
    "FilterFunction",
    "GradientFlowOptimizer",
    "constrained_update_direction",
    "run_gradient_flow",
    "MixedStrategyDE",
    "SearchSpace",
    "run_msde",
    "ShaperProblem",
    "StateTransferProblem",
    "SurrogateParams",
    "evaluate_surrogate_ratio",
    "evaluate_tpa",
    "negative_sphere",
    "rb_transfer_problem",
    "SpectralField",
    "fit_quadratic_phase",
    "synthesize",
    "Observable",
    "QuantumSystem",
    "propagate",
    "rb_benchmark_system",
    "UNITS",
    "FrequencyGrid",
    "TimeGrid",
    "make_grids",
]
