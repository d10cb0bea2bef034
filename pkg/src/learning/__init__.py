"""
Learning package

Compatibility learning by L-BFGS and appearance-kernel parameter search.
"""

from src.learning.ground_truth import GroundTruthIndicator
from src.learning.gradient import compatibility_gradient, kernel_product, nll_surrogate
from src.learning.lbfgs import LBFGSResult, minimize_lbfgs
from src.learning.compat import (
    CompatibilityObjective,
    TrainingExample,
    fit_compatibility,
    fit_compatibility_with_result,
)
from src.learning.grid_search import (
    SweepSurface,
    ValidationExample,
    grid_scores,
    grid_search_kernel_params,
    parameter_sweep,
)
from src.schemas import GridSpec, OptimizerConfig

__all__ = [
    "GroundTruthIndicator",
    "GridSpec",
    "OptimizerConfig",
    "compatibility_gradient",
    "kernel_product",
    "nll_surrogate",
    "LBFGSResult",
    "minimize_lbfgs",
    "CompatibilityObjective",
    "TrainingExample",
    "fit_compatibility",
    "fit_compatibility_with_result",
    "SweepSurface",
    "ValidationExample",
    "grid_scores",
    "grid_search_kernel_params",
    "parameter_sweep",
]
