"""
Compatibility learning
======================

Fits the symmetric label compatibility mu by L-BFGS over its upper-triangular
entries. Every objective evaluation re-runs mean-field inference with the
candidate mu and scores the training set with the mean-field likelihood
surrogate; its gradient is the averaged, symmetrized compatibility gradient.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from src.crf.inference import run_inference
from src.crf.model import CompatibilityMatrix, DenseCRFModel
from src.learning.ground_truth import GroundTruthIndicator
from src.learning.gradient import compatibility_gradient, nll_surrogate
from src.learning.lbfgs import LBFGSResult, minimize_lbfgs
from src.schemas import OptimizerConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingExample:
    model: DenseCRFModel
    truth: GroundTruthIndicator
    name: str = ""


class CompatibilityObjective:
    """
    Training-set objective over theta = upper triangle (with diagonal) of mu.

    Calling it returns (mean surrogate, gradient in theta); evaluations are
    cached per theta.
    """

    def __init__(
        self,
        examples: Sequence[TrainingExample],
        config: Optional[OptimizerConfig] = None,
        backend: str = "lattice",
    ):
        if not examples:
            raise ValueError("❌ empty training set")
        self.examples = list(examples)
        self.config = config or OptimizerConfig()
        self.backend = backend
        self.n_labels = self.examples[0].model.n_labels
        for ex in self.examples:
            if ex.model.n_labels != self.n_labels or ex.truth.n_labels != self.n_labels:
                raise ValueError("❌ shape mismatch: training examples disagree on the number of labels")
            if ex.truth.n_points != ex.model.n_points:
                raise ValueError(f"❌ shape mismatch: ground truth for {ex.name or 'example'} has wrong size")
        self._rows, self._cols = np.triu_indices(self.n_labels)
        self._cache: Dict[bytes, Tuple[float, np.ndarray]] = {}

    def to_theta(self, compatibility: CompatibilityMatrix) -> np.ndarray:
        return compatibility.mu[self._rows, self._cols].copy()

    def to_compatibility(self, theta: np.ndarray) -> CompatibilityMatrix:
        mu = np.zeros((self.n_labels, self.n_labels))
        mu[self._rows, self._cols] = theta
        mu[self._cols, self._rows] = theta
        return CompatibilityMatrix(mu)

    def evaluate(self, compatibility: CompatibilityMatrix) -> Tuple[float, np.ndarray]:
        """Mean surrogate and mean symmetrized gradient (L x L) at `compatibility`."""
        total = 0.0
        grad = np.zeros((self.n_labels, self.n_labels))
        for ex in self.examples:
            model = ex.model.with_compatibility(compatibility)
            q = run_inference(model, self.config.inference_iterations)
            total += nll_surrogate(model, ex.truth, q, self.backend)
            grad += compatibility_gradient(model, ex.truth, q, self.backend, self.config.second_term)
        count = float(len(self.examples))
        return total / count, grad / count

    def surrogate(self, compatibility: CompatibilityMatrix) -> float:
        return self.evaluate(compatibility)[0]

    def __call__(self, theta: np.ndarray) -> Tuple[float, np.ndarray]:
        key = np.asarray(theta, dtype=np.float64).tobytes()
        if key not in self._cache:
            value, grad = self.evaluate(self.to_compatibility(theta))
            # descend the surrogate: d/dtheta = -grad, diagonal entries counted once
            theta_grad = -grad[self._rows, self._cols]
            theta_grad[self._rows == self._cols] *= 0.5
            self._cache[key] = (value, theta_grad)
        value, theta_grad = self._cache[key]
        return value, theta_grad.copy()


def fit_compatibility(
    examples: Sequence[TrainingExample],
    initial: Optional[CompatibilityMatrix] = None,
    config: Optional[OptimizerConfig] = None,
    backend: str = "lattice",
) -> CompatibilityMatrix:
    """
    Learn mu from a training set, starting from `initial` (Potts by default).

    Raises:
        ValueError: empty training set, inconsistent shapes
    """
    compatibility, _ = fit_compatibility_with_result(examples, initial, config, backend)
    return compatibility


def fit_compatibility_with_result(
    examples: Sequence[TrainingExample],
    initial: Optional[CompatibilityMatrix] = None,
    config: Optional[OptimizerConfig] = None,
    backend: str = "lattice",
) -> Tuple[CompatibilityMatrix, LBFGSResult]:
    """fit_compatibility plus the optimizer summary."""
    objective = CompatibilityObjective(examples, config, backend)
    start = initial or CompatibilityMatrix.potts(objective.n_labels)
    if start.n_labels != objective.n_labels:
        raise ValueError(
            f"❌ shape mismatch: initial compatibility has {start.n_labels} labels, expected {objective.n_labels}"
        )
    theta0 = objective.to_theta(start)
    result = minimize_lbfgs(objective, theta0, objective.config)
    if result.iterations == 0:
        learned = start
    else:
        learned = objective.to_compatibility(result.x)
    logger.info(
        "✅ Compatibility learning: %d iterations, surrogate=%.6g, |g|=%.3e (%s)",
        result.iterations, result.value, result.gradient_norm, result.message,
    )
    return learned, result


__all__ = [
    "TrainingExample",
    "CompatibilityObjective",
    "fit_compatibility",
    "fit_compatibility_with_result",
]
