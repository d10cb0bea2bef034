"""
Kernel parameter search
=======================

Grid search over the appearance kernel (w1, theta_alpha, theta_beta) scored
by pooled global accuracy on a validation set, and the theta_alpha x
theta_beta accuracy sweep used to study long-range connections.

Lattices are built once per (image, theta_alpha, theta_beta); changing w1
only reweights kernels.
"""

from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from src.crf.energy import long_range_energy_fraction
from src.crf.features import build_appearance_features, build_smoothness_features
from src.crf.inference import DEFAULT_ITERATIONS, map_labeling, run_inference
from src.crf.model import CompatibilityMatrix, DenseCRFModel, UnaryField, build_kernel
from src.evaluation.labelmap import LabelMap
from src.evaluation.metrics import ConfusionAccumulator
from src.lattice import KernelSpec
from src.schemas import GridSpec
from src.utils.validators import Validators

logger = logging.getLogger(__name__)

Triple = Tuple[float, float, float]


@dataclass(frozen=True)
class ValidationExample:
    image: np.ndarray
    unary: UnaryField
    truth: LabelMap
    name: str = ""

    def __post_init__(self):
        img = np.asarray(self.image)
        if img.shape[:2] != (self.unary.height, self.unary.width):
            raise ValueError(
                f"❌ dimension mismatch between image {img.shape[1]}x{img.shape[0]} "
                f"and unary {self.unary.width}x{self.unary.height}"
            )
        if self.truth.shape != (self.unary.height, self.unary.width):
            raise ValueError(f"❌ dimension mismatch between ground truth {self.truth.shape} and unary")


class _ModelFactory:
    """Per-example cache of smoothness and appearance kernels."""

    def __init__(
        self,
        example: ValidationExample,
        w2: float,
        theta_gamma: float,
        compatibility: Optional[CompatibilityMatrix],
        normalization: str,
    ):
        self.example = example
        unary = example.unary
        self.smoothness = build_kernel(
            KernelSpec.unit(2, w2), build_smoothness_features(unary.width, unary.height, theta_gamma)
        )
        self.compatibility = compatibility or CompatibilityMatrix.potts(unary.n_labels)
        self.normalization = normalization
        self._appearance: Dict[Tuple[float, float], object] = {}

    def model(self, w1: float, theta_alpha: float, theta_beta: float) -> DenseCRFModel:
        key = (float(theta_alpha), float(theta_beta))
        if key not in self._appearance:
            feats = build_appearance_features(self.example.image, theta_alpha, theta_beta)
            self._appearance[key] = build_kernel(KernelSpec.unit(5, 1.0), feats)
        appearance = self._appearance[key]
        appearance = appearance._replace(spec=appearance.spec.with_weight(w1))
        return DenseCRFModel(
            unary=self.example.unary,
            kernels=(appearance, self.smoothness),
            compatibility=self.compatibility,
            normalization=self.normalization,
        )

    def release(self, theta_alpha: float, theta_beta: float) -> None:
        self._appearance.pop((float(theta_alpha), float(theta_beta)), None)


def _n_labels(examples: Sequence[ValidationExample]) -> int:
    return max(ex.unary.n_labels for ex in examples)


def grid_scores(
    examples: Sequence[ValidationExample],
    w1_values: Sequence[float],
    alphas: Sequence[float],
    betas: Sequence[float],
    w2: float = 1.0,
    theta_gamma: float = 1.0,
    iterations: int = DEFAULT_ITERATIONS,
    compatibility: Optional[CompatibilityMatrix] = None,
    normalization: str = "pixelwise",
    long_range_min_length: Optional[float] = None,
) -> Tuple[Dict[Triple, float], Dict[Triple, float]]:
    """
    Pooled global accuracy for every (w1, theta_alpha, theta_beta).

    Returns:
        (accuracy per triple, mean long-range energy share per triple; empty
        unless long_range_min_length is given)

    Raises:
        ValueError: empty validation set or candidate list
    """
    if not examples:
        raise ValueError("❌ empty validation set")
    if not len(w1_values) or not len(alphas) or not len(betas):
        raise ValueError("❌ empty grid")
    n_labels = _n_labels(examples)
    factories = [_ModelFactory(ex, w2, theta_gamma, compatibility, normalization) for ex in examples]

    accuracy: Dict[Triple, float] = {}
    long_range: Dict[Triple, float] = {}
    for alpha, beta in product(alphas, betas):
        for w1 in w1_values:
            confusion = ConfusionAccumulator(n_labels)
            shares: List[float] = []
            for factory in factories:
                model = factory.model(w1, alpha, beta)
                labels = map_labeling(run_inference(model, iterations))
                unary = factory.example.unary
                confusion.update(LabelMap.from_flat(labels, unary.width, unary.height), factory.example.truth)
                if long_range_min_length is not None:
                    shares.append(long_range_energy_fraction(model, labels, long_range_min_length))
            key = (float(w1), float(alpha), float(beta))
            accuracy[key] = confusion.global_accuracy()
            if shares:
                long_range[key] = float(np.mean(shares))
            logger.debug("grid w1=%g alpha=%g beta=%g -> %.3f%%", w1, alpha, beta, accuracy[key])
        for factory in factories:
            factory.release(alpha, beta)
    return accuracy, long_range


def grid_search_kernel_params(
    examples: Sequence[ValidationExample],
    grid: GridSpec,
    w2: float = 1.0,
    theta_gamma: float = 1.0,
    iterations: int = DEFAULT_ITERATIONS,
    compatibility: Optional[CompatibilityMatrix] = None,
    normalization: str = "pixelwise",
) -> Triple:
    """
    Best (w1, theta_alpha, theta_beta) by global accuracy; ties go to the
    earliest triple in (w1, theta_alpha, theta_beta) grid order.
    """
    scores, _ = grid_scores(
        examples, grid.w1, grid.theta_alpha, grid.theta_beta,
        w2, theta_gamma, iterations, compatibility, normalization,
    )
    best: Optional[Triple] = None
    for triple in product(grid.w1, grid.theta_alpha, grid.theta_beta):
        key = tuple(float(v) for v in triple)
        if best is None or scores[key] > scores[best]:
            best = key
    logger.info("✅ Grid search over %d triples: best %s at %.3f%%", grid.size, best, scores[best])
    return best


@dataclass(frozen=True)
class SweepSurface:
    """Global accuracy over theta_alpha (rows) x theta_beta (columns)."""

    alphas: Tuple[float, ...]
    betas: Tuple[float, ...]
    accuracy: np.ndarray
    long_range: Optional[np.ndarray] = None

    def cell(self, alpha: float, beta: float) -> float:
        return float(self.accuracy[self.alphas.index(float(alpha)), self.betas.index(float(beta))])

    def peak(self) -> Tuple[float, float, float]:
        i, j = np.unravel_index(int(np.argmax(self.accuracy)), self.accuracy.shape)
        return self.alphas[i], self.betas[j], float(self.accuracy[i, j])

    def to_rows(self) -> List[Dict[str, float]]:
        rows = []
        for i, alpha in enumerate(self.alphas):
            for j, beta in enumerate(self.betas):
                row = {"theta_alpha": alpha, "theta_beta": beta, "global": float(self.accuracy[i, j])}
                if self.long_range is not None:
                    row["long_range_share"] = float(self.long_range[i, j])
                rows.append(row)
        return rows

    def format_table(self) -> str:
        header = "theta_alpha\\theta_beta," + ",".join(f"{b:g}" for b in self.betas)
        lines = [header]
        for i, alpha in enumerate(self.alphas):
            lines.append(f"{alpha:g}," + ",".join(f"{v:.4f}" for v in self.accuracy[i]))
        return "\n".join(lines) + "\n"


def parameter_sweep(
    examples: Sequence[ValidationExample],
    alphas: Sequence[float],
    betas: Sequence[float],
    w1: float = 1.0,
    w2: float = 0.0,
    theta_gamma: float = 1.0,
    iterations: int = DEFAULT_ITERATIONS,
    compatibility: Optional[CompatibilityMatrix] = None,
    normalization: str = "pixelwise",
    long_range_min_length: Optional[float] = None,
) -> SweepSurface:
    """
    Accuracy surface with w1 held fixed and the smoothness kernel off by default.
    """
    Validators.require_all_positive(alphas, "theta_alpha candidates")
    Validators.require_all_positive(betas, "theta_beta candidates")
    scores, shares = grid_scores(
        examples, [w1], alphas, betas, w2, theta_gamma, iterations,
        compatibility, normalization, long_range_min_length,
    )
    a = tuple(float(v) for v in alphas)
    b = tuple(float(v) for v in betas)
    acc = np.array([[scores[(float(w1), x, y)] for y in b] for x in a])
    lr = None
    if shares:
        lr = np.array([[shares[(float(w1), x, y)] for y in b] for x in a])
    surface = SweepSurface(alphas=a, betas=b, accuracy=acc, long_range=lr)
    logger.info("✅ Parameter sweep %dx%d: peak %s", len(a), len(b), surface.peak())
    return surface


__all__ = [
    "ValidationExample",
    "grid_scores",
    "grid_search_kernel_params",
    "parameter_sweep",
    "SweepSurface",
]
