"""
Dense CRF Model
===============

Domain types of the fully connected pairwise CRF:

- UnaryField: N x L unary costs over a width x height pixel grid
- CompatibilityMatrix: symmetric L x L label compatibility (Potts by default)
- PairwiseKernel: one (KernelSpec, FeatureMatrix, PermutohedralLattice) triple
- DenseCRFModel: unary + ordered kernels + compatibility
- MarginalField: N x L row-stochastic mean-field marginals

A model is immutable once built; lattices are constructed up front.
"""

from dataclasses import dataclass, field, replace
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple
import logging

import numpy as np

from src.lattice import FeatureMatrix, KernelSpec, PermutohedralLattice, build_lattice, whiten_features
from src.utils.validators import Validators

logger = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-9
NORMALIZATION_MODES = ("pixelwise", "global", "none")


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class UnaryField:
    """Unary potentials psi_u(x_i = l), pixel-row-major, one row per pixel."""

    costs: np.ndarray = field(repr=False)
    width: int
    height: int

    def __post_init__(self):
        costs = np.array(self.costs, dtype=np.float64, copy=True)
        Validators.require_matrix(costs, "unary costs")
        if int(self.width) < 1 or int(self.height) < 1:
            raise ValueError(f"❌ grid dimensions must be positive, got {self.width}x{self.height}")
        if costs.shape[0] != int(self.width) * int(self.height):
            raise ValueError(
                f"❌ dimension mismatch: {costs.shape[0]} unary rows for a {self.width}x{self.height} grid"
            )
        if costs.shape[1] < 2:
            raise ValueError(f"❌ at least 2 labels required, got {costs.shape[1]}")
        Validators.require_finite(costs, "unary costs")
        object.__setattr__(self, "costs", _readonly(costs))
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @property
    def n_points(self) -> int:
        return self.costs.shape[0]

    @property
    def n_labels(self) -> int:
        return self.costs.shape[1]

    def pixel_positions(self) -> np.ndarray:
        """(N, 2) array of (x, y) in row-major order."""
        ys, xs = np.divmod(np.arange(self.n_points), self.width)
        return np.column_stack([xs, ys]).astype(np.float64)


@dataclass(frozen=True)
class CompatibilityMatrix:
    """Symmetric label compatibility mu(a, b)."""

    mu: np.ndarray = field(repr=False)

    def __post_init__(self):
        mu = np.array(self.mu, dtype=np.float64, copy=True)
        Validators.require_matrix(mu, "compatibility", cols=mu.shape[0] if mu.ndim == 2 else None)
        Validators.require_finite(mu, "compatibility")
        if not np.array_equal(mu, mu.T):
            raise ValueError("❌ compatibility matrix must be symmetric")
        object.__setattr__(self, "mu", _readonly(mu))

    @classmethod
    def potts(cls, n_labels: int) -> "CompatibilityMatrix":
        """mu(a, b) = [a != b]."""
        return cls(np.ones((n_labels, n_labels)) - np.eye(n_labels))

    @classmethod
    def symmetrized(cls, mu: np.ndarray) -> "CompatibilityMatrix":
        m = np.asarray(mu, dtype=np.float64)
        return cls((m + m.T) / 2.0)

    @property
    def n_labels(self) -> int:
        return self.mu.shape[0]

    def is_potts(self) -> bool:
        return np.array_equal(self.mu, np.ones_like(self.mu) - np.eye(self.n_labels))

    def permuted(self, perm: Sequence[int]) -> "CompatibilityMatrix":
        """Relabel so that new label a is old label perm[a]."""
        p = np.asarray(perm)
        return CompatibilityMatrix(self.mu[np.ix_(p, p)])


class PairwiseKernel(NamedTuple):
    """One Gaussian kernel of the pairwise potential with its lattice."""

    spec: KernelSpec
    features: FeatureMatrix
    lattice: PermutohedralLattice

    @property
    def weight(self) -> float:
        return self.spec.weight

    def whitened_points(self) -> np.ndarray:
        return whiten_features(self.features, self.spec).points


def build_kernel(spec: KernelSpec, features: FeatureMatrix) -> PairwiseKernel:
    """Whiten features for `spec` and build their lattice."""
    return PairwiseKernel(spec, features, build_lattice(whiten_features(features, spec)))


@dataclass(frozen=True)
class DenseCRFModel:
    """Unary field, ordered Gaussian kernels and label compatibility."""

    unary: UnaryField
    kernels: Tuple[PairwiseKernel, ...]
    compatibility: CompatibilityMatrix
    normalization: str = "pixelwise"

    def __post_init__(self):
        object.__setattr__(self, "kernels", tuple(self.kernels))
        n = self.unary.n_points
        for idx, kernel in enumerate(self.kernels):
            if kernel.features.n_points != n:
                raise ValueError(
                    f"❌ shape mismatch: kernel {idx} has {kernel.features.n_points} feature rows, expected {n}"
                )
            if kernel.weight < 0:
                raise ValueError(f"❌ kernel {idx} weight must be >= 0")
        if self.compatibility.n_labels != self.unary.n_labels:
            raise ValueError(
                f"❌ shape mismatch: compatibility is {self.compatibility.n_labels}x{self.compatibility.n_labels}, "
                f"unary has {self.unary.n_labels} labels"
            )
        if self.normalization not in NORMALIZATION_MODES:
            raise ValueError(f"❌ unknown normalization mode: {self.normalization!r}")

    @classmethod
    def build(
        cls,
        unary: UnaryField,
        kernels: Iterable[Tuple[KernelSpec, FeatureMatrix]],
        compatibility: Optional[CompatibilityMatrix] = None,
        normalization: str = "pixelwise",
    ) -> "DenseCRFModel":
        """Build lattices for every (spec, features) pair."""
        built = tuple(build_kernel(spec, feats) for spec, feats in kernels)
        compat = compatibility or CompatibilityMatrix.potts(unary.n_labels)
        return cls(unary=unary, kernels=built, compatibility=compat, normalization=normalization)

    @classmethod
    def from_image(
        cls,
        image: np.ndarray,
        unary: UnaryField,
        w1: float = 1.0,
        theta_alpha: float = 61.0,
        theta_beta: float = 11.0,
        w2: float = 1.0,
        theta_gamma: float = 1.0,
        compatibility: Optional[CompatibilityMatrix] = None,
        normalization: str = "pixelwise",
    ) -> "DenseCRFModel":
        """Two-kernel contrast-sensitive model: appearance + smoothness."""
        from src.crf.features import image_kernels

        img = np.asarray(image)
        if img.shape[:2] != (unary.height, unary.width):
            raise ValueError(
                f"❌ dimension mismatch between image {img.shape[1]}x{img.shape[0]} "
                f"and unary {unary.width}x{unary.height}"
            )
        kernels = image_kernels(img, w1, theta_alpha, theta_beta, w2, theta_gamma)
        return cls.build(unary, kernels, compatibility, normalization)

    @property
    def n_points(self) -> int:
        return self.unary.n_points

    @property
    def n_labels(self) -> int:
        return self.unary.n_labels

    @property
    def weights(self) -> np.ndarray:
        return np.array([k.weight for k in self.kernels])

    def with_compatibility(self, compatibility: CompatibilityMatrix) -> "DenseCRFModel":
        return replace(self, compatibility=compatibility)

    def with_kernel_weights(self, weights: Sequence[float]) -> "DenseCRFModel":
        """Same lattices, new mixture weights."""
        if len(weights) != len(self.kernels):
            raise ValueError(f"❌ expected {len(self.kernels)} weights, got {len(weights)}")
        kernels = tuple(
            k._replace(spec=k.spec.with_weight(w)) for k, w in zip(self.kernels, weights)
        )
        return replace(self, kernels=kernels)

    def with_kernel(self, index: int, kernel: PairwiseKernel) -> "DenseCRFModel":
        kernels = list(self.kernels)
        kernels[index] = kernel
        return replace(self, kernels=tuple(kernels))

    def with_unary(self, unary: UnaryField) -> "DenseCRFModel":
        return replace(self, unary=unary)


@dataclass(frozen=True)
class MarginalField:
    """Mean-field marginals Q_i(l); every row is a distribution."""

    q: np.ndarray = field(repr=False)

    def __post_init__(self):
        q = np.array(self.q, dtype=np.float64, copy=True)
        Validators.require_matrix(q, "marginals")
        if np.any(q < 0) or np.any(q > 1) or not np.all(np.isfinite(q)):
            raise ValueError("❌ marginals must lie in [0, 1]")
        if not np.allclose(q.sum(axis=1), 1.0, rtol=0.0, atol=ROW_SUM_TOL):
            raise ValueError(f"❌ marginal rows must sum to 1 (tolerance {ROW_SUM_TOL})")
        object.__setattr__(self, "q", _readonly(q))

    @property
    def n_points(self) -> int:
        return self.q.shape[0]

    @property
    def n_labels(self) -> int:
        return self.q.shape[1]


__all__ = [
    "UnaryField",
    "CompatibilityMatrix",
    "PairwiseKernel",
    "DenseCRFModel",
    "MarginalField",
    "build_kernel",
    "NORMALIZATION_MODES",
]
