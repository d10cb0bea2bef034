"""
Lattice package

Approximate high-dimensional Gaussian filtering over feature points.
"""

from src.lattice.features import FeatureMatrix, KernelSpec, whiten_features
from src.lattice.permutohedral import (
    PermutohedralLattice,
    build_lattice,
    lattice_filter,
    raw_kernel_sums,
)
from src.lattice.brute_force import brute_force_filter, relative_l2_error, DEFAULT_BRUTE_FORCE_CAP

__all__ = [
    "FeatureMatrix",
    "KernelSpec",
    "whiten_features",
    "PermutohedralLattice",
    "build_lattice",
    "lattice_filter",
    "raw_kernel_sums",
    "brute_force_filter",
    "relative_l2_error",
    "DEFAULT_BRUTE_FORCE_CAP",
]
