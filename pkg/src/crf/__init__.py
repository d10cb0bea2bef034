"""
CRF package

Fully connected pairwise CRF: model types, feature builders, mean-field
inference and energy diagnostics.
"""

from src.crf.model import (
    CompatibilityMatrix,
    DenseCRFModel,
    MarginalField,
    PairwiseKernel,
    UnaryField,
    build_kernel,
)
from src.crf.features import build_appearance_features, build_smoothness_features, image_kernels
from src.crf.inference import (
    compatibility_transform,
    init_marginals,
    map_labeling,
    mean_field_iteration,
    message_pass,
    run_inference,
)
from src.crf.energy import (
    align_trace,
    average_traces,
    gibbs_energy,
    kl_divergence_estimate,
    long_range_energy_fraction,
)

__all__ = [
    "CompatibilityMatrix",
    "DenseCRFModel",
    "MarginalField",
    "PairwiseKernel",
    "UnaryField",
    "build_kernel",
    "build_appearance_features",
    "build_smoothness_features",
    "image_kernels",
    "init_marginals",
    "message_pass",
    "compatibility_transform",
    "mean_field_iteration",
    "run_inference",
    "map_labeling",
    "gibbs_energy",
    "kl_divergence_estimate",
    "align_trace",
    "average_traces",
    "long_range_energy_fraction",
]
