"""
Energies and convergence diagnostics
====================================

- gibbs_energy: exact Gibbs energy of a labeling (O(N^2), capped)
- kl_divergence_estimate: KL(Q || P) up to the constant log Z, O(N) via filtering
- align_trace / average_traces: helpers for convergence plots
- long_range_energy_fraction: share of pairwise energy on long edges
"""

from typing import Optional, Sequence
import logging

import numpy as np
from scipy.spatial.distance import cdist

from src.crf.inference import kl_from_pairwise, pairwise_term
from src.crf.model import DenseCRFModel, MarginalField
from src.lattice.brute_force import kernel_blocks, require_cap
from src.utils.validators import Validators

logger = logging.getLogger(__name__)

LONG_RANGE_BLOCK_ROWS = 256


def _check_labeling(model: DenseCRFModel, labeling: np.ndarray) -> np.ndarray:
    labels = np.asarray(labeling).reshape(-1)
    if labels.shape[0] != model.n_points:
        raise ValueError(f"❌ shape mismatch: labeling has {labels.shape[0]} entries, expected {model.n_points}")
    return Validators.require_labels(labels, model.n_labels).astype(np.int64)


def gibbs_energy(model: DenseCRFModel, labeling: np.ndarray, cap: Optional[int] = None) -> float:
    """
    E(x) = sum_i psi_u(x_i) + sum_{i<j} mu(x_i, x_j) sum_m w_m k_m(f_i, f_j).

    Pairwise terms use the unnormalized kernels.

    Raises:
        ValueError: cap exceeded, label out of range, length mismatch
    """
    labels = _check_labeling(model, labeling)
    require_cap(model.n_points, cap, "gibbs_energy")
    n = model.n_points
    unary = float(model.unary.costs[np.arange(n), labels].sum())

    onehot = np.zeros((n, model.n_labels))
    onehot[np.arange(n), labels] = 1.0
    mu = model.compatibility.mu
    self_pairs = mu[labels, labels]

    pairwise = 0.0
    for kernel in model.kernels:
        if kernel.weight == 0.0:
            continue
        ordered = 0.0
        for rows, block in kernel_blocks(kernel.whitened_points()):
            # sum_j mu(x_i, x_j) k_ij for each row i
            per_label = (block @ onehot) @ mu.T
            ordered += float(per_label[np.arange(per_label.shape[0]), labels[rows]].sum())
        ordered -= float(self_pairs.sum())
        pairwise += kernel.weight * 0.5 * ordered
    return unary + pairwise


def kl_divergence_estimate(model: DenseCRFModel, q: MarginalField, backend: str = "lattice") -> float:
    """
    KL(Q || P) + log Z = sum Q log Q + sum Q psi_u + 1/2 sum Q Q^.

    The pairwise expectation reuses the filtered messages, so the cost is one
    message pass.
    """
    return kl_from_pairwise(model, q, pairwise_term(model, q, backend))


def align_trace(trace: Sequence[float], at: int) -> np.ndarray:
    """Trace re-based so that entry `at` is zero."""
    values = np.asarray(trace, dtype=np.float64)
    if not 0 <= at < values.size:
        raise ValueError(f"❌ alignment index {at} outside trace of length {values.size}")
    return values - values[at]


def average_traces(traces: Sequence[Sequence[float]]) -> np.ndarray:
    """Element-wise mean of equal-length traces."""
    if not traces:
        raise ValueError("❌ no traces to average")
    lengths = {len(t) for t in traces}
    if len(lengths) != 1:
        raise ValueError(f"❌ traces differ in length: {sorted(lengths)}")
    return np.mean(np.asarray(traces, dtype=np.float64), axis=0)


def long_range_energy_fraction(
    model: DenseCRFModel,
    labeling: np.ndarray,
    min_length: float,
    cap: Optional[int] = None,
) -> float:
    """
    Share of the pairwise energy carried by edges whose spatial length is at
    least `min_length` pixels. Returns 0.0 when there is no pairwise energy.
    """
    labels = _check_labeling(model, labeling)
    require_cap(model.n_points, cap, "long_range_energy_fraction")
    min_length = Validators.require_non_negative(min_length, "min_length")
    positions = model.unary.pixel_positions()
    mu = model.compatibility.mu
    active = [k for k in model.kernels if k.weight > 0]
    if not active:
        return 0.0
    whitened = [k.whitened_points() for k in active]

    total = 0.0
    long_range = 0.0
    n = model.n_points
    for start in range(0, n, LONG_RANGE_BLOCK_ROWS):
        rows = slice(start, min(start + LONG_RANGE_BLOCK_ROWS, n))
        strength = np.zeros((rows.stop - rows.start, n))
        for kernel, points in zip(active, whitened):
            strength += kernel.weight * np.exp(-0.5 * cdist(points[rows], points, metric="sqeuclidean"))
        energy = strength * mu[labels[rows]][:, labels]
        energy[np.arange(energy.shape[0]), np.arange(rows.start, rows.stop)] = 0.0
        lengths = cdist(positions[rows], positions)
        total += float(energy.sum())
        long_range += float(energy[lengths >= min_length].sum())
    if total <= 0.0:
        return 0.0
    return long_range / total


__all__ = [
    "gibbs_energy",
    "kl_divergence_estimate",
    "align_trace",
    "average_traces",
    "long_range_energy_fraction",
]
