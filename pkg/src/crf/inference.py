"""
Mean-field inference
====================

Parallel mean-field updates for the fully connected CRF:

    Q_i(x) ∝ exp{-psi_u(x) - sum_l mu(x, l) sum_m w_m Q~m_i(l)}

Messages Q~m are Gaussian-filtered marginals with each point's own
contribution removed. Two message backends exist: "lattice" (linear time,
default) and "brute_force" (exact O(N^2), for oracle checks on small
images).
"""

from typing import List, Optional, Sequence
import logging

import numpy as np
from scipy.special import softmax, xlogy

from src.crf.model import DenseCRFModel, MarginalField, UnaryField
from src.lattice.brute_force import exact_kernel_sums, require_cap
from src.lattice.permutohedral import NORM_EPS, lattice_filter, self_term_divisor
from src.utils.validators import Validators

logger = logging.getLogger(__name__)

DEFAULT_ITERATIONS = 10
MESSAGE_BACKENDS = ("lattice", "brute_force")


def init_marginals(unary: UnaryField) -> MarginalField:
    """Row-wise softmax of the negated unary costs."""
    return MarginalField(softmax(-unary.costs, axis=1))


def _check_marginals(model: DenseCRFModel, q: MarginalField) -> np.ndarray:
    Validators.require_matrix(q.q, "marginals", rows=model.n_points, cols=model.n_labels)
    return q.q


def _brute_force_message(model: DenseCRFModel, index: int, q: np.ndarray) -> np.ndarray:
    kernel = model.kernels[index]
    require_cap(model.n_points, None, "brute-force message passing")
    points = kernel.whitened_points()
    sums = exact_kernel_sums(points, np.hstack([q, np.ones((q.shape[0], 1))]))
    messages = sums[:, :-1] - q
    if model.normalization == "pixelwise":
        messages /= np.maximum(sums[:, -1:], NORM_EPS)
    elif model.normalization == "global":
        messages /= max(float(sums[:, -1].mean()), NORM_EPS)
    return messages


def _lattice_message(model: DenseCRFModel, index: int, q: np.ndarray) -> np.ndarray:
    lattice = model.kernels[index].lattice
    mode = model.normalization
    return lattice_filter(lattice, q, normalize=mode) - q * self_term_divisor(lattice, mode)[:, None]


def message_pass(
    model: DenseCRFModel,
    q: MarginalField,
    backend: str = "lattice",
    kernels: Optional[Sequence[int]] = None,
) -> List[np.ndarray]:
    """
    Per-kernel filtered marginals with self-exclusion.

    Args:
        model: CRF model with prebuilt lattices
        q: current marginals
        backend: "lattice" or "brute_force"
        kernels: subset of kernel indices (default all); skipped kernels get zeros

    Returns:
        One N x L matrix per kernel, in model order

    Raises:
        ValueError: shape mismatch, unknown backend, cap exceeded (brute force)
    """
    if backend not in MESSAGE_BACKENDS:
        raise ValueError(f"❌ unknown message backend: {backend!r}")
    values = _check_marginals(model, q)
    selected = range(len(model.kernels)) if kernels is None else set(kernels)
    compute = _lattice_message if backend == "lattice" else _brute_force_message
    return [
        compute(model, idx, values) if idx in selected else np.zeros_like(values)
        for idx in range(len(model.kernels))
    ]


def compatibility_transform(qtilde: Sequence[np.ndarray], model: DenseCRFModel) -> np.ndarray:
    """Q^ = (sum_m w_m Q~m) mu^T."""
    if len(qtilde) != len(model.kernels):
        raise ValueError(f"❌ expected {len(model.kernels)} message matrices, got {len(qtilde)}")
    combined = np.zeros((model.n_points, model.n_labels))
    for kernel, messages in zip(model.kernels, qtilde):
        Validators.require_matrix(messages, "messages", rows=model.n_points, cols=model.n_labels)
        if kernel.weight != 0.0:
            combined += kernel.weight * messages
    return combined @ model.compatibility.mu.T


def _active_kernels(model: DenseCRFModel) -> List[int]:
    return [idx for idx, k in enumerate(model.kernels) if k.weight > 0]


def pairwise_term(model: DenseCRFModel, q: MarginalField, backend: str = "lattice") -> np.ndarray:
    """Q^ for the current marginals, skipping zero-weight kernels."""
    active = _active_kernels(model)
    if not active:
        _check_marginals(model, q)
        return np.zeros((model.n_points, model.n_labels))
    return compatibility_transform(message_pass(model, q, backend, kernels=active), model)


def _update(model: DenseCRFModel, pairwise: np.ndarray) -> MarginalField:
    return MarginalField(softmax(-model.unary.costs - pairwise, axis=1))


def mean_field_iteration(model: DenseCRFModel, q: MarginalField, backend: str = "lattice") -> MarginalField:
    """One simultaneous update of every marginal from the previous Q."""
    return _update(model, pairwise_term(model, q, backend))


def kl_from_pairwise(model: DenseCRFModel, q: MarginalField, pairwise: np.ndarray) -> float:
    """Sum Q log Q + sum Q psi_u + 1/2 sum Q Q^, given Q^ for q."""
    values = q.q
    entropy = float(np.sum(xlogy(values, values)))
    unary = float(np.sum(values * model.unary.costs))
    pair = 0.5 * float(np.sum(values * pairwise))
    return entropy + unary + pair


def run_inference(
    model: DenseCRFModel,
    iterations: int = DEFAULT_ITERATIONS,
    kl_trace: Optional[List[float]] = None,
    backend: str = "lattice",
    initial: Optional[MarginalField] = None,
) -> MarginalField:
    """
    Run `iterations` mean-field updates from init_marginals (or `initial`).

    If `kl_trace` is a list, the KL estimate of every iterate (iteration 0 =
    starting point) is appended to it, iterations + 1 entries in total.

    Raises:
        ValueError: negative iteration count
    """
    if int(iterations) < 0:
        raise ValueError(f"❌ iterations must be >= 0, got {iterations}")
    q = init_marginals(model.unary) if initial is None else initial
    for it in range(int(iterations)):
        pairwise = pairwise_term(model, q, backend)
        if kl_trace is not None:
            kl_trace.append(kl_from_pairwise(model, q, pairwise))
            logger.debug("iteration %d KL=%.6f", it, kl_trace[-1])
        q = _update(model, pairwise)
    if kl_trace is not None:
        kl_trace.append(kl_from_pairwise(model, q, pairwise_term(model, q, backend)))
    logger.debug("Mean-field inference finished: %d iterations, N=%d, L=%d",
                 int(iterations), model.n_points, model.n_labels)
    return q


def map_labeling(q: MarginalField) -> np.ndarray:
    """Argmax label per row; ties go to the lowest label index."""
    return np.argmax(q.q, axis=1)


__all__ = [
    "init_marginals",
    "message_pass",
    "compatibility_transform",
    "pairwise_term",
    "mean_field_iteration",
    "run_inference",
    "map_labeling",
    "kl_from_pairwise",
    "DEFAULT_ITERATIONS",
    "MESSAGE_BACKENDS",
]
