"""
Permutohedral Lattice
=====================

Approximate Gaussian filtering in d dimensions in O(N*d):

    splat  - scatter each point's value to the d+1 vertices of its enclosing
             simplex with barycentric weights
    blur   - [1, 2, 1] / 4 along each of the d+1 lattice axes, axes 0..d in order
    slice  - gather back at the points with the same weights

Points are expected in whitened coordinates (unit-variance kernel). The
lattice spacing is one standard deviation of that kernel.

Splat, the per-axis blurs and slice are sparse matrices built once per
lattice; adjacent factors are multiplied out at build time when the product
is no denser than the two factors.

The blur only moves mass between stored vertices, and mass sent towards an
absent neighbor is dropped. Unnormalized kernel sums used by learning come
from `raw_kernel_sums`, which replaces the axis blur by a truncated Gaussian
between stored vertices.

A built lattice is immutable; filtering allocates its own buffers, so
concurrent calls on one lattice are safe.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from src.lattice.features import FeatureMatrix
from src.utils.validators import Validators

logger = logging.getLogger(__name__)

NORM_EPS = 1e-20
NormalizeMode = Union[bool, str]

# whitened coordinates beyond this overflow the int64 lattice keys
MAX_COORDINATE = 1e9

# splat and slice each add 1/8 of variance per whitened axis on average
VERTEX_VARIANCE = 0.75
VERTEX_CUTOFF = 1e-4
MAX_VERTEX_PAIRS = 20_000_000

_PACK_LIMIT = 1 << 62


def lattice_scale(dim: int) -> float:
    """
    Ratio between the Gaussian mass (2*pi)^(d/2) and the lattice kernel mass.

    With the elevation used here the lattice covers (3/2)^(d/2) / sqrt(d+1)
    units of whitened volume per vertex and blur preserves mass, so raw output
    times this constant approximates sum_j exp(-|f_i - f_j|^2 / 2) v_j.
    """
    return (4.0 * math.pi / 3.0) ** (dim / 2.0) * math.sqrt(dim + 1.0)


def _elevation_matrix(dim: int) -> np.ndarray:
    """(d, d+1) map onto the hyperplane sum(x) = 0, scaled to the lattice."""
    dp1 = dim + 1
    inv_std = math.sqrt(2.0 / 3.0) * dp1
    elev = np.zeros((dim, dp1))
    for i in range(dim):
        elev[i, : i + 1] = 1.0
        elev[i, i + 1] = -(i + 1.0)
        elev[i] *= inv_std / math.sqrt((i + 1.0) * (i + 2.0))
    return elev


def _canonical_simplex(dim: int) -> np.ndarray:
    """canonical[k, r]: offset of remainder-k vertex for a coordinate of rank r."""
    dp1 = dim + 1
    k = np.arange(dp1)[:, None]
    r = np.arange(dp1)[None, :]
    return np.where(r <= dim - k, k, k - dp1).astype(np.int64)


def _locate_simplices(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Elevate points, find the enclosing simplex by rank sorting, and compute
    barycentric weights.

    Returns:
        keys: (N, d+1, d) integer coordinates of each simplex vertex (last
              coordinate dropped, implied by the zero sum)
        weights: (N, d+1) barycentric weights
        rank: (N, d+1) rank of each elevated coordinate's residual
    """
    n, dim = points.shape
    dp1 = dim + 1
    elevated = points @ _elevation_matrix(dim)

    # nearest remainder-0 point; ties round down
    rounded = np.ceil(elevated / dp1 - 0.5)
    rem0 = (rounded * dp1).astype(np.int64)
    coord_sum = rounded.sum(axis=1).astype(np.int64)[:, None]

    residual = elevated - rem0
    order = np.argsort(-residual, axis=1, kind="stable")
    rank = np.empty_like(order)
    np.put_along_axis(rank, order, np.broadcast_to(np.arange(dp1), order.shape), axis=1)

    # walk rem0 back onto the hyperplane when the rounded coordinates do not sum to 0
    rank = rank + coord_sum
    over = (coord_sum > 0) & (rank >= dp1)
    rem0[over] -= dp1
    rank[over] -= dp1
    under = (coord_sum < 0) & (rank < 0)
    rem0[under] += dp1
    rank[under] += dp1

    delta = (elevated - rem0) / dp1
    bary = np.zeros((n, dp1 + 1))
    rows = np.arange(n)[:, None]
    bary[rows, dim - rank] += delta
    bary[rows, dim + 1 - rank] -= delta
    bary[:, 0] += 1.0 + bary[:, dp1]
    weights = np.clip(bary[:, :dp1], 0.0, None)

    offsets = _canonical_simplex(dim)[:, rank].transpose(1, 0, 2)  # (N, d+1, d+1)
    keys = rem0[:, None, :dim] + offsets[:, :, :dim]
    return keys, weights, rank


class _VertexTable:
    """
    Exact-key vertex table. Keys are packed into int64 with a mixed radix when
    the coordinate span allows it (sorted array + searchsorted); otherwise a
    dict keyed by coordinate tuples is used.
    """

    def __init__(self, flat_keys: np.ndarray, margin: int):
        self.dim = flat_keys.shape[1]
        lo = flat_keys.min(axis=0) - margin
        hi = flat_keys.max(axis=0) + margin
        spans = [int(h - l + 1) for l, h in zip(lo, hi)]
        total = 1
        for s in spans:
            total *= s
        self.packed = total < _PACK_LIMIT
        if self.packed:
            mult = np.ones(self.dim, dtype=np.int64)
            for i in range(self.dim - 2, -1, -1):
                mult[i] = mult[i + 1] * spans[i + 1]
            self._lo = lo.astype(np.int64)
            self._mult = mult
            codes = self._encode(flat_keys)
            self._codes, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
            self.keys = flat_keys[first]
            self.inverse = inverse.reshape(-1)
        else:
            logger.debug("⚠️  lattice key span too wide for packed codes, using dict table")
            self._table: Dict[tuple, int] = {}
            inverse = np.empty(flat_keys.shape[0], dtype=np.int64)
            rows = []
            for idx, row in enumerate(map(tuple, flat_keys.tolist())):
                slot = self._table.get(row)
                if slot is None:
                    slot = len(rows)
                    self._table[row] = slot
                    rows.append(row)
                inverse[idx] = slot
            self.keys = np.asarray(rows, dtype=np.int64).reshape(-1, self.dim)
            self.inverse = inverse

    @property
    def size(self) -> int:
        return self.keys.shape[0]

    def _encode(self, keys: np.ndarray) -> np.ndarray:
        return ((keys - self._lo) * self._mult).sum(axis=1)

    def lookup(self, keys: np.ndarray) -> np.ndarray:
        """Slot of each key row, or `size` when absent."""
        m = self.size
        if self.packed:
            codes = self._encode(keys)
            pos = np.searchsorted(self._codes, codes)
            pos_c = np.minimum(pos, m - 1)
            return np.where(self._codes[pos_c] == codes, pos_c, m)
        return np.fromiter(
            (self._table.get(row, m) for row in map(tuple, keys.tolist())),
            dtype=np.int64,
            count=keys.shape[0],
        )



@dataclass(frozen=True)
class VertexConvolution:
    """
    Truncated Gaussian between stored lattice vertices.

    Attributes:
        gaussian: (M, M) symmetric CSR, exp(-|x_u - x_v|^2 / (2 * variance))
                  for vertex pairs above the cutoff, unit diagonal
        self_weight: (N,) response of each point to its own splatted mass
        scale: variance^(-d/2); scaled slice(gaussian @ splat(v)) approximates
               sum_j exp(-|f_i - f_j|^2 / 2) v_j
    """

    gaussian: sparse.csr_matrix = field(repr=False)
    self_weight: np.ndarray = field(repr=False)
    scale: float
    variance: float = VERTEX_VARIANCE


@dataclass(frozen=True)
class PermutohedralLattice:
    """
    Sparse lattice built over N whitened points.

    Attributes:
        keys: (M, d) vertex coordinates (first d of d+1, zero sum implied)
        slots: (N, d+1) vertex slot of each simplex corner per point
        weights: (N, d+1) barycentric weights per point
        neighbors: (d+1, 2, M+1) slot of the -/+ neighbor along each axis;
                   index M stands for an absent vertex
        norm: (N,) pixelwise normalization constants k_hat_i (calibrated)
        self_weight: (N,) the lattice's own estimate of k(f_i, f_i) (calibrated)
        scale: calibration constant applied to raw output
        axis_blurs: per-axis [1, 2, 1] / 4 operators, in blur order
        blur_chain: axis_blurs with adjacent factors multiplied out
        filter_chain: splat, blur and slice with adjacent factors multiplied out
    """

    dim: int
    keys: np.ndarray = field(repr=False)
    slots: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    neighbors: np.ndarray = field(repr=False)
    norm: np.ndarray = field(repr=False)
    self_weight: np.ndarray = field(repr=False)
    scale: float = 1.0
    splat_matrix: sparse.csr_matrix = field(repr=False, default=None)
    slice_matrix: sparse.csr_matrix = field(repr=False, default=None)
    axis_blurs: Tuple[sparse.csr_matrix, ...] = field(repr=False, default=())
    blur_chain: Tuple[sparse.csr_matrix, ...] = field(repr=False, default=())
    filter_chain: Tuple[sparse.csr_matrix, ...] = field(repr=False, default=())

    @property
    def n_points(self) -> int:
        return self.slots.shape[0]

    @property
    def n_vertices(self) -> int:
        return self.keys.shape[0]

    @property
    def simplex_refs(self) -> Tuple[np.ndarray, np.ndarray]:
        """Per point (slot, barycentric weight) pairs."""
        return self.slots, self.weights

    @property
    def full_keys(self) -> np.ndarray:
        """(M, d+1) keys with the implied last coordinate restored."""
        return np.hstack([self.keys, -self.keys.sum(axis=1, keepdims=True)])

    def vertex_table(self) -> Dict[tuple, int]:
        """Map from lattice key (d coordinates) to accumulator slot."""
        return {tuple(k): i for i, k in enumerate(self.keys.tolist())}

    @property
    def global_norm(self) -> float:
        """Average kernel strength (1/N) sum_i k_hat_i."""
        return float(self.norm.mean())

    @cached_property
    def vertex_convolution(self) -> Optional[VertexConvolution]:
        """Built on first use; None when the vertex neighborhood is too large."""
        return build_vertex_convolution(self)

    # ------------------------------------------------------------------
    # splat / blur / slice
    # ------------------------------------------------------------------

    def splat(self, values: np.ndarray) -> np.ndarray:
        return self.splat_matrix @ values

    def blur(self, vertex_values: np.ndarray) -> np.ndarray:
        return _apply_chain(self.blur_chain, vertex_values)

    def slice(self, vertex_values: np.ndarray) -> np.ndarray:
        return self.slice_matrix @ vertex_values

    def raw_filter(self, values: np.ndarray) -> np.ndarray:
        """Calibrated splat-blur-slice of an (N, L) matrix, self term included."""
        return self.scale * _apply_chain(self.filter_chain, values)


def _apply_chain(chain: Sequence[sparse.csr_matrix], values: np.ndarray) -> np.ndarray:
    out = values
    for op in chain:
        out = op @ out
    return np.asarray(out)


def _axis_blur(neighbors: np.ndarray, axis: int, m: int) -> sparse.csr_matrix:
    """[1, 2, 1] / 4 along one axis; row u gathers from u and its stored neighbors."""
    rows = [np.arange(m)]
    cols = [np.arange(m)]
    data = [np.full(m, 0.5)]
    for side in (0, 1):
        nb = neighbors[axis, side, :m]
        present = np.flatnonzero(nb < m)
        rows.append(present)
        cols.append(nb[present])
        data.append(np.full(present.size, 0.25))
    return sparse.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m)
    )


def _compose(chain: Sequence[sparse.csr_matrix]) -> Tuple[sparse.csr_matrix, ...]:
    """
    Multiply out adjacent operators (applied first to last) while the product
    has no more nonzeros than the pair it replaces.
    """
    merged: List[sparse.csr_matrix] = [chain[0]]
    for op in chain[1:]:
        prev = merged[-1]
        budget = op.nnz + prev.nnz
        # nnz(op @ prev) <= sum_k nnz(op[:, k]) * nnz(prev[k, :])
        bound = int(np.dot(np.bincount(op.indices, minlength=op.shape[1]), np.diff(prev.indptr)))
        if bound <= 4 * budget:
            product = (op @ prev).tocsr()
            if product.nnz <= budget:
                merged[-1] = product
                continue
        merged.append(op)
    return tuple(merged)


def _self_response(slots: np.ndarray, weights: np.ndarray, rank: np.ndarray, neighbors: np.ndarray,
                   sentinel: int) -> np.ndarray:
    """
    Response of every point to its own splatted unit mass through the blur.

    Between two corners of a simplex the blur only moves mass along lattice
    axis steps, and the d+1 axis vectors sum to zero, so each corner pair is
    joined by at most three step patterns. Each pattern is walked through the
    neighbor table; a walk that leaves the stored vertices carries no mass.
    """
    n, dp1 = slots.shape
    dim = dp1 - 1
    total = np.zeros(n)
    for k_to in range(dp1):
        for k_from in range(dp1):
            pair_w = weights[:, k_to] * weights[:, k_from]
            if k_to > k_from:
                base = -((rank > dim - k_to) & (rank <= dim - k_from)).astype(np.int64)
            elif k_to < k_from:
                base = ((rank > dim - k_from) & (rank <= dim - k_to)).astype(np.int64)
            else:
                base = np.zeros_like(rank)
            m = abs(k_to - k_from)
            shifts = [(0, dp1 - m)]
            if k_to >= k_from:
                shifts.append((1, m))
            if k_to <= k_from:
                shifts.append((-1, m))
            for shift, zeros in shifts:
                steps = base + shift
                cur = slots[:, k_from].copy()
                for axis in range(dp1):
                    for step, side in ((-1, 0), (1, 1)):
                        idx = np.flatnonzero(steps[:, axis] == step)
                        if idx.size:
                            cur[idx] = neighbors[axis, side, cur[idx]]
                coef = 0.5 ** zeros * 0.25 ** (dp1 - zeros)
                total += coef * pair_w * (cur != sentinel)
    return total


def vertex_positions(lattice: PermutohedralLattice) -> np.ndarray:
    """(M, d) whitened coordinates of the stored vertices."""
    dp1 = lattice.dim + 1
    inv_var = 2.0 / 3.0 * dp1 * dp1
    return lattice.full_keys @ _elevation_matrix(lattice.dim).T / inv_var


def _corner_gaussian(dim: int, variance: float) -> np.ndarray:
    """(d+1, d+1) vertex Gaussian between the corners of one simplex."""
    dp1 = dim + 1
    k = np.arange(dp1)
    gap = np.abs(k[:, None] - k[None, :])
    sq_dist = 1.5 * gap * (dp1 - gap) / dp1
    return np.exp(-sq_dist / (2.0 * variance))


def build_vertex_convolution(
    lattice: PermutohedralLattice,
    variance: float = VERTEX_VARIANCE,
    cutoff: float = VERTEX_CUTOFF,
    max_pairs: int = MAX_VERTEX_PAIRS,
) -> Optional[VertexConvolution]:
    """
    Gaussian of `variance` between every pair of stored vertices closer than
    the `cutoff` radius. Returns None when there are more than `max_pairs`
    such pairs.
    """
    m = lattice.n_vertices
    positions = vertex_positions(lattice)
    radius = math.sqrt(-2.0 * variance * math.log(cutoff))
    tree = cKDTree(positions)
    n_pairs = (int(tree.count_neighbors(tree, radius)) - m) // 2
    if n_pairs > max_pairs:
        logger.warning(
            "⚠️  %d vertex pairs within radius %.2f exceed %d; raw sums use the axis blur",
            n_pairs, radius, max_pairs,
        )
        return None

    pairs = tree.query_pairs(radius, output_type="ndarray")
    u, v = pairs[:, 0], pairs[:, 1]
    sq = np.sum((positions[u] - positions[v]) ** 2, axis=1)
    entries = np.exp(-sq / (2.0 * variance))
    diag = np.arange(m)
    gaussian = sparse.csr_matrix(
        (np.concatenate([entries, entries, np.ones(m)]),
         (np.concatenate([u, v, diag]), np.concatenate([v, u, diag]))),
        shape=(m, m),
    )

    scale = variance ** (-lattice.dim / 2.0)
    corner = _corner_gaussian(lattice.dim, variance)
    self_weight = scale * np.einsum("nk,kl,nl->n", lattice.weights, corner, lattice.weights)
    self_weight.setflags(write=False)
    logger.debug("Vertex convolution built: M=%d pairs=%d", m, n_pairs)
    return VertexConvolution(gaussian=gaussian, self_weight=self_weight, scale=scale, variance=variance)


def build_lattice(whitened: FeatureMatrix) -> PermutohedralLattice:
    """
    Build the lattice over whitened feature points.

    Every point is embedded on the lattice hyperplane, its enclosing simplex
    found by rank sorting and its d+1 barycentric weights recorded. Points with
    the same enclosing simplex share vertex slots. Normalization constants and
    self weights are precomputed.

    Raises:
        ValueError: a coordinate beyond MAX_COORDINATE
    """
    points = whitened.points
    n, dim = points.shape
    dp1 = dim + 1

    peak = float(np.abs(points).max()) if points.size else 0.0
    if peak > MAX_COORDINATE:
        raise ValueError(
            f"❌ whitened feature coordinate {peak:.3g} out of range (limit {MAX_COORDINATE:.0e})"
        )

    keys, weights, rank = _locate_simplices(points)
    table = _VertexTable(keys.reshape(-1, dim), margin=dp1 + 1)
    m = table.size
    slots = table.inverse.reshape(n, dp1)

    neighbors = np.full((dp1, 2, m + 1), m, dtype=np.int64)
    for axis in range(dp1):
        step = np.ones(dim, dtype=np.int64)
        if axis < dim:
            step[axis] = -dim
        # step == key - e_axis, where e_axis = (d+1) * unit_axis - 1
        neighbors[axis, 0, :m] = table.lookup(table.keys + step)
        neighbors[axis, 1, :m] = table.lookup(table.keys - step)

    point_idx = np.repeat(np.arange(n), dp1)
    splat_matrix = sparse.csr_matrix(
        (weights.reshape(-1), (slots.reshape(-1), point_idx)), shape=(m, n)
    )
    slice_matrix = splat_matrix.T.tocsr()
    axis_blurs = tuple(_axis_blur(neighbors, axis, m) for axis in range(dp1))
    blur_chain = _compose(axis_blurs)
    filter_chain = _compose((splat_matrix,) + blur_chain + (slice_matrix,))

    scale = lattice_scale(dim)
    self_weight = scale * _self_response(slots, weights, rank, neighbors, sentinel=m)

    for arr in (table.keys, weights, slots, neighbors, self_weight):
        arr.setflags(write=False)

    lattice = PermutohedralLattice(
        dim=dim,
        keys=table.keys,
        slots=slots,
        weights=weights,
        neighbors=neighbors,
        norm=np.empty(0),
        self_weight=self_weight,
        scale=scale,
        splat_matrix=splat_matrix,
        slice_matrix=slice_matrix,
        axis_blurs=axis_blurs,
        blur_chain=blur_chain,
        filter_chain=filter_chain,
    )
    norm = lattice.raw_filter(np.ones((n, 1)))[:, 0]
    norm.setflags(write=False)
    object.__setattr__(lattice, "norm", norm)

    logger.debug("Lattice built: N=%d d=%d vertices=%d operators=%d", n, dim, m, len(filter_chain))
    return lattice


def _normalizer(lattice: PermutohedralLattice, normalize: NormalizeMode) -> Optional[np.ndarray]:
    """Per-row divisor for a normalization mode, or None for raw output."""
    if normalize is True:
        mode = "pixelwise"
    elif normalize is False:
        mode = "none"
    else:
        mode = normalize
    if mode == "pixelwise":
        return np.maximum(lattice.norm, NORM_EPS)
    if mode == "global":
        return np.full(lattice.n_points, max(lattice.global_norm, NORM_EPS))
    if mode == "none":
        return None
    raise ValueError(f"❌ unknown normalization mode: {normalize!r}")


def lattice_filter(
    lattice: PermutohedralLattice,
    values: np.ndarray,
    normalize: NormalizeMode = True,
) -> np.ndarray:
    """
    Approximate sum_j k(f_i, f_j) * values_j (self term included).

    Args:
        lattice: Built lattice
        values: (N, L) or (N,) matrix
        normalize: True / "pixelwise" divides row i by k_hat_i; "global" by the
            average k_hat; False / "none" returns the calibrated raw sums

    Returns:
        Array shaped like `values`

    Raises:
        ValueError: shape mismatch or non-finite values
    """
    vals = np.asarray(values, dtype=np.float64)
    squeeze = vals.ndim == 1
    if squeeze:
        vals = vals[:, None]
    Validators.require_matrix(vals, "values", rows=lattice.n_points)
    Validators.require_finite(vals, "values")

    out = lattice.raw_filter(vals)
    divisor = _normalizer(lattice, normalize)
    if divisor is not None:
        out = out / divisor[:, None]
    return out[:, 0] if squeeze else out


def raw_kernel_sums(
    lattice: PermutohedralLattice,
    values: np.ndarray,
    exclude_self: bool = False,
) -> np.ndarray:
    """
    Unnormalized sum_j exp(-|f_i - f_j|^2 / 2) * values_j through the vertex
    convolution; j == i is left out when `exclude_self` is set.

    Falls back to the calibrated axis blur when the vertex convolution is not
    available for this lattice.
    """
    vals = np.asarray(values, dtype=np.float64)
    squeeze = vals.ndim == 1
    if squeeze:
        vals = vals[:, None]
    Validators.require_matrix(vals, "values", rows=lattice.n_points)
    Validators.require_finite(vals, "values")

    conv = lattice.vertex_convolution
    if conv is None:
        out = lattice.raw_filter(vals)
        self_weight = lattice.self_weight
    else:
        out = conv.scale * (lattice.slice_matrix @ (conv.gaussian @ (lattice.splat_matrix @ vals)))
        self_weight = conv.self_weight
    if exclude_self:
        out = out - vals * self_weight[:, None]
    return out[:, 0] if squeeze else out


def self_term_divisor(lattice: PermutohedralLattice, normalize: NormalizeMode) -> np.ndarray:
    """self_weight / divisor for each point, under a normalization mode."""
    divisor = _normalizer(lattice, normalize)
    if divisor is None:
        return lattice.self_weight.copy()
    return lattice.self_weight / divisor


__all__ = [
    "PermutohedralLattice",
    "VertexConvolution",
    "build_lattice",
    "build_vertex_convolution",
    "lattice_filter",
    "lattice_scale",
    "raw_kernel_sums",
    "self_term_divisor",
    "vertex_positions",
    "MAX_COORDINATE",
    "NORM_EPS",
]
