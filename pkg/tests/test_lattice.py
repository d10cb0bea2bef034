import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from src.lattice import (
    FeatureMatrix,
    KernelSpec,
    brute_force_filter,
    build_lattice,
    lattice_filter,
    raw_kernel_sums,
    relative_l2_error,
    whiten_features,
)
from src.lattice.brute_force import exact_kernel_sums, require_cap
from src.lattice.permutohedral import (
    MAX_COORDINATE,
    build_vertex_convolution,
    lattice_scale,
    self_term_divisor,
    vertex_positions,
)


def test_whiten_features_examples():
    out = whiten_features(FeatureMatrix([[2.0, 4.0]]), KernelSpec.from_stddevs([2.0, 4.0]))
    assert np.allclose(out.points, [[1.0, 1.0]])

    pts = np.array([[0.5, -3.0], [7.0, 2.0]])
    same = whiten_features(FeatureMatrix(pts), KernelSpec.from_stddevs([1.0, 1.0]))
    assert np.array_equal(same.points, pts)

    app = whiten_features(FeatureMatrix([[61.0, 0.0, 11.0, 0.0, 0.0]]),
                          KernelSpec.from_stddevs([61, 61, 11, 11, 11]))
    assert np.allclose(app.points, [[1.0, 0.0, 1.0, 0.0, 0.0]])


def test_kernel_spec_rejects_bad_bandwidth():
    with pytest.raises(ValueError, match="non-positive bandwidth"):
        KernelSpec(inv_stddevs=[1.0, 0.0])
    with pytest.raises(ValueError):
        KernelSpec.from_stddevs([1.0, -2.0])


def test_whiten_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        whiten_features(FeatureMatrix(np.zeros((3, 2))), KernelSpec.unit(5))


def test_feature_matrix_rejects_non_finite():
    with pytest.raises(ValueError, match="finite"):
        FeatureMatrix([[0.0, np.nan]])


@pytest.mark.parametrize("dim", [1, 2, 5])
def test_single_point_lattice(dim):
    lattice = build_lattice(FeatureMatrix(np.full((1, dim), 0.37)))
    assert lattice.n_vertices == dim + 1
    assert lattice.weights.sum() == pytest.approx(1.0, abs=1e-12)
    # a lone point only sees itself
    assert lattice.self_weight[0] == pytest.approx(lattice.norm[0], rel=1e-12)
    values = np.array([[3.0, -1.5]])
    assert np.allclose(lattice_filter(lattice, values, normalize=True), values, rtol=1e-12)


def test_coincident_points_share_simplex():
    lattice = build_lattice(FeatureMatrix([[0.3, 1.2, -0.4], [0.3, 1.2, -0.4]]))
    slots, weights = lattice.simplex_refs
    assert np.array_equal(slots[0], slots[1])
    assert np.array_equal(weights[0], weights[1])

    out = lattice_filter(lattice, np.array([[1.0, 0.0], [0.0, 1.0]]), normalize=True)
    assert np.allclose(out, 0.5, atol=1e-12)


def test_vertex_count_matches_distinct_keys(rng):
    points = rng.uniform(0.0, 4.0, size=(1000, 5))
    lattice = build_lattice(FeatureMatrix(points))
    assert lattice.n_vertices <= 1000 * 6
    emitted = {tuple(k) for k in lattice.keys[lattice.slots.reshape(-1)].tolist()}
    assert len(emitted) == lattice.n_vertices
    table = lattice.vertex_table()
    assert len(table) == lattice.n_vertices
    assert np.array_equal(lattice.full_keys.sum(axis=1), np.zeros(lattice.n_vertices))


def _oracle_errors(points, values):
    features = FeatureMatrix(points)
    kernel = KernelSpec.unit(points.shape[1])
    approx = lattice_filter(build_lattice(whiten_features(features, kernel)), values, normalize=True)
    exact = brute_force_filter(features, kernel, values, normalize=True)
    return relative_l2_error(approx, exact)


def test_filter_matches_oracle_d5(rng):
    points = rng.uniform(0.0, 4.0, size=(1000, 5))
    values = rng.uniform(0.0, 1.0, size=(1000, 4))
    assert np.all(_oracle_errors(points, values) <= 0.05)


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("n", [50, 500, 2000])
@pytest.mark.parametrize("spread", [4.0, 10.0])
def test_filter_matches_oracle_d2(n, spread, seed):
    rng = np.random.default_rng(seed)
    points = rng.uniform(0.0, spread, size=(n, 2))
    values = rng.uniform(0.0, 1.0, size=(n, 3))
    assert np.all(_oracle_errors(points, values) <= 0.05)


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("n", [1000, 2000])
def test_filter_matches_oracle_d5_unit_density(n, seed):
    # about one point per unit of whitened volume
    rng = np.random.default_rng(seed)
    spread = n ** (1.0 / 5.0)
    points = rng.uniform(0.0, spread, size=(n, 5))
    values = rng.uniform(0.0, 1.0, size=(n, 3))
    assert np.all(_oracle_errors(points, values) <= 0.05)


@pytest.mark.parametrize("dim", [2, 5])
def test_axis_blur_mass_accounting(rng, dim):
    lattice = build_lattice(FeatureMatrix(rng.uniform(0.0, 6.0, size=(300, dim))))
    m = lattice.n_vertices
    start = lattice.splat(rng.uniform(0.5, 1.5, size=(300, 1)))[:, 0]
    mass = start
    for axis, blur in enumerate(lattice.axis_blurs):
        absent = (lattice.neighbors[axis, :, :m] == m).sum(axis=0)
        dropped = 0.25 * np.dot(mass, absent)
        assert (blur @ mass).sum() == pytest.approx(mass.sum() - dropped, rel=1e-12)
        mass = blur @ mass
    assert np.allclose(lattice.blur(start[:, None])[:, 0], mass, rtol=1e-12, atol=1e-15)


def test_blur_keeps_mass_on_dense_grid(rng):
    ys, xs = np.mgrid[0:200, 0:200]
    points = np.column_stack([xs.ravel(), ys.ravel()]) * 0.5
    points = points + rng.uniform(-0.1, 0.1, size=points.shape)
    lattice = build_lattice(FeatureMatrix(points))
    splatted = lattice.splat(np.ones((points.shape[0], 1)))
    blurred = lattice.blur(splatted)
    assert splatted.sum() == pytest.approx(points.shape[0], rel=1e-9)
    assert blurred.sum() == pytest.approx(splatted.sum(), rel=0.02)


@pytest.mark.parametrize("dim", [2, 5])
def test_vertex_convolution_lone_point(dim):
    lattice = build_lattice(FeatureMatrix(np.full((1, dim), 0.37)))
    conv = lattice.vertex_convolution
    assert conv.scale == pytest.approx(0.75 ** (-dim / 2.0))
    # the corner Gaussian matches the stored vertex geometry
    sq = ((vertex_positions(lattice)[:, None, :] - vertex_positions(lattice)[None, :, :]) ** 2).sum(axis=2)
    dense = np.exp(-sq / 1.5)
    w = np.zeros(lattice.n_vertices)
    np.add.at(w, lattice.slots[0], lattice.weights[0])
    assert conv.self_weight[0] == pytest.approx(conv.scale * w @ dense @ w, rel=1e-12)
    assert raw_kernel_sums(lattice, np.ones(1))[0] == pytest.approx(conv.self_weight[0], rel=1e-12)
    assert raw_kernel_sums(lattice, np.ones(1), exclude_self=True)[0] == pytest.approx(0.0, abs=1e-12)


def test_vertex_convolution_is_symmetric(rng):
    lattice = build_lattice(FeatureMatrix(rng.uniform(0.0, 4.0, size=(200, 3))))
    gaussian = lattice.vertex_convolution.gaussian
    assert abs(gaussian - gaussian.T).max() == 0.0
    assert np.allclose(gaussian.diagonal(), 1.0)
    values = rng.uniform(size=(200, 2))
    out = raw_kernel_sums(lattice, values, exclude_self=True)
    assert np.allclose(values[:, 0] @ out[:, 1], values[:, 1] @ out[:, 0])


@pytest.mark.parametrize("dim, n, spread", [(2, 500, 4.0), (5, 1000, 4.0)])
def test_raw_kernel_sums_total_strength(dim, n, spread):
    rng = np.random.default_rng(7)
    points = rng.uniform(0.0, spread, size=(n, dim))
    lattice = build_lattice(FeatureMatrix(points))
    ones = np.ones((n, 1))
    approx = raw_kernel_sums(lattice, ones, exclude_self=True)[:, 0]
    exact = exact_kernel_sums(points, ones, exclude_self=True)[:, 0]
    assert approx.sum() == pytest.approx(exact.sum(), rel=0.05)


def test_raw_kernel_sums_match_oracle_d2(rng):
    points = rng.uniform(0.0, 6.0, size=(800, 2))
    values = rng.uniform(size=(800, 3))
    lattice = build_lattice(FeatureMatrix(points))
    approx = raw_kernel_sums(lattice, values, exclude_self=True)
    exact = exact_kernel_sums(points, values, exclude_self=True)
    assert np.all(relative_l2_error(approx, exact) <= 0.05)


def test_vertex_convolution_pair_cap(rng):
    lattice = build_lattice(FeatureMatrix(rng.uniform(0.0, 4.0, size=(100, 3))))
    assert build_vertex_convolution(lattice, max_pairs=0) is None


def test_build_lattice_rejects_huge_coordinates():
    with pytest.raises(ValueError, match="out of range"):
        build_lattice(FeatureMatrix([[1e18, 0.0], [0.0, 0.0]]))
    build_lattice(FeatureMatrix([[MAX_COORDINATE / 10.0, 0.0]]))


def test_calibrated_mass_on_dense_grid():
    ys, xs = np.mgrid[0:30, 0:30]
    points = np.column_stack([xs.ravel(), ys.ravel()]) / 2.0
    lattice = build_lattice(FeatureMatrix(points))
    exact = exact_kernel_sums(points, np.ones((points.shape[0], 1)))[:, 0]
    assert lattice.norm.sum() == pytest.approx(exact.sum(), rel=0.05)


def test_lattice_scale_one_dimensional():
    assert lattice_scale(1) == pytest.approx(np.sqrt(8.0 * np.pi / 3.0))


def test_brute_force_examples():
    features = FeatureMatrix([[0.0, 0.0], [1.0, 1.0]])
    values = np.array([[1.0, 0.0], [0.0, 1.0]])
    out = brute_force_filter(features, KernelSpec.unit(2), values, normalize=False)
    e = np.exp(-1.0)
    assert np.allclose(out, [[1.0, e], [e, 1.0]])

    same = FeatureMatrix(np.zeros((3, 2)))
    vals = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    out = brute_force_filter(same, KernelSpec.unit(2), vals, normalize=False)
    assert np.allclose(out, np.tile(vals.sum(axis=0), (3, 1)))


def test_brute_force_cap():
    with pytest.raises(ValueError, match="cap exceeded"):
        require_cap(11, 10)
    with pytest.raises(ValueError, match="cap exceeded"):
        brute_force_filter(FeatureMatrix(np.zeros((5, 1))), KernelSpec.unit(1), np.ones((5, 1)), cap=4)


def test_filter_shape_mismatch(rng):
    lattice = build_lattice(FeatureMatrix(rng.normal(size=(6, 2))))
    with pytest.raises(ValueError, match="rows"):
        lattice_filter(lattice, np.ones((5, 2)))


def test_normalization_modes(rng):
    lattice = build_lattice(FeatureMatrix(rng.uniform(0, 3, size=(50, 3))))
    values = rng.uniform(size=(50, 2))
    raw = lattice_filter(lattice, values, normalize="none")
    assert np.allclose(lattice_filter(lattice, values, normalize=False), raw)
    assert np.allclose(lattice_filter(lattice, values, normalize="pixelwise"), raw / lattice.norm[:, None])
    assert np.allclose(lattice_filter(lattice, values, normalize="global"), raw / lattice.norm.mean())
    assert np.allclose(self_term_divisor(lattice, "none"), lattice.self_weight)
    with pytest.raises(ValueError, match="normalization"):
        lattice_filter(lattice, values, normalize="median")


point_sets = arrays(
    np.float64,
    st.tuples(st.integers(1, 30), st.integers(1, 5)),
    elements=st.floats(-20.0, 20.0, allow_nan=False, allow_infinity=False),
)


@settings(max_examples=100, deadline=None)
@given(points=point_sets)
def test_barycentric_partition_of_unity(points):
    lattice = build_lattice(FeatureMatrix(points))
    assert np.all(lattice.weights >= 0.0)
    assert np.allclose(lattice.weights.sum(axis=1), 1.0, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(points=point_sets, a=st.floats(-3, 3), b=st.floats(-3, 3), seed=st.integers(0, 2**16))
def test_filter_linearity(points, a, b, seed):
    rng = np.random.default_rng(seed)
    n = points.shape[0]
    u, v = rng.normal(size=(n, 2)), rng.normal(size=(n, 2))
    lattice = build_lattice(FeatureMatrix(points))
    for mode in ("none", "pixelwise"):
        lhs = lattice_filter(lattice, a * u + b * v, normalize=mode)
        rhs = a * lattice_filter(lattice, u, normalize=mode) + b * lattice_filter(lattice, v, normalize=mode)
        assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(points=point_sets, seed=st.integers(0, 2**16))
def test_filter_commutes_with_point_order(points, seed):
    rng = np.random.default_rng(seed)
    n = points.shape[0]
    values = rng.uniform(size=(n, 3))
    perm = rng.permutation(n)
    out = lattice_filter(build_lattice(FeatureMatrix(points)), values)
    shuffled = lattice_filter(build_lattice(FeatureMatrix(points[perm])), values[perm])
    assert np.allclose(shuffled, out[perm], rtol=1e-9, atol=1e-12)


@pytest.mark.benchmark
def test_filter_runtime_n1000_d5(rng):
    import time

    points = rng.uniform(0.0, 4.0, size=(1000, 5))
    values = rng.uniform(size=(1000, 4))
    start = time.perf_counter()
    lattice_filter(build_lattice(FeatureMatrix(points)), values)
    assert time.perf_counter() - start < 0.1
