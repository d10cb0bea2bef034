import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import logsumexp, softmax

from crf_helpers import direct_update, random_unary
from src.crf import (
    CompatibilityMatrix,
    DenseCRFModel,
    MarginalField,
    UnaryField,
    align_trace,
    average_traces,
    build_appearance_features,
    build_smoothness_features,
    compatibility_transform,
    gibbs_energy,
    init_marginals,
    kl_divergence_estimate,
    long_range_energy_fraction,
    map_labeling,
    mean_field_iteration,
    message_pass,
    run_inference,
)
from src.lattice import FeatureMatrix, KernelSpec, relative_l2_error


def coincident_model(costs, weight=1.0, compatibility=None):
    unary = UnaryField(np.asarray(costs, dtype=np.float64), width=len(costs), height=1)
    feats = FeatureMatrix(np.zeros((len(costs), 2)))
    return DenseCRFModel.build(unary, [(KernelSpec.unit(2, weight), feats)], compatibility)


# ============================================================================
# MODEL TYPES
# ============================================================================

def test_unary_field_validation():
    with pytest.raises(ValueError, match="dimension mismatch"):
        UnaryField(np.zeros((5, 2)), width=2, height=2)
    with pytest.raises(ValueError, match="2 labels"):
        UnaryField(np.zeros((4, 1)), width=2, height=2)
    with pytest.raises(ValueError, match="finite"):
        UnaryField(np.array([[0.0, np.inf]]), width=1, height=1)


def test_compatibility_must_be_symmetric():
    with pytest.raises(ValueError, match="symmetric"):
        CompatibilityMatrix([[0.0, 1.0], [2.0, 0.0]])
    potts = CompatibilityMatrix.potts(3)
    assert potts.is_potts()
    assert np.array_equal(potts.mu, [[0, 1, 1], [1, 0, 1], [1, 1, 0]])


def test_model_rejects_mismatched_parts(rng):
    unary = random_unary(2, 2, 3, rng)
    with pytest.raises(ValueError, match="shape mismatch"):
        DenseCRFModel.build(unary, [(KernelSpec.unit(2), FeatureMatrix(np.zeros((3, 2))))])
    with pytest.raises(ValueError, match="shape mismatch"):
        DenseCRFModel.build(unary, [], CompatibilityMatrix.potts(2))
    with pytest.raises(ValueError, match="dimension mismatch"):
        DenseCRFModel.from_image(np.zeros((3, 2, 3)), unary)


def test_marginal_field_rows_must_sum_to_one():
    with pytest.raises(ValueError, match="sum to 1"):
        MarginalField([[0.5, 0.4]])
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        MarginalField([[1.5, -0.5]])


# ============================================================================
# FEATURES
# ============================================================================

def test_appearance_features_examples():
    img = np.zeros((1, 1, 3), dtype=np.uint8)
    img[0, 0] = (255, 0, 0)
    feats = build_appearance_features(img, 61.0, 11.0)
    assert np.allclose(feats.points, [[0.0, 0.0, 255.0 / 11.0, 0.0, 0.0]])
    assert feats.points[0, 2] == pytest.approx(23.1818, abs=1e-4)

    grid = np.zeros((5, 4, 3), dtype=np.uint8)
    feats = build_appearance_features(grid, 1.0, 1.0)
    assert np.allclose(feats.points[4 * 4 + 3], [3.0, 4.0, 0.0, 0.0, 0.0])


def test_appearance_features_identical_pixels():
    img = np.full((1, 2, 3), 17, dtype=np.uint8)
    feats = build_appearance_features(img, 1.0, 1.0)
    assert np.array_equal(feats.points[0, 2:], feats.points[1, 2:])


def test_smoothness_features_examples():
    feats = build_smoothness_features(8, 8, 1.0)
    assert np.allclose(feats.points[7 * 8 + 5], [5.0, 7.0])
    feats = build_smoothness_features(11, 1, 5.0)
    assert np.allclose(feats.points[10], [2.0, 0.0])
    feats = build_smoothness_features(2, 2)
    assert np.array_equal(feats.points, [[0, 0], [1, 0], [0, 1], [1, 1]])


def test_features_reject_non_positive_theta():
    with pytest.raises(ValueError):
        build_appearance_features(np.zeros((2, 2, 3)), 0.0, 11.0)
    with pytest.raises(ValueError):
        build_smoothness_features(2, 2, -1.0)


# ============================================================================
# MEAN FIELD
# ============================================================================

def test_init_marginals_examples():
    unary = UnaryField([[0.0, 0.0], [0.0, np.log(3.0)], [1000.0, 0.0]], width=3, height=1)
    q = init_marginals(unary).q
    assert np.allclose(q[0], [0.5, 0.5])
    assert np.allclose(q[1], [0.75, 0.25])
    assert np.all(np.isfinite(q[2]))
    assert q[2, 0] == pytest.approx(0.0, abs=1e-300)
    assert q[2, 1] == pytest.approx(1.0)


@pytest.mark.parametrize("backend", ["lattice", "brute_force"])
def test_message_pass_single_point_is_zero(backend):
    model = coincident_model([[0.3, 0.1]])
    q = init_marginals(model.unary)
    (msg,) = message_pass(model, q, backend)
    assert np.allclose(msg, 0.0, atol=1e-9)


@pytest.mark.parametrize("backend", ["lattice", "brute_force"])
def test_message_pass_two_coincident_points(backend):
    model = coincident_model([[0.0, 0.0], [0.0, 0.0]])
    q = MarginalField([[1.0, 0.0], [0.0, 1.0]])
    (msg,) = message_pass(model, q, backend)
    # each point sees only the other, divided by k_hat = 2
    assert np.allclose(msg, [[0.0, 0.5], [0.5, 0.0]], atol=1e-9)


def test_message_pass_lattice_matches_brute_force(rng):
    image = rng.integers(90, 130, size=(8, 8, 3)).astype(np.uint8)
    model = DenseCRFModel.from_image(image, random_unary(8, 8, 3, rng), w1=1.0, theta_alpha=4.0,
                                     theta_beta=40.0, w2=1.0, theta_gamma=3.0)
    q = init_marginals(model.unary)
    approx = message_pass(model, q, "lattice")
    exact = message_pass(model, q, "brute_force")
    for a, e in zip(approx, exact):
        assert np.all(relative_l2_error(a, e) <= 0.05)


def test_message_pass_unknown_backend(random_model):
    with pytest.raises(ValueError, match="backend"):
        message_pass(random_model, init_marginals(random_model.unary), "gpu")


def test_compatibility_transform_examples():
    model = coincident_model([[0.0, 0.0]])
    assert np.allclose(compatibility_transform([np.array([[0.2, 0.8]])], model), [[0.8, 0.2]])

    zero = model.with_compatibility(CompatibilityMatrix(np.zeros((2, 2))))
    assert np.array_equal(compatibility_transform([np.array([[0.2, 0.8]])], zero), [[0.0, 0.0]])

    unary = UnaryField([[0.0, 0.0]], width=1, height=1)
    feats = FeatureMatrix(np.zeros((1, 2)))
    two = DenseCRFModel.build(unary, [(KernelSpec.unit(2, 1.0), feats), (KernelSpec.unit(2, 2.0), feats)])
    out = compatibility_transform([np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]])], two)
    assert np.allclose(out, [[2.0, 1.0]])


def test_zero_weight_fixed_point(two_region):
    image, _, unary = two_region
    model = DenseCRFModel.from_image(image, unary, w1=0.0, w2=0.0)
    expected = softmax(-unary.costs, axis=1)
    other = MarginalField(np.tile([0.9, 0.1], (unary.n_points, 1)))
    assert np.array_equal(mean_field_iteration(model, other).q, expected)
    for iterations in (0, 1, 5):
        assert np.array_equal(run_inference(model, iterations).q, expected)
    labels = map_labeling(run_inference(model, 3))
    assert np.array_equal(labels, np.argmin(unary.costs, axis=1))


def test_coincident_pair_moves_toward_agreement():
    model = coincident_model([[0.0, 0.0], [0.0, 0.0]], weight=1.0)
    q = MarginalField([[0.9, 0.1], [0.9, 0.1]])
    out = mean_field_iteration(model, q, "brute_force").q
    assert np.allclose(out[0], out[1])
    assert out[0, 0] > 0.5


def test_mean_field_brute_force_matches_direct_update(random_model):
    q = init_marginals(random_model.unary)
    out = mean_field_iteration(random_model, q, "brute_force").q
    assert np.allclose(out, direct_update(random_model, q.q), rtol=1e-9, atol=0.0)


def test_mean_field_lattice_close_to_direct_update(random_model):
    q = init_marginals(random_model.unary)
    out = mean_field_iteration(random_model, q, "lattice").q
    assert np.all(relative_l2_error(out, direct_update(random_model, q.q)) <= 0.05)


def test_run_inference_rejects_negative_iterations(random_model):
    with pytest.raises(ValueError, match="iterations"):
        run_inference(random_model, -1)


def test_run_inference_records_trace(random_model):
    trace = []
    run_inference(random_model, 4, kl_trace=trace)
    assert len(trace) == 5
    assert all(np.isfinite(trace))


@pytest.mark.slow
def test_gibbs_energy_of_map_stays_below_start(two_region):
    image, _, unary = two_region
    model = DenseCRFModel.from_image(image, unary, w1=5.0, theta_alpha=10.0, theta_beta=20.0,
                                     w2=1.0, theta_gamma=1.0)
    q = init_marginals(unary)
    energies = [gibbs_energy(model, map_labeling(q))]
    for _ in range(10):
        q = mean_field_iteration(model, q)
        energies.append(gibbs_energy(model, map_labeling(q)))
    assert energies[-1] < energies[0]
    assert max(energies[1:]) <= energies[0]


def test_map_labeling_ties_and_argmax():
    q = MarginalField([[0.2, 0.8], [0.5, 0.5]])
    assert list(map_labeling(q)) == [1, 0]


# ============================================================================
# ENERGY / KL
# ============================================================================

def test_gibbs_energy_examples():
    model = coincident_model([[1.0, 5.0], [7.0, 2.0]])
    assert gibbs_energy(model, [0, 1]) == pytest.approx(4.0)

    same = coincident_model([[1.0, 5.0], [7.0, 5.0]])
    assert gibbs_energy(same, [0, 0]) == pytest.approx(8.0)

    single = coincident_model([[0.25, 3.0]])
    assert gibbs_energy(single, [1]) == pytest.approx(3.0)


def test_gibbs_energy_validates_labels():
    model = coincident_model([[1.0, 5.0], [7.0, 2.0]])
    with pytest.raises(ValueError, match="out of range"):
        gibbs_energy(model, [0, 2])
    with pytest.raises(ValueError, match="cap exceeded"):
        gibbs_energy(model, [0, 1], cap=1)


def test_kl_estimate_for_independent_model(rng):
    unary = random_unary(5, 4, 3, rng)
    feats = build_smoothness_features(5, 4)
    model = DenseCRFModel.build(unary, [(KernelSpec.unit(2, 0.0), feats)])
    expected = -float(logsumexp(-unary.costs, axis=1).sum())
    assert kl_divergence_estimate(model, init_marginals(unary)) == pytest.approx(expected, rel=1e-9)


def test_kl_entropy_of_uniform_rows():
    n_labels = 4
    unary = UnaryField(np.zeros((3, n_labels)), width=3, height=1)
    model = DenseCRFModel.build(unary, [(KernelSpec.unit(2, 0.0), FeatureMatrix(np.zeros((3, 2))))])
    q = MarginalField(np.full((3, n_labels), 1.0 / n_labels))
    assert kl_divergence_estimate(model, q) == pytest.approx(-3 * np.log(n_labels))


@pytest.mark.slow
def test_kl_trace_drops_early(two_region):
    image, _, unary = two_region
    model = DenseCRFModel.from_image(image, unary, w1=1.0, theta_alpha=10.0, theta_beta=20.0)
    trace = []
    run_inference(model, 20, kl_trace=trace)
    assert trace[10] < trace[0]
    total_drop = trace[0] - min(trace)
    assert trace[0] - trace[10] >= 0.9 * total_drop


def test_trace_helpers():
    assert np.array_equal(align_trace([5.0, 3.0, 2.0], 1), [2.0, 0.0, -1.0])
    assert np.allclose(average_traces([[1.0, 2.0], [3.0, 4.0]]), [2.0, 3.0])
    with pytest.raises(ValueError):
        align_trace([1.0], 3)
    with pytest.raises(ValueError, match="length"):
        average_traces([[1.0], [1.0, 2.0]])
    with pytest.raises(ValueError):
        average_traces([])


def test_long_range_energy_fraction(rng):
    image = rng.integers(0, 256, size=(6, 6, 3)).astype(np.uint8)
    model = DenseCRFModel.from_image(image, random_unary(6, 6, 2, rng), w1=1.0, theta_alpha=5.0,
                                     theta_beta=50.0)
    labels = rng.integers(0, 2, size=36)
    labels[:2] = [0, 1]
    assert long_range_energy_fraction(model, labels, 0.0) == pytest.approx(1.0)
    assert long_range_energy_fraction(model, labels, 100.0) == 0.0
    mid = long_range_energy_fraction(model, labels, 2.0)
    assert 0.0 < mid < 1.0
    assert long_range_energy_fraction(model, np.zeros(36, dtype=int), 2.0) == 0.0


# ============================================================================
# INVARIANTS
# ============================================================================

small_grids = st.tuples(st.integers(1, 5), st.integers(1, 5), st.integers(2, 4), st.integers(0, 2**16))


def random_image_model(width, height, n_labels, seed, **kwargs):
    rng = np.random.default_rng(seed)
    image = rng.integers(0, 256, size=(height, width, 3)).astype(np.uint8)
    unary = random_unary(width, height, n_labels, rng)
    params = dict(w1=2.0, theta_alpha=3.0, theta_beta=30.0, w2=1.0, theta_gamma=1.0)
    params.update(kwargs)
    return DenseCRFModel.from_image(image, unary, **params), rng


@settings(max_examples=100, deadline=None)
@given(grid=small_grids)
def test_marginals_stay_row_stochastic(grid):
    model, _ = random_image_model(*grid)
    q = run_inference(model, 3).q
    assert np.all((q >= 0) & (q <= 1))
    assert np.allclose(q.sum(axis=1), 1.0, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(grid=small_grids)
def test_label_permutation_equivariance(grid):
    model, rng = random_image_model(*grid)
    n_labels = model.n_labels
    upper = rng.uniform(0.0, 2.0, size=(n_labels, n_labels))
    compat = CompatibilityMatrix.symmetrized(upper)
    model = model.with_compatibility(compat)
    perm = rng.permutation(n_labels)
    permuted = model.with_compatibility(compat.permuted(perm)).with_unary(
        UnaryField(model.unary.costs[:, perm], model.unary.width, model.unary.height)
    )
    q = run_inference(model, 3).q
    q_perm = run_inference(permuted, 3).q
    assert np.allclose(q_perm, q[:, perm], rtol=1e-9, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(grid=small_grids)
def test_reflection_symmetry(grid):
    width, height, n_labels, seed = grid
    rng = np.random.default_rng(seed)
    half = rng.integers(0, 256, size=(height, width, 3)).astype(np.uint8)
    image = np.concatenate([half, half[:, ::-1]], axis=1)
    half_costs = rng.uniform(0.0, 2.0, size=(height, width, n_labels))
    costs = np.concatenate([half_costs, half_costs[:, ::-1]], axis=1)
    unary = UnaryField(costs.reshape(-1, n_labels), 2 * width, height)
    model = DenseCRFModel.from_image(image, unary, w1=2.0, theta_alpha=3.0, theta_beta=30.0)
    q = run_inference(model, 3, backend="brute_force").q.reshape(height, 2 * width, n_labels)
    assert np.allclose(q, q[:, ::-1], rtol=1e-9, atol=1e-12)


@pytest.mark.benchmark
def test_inference_runtime_voc_sized_image(rng):
    import time

    image = rng.integers(0, 256, size=(213, 320, 3)).astype(np.uint8)
    unary = random_unary(320, 213, 21, rng)
    start = time.perf_counter()
    model = DenseCRFModel.from_image(image, unary, w1=1.0, theta_alpha=61.0, theta_beta=11.0,
                                     w2=1.0, theta_gamma=1.0)
    run_inference(model, 10)
    assert time.perf_counter() - start <= 2.0
