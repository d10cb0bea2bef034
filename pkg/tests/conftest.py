import numpy as np
import pytest

from crf_helpers import object_scene, random_unary, two_region_scene
from src.crf import DenseCRFModel
from src.evaluation import LabelMap
from src.formats import save_labelmap, save_ppm, save_unary, default_palette


@pytest.fixture
def rng():
    """Seeded generator; every test gets the same stream."""
    return np.random.default_rng(0)


@pytest.fixture
def two_region(rng):
    """64x64 two-label scene with 20% flipped unaries: (image, truth grid, unary)."""
    return two_region_scene(64, 64, rng)


@pytest.fixture
def small_two_region(rng):
    return two_region_scene(16, 12, rng)


@pytest.fixture
def object_fixture(rng):
    return object_scene(32, 12, rng)


@pytest.fixture
def random_model(rng):
    """16x16 random image, random 3-label unary, moderate kernels."""
    image = rng.integers(90, 130, size=(16, 16, 3)).astype(np.uint8)
    unary = random_unary(16, 16, 3, rng)
    return DenseCRFModel.from_image(image, unary, w1=1.0, theta_alpha=4.0, theta_beta=40.0,
                                    w2=1.0, theta_gamma=3.0)


@pytest.fixture
def scene_files(tmp_path, small_two_region):
    """Image, unary and ground truth of the small scene written to disk."""
    image, truth, unary = small_two_region
    img = save_ppm(image, tmp_path / "scene.ppm")
    dcu = save_unary(unary, tmp_path / "scene.dcu")
    gt = save_labelmap(LabelMap(truth), default_palette(2), tmp_path / "scene_gt.png")
    return img, dcu, gt
