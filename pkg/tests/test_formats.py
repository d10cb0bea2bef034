import struct

import numpy as np
import png
import pytest

from src.crf import CompatibilityMatrix, UnaryField
from src.evaluation import VOID_LABEL, LabelMap
from src.formats import (
    ManifestEntry,
    default_palette,
    load_compatibility,
    load_image,
    load_label_names,
    load_labelmap,
    load_manifest,
    load_unary,
    save_compatibility,
    save_labelmap,
    save_png,
    save_ppm,
    save_unary,
    write_manifest,
)
from src.formats.labelmap_io import VOID_COLOR
from src.formats.unary import HEADER, MAGIC


# ---------------------------------------------------------------------------
# images
# ---------------------------------------------------------------------------

def test_load_single_pixel_ppm(tmp_path):
    path = tmp_path / "red.ppm"
    path.write_bytes(b"P6\n1 1\n255\n\xff\x00\x00")
    img = load_image(path)
    assert img.shape == (1, 1, 3)
    assert img.dtype == np.uint8
    assert list(img[0, 0]) == [255, 0, 0]


def test_ppm_header_comments(tmp_path):
    path = tmp_path / "c.ppm"
    path.write_bytes(b"P6\n# made by hand\n2 1\n255\n\x01\x02\x03\x04\x05\x06")
    assert load_image(path).tolist() == [[[1, 2, 3], [4, 5, 6]]]


def test_png_and_ppm_decode_identically(tmp_path, rng):
    image = rng.integers(0, 256, size=(5, 7, 3)).astype(np.uint8)
    a = load_image(save_png(image, tmp_path / "x.png"))
    b = load_image(save_ppm(image, tmp_path / "x.ppm"))
    assert np.array_equal(a, image)
    assert np.array_equal(a, b)


def test_png_alpha_is_dropped(tmp_path):
    path = tmp_path / "rgba.png"
    writer = png.Writer(2, 1, greyscale=False, alpha=True, bitdepth=8)
    with path.open("wb") as fh:
        writer.write(fh, [[10, 20, 30, 255, 40, 50, 60, 0]])
    assert load_image(path).tolist() == [[[10, 20, 30], [40, 50, 60]]]


def test_truncated_ppm(tmp_path):
    path = tmp_path / "short.ppm"
    path.write_bytes(b"P6\n2 2\n255\n" + bytes(5))
    with pytest.raises(ValueError, match="truncated payload"):
        load_image(path)


def test_sixteen_bit_ppm_unsupported(tmp_path):
    path = tmp_path / "deep.ppm"
    path.write_bytes(b"P6\n1 1\n65535\n" + bytes(6))
    with pytest.raises(ValueError, match="unsupported depth"):
        load_image(path)


def test_missing_and_unreadable_images(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "nope.ppm")
    junk = tmp_path / "junk.bin"
    junk.write_bytes(b"hello world")
    with pytest.raises(ValueError, match="unreadable"):
        load_image(junk)


# ---------------------------------------------------------------------------
# unary container
# ---------------------------------------------------------------------------

def test_load_hand_built_unary(tmp_path):
    path = tmp_path / "u.dcu"
    path.write_bytes(HEADER.pack(MAGIC, 1, 1, 2) + struct.pack("<2f", 0.5, 1.25))
    field = load_unary(path)
    assert (field.width, field.height, field.n_labels) == (1, 1, 2)
    assert field.costs.tolist() == [[0.5, 1.25]]


def test_unary_round_trip_is_bit_exact(tmp_path):
    # float32-representable values survive unchanged
    costs = np.arange(24, dtype=np.float64).reshape(6, 4) * 0.25 - 2.0
    field = UnaryField(costs, 3, 2)
    back = load_unary(save_unary(field, tmp_path / "u.dcu"))
    assert (back.width, back.height) == (3, 2)
    assert np.array_equal(back.costs, costs)


def test_unary_bad_magic(tmp_path):
    path = tmp_path / "u.dcu"
    path.write_bytes(HEADER.pack(b"DCU2", 1, 1, 2) + struct.pack("<2f", 0.0, 0.0))
    with pytest.raises(ValueError, match="bad magic"):
        load_unary(path)


def test_unary_size_mismatch(tmp_path):
    path = tmp_path / "u.dcu"
    path.write_bytes(HEADER.pack(MAGIC, 2, 1, 2) + struct.pack("<3f", 0.0, 0.0, 0.0))
    with pytest.raises(ValueError, match="size mismatch"):
        load_unary(path)
    path.write_bytes(b"DCU")
    with pytest.raises(ValueError, match="size mismatch"):
        load_unary(path)


def test_unary_non_finite(tmp_path):
    path = tmp_path / "u.dcu"
    path.write_bytes(HEADER.pack(MAGIC, 1, 1, 2) + struct.pack("<2f", 0.0, float("inf")))
    with pytest.raises(ValueError, match="non-finite"):
        load_unary(path)


# ---------------------------------------------------------------------------
# label maps
# ---------------------------------------------------------------------------

def test_labelmap_round_trip(tmp_path):
    labels = LabelMap([[0, 1]])
    path = save_labelmap(labels, [(0, 0, 0), (255, 0, 0)], tmp_path / "gt.png")
    assert load_labelmap(path) == labels

    _, _, _, info = png.Reader(filename=str(path)).read()
    palette = info["palette"]
    assert len(palette) == 256
    assert tuple(palette[1][:3]) == (255, 0, 0)
    assert tuple(palette[VOID_LABEL][:3]) == VOID_COLOR


def test_labelmap_void_survives(tmp_path):
    labels = LabelMap([[0, VOID_LABEL], [1, 1]])
    back = load_labelmap(save_labelmap(labels, default_palette(2), tmp_path / "v.png"))
    assert back == labels
    assert back.void_mask.sum() == 1


def test_labelmap_palette_too_small(tmp_path):
    with pytest.raises(ValueError, match="palette too small"):
        save_labelmap(LabelMap([[0, 2]]), [(0, 0, 0), (1, 1, 1)], tmp_path / "x.png")


def test_labelmap_sidecar_names(tmp_path):
    path = save_labelmap(LabelMap([[0, 1]]), default_palette(2), tmp_path / "gt.png", names=["sky", "cow"])
    assert (tmp_path / "gt.labels.txt").is_file()
    assert load_label_names(path) == {0: "sky", 1: "cow", VOID_LABEL: "void"}


def test_labelmap_rejects_rgb_png(tmp_path):
    rgb = save_png(np.zeros((2, 2, 3), dtype=np.uint8), tmp_path / "rgb.png")
    with pytest.raises(ValueError, match="unsupported depth"):
        load_labelmap(rgb)


def test_default_palette_starts_voc_style():
    palette = default_palette(3)
    assert palette[0] == (0, 0, 0)
    assert palette[1] == (128, 0, 0)
    assert palette[2] == (0, 128, 0)


# ---------------------------------------------------------------------------
# manifests and compatibility files
# ---------------------------------------------------------------------------

def test_manifest_resolves_relative_paths(tmp_path):
    manifest = tmp_path / "data" / "train.txt"
    manifest.parent.mkdir()
    manifest.write_text("# image unary gt\n\na.ppm a.dcu a_gt.png  # first\n/abs/b.png /abs/b.dcu /abs/b_gt.png\n")
    entries = load_manifest(manifest)
    assert len(entries) == 2
    assert entries[0].image == tmp_path / "data" / "a.ppm"
    assert entries[0].ground_truth == tmp_path / "data" / "a_gt.png"
    assert entries[0].name == "a"
    assert str(entries[1].unary) == "/abs/b.dcu"


def test_manifest_errors(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing here\n\n")
    with pytest.raises(ValueError, match="empty training set"):
        load_manifest(empty)
    bad = tmp_path / "bad.txt"
    bad.write_text("a.ppm a.dcu\n")
    with pytest.raises(ValueError, match="line 1"):
        load_manifest(bad)
    with pytest.raises(FileNotFoundError):
        load_manifest(tmp_path / "missing.txt")


def test_write_manifest_reloads(tmp_path):
    entries = [ManifestEntry(tmp_path / "s.ppm", tmp_path / "s.dcu", tmp_path / "s_gt.png")]
    path = write_manifest(entries, tmp_path / "m.txt")
    assert path.read_text().splitlines()[1] == "s.ppm s.dcu s_gt.png"
    assert load_manifest(path)[0].unary.resolve() == (tmp_path / "s.dcu").resolve()


def test_compatibility_round_trip(tmp_path):
    mu = CompatibilityMatrix([[0.0, 0.1], [0.1, 0.7]])
    back = load_compatibility(save_compatibility(mu, tmp_path / "mu.txt"))
    assert np.array_equal(back.mu, mu.mu)


def test_compatibility_rejects_bad_matrices(tmp_path):
    path = tmp_path / "mu.txt"
    path.write_text("0 1\n0.5 0\n")
    with pytest.raises(ValueError, match="symmetric"):
        load_compatibility(path)
    path.write_text("0 1 1\n1 0 1\n")
    with pytest.raises(ValueError, match="square"):
        load_compatibility(path)
