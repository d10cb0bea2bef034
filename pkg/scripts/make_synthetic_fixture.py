"""Write a small synthetic segmentation dataset.

Usage:
    python scripts/make_synthetic_fixture.py --out fixtures/ --count 3

Each image is a colored disc on a contrasting background with pixel noise.
Unary costs come from a per-pixel classifier that is right most of the time
but flips labels in random speckles, so mean-field inference has something to
clean up. Ground truth marks a one-pixel ring around the disc as void.

Files per image: <name>.ppm, <name>.png, <name>.dcu, <name>_gt.png, plus a
`manifest.txt` listing every triple.
"""
import argparse
import logging
import os
import sys

# Ensure project root is on sys.path so `from src...` imports work when the
# script is executed from the `scripts/` directory (or any other CWD).
root = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if root not in sys.path:
    sys.path.insert(0, root)

from pathlib import Path

import numpy as np

from src.crf import UnaryField
from src.evaluation import VOID_LABEL, LabelMap
from src.formats import ManifestEntry, default_palette, save_labelmap, save_png, save_ppm, save_unary, write_manifest
from src.utils import setup_root_logger

logger = logging.getLogger("densecrf.scripts")

COLORS = np.array([[40, 90, 200], [220, 60, 50], [60, 180, 80]], dtype=np.float64)


def synthetic_scene(width: int, height: int, n_labels: int, rng: np.random.Generator):
    """Image, ground truth labels and noisy unary costs for one scene."""
    ys, xs = np.mgrid[0:height, 0:width]
    cx, cy = rng.uniform(0.35, 0.65) * width, rng.uniform(0.35, 0.65) * height
    radius = rng.uniform(0.2, 0.3) * min(width, height)
    dist = np.hypot(xs - cx, ys - cy)
    labels = (dist <= radius).astype(np.int64)
    if n_labels > 2:
        labels[(ys < height // 4) & (labels == 0)] = 2

    image = COLORS[labels % len(COLORS)] + rng.normal(0.0, 12.0, size=(height, width, 3))
    image = np.clip(image, 0, 255).astype(np.uint8)

    noisy = labels.copy()
    flips = rng.random((height, width)) < 0.15
    noisy[flips] = rng.integers(0, n_labels, size=int(flips.sum()))
    probs = np.full((height * width, n_labels), 0.3 / (n_labels - 1))
    probs[np.arange(height * width), noisy.reshape(-1)] = 0.7
    costs = -np.log(probs)

    truth = labels.copy()
    truth[np.abs(dist - radius) < 0.5] = VOID_LABEL
    return image, truth, UnaryField(costs, width, height)


def write_dataset(out_dir: Path, count: int, width: int, height: int, n_labels: int, seed: int) -> Path:
    rng = np.random.default_rng(seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    palette = default_palette(n_labels)
    entries = []
    for idx in range(count):
        name = f"scene_{idx:03d}"
        image, truth, unary = synthetic_scene(width, height, n_labels, rng)
        ppm = save_ppm(image, out_dir / f"{name}.ppm")
        save_png(image, out_dir / f"{name}.png")
        dcu = save_unary(unary, out_dir / f"{name}.dcu")
        gt = save_labelmap(LabelMap(truth), palette, out_dir / f"{name}_gt.png", n_labels=n_labels)
        entries.append(ManifestEntry(image=ppm, unary=dcu, ground_truth=gt))
        logger.info("Wrote %s", name)
    manifest = write_manifest(entries, out_dir / "manifest.txt")
    logger.info("✅ %d scenes written to %s", count, out_dir)
    return manifest


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="fixtures")
    parser.add_argument("--count", type=int, default=3)
    parser.add_argument("--width", type=int, default=48)
    parser.add_argument("--height", type=int, default=32)
    parser.add_argument("--labels", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    setup_root_logger(level="INFO")
    manifest = write_dataset(Path(args.out), args.count, args.width, args.height, args.labels, args.seed)
    print(manifest)


if __name__ == "__main__":
    main()
