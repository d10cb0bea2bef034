"""
Label map files
===============

Indexed 8-bit PNG (palette of 256 entries, void at index 255) plus a sidecar
`<name>.labels.txt` listing `index name` lines.
"""

from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union
import logging

import numpy as np
import png

from src.evaluation.labelmap import VOID_LABEL, LabelMap

logger = logging.getLogger(__name__)

Color = Tuple[int, int, int]
VOID_COLOR: Color = (224, 224, 192)
SIDECAR_SUFFIX = ".labels.txt"


def sidecar_path(path: Union[str, Path]) -> Path:
    p = Path(path)
    return p.with_name(p.stem + SIDECAR_SUFFIX)


def _palette_entries(palette: Union[Sequence[Color], Mapping[int, Color]]) -> Dict[int, Color]:
    if isinstance(palette, Mapping):
        return {int(k): tuple(int(c) for c in v) for k, v in palette.items()}
    return {i: tuple(int(c) for c in v) for i, v in enumerate(palette)}


def default_palette(n_labels: int) -> Dict[int, Color]:
    """VOC-style bit-interleaved colors."""
    colors = {}
    for idx in range(n_labels):
        r = g = b = 0
        c = idx
        for shift in range(7, -1, -1):
            r |= ((c >> 0) & 1) << shift
            g |= ((c >> 1) & 1) << shift
            b |= ((c >> 2) & 1) << shift
            c >>= 3
        colors[idx] = (r, g, b)
    return colors


def save_labelmap(
    labels: LabelMap,
    palette: Union[Sequence[Color], Mapping[int, Color]],
    path: Union[str, Path],
    names: Optional[Sequence[str]] = None,
    n_labels: Optional[int] = None,
) -> Path:
    """
    Write an indexed PNG and its index->name sidecar.

    Raises:
        ValueError: palette too small for the labels present (or n_labels)
    """
    entries = _palette_entries(palette)
    needed = max(labels.max_label() + 1, int(n_labels or 0))
    missing = [i for i in range(needed) if i not in entries]
    if missing:
        raise ValueError(f"❌ palette too small: no color for label(s) {missing[:5]}")
    if needed > VOID_LABEL:
        raise ValueError(f"❌ palette too small: at most {VOID_LABEL} labels fit an 8-bit index image")

    full = [VOID_COLOR] * 256
    for idx, color in entries.items():
        if 0 <= idx < VOID_LABEL:
            full[idx] = color
    full[VOID_LABEL] = VOID_COLOR

    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    writer = png.Writer(labels.width, labels.height, palette=full, bitdepth=8)
    with p.open("wb") as fh:
        writer.write(fh, labels.labels.astype(np.uint8).tolist())

    count = needed
    label_names = list(names) if names is not None else [f"class_{i}" for i in range(count)]
    lines = [f"{i} {label_names[i] if i < len(label_names) else f'class_{i}'}" for i in range(count)]
    lines.append(f"{VOID_LABEL} void")
    sidecar_path(p).write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug("Saved label map %s (%dx%d)", p.name, labels.width, labels.height)
    return p


def load_labelmap(path: Union[str, Path]) -> LabelMap:
    """
    Decode an indexed PNG (raw indices) or an 8-bit greyscale PNG.

    Raises:
        FileNotFoundError: missing file
        ValueError: unsupported PNG layout
    """
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"❌ label map not found: {p}")
    try:
        width, height, rows, info = png.Reader(filename=str(p)).read()
        grid = np.vstack([np.asarray(row, dtype=np.int64) for row in rows])
    except png.FormatError as exc:
        raise ValueError(f"❌ unreadable label map {p.name}: {exc}") from exc
    if info.get("bitdepth") != 8 or info.get("planes") != 1:
        raise ValueError("❌ unsupported depth: label maps must be 8-bit indexed or greyscale PNG")
    return LabelMap(grid.reshape(height, width))


def load_label_names(path: Union[str, Path]) -> Dict[int, str]:
    """Read the sidecar written next to a label map; empty if absent."""
    side = sidecar_path(path)
    if not side.is_file():
        return {}
    names = {}
    for line in side.read_text(encoding="utf-8").splitlines():
        parts = line.split(maxsplit=1)
        if len(parts) == 2:
            names[int(parts[0])] = parts[1]
    return names


__all__ = ["save_labelmap", "load_labelmap", "load_label_names", "default_palette", "sidecar_path", "VOID_COLOR"]
