"""
Image decoding
==============

Binary PPM (P6, maxval <= 255) and 8-bit PNG (RGB / RGBA, alpha dropped)
into a height x width x 3 uint8 grid. Writers for both formats are provided
for fixtures.
"""

from pathlib import Path
from typing import List, Tuple, Union
import logging

import numpy as np
import png

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
PPM_MAGIC = b"P6"


def _require_file(path: PathLike) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"❌ file not found: {p}")
    return p


def _ppm_header(data: bytes) -> Tuple[List[int], int]:
    """Parse width, height, maxval; return them with the payload offset."""
    if data[:2] != PPM_MAGIC:
        raise ValueError("❌ unreadable file: not a binary PPM (P6)")
    values: List[int] = []
    pos = 2
    while len(values) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and data[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise ValueError("❌ unreadable file: malformed PPM header")
        values.append(int(data[start:pos]))
    # exactly one whitespace byte separates header and payload
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise ValueError("❌ truncated payload")
    return values, pos + 1


def _load_ppm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    (width, height, maxval), offset = _ppm_header(data)
    if width < 1 or height < 1:
        raise ValueError(f"❌ unreadable file: invalid PPM size {width}x{height}")
    if not 0 < maxval <= 255:
        raise ValueError(f"❌ unsupported depth: PPM maxval {maxval} (8-bit only)")
    expected = width * height * 3
    payload = data[offset:offset + expected]
    if len(payload) < expected:
        raise ValueError(f"❌ truncated payload: expected {expected} bytes, found {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3).copy()


def _load_png(path: Path) -> np.ndarray:
    try:
        reader = png.Reader(filename=str(path))
        width, height, rows, info = reader.read()
    except png.FormatError as exc:
        raise ValueError(f"❌ truncated payload or unreadable PNG: {exc}") from exc
    if info.get("bitdepth") != 8:
        raise ValueError(f"❌ unsupported depth: PNG bit depth {info.get('bitdepth')} (8-bit only)")
    if info.get("greyscale") or "palette" in info:
        raise ValueError("❌ unsupported depth: PNG must be 8-bit RGB or RGBA")
    planes = info["planes"]
    try:
        grid = np.vstack([np.asarray(row, dtype=np.uint8) for row in rows])
    except png.FormatError as exc:
        raise ValueError(f"❌ truncated payload: {exc}") from exc
    grid = grid.reshape(height, width, planes)
    return np.ascontiguousarray(grid[:, :, :3])


def load_image(path: PathLike) -> np.ndarray:
    """
    Decode a P6 PPM or an 8-bit RGB/RGBA PNG.

    Returns:
        height x width x 3 uint8 array, row-major

    Raises:
        FileNotFoundError: missing file
        ValueError: unreadable file, unsupported depth, truncated payload
    """
    p = _require_file(path)
    with p.open("rb") as fh:
        head = fh.read(8)
    if head.startswith(PPM_MAGIC):
        img = _load_ppm(p)
    elif head == png.signature:
        img = _load_png(p)
    else:
        raise ValueError(f"❌ unreadable file: {p.name} is neither P6 PPM nor PNG")
    logger.debug("Loaded image %s (%dx%d)", p.name, img.shape[1], img.shape[0])
    return img


def _as_rgb(image: np.ndarray) -> np.ndarray:
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"❌ image must be height x width x 3, got shape {img.shape}")
    if img.dtype != np.uint8:
        if np.any((img < 0) | (img > 255)):
            raise ValueError("❌ image values must lie in 0-255")
        img = img.astype(np.uint8)
    return img


def save_ppm(image: np.ndarray, path: PathLike) -> Path:
    img = _as_rgb(image)
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    height, width = img.shape[:2]
    with p.open("wb") as fh:
        fh.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img).tobytes())
    return p


def save_png(image: np.ndarray, path: PathLike) -> Path:
    img = _as_rgb(image)
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    height, width = img.shape[:2]
    writer = png.Writer(width, height, greyscale=False, bitdepth=8)
    with p.open("wb") as fh:
        writer.write(fh, img.reshape(height, width * 3).tolist())
    return p


__all__ = ["load_image", "save_ppm", "save_png"]
