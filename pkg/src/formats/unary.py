"""
DCU1 unary container
====================

Layout (little-endian):

    b"DCU1" | uint32 width | uint32 height | uint32 L | width*height*L float32

Costs are pixel-row-major with the label index fastest.
"""

from pathlib import Path
from typing import Union
import logging
import struct

import numpy as np

from src.crf.model import UnaryField

logger = logging.getLogger(__name__)

MAGIC = b"DCU1"
HEADER = struct.Struct("<4s3I")
PAYLOAD_DTYPE = np.dtype("<f4")


def load_unary(path: Union[str, Path]) -> UnaryField:
    """
    Raises:
        FileNotFoundError: missing file
        ValueError: bad magic, size mismatch, non-finite floats
    """
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"❌ unary file not found: {p}")
    data = p.read_bytes()
    if len(data) < HEADER.size:
        raise ValueError(f"❌ size mismatch: {p.name} is shorter than the DCU1 header")
    magic, width, height, n_labels = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"❌ bad magic: expected {MAGIC!r}, found {magic!r}")
    count = width * height * n_labels
    payload = len(data) - HEADER.size
    if payload != count * PAYLOAD_DTYPE.itemsize:
        raise ValueError(
            f"❌ size mismatch: header declares {width}x{height}x{n_labels} "
            f"({count * PAYLOAD_DTYPE.itemsize} bytes), payload has {payload} bytes"
        )
    costs = np.frombuffer(data, dtype=PAYLOAD_DTYPE, count=count, offset=HEADER.size)
    if not np.all(np.isfinite(costs)):
        raise ValueError("❌ non-finite floats in unary payload")
    return UnaryField(costs.astype(np.float64).reshape(width * height, n_labels), width, height)


def save_unary(field: UnaryField, path: Union[str, Path]) -> Path:
    """Write `field` as DCU1; costs are stored as float32."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    costs = field.costs.astype(PAYLOAD_DTYPE)
    if not np.all(np.isfinite(costs)):
        raise ValueError("❌ non-finite floats: costs overflow float32")
    with p.open("wb") as fh:
        fh.write(HEADER.pack(MAGIC, field.width, field.height, field.n_labels))
        fh.write(costs.tobytes())
    logger.debug("Saved unary %s (%dx%dx%d)", p.name, field.width, field.height, field.n_labels)
    return p


__all__ = ["load_unary", "save_unary", "MAGIC"]
