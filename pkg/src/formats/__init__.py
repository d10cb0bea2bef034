"""
Formats package

Image decoding, the DCU1 unary container, label map PNGs, manifests and
compatibility files.
"""

from src.formats.image import load_image, save_png, save_ppm
from src.formats.unary import load_unary, save_unary
from src.formats.labelmap_io import default_palette, load_label_names, load_labelmap, save_labelmap
from src.formats.manifest import (
    ManifestEntry,
    load_compatibility,
    load_manifest,
    save_compatibility,
    write_manifest,
)

__all__ = [
    "load_image",
    "save_png",
    "save_ppm",
    "load_unary",
    "save_unary",
    "save_labelmap",
    "load_labelmap",
    "load_label_names",
    "default_palette",
    "ManifestEntry",
    "load_manifest",
    "write_manifest",
    "load_compatibility",
    "save_compatibility",
]
