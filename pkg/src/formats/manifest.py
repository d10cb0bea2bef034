"""
Text formats: dataset manifests and compatibility matrices.

Manifest lines hold `image unary groundtruth` paths separated by whitespace;
blank lines and `#` comments are ignored and relative paths resolve against
the manifest's directory.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Union

import numpy as np

from src.crf.model import CompatibilityMatrix


@dataclass(frozen=True)
class ManifestEntry:
    image: Path
    unary: Path
    ground_truth: Path

    @property
    def name(self) -> str:
        return self.image.stem


def load_manifest(path: Union[str, Path]) -> List[ManifestEntry]:
    """
    Raises:
        FileNotFoundError: missing manifest
        ValueError: malformed line, empty manifest
    """
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"❌ manifest not found: {p}")
    base = p.parent
    entries: List[ManifestEntry] = []
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"❌ manifest line {lineno}: expected 3 paths, found {len(parts)}")
        image, unary, gt = (Path(x) if Path(x).is_absolute() else base / x for x in parts)
        entries.append(ManifestEntry(image=image, unary=unary, ground_truth=gt))
    if not entries:
        raise ValueError(f"❌ empty training set: manifest {p.name} lists no images")
    return entries


def write_manifest(entries: List[ManifestEntry], path: Union[str, Path]) -> Path:
    """Write entries with paths relative to the manifest directory where possible."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    base = p.parent.resolve()

    def rel(x: Path) -> str:
        try:
            return str(x.resolve().relative_to(base))
        except ValueError:
            return str(x.resolve())

    lines = [f"{rel(e.image)} {rel(e.unary)} {rel(e.ground_truth)}" for e in entries]
    p.write_text("# image unary ground_truth\n" + "\n".join(lines) + "\n", encoding="utf-8")
    return p


def load_compatibility(path: Union[str, Path]) -> CompatibilityMatrix:
    """
    L rows of L whitespace-separated reals.

    Raises:
        FileNotFoundError: missing file
        ValueError: non-square or asymmetric matrix
    """
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"❌ compatibility file not found: {p}")
    rows = [line.split("#", 1)[0].split() for line in p.read_text(encoding="utf-8").splitlines()]
    rows = [r for r in rows if r]
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ValueError(f"❌ compatibility file {p.name} must hold a square matrix")
    return CompatibilityMatrix(np.array(rows, dtype=np.float64))


def save_compatibility(compatibility: CompatibilityMatrix, path: Union[str, Path]) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    lines = [" ".join(repr(float(v)) for v in row) for row in compatibility.mu]
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return p


__all__ = [
    "ManifestEntry",
    "load_manifest",
    "write_manifest",
    "load_compatibility",
    "save_compatibility",
]
