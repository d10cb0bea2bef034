"""
Metric reports: flat key=value text and per-image CSV rows.
"""

import csv
import math
from pathlib import Path
from typing import Iterable, Mapping, Tuple, Union


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(round(float(value), 4))
    return str(value)


def format_report(metrics: Mapping[str, object]) -> str:
    """One `key=value` line per metric, in insertion order, newline-terminated."""
    return "".join(f"{key}={_fmt(value)}\n" for key, value in metrics.items())


def write_csv_rows(path: Union[str, Path], rows: Iterable[Tuple[str, str, object]], append: bool = False) -> Path:
    """Write (image, metric, value) rows with a header line."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    write_header = not (append and p.exists() and p.stat().st_size > 0)
    with p.open("a" if append else "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if write_header:
            writer.writerow(["image", "metric", "value"])
        for image, metric, value in rows:
            writer.writerow([image, metric, _fmt(value)])
    return p


__all__ = ["format_report", "write_csv_rows"]
