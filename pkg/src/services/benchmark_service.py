"""
Benchmark Service
=================

Times the lattice filter on random points and compares it with the exact
O(N^2) filter.
"""

from collections import OrderedDict
from typing import Dict
import logging
import time

import numpy as np

from src.lattice import (
    FeatureMatrix,
    KernelSpec,
    brute_force_filter,
    build_lattice,
    lattice_filter,
    relative_l2_error,
    whiten_features,
)
from src.lattice.brute_force import require_cap

logger = logging.getLogger(__name__)

# points are drawn uniformly from a cube of this side length (in standard deviations)
DEFAULT_SPREAD = 4.0


class BenchmarkService:
    """Filter runtime and oracle error on seeded random instances"""

    def __init__(self, spread: float = DEFAULT_SPREAD, brute_force_cap: int = 10_000):
        self.spread = float(spread)
        self.brute_force_cap = int(brute_force_cap)

    def random_instance(self, n: int, d: int, n_values: int, seed: int):
        rng = np.random.default_rng(seed)
        features = FeatureMatrix(rng.uniform(0.0, self.spread, size=(n, d)))
        values = rng.uniform(0.0, 1.0, size=(n, n_values))
        return features, values

    def bench_filter(self, n: int, d: int, n_values: int, seed: int = 0) -> Dict[str, float]:
        """
        Returns:
            build_ms, filter_ms, lattice_ms, brute_force_ms, vertices and the
            maximum per-column relative L2 error vs the exact filter

        Raises:
            ValueError: non-positive sizes, cap exceeded
        """
        if n < 1 or d < 1 or n_values < 1:
            raise ValueError(f"❌ n, d and l must be >= 1 (got n={n}, d={d}, l={n_values})")
        require_cap(n, self.brute_force_cap, "bench-filter oracle")
        features, values = self.random_instance(n, d, n_values, seed)
        kernel = KernelSpec.unit(d)

        start = time.perf_counter()
        lattice = build_lattice(whiten_features(features, kernel))
        built = time.perf_counter()
        approx = lattice_filter(lattice, values, normalize=True)
        filtered = time.perf_counter()
        exact = brute_force_filter(features, kernel, values, normalize=True, cap=self.brute_force_cap)
        oracle = time.perf_counter()

        errors = relative_l2_error(approx, exact)
        report: Dict[str, float] = OrderedDict()
        report["n"] = n
        report["d"] = d
        report["l"] = n_values
        report["seed"] = seed
        report["vertices"] = lattice.n_vertices
        report["build_ms"] = 1000.0 * (built - start)
        report["filter_ms"] = 1000.0 * (filtered - built)
        report["lattice_ms"] = 1000.0 * (filtered - start)
        report["brute_force_ms"] = 1000.0 * (oracle - filtered)
        report["oracle_error"] = float(errors.max())
        logger.info("✅ bench-filter n=%d d=%d: lattice %.1f ms, oracle error %.4f",
                    n, d, report["lattice_ms"], report["oracle_error"])
        return report


__all__ = ["BenchmarkService"]
