"""Scaling benchmark for Lindblad gates and single-mode measurements.

Only timing *ratios* are meaningful: doubling N should cost about 8x for a
Lindblad gate (dense O(N^3) kernels) and about 4x for a measurement
(one O(N^2) rank-2 update).
"""

from __future__ import annotations

import os
import platform
import statistics
import time
from typing import Callable

import numpy as np
import scipy

from . import __version__, evolve, measure
from .model import random_model
from .state import vacuum

LINDBLAD_SIZES = (200, 400)
MEASURE_SIZES = (500, 1000)
LINDBLAD_RANGE = (5.0, 12.0)
MEASURE_RANGE = (2.5, 6.0)


def machine_info() -> dict:
    return {
        "platform": platform.platform(),
        "processor": platform.processor() or platform.machine(),
        "cpu_count": os.cpu_count(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "dflo": __version__,
    }


def _median_time(fn: Callable[[], object], repeats: int, warmup: int = 1) -> float:
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def time_lindblad(modes: int, repeats: int = 5, seed: int = 0) -> float:
    """Median seconds for one Lindblad gate (lyapunov backend, 3 jumps)."""
    rng = np.random.default_rng(seed)
    model = random_model(modes, rng, n_jumps=3)
    m = vacuum(modes)
    return _median_time(lambda: evolve.dissipative_evolve(m, model, 1.0, "lyapunov"), repeats)


def time_measurement(modes: int, repeats: int = 31, seed: int = 0) -> float:
    """Median seconds for one single-mode measurement on a dense random state."""
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(2 * modes, 2 * modes))
    m = g - g.T
    m *= 0.5 / np.linalg.norm(m, 2)
    src = measure.RandomSource(seed)
    modes_cycle = iter(range(10**9))
    return _median_time(lambda: measure.sample_mode(m, next(modes_cycle) % modes, src), repeats)


def run_benchmark(
    lindblad_sizes: tuple[int, int] = LINDBLAD_SIZES,
    measure_sizes: tuple[int, int] = MEASURE_SIZES,
    lindblad_repeats: int = 5,
    measure_repeats: int = 31,
) -> dict:
    """Time both kernels at two sizes and report the ratios against their target ranges."""
    small, large = lindblad_sizes
    tl = [time_lindblad(small, lindblad_repeats), time_lindblad(large, lindblad_repeats)]
    small_m, large_m = measure_sizes
    tm = [time_measurement(small_m, measure_repeats), time_measurement(large_m, measure_repeats)]
    lr, mr = tl[1] / tl[0], tm[1] / tm[0]
    return {
        "machine": machine_info(),
        "lindblad": {
            "sizes": list(lindblad_sizes),
            "median_seconds": tl,
            "ratio": lr,
            "expected_range": list(LINDBLAD_RANGE),
            "passed": LINDBLAD_RANGE[0] <= lr <= LINDBLAD_RANGE[1],
        },
        "measurement": {
            "sizes": list(measure_sizes),
            "median_seconds": tm,
            "ratio": mr,
            "expected_range": list(MEASURE_RANGE),
            "passed": MEASURE_RANGE[0] <= mr <= MEASURE_RANGE[1],
        },
    }
