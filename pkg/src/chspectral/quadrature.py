"""Composite Simpson integration on segment-partitioned trajectory grids.

Every segment produced by the shooting layer is uniform with an even step
count, so plain Simpson weights apply piece by piece; atom rows sit at segment
boundaries and carry no quadrature weight of their own.
"""

from __future__ import annotations

import numpy as np


def simpson_uniform(values, h):
    """Composite Simpson over a uniform grid with an even number of steps."""
    values = np.asarray(values, dtype=float)
    n = values.size - 1
    if n < 2 or n % 2:
        raise ValueError(f"Simpson needs an even positive step count, got {n}")
    acc = values[0] + values[-1] + 4.0 * values[1:-1:2].sum() + 2.0 * values[2:-2:2].sum()
    return acc * h / 3.0


def grid_integral(xs, values, segments):
    """Sum of per-segment Simpson integrals over an inclusive-index partition."""
    total = 0.0
    for start, stop in segments:
        h = (xs[stop] - xs[start]) / (stop - start)
        total += simpson_uniform(values[start: stop + 1], h)
    return total


def trajectory_integral(traj, values):
    """Simpson integral of sampled values over a trajectory's own grid."""
    if values.shape != traj.xs.shape:
        raise ValueError("values do not match the trajectory grid")
    return grid_integral(traj.xs, values, traj.segments)
