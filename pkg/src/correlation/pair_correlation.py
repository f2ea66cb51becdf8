"""
Empirical pair correlation of hyperbolic angles
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.correlation.angle_records import Arc, AngleTable, Records, as_table
from src.utils.exceptions import GridError
from src.utils.helpers import TWO_PI, chunk_bounds, circle_distance, resolve_n_jobs
from src.utils.logger import get_logger

logger = get_logger(__name__)

# Query points handled per worker task
QUERY_CHUNK = 500_000


@dataclass
class CorrelationCurve:
    """Empirical pair counts and correlation functions on a xi grid"""

    Q: float
    xi_grid: np.ndarray
    N_Q: np.ndarray
    R2_emp: np.ndarray
    g2_emp: np.ndarray
    interval: Optional[Arc] = None
    n_records: int = 0


def window_width(Q: float, xi: float, V: float) -> float:
    """Angular window 2 V xi / Q^2 matching mean spacing scale"""
    return 2.0 * V * xi / (Q * Q)


class _SortedAngles:
    """Sorted angles on the doubled circle plus same-point multiplicities"""

    def __init__(self, table: AngleTable):
        self.n = len(table)
        self.theta = np.sort(table.theta)
        self.ext = np.concatenate([self.theta, self.theta + TWO_PI])
        self.same_point_gaps = self._same_point_gaps(table)

    @staticmethod
    def _same_point_gaps(table: AngleTable) -> np.ndarray:
        """Sorted circle distances of all pairs sharing a point key"""
        if len(table) < 2:
            return np.empty(0)
        keys = table.point_keys
        order = np.lexsort((keys[:, 1], keys[:, 0]))
        keys, theta = keys[order], table.theta[order]
        gaps = []
        offset = 1
        # Equal keys are contiguous after sorting, so offsets stop at the largest group
        while offset < len(table):
            same = np.all(keys[offset:] == keys[:-offset], axis=1)
            if not same.any():
                break
            gaps.append(circle_distance(theta[offset:][same], theta[:-offset][same]))
            offset += 1
        return np.sort(np.concatenate(gaps)) if gaps else np.empty(0)

    def _chunk_count(self, lo: int, hi: int, width: float) -> int:
        idx = np.arange(lo, hi)
        upper = np.searchsorted(self.ext, self.theta[lo:hi] + width, side="left")
        counts = np.clip(upper - (idx + 1), 0, self.n - 1)
        return int(counts.sum())

    def count(self, width: float, n_jobs: int) -> int:
        """Unordered pairs of distinct points closer than width on the circle"""
        if self.n < 2 or width <= 0:
            return 0
        if width > np.pi:
            total = self.n * (self.n - 1) // 2
        else:
            n_chunks = max(n_jobs, -(-self.n // QUERY_CHUNK))
            bounds = chunk_bounds(self.n, n_chunks)
            if len(bounds) == 1:
                total = self._chunk_count(0, self.n, width)
            else:
                parts = Parallel(n_jobs=n_jobs, prefer="threads")(
                    delayed(self._chunk_count)(lo, hi, width) for lo, hi in bounds
                )
                total = sum(parts)
        same = int(np.searchsorted(self.same_point_gaps, width, side="left"))
        return max(total - same, 0)


def pair_count(records: Records, Q: float, xi: float, V: float,
               n_jobs: Optional[int] = None) -> float:
    """
    Half the number of ordered pairs of distinct orbit points whose angles
    are closer than 2 V xi / Q^2 on the circle

    Args:
        records: Angle records of the ball (stabilizer elements excluded)
        Q: Ball radius
        xi: Rescaled gap
        V: Covolume of the lattice
        n_jobs: Worker count

    Returns:
        Pair count N_Q(xi)
    """
    if xi <= 0:
        return 0.0
    table = as_table(records)
    return float(_SortedAngles(table).count(window_width(Q, xi, V), resolve_n_jobs(n_jobs)))


def brute_force_pair_count(records: Records, Q: float, xi: float, V: float) -> float:
    """Quadratic reference count used to check pair_count"""
    if xi <= 0:
        return 0.0
    table = as_table(records)
    width = window_width(Q, xi, V)
    total = 0
    for i in range(len(table) - 1):
        dist = circle_distance(table.theta[i], table.theta[i + 1:])
        same = np.all(table.point_keys[i + 1:] == table.point_keys[i], axis=1)
        total += int(np.count_nonzero((dist < width) & ~same))
    return float(total)


def _check_grid(xi_grid: Sequence[float]) -> np.ndarray:
    grid = np.asarray(xi_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise GridError("xi grid must be a nonempty one-dimensional sequence")
    if not np.all(np.isfinite(grid)):
        raise GridError("xi grid contains non-finite values")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise GridError("xi grid must be strictly increasing")
    return grid


def finite_difference_density(xi: np.ndarray, R2: np.ndarray) -> np.ndarray:
    """
    Derivative of a cumulative curve by centered differences

    One-sided differences are used at both ends; a single-point grid uses
    the secant from the origin.
    """
    xi = np.asarray(xi, dtype=float)
    R2 = np.asarray(R2, dtype=float)
    if xi.size == 1:
        return np.array([R2[0] / xi[0] if xi[0] > 0 else 0.0])
    g2 = np.empty_like(R2)
    g2[1:-1] = (R2[2:] - R2[:-2]) / (xi[2:] - xi[:-2])
    g2[0] = (R2[1] - R2[0]) / (xi[1] - xi[0])
    g2[-1] = (R2[-1] - R2[-2]) / (xi[-1] - xi[-2])
    return g2


def _curve(table: AngleTable, Q: float, grid: np.ndarray, V: float, scale: float,
           interval: Optional[Arc], n_jobs: Optional[int]) -> CorrelationCurve:
    n_jobs = resolve_n_jobs(n_jobs)
    sorted_angles = _SortedAngles(table)
    counts = np.array([
        float(sorted_angles.count(window_width(Q, xi, V), n_jobs)) if xi > 0 else 0.0
        for xi in grid
    ])
    R2 = scale * V * counts / (np.pi * Q * Q)
    return CorrelationCurve(
        Q=Q,
        xi_grid=grid,
        N_Q=counts,
        R2_emp=R2,
        g2_emp=finite_difference_density(grid, R2),
        interval=interval,
        n_records=len(table),
    )


def empirical_R2(records: Records, Q: float, xi_grid: Sequence[float], V: float,
                 n_jobs: Optional[int] = None) -> CorrelationCurve:
    """
    Empirical R2(xi) = V N_Q(xi) / (pi Q^2) and its finite-difference density

    Args:
        records: Angle records of the ball
        Q: Ball radius
        xi_grid: Strictly increasing grid
        V: Covolume
        n_jobs: Worker count

    Returns:
        CorrelationCurve
    """
    grid = _check_grid(xi_grid)
    table = as_table(records)
    logger.info(f"Counting angle pairs for {len(table)} records on {grid.size} grid points (Q={Q})")
    return _curve(table, Q, grid, V, 1.0, None, n_jobs)


def restricted_R2(records: Records, Q: float, xi_grid: Sequence[float], V: float,
                  interval: Arc, n_jobs: Optional[int] = None) -> CorrelationCurve:
    """
    Pair correlation of the angles falling in a sub-arc of the sky

    Only pairs with both angles in the arc are counted; the count is
    rescaled by 2 pi / |arc| so the limit matches the full curve.

    Args:
        records: Angle records of the ball
        Q: Ball radius
        xi_grid: Strictly increasing grid
        V: Covolume
        interval: Sub-arc of positive length

    Returns:
        CorrelationCurve with the interval attached
    """
    if interval is None or not interval.length > 0:
        raise GridError("Restricted correlation needs an interval of positive length")
    grid = _check_grid(xi_grid)
    table = as_table(records)
    inside = table.subset(interval.contains(table.theta)) if len(table) else table
    logger.info(
        f"Restricted correlation on [{interval.lo:.6g}, {interval.hi:.6g}): "
        f"{len(inside)} of {len(table)} records"
    )
    return _curve(inside, Q, grid, V, TWO_PI / interval.length, interval, n_jobs)


def curve_frame(curve: CorrelationCurve) -> pd.DataFrame:
    """Table with columns xi, N_Q, R2_emp, g2_emp"""
    return pd.DataFrame({
        "xi": curve.xi_grid,
        "N_Q": curve.N_Q,
        "R2_emp": curve.R2_emp,
        "g2_emp": curve.g2_emp,
    })
