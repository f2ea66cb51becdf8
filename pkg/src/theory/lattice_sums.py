"""
Lattice sums of the kernel: theoretical g2, R2 and their truncation control

Public functions take the argument xi of the pair correlation statistic.
The kernel is evaluated at zeta = V * xi; ``kernel_argument`` is the only
place where that conversion happens.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from config.settings import settings
from src.geometry.cartan import displacement
from src.lattices.enumeration import BallEnumeration, enumerate_lattice
from src.lattices.lattice_spec import LatticeSpec
from src.theory.kernel import (
    breakpoints,
    f_xi_antiderivative,
    f_xi_antiderivative_quad,
    f_xi_values,
)
from src.utils.exceptions import GridError, TruncationError
from src.utils.helpers import chunk_bounds, resolve_n_jobs
from src.utils.logger import get_logger

logger = get_logger(__name__)

METHODS = ("closed_form", "quad")

# Shells per lattice-sum task
SHELL_CHUNK = 50_000


def kernel_argument(xi: float, V: float) -> float:
    """Kernel variable zeta = V xi for the statistic at xi"""
    return float(V) * float(xi)


def knee_norm_sq(xi: float, V: float) -> float:
    """Squared norm 2 cosh ell2(V xi) where the kernel leaves its top case"""
    return 2.0 * np.cosh(breakpoints(kernel_argument(xi, V)).ell2)


def required_truncation(xi: float, V: float) -> float:
    """
    Smallest ball radius accepted for a lattice sum at xi

    Args:
        xi: Statistic argument
        V: Covolume

    Returns:
        sqrt(KNEE_FACTOR * 2 cosh ell2(V xi))
    """
    return float(np.sqrt(settings.KNEE_FACTOR * knee_norm_sq(xi, V)))


def _check_truncation(enum: BallEnumeration, xi: float, V: float) -> None:
    needed = settings.KNEE_FACTOR * knee_norm_sq(xi, V)
    if enum.Q ** 2 < needed:
        raise TruncationError(
            f"truncation below support knee: Q^2={enum.Q ** 2:.6g} < {needed:.6g} needed at xi={xi}"
        )


def _shells(enum: BallEnumeration) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(ell, multiplicity, norm_sq) per shell of the enumeration"""
    norms, counts = enum.shells()
    return displacement(norms), counts.astype(float), norms


def _outer_band(norms: np.ndarray, T: float) -> np.ndarray:
    """Shells with norm at least T/2"""
    band = norms >= 0.25 * T * T
    if not np.any(band) and norms.size:
        band = norms == norms.max()
    return band


def _chunk_sum(func, ell: np.ndarray, counts: np.ndarray, lo: int, hi: int) -> float:
    return float(np.sum(counts[lo:hi] * func(ell[lo:hi])))


def _chunked_sum(func, ell: np.ndarray, counts: np.ndarray, n_jobs: int) -> float:
    """
    Sum of counts * func(ell) over fixed-size shell chunks, in shell order

    Chunk edges depend only on the shell count, so the floating point
    result is the same for every worker count.
    """
    bounds = chunk_bounds(ell.size, -(-ell.size // SHELL_CHUNK))
    if n_jobs == 1 or len(bounds) <= 1:
        return float(sum(_chunk_sum(func, ell, counts, lo, hi) for lo, hi in bounds))
    parts = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_chunk_sum)(func, ell, counts, lo, hi)
        for lo, hi in bounds
    )
    return float(sum(parts))


def g2_theoretical(xi: float, enum: BallEnumeration, spec: LatticeSpec,
                   n_jobs: Optional[int] = None) -> Tuple[float, float]:
    """
    Limiting pair correlation density g2(xi) = (V/2pi) sum_M f_{V xi}(ell(M))

    Args:
        xi: Statistic argument
        enum: Lattice points used for the truncated sum
        spec: Lattice description (covolume)
        n_jobs: Worker count

    Returns:
        (value, tail_bound); the tail bound is c/T^2 with c the largest
        f * ||M||^4 over the outer band ||M|| >= T/2, doubled for slack
    """
    V = spec.covolume
    if xi < 0:
        raise GridError(f"xi must be nonnegative, got {xi}")
    if xi == 0:
        return g2_at_zero(enum, spec), 0.0
    _check_truncation(enum, xi, V)

    zeta = kernel_argument(xi, V)
    ell, counts, norms = _shells(enum)
    total = _chunked_sum(lambda e: f_xi_values(zeta, e), ell, counts, resolve_n_jobs(n_jobs))
    value = V / (2.0 * np.pi) * total

    T = enum.Q
    band = _outer_band(norms, T)
    c = float(np.max(f_xi_values(zeta, ell[band]) * norms[band] ** 2)) if np.any(band) else 0.0
    tail = c / (T * T)
    return value, tail


def g2_at_zero(enum: BallEnumeration, spec: LatticeSpec) -> float:
    """
    Value of g2 at 0: (V/pi) sum over moving elements of 1/(e^{2 ell} - 1)
    """
    ell, counts, _ = _shells(enum)
    moving = ell > 0
    return float(spec.covolume / np.pi * np.sum(counts[moving] / np.expm1(2.0 * ell[moving])))


def R2_theoretical(xi_grid: Sequence[float], enum: BallEnumeration, spec: LatticeSpec,
                   method: str = "closed_form", n_jobs: Optional[int] = None) -> np.ndarray:
    """
    Limiting cumulative pair correlation R2(xi) = (1/2pi) sum_M F(V xi; ell(M))

    Args:
        xi_grid: Statistic arguments
        enum: Lattice points used for the truncated sum
        spec: Lattice description (covolume)
        method: 'closed_form' (exact antiderivative) or 'quad' (adaptive
            quadrature split at the case boundaries)
        n_jobs: Worker count

    Returns:
        Array of R2 values on the grid
    """
    return _R2_with_tail(xi_grid, enum, spec, method, n_jobs)[0]


def _R2_with_tail(xi_grid, enum, spec, method, n_jobs):
    if method not in METHODS:
        raise ValueError(f"Unknown R2 method '{method}', expected one of {METHODS}")
    grid = np.atleast_1d(np.asarray(xi_grid, dtype=float))
    if np.any(grid < 0):
        raise GridError("xi grid must be nonnegative")
    V = spec.covolume
    if grid.size and grid.max() > 0:
        _check_truncation(enum, float(grid.max()), V)

    ell, counts, norms = _shells(enum)
    n_jobs = resolve_n_jobs(n_jobs)
    T = enum.Q
    band = _outer_band(norms, T)

    if method == "closed_form":
        def antiderivative(zeta, e):
            return f_xi_antiderivative(zeta, e)
    else:
        def antiderivative(zeta, e):
            return np.array([f_xi_antiderivative_quad(zeta, float(x)) for x in e])

    values = np.zeros_like(grid)
    tails = np.zeros_like(grid)
    for j, xi in enumerate(grid):
        if xi <= 0:
            continue
        zeta = kernel_argument(xi, V)
        total = _chunked_sum(lambda e: antiderivative(zeta, e), ell, counts, n_jobs)
        values[j] = total / (2.0 * np.pi)
        if np.any(band):
            c = float(np.max(antiderivative(zeta, ell[band]) * norms[band] ** 2))
            tails[j] = c / (V * T * T)
    return values, tails


@dataclass
class TheoryCurve:
    """Theoretical g2 and R2 on a grid with tail estimates"""

    xi_grid: np.ndarray
    g2: np.ndarray
    R2: np.ndarray
    g2_tail: np.ndarray
    R2_tail: np.ndarray
    truncation: float


def theory_curve(xi_grid: Sequence[float], enum: BallEnumeration, spec: LatticeSpec,
                 method: str = "closed_form", n_jobs: Optional[int] = None) -> TheoryCurve:
    """
    Evaluate g2 and R2 on a grid from one enumeration

    Args:
        xi_grid: Statistic arguments
        enum: Lattice points up to the truncation radius
        spec: Lattice description
        method: R2 evaluation method
        n_jobs: Worker count

    Returns:
        TheoryCurve
    """
    grid = np.atleast_1d(np.asarray(xi_grid, dtype=float))
    logger.info(
        f"Theoretical curve for '{spec.label}' on {grid.size} points "
        f"(truncation T={enum.Q}, {enum.count} elements, method={method})"
    )
    g2 = np.empty_like(grid)
    g2_tail = np.empty_like(grid)
    for j, xi in enumerate(grid):
        g2[j], g2_tail[j] = g2_theoretical(xi, enum, spec, n_jobs=n_jobs)
    R2, R2_tail = _R2_with_tail(grid, enum, spec, method, n_jobs)
    return TheoryCurve(grid, g2, R2, g2_tail, R2_tail, float(enum.Q))


def theory_frame(curve: TheoryCurve) -> pd.DataFrame:
    """Table with columns xi, g2_theory, R2_theory, tail_bound (of g2), R2_tail_bound"""
    return pd.DataFrame({
        "xi": curve.xi_grid,
        "g2_theory": curve.g2,
        "R2_theory": curve.R2,
        "tail_bound": curve.g2_tail,
        "R2_tail_bound": curve.R2_tail,
    })


def theory_truncation(xi_max: float, V: float, truncation: Optional[float] = None) -> float:
    """Radius for theory sums: the larger of the knee requirement and THEORY_TRUNCATION"""
    truncation = settings.THEORY_TRUNCATION if truncation is None else float(truncation)
    if xi_max <= 0:
        return truncation
    return max(required_truncation(xi_max, V), truncation)


def theory_enumeration(spec: LatticeSpec, xi_max: float,
                       existing: Optional[BallEnumeration] = None,
                       truncation: Optional[float] = None,
                       n_jobs: Optional[int] = None) -> BallEnumeration:
    """
    Lattice points for the theoretical sums up to xi_max

    Reuses an existing enumeration when its radius suffices.
    """
    T = theory_truncation(xi_max, spec.covolume, truncation)
    if existing is not None and existing.Q >= T:
        return existing.restrict(T)
    return enumerate_lattice(spec, T, n_jobs=n_jobs)

