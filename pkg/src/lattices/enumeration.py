"""
Enumeration of lattice points in the norm ball B_Q = {g : ||g|| < Q}
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from config.settings import settings
from src.geometry.cartan import batch_angles, batch_norm_sq
from src.geometry.group_element import GroupElement, ZERO_TOLERANCE
from src.lattices.lattice_spec import LatticeSpec
from src.utils.exceptions import EnumerationError, LatticeSpecError
from src.utils.helpers import chunk_bounds, resolve_n_jobs
from src.utils.logger import get_logger

logger = get_logger(__name__)

# Relative tolerance used to group floating norms into shells
SHELL_TOLERANCE = 1e-9


def radius_sq(Q: float) -> float:
    """Q^2, snapped to the nearest integer when Q is the root of one (Q = sqrt(2) gives 2.0)"""
    q_sq = float(Q) * float(Q)
    nearest = round(q_sq)
    if nearest > 0 and abs(q_sq - nearest) <= SHELL_TOLERANCE * nearest:
        return float(nearest)
    return q_sq


@dataclass
class BallEnumeration:
    """
    Canonical PSL representatives with norm below Q.

    ``entries`` is an (n, 4) array of (a, b, c, d) rows in lexicographic
    order; int64 for integer lattices, float64 otherwise.
    """

    Q: float
    entries: np.ndarray
    exact: bool = True
    complete: bool = True

    def __post_init__(self):
        self.entries = np.asarray(self.entries).reshape(-1, 4)

    @property
    def count(self) -> int:
        return int(self.entries.shape[0])

    @property
    def is_integral(self) -> bool:
        return np.issubdtype(self.entries.dtype, np.integer)

    @property
    def norm_sq(self) -> np.ndarray:
        """Squared norms as floats"""
        return batch_norm_sq(self.entries)

    @property
    def elements(self) -> List[GroupElement]:
        if self.is_integral:
            return [GroupElement(*(int(x) for x in row)) for row in self.entries]
        return [GroupElement(*row) for row in self.entries]

    def angles(self) -> np.ndarray:
        return batch_angles(self.entries)

    def restrict(self, Q: float) -> "BallEnumeration":
        """
        Sub-ball of smaller radius

        Args:
            Q: New radius, at most the current one

        Returns:
            BallEnumeration of the elements with norm below Q
        """
        if Q > self.Q:
            raise EnumerationError(f"Cannot restrict a ball of radius {self.Q} to larger radius {Q}")
        mask = self.norm_sq < radius_sq(Q)
        return BallEnumeration(Q=Q, entries=self.entries[mask], exact=self.exact,
                               complete=self.complete)

    def shells(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Distinct squared norms with their multiplicities

        Returns:
            (norms, counts), norms increasing
        """
        if self.count == 0:
            return np.empty(0, dtype=float), np.empty(0, dtype=np.int64)
        if self.is_integral:
            e = self.entries
            norms, counts = np.unique(np.einsum("ij,ij->i", e, e), return_counts=True)
            return norms.astype(float), counts.astype(np.int64)

        norms = np.sort(self.norm_sq)
        breaks = np.flatnonzero(np.diff(norms) > SHELL_TOLERANCE * (1.0 + norms[1:])) + 1
        starts = np.concatenate([[0], breaks])
        counts = np.diff(np.concatenate([starts, [norms.size]]))
        return norms[starts], counts.astype(np.int64)

    def stabilizer_count(self) -> int:
        """Number of enumerated elements fixing i"""
        if self.is_integral:
            e = self.entries
            return int(np.count_nonzero(np.einsum("ij,ij->i", e, e) == 2))
        return int(np.count_nonzero(self.norm_sq - 2.0 <= ZERO_TOLERANCE))


def _extended_gcd(u: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized extended Euclid: returns (g, x, y) with x*u + y*v = g"""
    old_r, r = u.copy(), v.copy()
    old_s, s = np.ones_like(u), np.zeros_like(u)
    old_t, t = np.zeros_like(u), np.ones_like(u)
    while np.any(r != 0):
        m = r != 0
        q = np.where(m, old_r // np.where(m, r, 1), 0)
        old_r, r = np.where(m, r, old_r), np.where(m, old_r - q * r, r)
        old_s, s = np.where(m, s, old_s), np.where(m, old_s - q * s, s)
        old_t, t = np.where(m, t, old_t), np.where(m, old_t - q * t, t)
    return old_r, old_s, old_t


def _canonicalize_int_rows(rows: np.ndarray) -> np.ndarray:
    a, b = rows[:, 0], rows[:, 1]
    flip = (a < 0) | ((a == 0) & (b < 0))
    rows[flip] *= -1
    return rows


def _psl2z_chunk(c_lo: int, c_hi: int, q_sq: float) -> np.ndarray:
    """All elements with lower row (c, d), c in [c_lo, c_hi)"""
    c_list, d_list = [], []
    for c in range(c_lo, c_hi):
        if c == 0:
            c_list.append(np.array([0], dtype=np.int64))
            d_list.append(np.array([1], dtype=np.int64))
            continue
        rem = q_sq - c * c
        if rem <= 0:
            continue
        d_max = math.isqrt(max(int(math.ceil(rem)) - 1, 0))
        while d_max * d_max + c * c >= q_sq:
            d_max -= 1
        if d_max < 0:
            continue
        d = np.arange(-d_max, d_max + 1, dtype=np.int64)
        c_list.append(np.full(d.size, c, dtype=np.int64))
        d_list.append(d)

    if not c_list:
        return np.empty((0, 4), dtype=np.int64)

    c = np.concatenate(c_list)
    d = np.concatenate(d_list)

    g, x, y = _extended_gcd(np.abs(d), c)
    coprime = g == 1
    c, d, x, y = c[coprime], d[coprime], x[coprime], y[coprime]

    # Particular solution of a*d - b*c = 1
    a0 = np.where(d < 0, -x, x)
    b0 = -y

    # (a^2 + b^2) n = s^2 + 1 with s = ac + bd moving in steps of n along k
    n = c * c + d * d
    s0 = a0 * c + b0 * d
    radius = np.sqrt(np.maximum(n * (q_sq - n) - 1.0, 0.0))
    centre = -s0 / n
    k_lo = np.ceil(centre - radius / n).astype(np.int64) - 1
    k_hi = np.floor(centre + radius / n).astype(np.int64) + 1
    counts = np.maximum(k_hi - k_lo + 1, 0)

    total = int(counts.sum())
    if total == 0:
        return np.empty((0, 4), dtype=np.int64)

    pair = np.repeat(np.arange(c.size), counts)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    k = k_lo[pair] + (np.arange(total) - offsets[pair])

    rows = np.stack([
        a0[pair] + k * c[pair],
        b0[pair] + k * d[pair],
        c[pair],
        d[pair],
    ], axis=1)

    norms = np.einsum("ij,ij->i", rows, rows)
    rows = rows[norms < q_sq]
    return _canonicalize_int_rows(rows)


def _lexsort_rows(rows: np.ndarray) -> np.ndarray:
    if rows.shape[0] == 0:
        return rows
    order = np.lexsort((rows[:, 3], rows[:, 2], rows[:, 1], rows[:, 0]))
    return rows[order]


def enumerate_psl2z(Q: float, n_jobs: Optional[int] = None) -> BallEnumeration:
    """
    Enumerate PSL2(Z) inside B_Q by solving ad - bc = 1 directly

    Loops over coprime lower rows (c, d) with c^2 + d^2 < Q^2 and walks the
    arithmetic progression of upper rows, bounded in closed form.

    Args:
        Q: Ball radius
        n_jobs: Worker count (defaults to HYPANGLES_THREADS)

    Returns:
        BallEnumeration with int64 entries in lexicographic order
    """
    q_sq = radius_sq(Q)
    if q_sq <= 2.0:
        logger.warning(f"Q = {Q} is at most sqrt(2); the ball contains no lattice points")
        return BallEnumeration(Q=Q, entries=np.empty((0, 4), dtype=np.int64))

    n_jobs = resolve_n_jobs(n_jobs)
    c_max = int(math.isqrt(int(math.ceil(q_sq)))) + 1
    bounds = chunk_bounds(c_max, max(1, 4 * n_jobs))

    logger.info(f"Enumerating PSL2(Z) in B_Q with Q={Q} over {len(bounds)} chunks, n_jobs={n_jobs}")
    parts = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_psl2z_chunk)(lo, hi, q_sq) for lo, hi in bounds
    )
    rows = np.concatenate(parts) if parts else np.empty((0, 4), dtype=np.int64)
    rows = _lexsort_rows(rows)

    logger.info(f"Found {rows.shape[0]} elements of PSL2(Z) with norm < {Q}")
    return BallEnumeration(Q=Q, entries=rows)


def _generator_rows(spec: LatticeSpec) -> Tuple[np.ndarray, str]:
    """Generators as an array and the arithmetic mode ('int', 'exact' or 'float')"""
    gens = spec.generators
    if all(g.is_integral for g in gens):
        return np.array([g.entries for g in gens], dtype=np.int64), "int"
    if all(g.is_exact for g in gens):
        return np.array([g.entries for g in gens], dtype=object), "exact"
    return np.array([[float(x) for x in g.entries] for g in gens], dtype=float), "float"


def _canonical_rows(rows: np.ndarray, mode: str) -> np.ndarray:
    rows = rows.copy()
    if rows.shape[0] == 0:
        return rows
    tol = 0 if mode != "float" else ZERO_TOLERANCE
    nonzero = np.array(np.abs(rows) > tol, dtype=bool)
    first = np.argmax(nonzero, axis=1)
    lead = rows[np.arange(rows.shape[0]), first]
    flip = np.array(lead < 0, dtype=bool)
    rows[flip] = -rows[flip]
    return rows


def _row_keys(rows: np.ndarray, mode: str, grid: float) -> List[tuple]:
    if mode == "float":
        return [tuple(r) for r in np.round(rows / grid).astype(np.int64).tolist()]
    return [tuple(r) for r in rows.tolist()]


def _right_products(frontier: np.ndarray, gens: np.ndarray, bound_sq: float, mode: str) -> np.ndarray:
    """Canonical products frontier @ generator with squared norm below bound_sq"""
    a, b, c, d = (frontier[:, i][:, None] for i in range(4))
    ga, gb, gc, gd = (gens[:, i][None, :] for i in range(4))
    rows = np.stack([
        a * ga + b * gc,
        a * gb + b * gd,
        c * ga + d * gc,
        c * gb + d * gd,
    ], axis=2).reshape(-1, 4)

    norms = np.array((rows * rows).sum(axis=1), dtype=float)
    rows = rows[norms < bound_sq]
    return _canonical_rows(rows, mode)


def enumerate_generated(
    spec: LatticeSpec,
    Q: float,
    margin: Optional[float] = None,
    max_elements: Optional[int] = None,
    n_jobs: Optional[int] = None
) -> BallEnumeration:
    """
    Enumerate a lattice inside B_Q by breadth-first search over generators

    Words are extended on the right by each generator (inverses included)
    and kept while their norm stays below margin * Q.

    Args:
        spec: Lattice with a nonempty generator set
        Q: Ball radius
        margin: Search threshold multiplier (defaults to BFS_MARGIN)
        max_elements: Element cap (defaults to MAX_ELEMENTS)
        n_jobs: Worker count for level products

    Returns:
        BallEnumeration of elements with norm below Q, complete=False when
        the element cap was hit
    """
    if not spec.generators:
        raise LatticeSpecError(f"Lattice '{spec.label}' has no generators to search with")

    margin = settings.BFS_MARGIN if margin is None else float(margin)
    if margin < 1.0:
        raise EnumerationError(f"BFS margin must be >= 1, got {margin}")
    max_elements = settings.MAX_ELEMENTS if max_elements is None else int(max_elements)
    n_jobs = resolve_n_jobs(n_jobs)
    grid = settings.KEY_GRID

    gens, mode = _generator_rows(spec)
    bound_sq = (margin * Q) ** 2

    identity = np.array([[1, 0, 0, 1]], dtype=gens.dtype)
    seen = set(_row_keys(identity, mode, grid))
    kept = [identity]
    frontier = identity
    complete = True
    level = 0

    logger.info(
        f"BFS over {len(spec.generators)} generators of '{spec.label}' "
        f"(mode={mode}, Q={Q}, margin={margin})"
    )

    while frontier.shape[0] > 0:
        level += 1
        bounds = chunk_bounds(frontier.shape[0], n_jobs)
        parts = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_right_products)(frontier[lo:hi], gens, bound_sq, mode) for lo, hi in bounds
        )
        candidates = np.concatenate(parts) if parts else frontier[:0]

        fresh = []
        for key, row in zip(_row_keys(candidates, mode, grid), candidates):
            if key in seen:
                continue
            seen.add(key)
            fresh.append(row)
            if len(seen) >= max_elements:
                complete = False
                break

        frontier = np.array(fresh, dtype=gens.dtype).reshape(-1, 4)
        kept.append(frontier)
        logger.debug(f"BFS level {level}: {frontier.shape[0]} new elements, {len(seen)} total")

        if not complete:
            logger.warning(
                f"BFS stopped at the element cap {max_elements}; enumeration is incomplete"
            )
            break

    rows = np.concatenate(kept)
    if mode == "exact":
        rows = rows.astype(float)
    norms = batch_norm_sq(rows)
    rows = _lexsort_rows(rows[norms < radius_sq(Q)])

    logger.info(f"BFS finished after {level} levels: {rows.shape[0]} elements with norm < {Q}")
    return BallEnumeration(Q=Q, entries=rows, exact=(mode != "float"), complete=complete)


def check_stabilizer(enum: BallEnumeration, spec: LatticeSpec) -> bool:
    """
    Compare the enumerated stabilizer of i with the declared order

    Args:
        enum: Ball enumeration
        spec: Lattice description (stabilizer_order)

    Returns:
        False when a complete, nonempty enumeration disagrees with
        spec.stabilizer_order
    """
    if enum.count == 0 or not enum.complete:
        return True
    found = enum.stabilizer_count()
    if found != int(spec.stabilizer_order):
        logger.warning(
            f"Lattice '{spec.label}' declares stabilizer order {spec.stabilizer_order} "
            f"but {found} enumerated elements fix the base point"
        )
        return False
    return True


def enumerate_lattice(spec: LatticeSpec, Q: float, n_jobs: Optional[int] = None,
                      margin: Optional[float] = None) -> BallEnumeration:
    """Dispatch to the Diophantine or the BFS enumeration"""
    if spec.kind == "psl2z":
        enum = enumerate_psl2z(Q, n_jobs=n_jobs)
    else:
        enum = enumerate_generated(spec, Q, margin=margin, n_jobs=n_jobs)
    check_stabilizer(enum, spec)
    return enum


def count_vs_asymptotic(enum: BallEnumeration, spec: LatticeSpec) -> float:
    """
    Ratio of the lattice count to its asymptotic pi Q^2 / V

    Args:
        enum: Ball enumeration
        spec: Lattice description (covolume)

    Returns:
        count * V / (pi Q^2)
    """
    if enum.Q <= 0:
        return 0.0
    return enum.count * spec.covolume / (np.pi * enum.Q ** 2)


def enumeration_frame(enum: BallEnumeration) -> pd.DataFrame:
    """Table of elements with their squared norms and angles"""
    e = enum.entries
    return pd.DataFrame({
        "a": e[:, 0],
        "b": e[:, 1],
        "c": e[:, 2],
        "d": e[:, 3],
        "norm_sq": enum.norm_sq,
        "theta": enum.angles(),
    })
