"""
Angle records of orbit points and sub-arcs of the circle
"""
import re
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np

from config.settings import settings
from src.geometry.cartan import batch_angles, batch_point_keys
from src.geometry.group_element import ZERO_TOLERANCE
from src.lattices.enumeration import BallEnumeration
from src.utils.exceptions import GridError
from src.utils.helpers import TWO_PI, wrap_angle
from src.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class AngleRecord:
    """Angle of one lattice element together with its orbit point key"""

    theta: float
    norm_sq: float
    point_key: Tuple[int, int]


@dataclass
class AngleTable:
    """
    Column store of angle records.

    Rows whose element fixes i are never part of a table.
    """

    theta: np.ndarray
    norm_sq: np.ndarray
    point_keys: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.norm_sq = np.asarray(self.norm_sq, dtype=float)
        self.point_keys = np.asarray(self.point_keys, dtype=np.int64).reshape(-1, 2)
        if not (self.theta.shape == self.norm_sq.shape == (self.point_keys.shape[0],)):
            raise ValueError("AngleTable columns must have equal length")

    def __len__(self) -> int:
        return int(self.theta.size)

    @classmethod
    def empty(cls) -> "AngleTable":
        return cls(np.empty(0), np.empty(0), np.empty((0, 2), dtype=np.int64))

    @classmethod
    def from_enumeration(cls, enum: BallEnumeration, grid: Optional[float] = None) -> "AngleTable":
        """
        Build the table from a ball enumeration, dropping stabilizer elements

        Args:
            enum: Ball enumeration
            grid: Quantization grid for floating point keys (defaults to KEY_GRID)

        Returns:
            AngleTable
        """
        if enum.count == 0:
            return cls.empty()
        grid = grid or settings.KEY_GRID
        norms = enum.norm_sq
        if enum.is_integral:
            moving = norms > 2.0
        else:
            moving = norms - 2.0 > ZERO_TOLERANCE
        entries = enum.entries[moving]
        dropped = enum.count - entries.shape[0]
        if dropped:
            logger.debug(f"Dropped {dropped} stabilizer elements from the angle records")
        return cls(
            theta=batch_angles(entries),
            norm_sq=norms[moving],
            point_keys=batch_point_keys(entries, grid),
        )

    @classmethod
    def from_records(cls, records: Iterable[AngleRecord]) -> "AngleTable":
        records = list(records)
        if not records:
            return cls.empty()
        return cls(
            theta=[wrap_angle(r.theta) for r in records],
            norm_sq=[r.norm_sq for r in records],
            point_keys=[r.point_key for r in records],
        )

    def records(self) -> List[AngleRecord]:
        return [
            AngleRecord(float(t), float(n), (int(k[0]), int(k[1])))
            for t, n, k in zip(self.theta, self.norm_sq, self.point_keys)
        ]

    def subset(self, mask: np.ndarray) -> "AngleTable":
        return AngleTable(self.theta[mask], self.norm_sq[mask], self.point_keys[mask])


Records = Union[AngleTable, Iterable[AngleRecord]]


def as_table(records: Records) -> AngleTable:
    """Accept either a table or an iterable of records"""
    if isinstance(records, AngleTable):
        return records
    return AngleTable.from_records(records)


@dataclass(frozen=True)
class Arc:
    """Half-open arc [lo, hi) of the circle, traversed counterclockwise"""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise GridError(f"Empty interval [{self.lo}, {self.hi})")
        if self.hi - self.lo > TWO_PI + 1e-12:
            raise GridError(f"Interval [{self.lo}, {self.hi}) is longer than the full circle")

    @property
    def length(self) -> float:
        return min(self.hi - self.lo, TWO_PI)

    @property
    def is_full(self) -> bool:
        return self.hi - self.lo >= TWO_PI - 1e-12

    def contains(self, theta: Union[float, np.ndarray]) -> Union[bool, np.ndarray]:
        if self.is_full:
            return np.ones(np.shape(theta), dtype=bool) if np.ndim(theta) else True
        offset = np.mod(np.asarray(theta, dtype=float) - self.lo, TWO_PI)
        inside = offset < self.hi - self.lo
        return bool(inside) if np.ndim(inside) == 0 else inside

    def __str__(self) -> str:
        return f"{self.lo:.17g}:{self.hi:.17g}"


_PI_TERM = re.compile(r"^([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\*?pi(?:/(\d+(?:\.\d*)?))?$")


def _parse_angle(token: str) -> float:
    token = token.strip().lower().replace(" ", "")
    match = _PI_TERM.match(token)
    if match:
        coef, denom = match.groups()
        if coef in ("", "+"):
            value = np.pi
        elif coef == "-":
            value = -np.pi
        else:
            value = float(coef) * np.pi
        return value / float(denom) if denom else value
    try:
        return float(token)
    except ValueError:
        raise GridError(f"Cannot parse angle '{token}'") from None


def parse_arc(text: str) -> Arc:
    """
    Parse 'lo:hi' (numbers or multiples of pi, e.g. '0:pi', '-pi/4:pi/4')

    Args:
        text: Interval description

    Returns:
        Arc
    """
    parts = str(text).split(":")
    if len(parts) != 2:
        raise GridError(f"Interval must look like 'lo:hi', got '{text}'")
    return Arc(_parse_angle(parts[0]), _parse_angle(parts[1]))
