"""
Elements of PSL2(R) and points of the upper half-plane
"""
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral, Rational
from typing import Tuple, Union

import numpy as np

from config.settings import settings
from src.utils.exceptions import LatticeSpecError

Scalar = Union[int, Fraction, float]

DET_TOLERANCE = 1e-12
ZERO_TOLERANCE = 1e-12


def _is_exact(x: Scalar) -> bool:
    return isinstance(x, (Integral, Rational)) and not isinstance(x, bool)


def _normalize_scalar(x: Scalar) -> Scalar:
    """Integral fractions become ints, numpy scalars become Python scalars."""
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x.numerator)
    return x


@dataclass(frozen=True)
class HPoint:
    """Point x + iy of the upper half-plane"""

    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"Upper half-plane point needs y > 0, got {self.y}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(float(z.real), float(z.imag))


def distance(p: HPoint, q: HPoint) -> float:
    """
    Hyperbolic distance between two points

    Args:
        p: First point
        q: Second point

    Returns:
        d(p, q) from cosh d = 1 + |p - q|^2 / (2 Im p Im q)
    """
    sep = (p.x - q.x) ** 2 + (p.y - q.y) ** 2
    return float(np.arccosh(1.0 + sep / (2.0 * p.y * q.y)))


@dataclass(frozen=True)
class GroupElement:
    """
    Unimodular 2x2 matrix [[a, b], [c, d]] taken modulo sign.

    Entries are ints or Fractions on the exact path (arithmetic lattices)
    and floats otherwise. Construction does not canonicalize; use
    ``canonical()`` before hashing or comparing classes.
    """

    a: Scalar
    b: Scalar
    c: Scalar
    d: Scalar

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, _normalize_scalar(getattr(self, name)))
        det = self.det
        if self.is_exact:
            if det != 1:
                raise LatticeSpecError(f"Determinant must be exactly 1, got {det}")
        elif abs(float(det) - 1.0) > DET_TOLERANCE * max(1.0, self.norm_sq):
            raise LatticeSpecError(f"Determinant must be 1 within tolerance, got {det}")

    @property
    def entries(self) -> Tuple[Scalar, Scalar, Scalar, Scalar]:
        return (self.a, self.b, self.c, self.d)

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(x) for x in self.entries)

    @property
    def is_integral(self) -> bool:
        return all(isinstance(x, int) for x in self.entries)

    @property
    def det(self) -> Scalar:
        return self.a * self.d - self.b * self.c

    @property
    def norm_sq(self) -> float:
        return float(self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d)

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_matrix(cls, m) -> "GroupElement":
        """Build from a nested 2x2 sequence or array"""
        return cls(m[0][0], m[0][1], m[1][0], m[1][1])

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "GroupElement":
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def act(self, z: complex) -> complex:
        """Mobius action z -> (az + b)/(cz + d)"""
        return (float(self.a) * z + float(self.b)) / (float(self.c) * z + float(self.d))

    def point(self) -> HPoint:
        """Image g.i of the base point"""
        return HPoint.from_complex(self.act(1j))

    def canonical(self) -> "GroupElement":
        """PSL representative whose first nonzero entry is positive"""
        tol = 0 if self.is_exact else ZERO_TOLERANCE
        for x in self.entries:
            if abs(x) > tol:
                if x < 0:
                    return GroupElement(-self.a, -self.b, -self.c, -self.d)
                return self
        return self

    def key(self, grid: float = None) -> tuple:
        """
        Hashable key of the PSL class

        Exact entries hash exactly; float entries are quantized to a grid.
        """
        canon = self.canonical()
        if canon.is_exact:
            return canon.entries
        grid = grid or settings.KEY_GRID
        return tuple(int(round(float(x) / grid)) for x in canon.entries)

    def as_float(self) -> "GroupElement":
        return GroupElement(*(float(x) for x in self.entries))

    def __repr__(self) -> str:
        return f"GroupElement([[{self.a}, {self.b}], [{self.c}, {self.d}]])"


# Standard generators of PSL2(Z)
T = GroupElement(1, 1, 0, 1)
S = GroupElement(0, 1, -1, 0)
