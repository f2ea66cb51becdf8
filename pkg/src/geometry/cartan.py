"""
Cartan decomposition g = k_theta a_t k_phi and hyperbolic angles

Base point is i and the reference direction points straight up, so the
angle of g is arg((g.i - i)/(g.i + i)) in the disk model.
"""
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from src.geometry.group_element import GroupElement, ZERO_TOLERANCE
from src.utils.helpers import wrap_angle

# Relative size below which the pair-angle denominator counts as zero
DEGENERATE_TOLERANCE = 1e-14


@dataclass(frozen=True)
class CartanCoords:
    """KA+K coordinates of a group element"""

    theta: float
    t: float
    phi: float

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"Cartan coordinate t must be nonnegative, got {self.t}")


@dataclass(frozen=True)
class AngleResult:
    """Ray angle of g.i seen from i; stabilizer elements carry the sentinel 0"""

    theta: float
    is_stabilizer: bool = False


@dataclass(frozen=True)
class PairGeometry:
    """Norm of gM and the angle it turns relative to g"""

    norm_sq: float
    tan_delta: float
    delta: float
    degenerate: bool = False


def rotation(theta: float) -> GroupElement:
    """k_theta, acting on the disk model as rotation by theta"""
    half = 0.5 * theta
    return GroupElement(np.cos(half), np.sin(half), -np.sin(half), np.cos(half))


def translation(t: float) -> GroupElement:
    """a_t = diag(e^{t/2}, e^{-t/2}), moving i to e^t i"""
    return GroupElement(np.exp(0.5 * t), 0.0, 0.0, np.exp(-0.5 * t))


def norm_sq(g: GroupElement) -> float:
    """
    Squared Frobenius norm, equal to 2 cosh d(i, g.i)

    Args:
        g: Group element

    Returns:
        a^2 + b^2 + c^2 + d^2 (at least 2)
    """
    return g.norm_sq


def displacement(n_sq: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Hyperbolic distance t from a squared norm 2 cosh t

    Uses t = 2 asinh(sqrt(n - 2)/2) which stays accurate near the identity.
    """
    gap = np.maximum(np.asarray(n_sq, dtype=float) - 2.0, 0.0)
    t = 2.0 * np.arcsinh(0.5 * np.sqrt(gap))
    if np.ndim(t) == 0:
        return float(t)
    return t


def _in_k(g: GroupElement) -> bool:
    off = (g.a - g.d) ** 2 + (g.b + g.c) ** 2
    if g.is_exact:
        return off == 0
    return float(off) <= ZERO_TOLERANCE


def _theta(a: float, b: float, c: float, d: float) -> float:
    return wrap_angle(np.arctan2(-2.0 * (a * c + b * d), a * a + b * b - c * c - d * d))


def decompose_cartan(g: GroupElement) -> CartanCoords:
    """
    Decompose g as k_theta a_t k_phi

    Args:
        g: Group element

    Returns:
        CartanCoords with theta the ray angle of g, t the distance d(i, g.i)
        and phi = pi - theta(g^-1). Rotations return (0, 0, rotation angle).
    """
    a, b, c, d = (float(x) for x in g.entries)

    if _in_k(g):
        return CartanCoords(0.0, 0.0, wrap_angle(2.0 * np.arctan2(b, a)))

    t = 2.0 * np.arcsinh(0.5 * np.sqrt((a - d) ** 2 + (b + c) ** 2))
    theta = _theta(a, b, c, d)
    theta_inv = _theta(d, -b, -c, a)
    phi = wrap_angle(np.pi - theta_inv)
    return CartanCoords(theta, float(t), phi)


def recompose(coords: CartanCoords) -> GroupElement:
    """Product k_theta a_t k_phi as a floating element"""
    return rotation(coords.theta) @ translation(coords.t) @ rotation(coords.phi)


def angle_of(g: GroupElement) -> AngleResult:
    """
    Directed angle between the upward direction at i and the ray toward g.i

    Args:
        g: Group element

    Returns:
        AngleResult; g.i = i yields theta 0 with is_stabilizer set
    """
    if _in_k(g):
        return AngleResult(0.0, is_stabilizer=True)
    a, b, c, d = (float(x) for x in g.entries)
    return AngleResult(_theta(a, b, c, d))


def pair_norm_and_angle(t: float, phi: float, ell: float) -> PairGeometry:
    """
    Closed forms for g = k_theta a_t k_phi k_{-m} times M = k_m a_ell k_*

    ||gM||^2 = 2(A cosh t + B cos(phi) sinh t) and
    tan(theta_gM - theta_g) = B sin(phi) / (A sinh t + B cos(phi) cosh t)
    with A = cosh ell, B = sinh ell.

    Args:
        t: Distance coordinate of g
        phi: Second rotation angle of g (after removing k_{-m})
        ell: Distance coordinate of M

    Returns:
        PairGeometry; a vanishing denominator (only possible for t <= ell)
        sets degenerate and leaves tan_delta as NaN
    """
    A, B = np.cosh(ell), np.sinh(ell)
    num = B * np.sin(phi)
    den = A * np.sinh(t) + B * np.cos(phi) * np.cosh(t)
    n_sq = 2.0 * (A * np.cosh(t) + B * np.cos(phi) * np.sinh(t))
    delta = wrap_angle(np.arctan2(num, den))

    scale = A * np.cosh(t) + 1.0
    if abs(den) <= DEGENERATE_TOLERANCE * scale:
        return PairGeometry(float(n_sq), float("nan"), delta, degenerate=True)
    return PairGeometry(float(n_sq), float(num / den), delta)


def batch_norm_sq(entries: np.ndarray) -> np.ndarray:
    """Squared norms of an (n, 4) array of (a, b, c, d) rows"""
    e = np.asarray(entries)
    return np.einsum("ij,ij->i", e, e).astype(float)


def batch_angles(entries: np.ndarray) -> np.ndarray:
    """Ray angles of an (n, 4) array of (a, b, c, d) rows"""
    e = np.asarray(entries, dtype=float)
    a, b, c, d = e[:, 0], e[:, 1], e[:, 2], e[:, 3]
    return wrap_angle(np.arctan2(-2.0 * (a * c + b * d), a * a + b * b - c * c - d * d))


def batch_points(entries: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Coordinates (x, y) of g.i for each row of an (n, 4) array"""
    e = np.asarray(entries, dtype=float)
    a, b, c, d = e[:, 0], e[:, 1], e[:, 2], e[:, 3]
    denom = c * c + d * d
    return (a * c + b * d) / denom, 1.0 / denom


def batch_point_keys(entries: np.ndarray, grid: float) -> np.ndarray:
    """
    Hashable point keys of g.i, one row per element

    Integer rows use the exact pair (ac + bd, c^2 + d^2); other rows are
    quantized to the grid.
    """
    e = np.asarray(entries)
    if np.issubdtype(e.dtype, np.integer):
        a, b, c, d = e[:, 0], e[:, 1], e[:, 2], e[:, 3]
        return np.stack([a * c + b * d, c * c + d * d], axis=1)
    x, y = batch_points(e)
    return np.stack([np.round(x / grid), np.round(y / grid)], axis=1).astype(np.int64)
