"""
The three-case kernel f_xi(ell) of the limiting pair correlation density

With A = cosh ell, B = sinh ell, C = 2 sinh(ell/2) and s = sqrt(B^2 - xi^2):

    B <= xi        f = 2 ell / xi^2
    C <= xi <= B   f = (2/xi^2) [log1p(xi^2/((B+s)(A+s))) + log((1+xi^2)/(A+s))]
    xi <= C        f = (2/xi^2) log1p(xi^2/((B+s)(A+s)))

The log1p form equals ell - log(A + s) without the cancellation.
"""
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate

from src.utils.exceptions import GridError, NonDifferentiableError
from src.utils.logger import get_logger

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]

CASE_TOP = "B<=xi"
CASE_MIDDLE = "C<=xi<=B"
CASE_BOTTOM = "xi<=C"

# Distance to a breakpoint treated as sitting on it
BREAKPOINT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Breakpoints:
    """Non-smooth points of f_xi: sinh(ell1) = 2 sinh(ell2/2) = xi"""

    ell1: float
    ell2: float


@dataclass(frozen=True)
class FxiEval:
    """Evaluation of f_xi at one distance with its case"""

    ell: float
    A: float
    B: float
    C: float
    value: float
    case_tag: str


def _check_xi(xi: float) -> float:
    xi = float(xi)
    if not np.isfinite(xi) or xi < 0:
        raise GridError(f"xi must be a nonnegative finite number, got {xi}")
    return xi


def _check_ell(ell: np.ndarray) -> np.ndarray:
    ell = np.asarray(ell, dtype=float)
    if np.any(ell < 0) or not np.all(np.isfinite(ell)):
        raise GridError("ell must be nonnegative and finite")
    return ell


def abc(ell: ArrayLike):
    """A = cosh ell, B = sinh ell, C = 2 sinh(ell/2) = sqrt(2(A - 1))"""
    ell = np.asarray(ell, dtype=float)
    return np.cosh(ell), np.sinh(ell), 2.0 * np.sinh(0.5 * ell)


def breakpoints(xi: float) -> Breakpoints:
    """
    Breakpoints of f_xi as a function of ell

    Args:
        xi: Kernel argument

    Returns:
        Breakpoints(ell1 = asinh(xi), ell2 = 2 asinh(xi/2))
    """
    xi = _check_xi(xi)
    return Breakpoints(float(np.arcsinh(xi)), float(2.0 * np.arcsinh(0.5 * xi)))


def f_zero(ell: ArrayLike) -> ArrayLike:
    """Limit of f_xi as xi -> 0, equal to 2/(e^{2 ell} - 1)"""
    ell = np.asarray(ell, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(ell > 0, 2.0 / np.expm1(2.0 * np.maximum(ell, 1e-300)), 0.0)
    return float(out) if out.ndim == 0 else out


def case_tags(xi: float, ell: np.ndarray) -> np.ndarray:
    """Case label of each distance"""
    _, B, C = abc(ell)
    return np.where(B <= xi, CASE_TOP, np.where(C >= xi, CASE_BOTTOM, CASE_MIDDLE))


def f_xi_values(xi: float, ell: ArrayLike) -> ArrayLike:
    """
    Vectorized f_xi over distances

    Args:
        xi: Kernel argument (0 gives the limiting kernel)
        ell: Distance(s)

    Returns:
        f_xi(ell), same shape as ell
    """
    xi = _check_xi(xi)
    ell = _check_ell(ell)
    if xi == 0.0:
        return f_zero(ell)

    A, B, C = abc(ell)
    top = B <= xi
    s = np.sqrt(np.maximum(B * B - xi * xi, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        bottom_part = np.log1p(xi * xi / ((B + s) * (A + s)))
        middle_part = bottom_part + np.log((1.0 + xi * xi) / (A + s))

    inner = np.where(top, ell, np.where(C >= xi, bottom_part, middle_part))
    out = 2.0 * inner / (xi * xi)
    return float(out) if out.ndim == 0 else out


def f_xi(xi: float, ell: float) -> FxiEval:
    """
    Evaluate f_xi at a single distance

    Args:
        xi: Kernel argument, positive
        ell: Distance, nonnegative

    Returns:
        FxiEval with A, B, C and the case that applied
    """
    ell = float(_check_ell(ell))
    A, B, C = (float(x) for x in abc(ell))
    value = f_xi_values(xi, ell)
    tag = str(case_tags(_check_xi(xi), np.asarray(ell)).item())
    return FxiEval(ell=ell, A=A, B=B, C=C, value=float(value), case_tag=tag)


def f_xi_prime_values(xi: float, ell: ArrayLike) -> ArrayLike:
    """
    Vectorized derivative of f_xi in ell; NaN on the breakpoints

        ell < ell1          2/xi^2
        ell1 < ell < ell2   (2/xi^2)(1 - 2B/s)
        ell > ell2          (2/xi^2)(1 - B/s)
    """
    xi = _check_xi(xi)
    if xi == 0.0:
        raise GridError("derivative of f_xi needs xi > 0")
    ell = _check_ell(ell)
    bp = breakpoints(xi)
    _, B, _ = abc(ell)
    s = np.sqrt(np.maximum(B * B - xi * xi, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(
            ell < bp.ell1, 1.0,
            np.where(ell < bp.ell2, 1.0 - 2.0 * B / s, 1.0 - B / s),
        )
    out = 2.0 * factor / (xi * xi)
    at_break = (np.abs(ell - bp.ell1) <= BREAKPOINT_TOLERANCE * max(1.0, bp.ell1)) | (
        np.abs(ell - bp.ell2) <= BREAKPOINT_TOLERANCE * max(1.0, bp.ell2)
    )
    out = np.where(at_break, np.nan, out)
    return float(out) if out.ndim == 0 else out


def f_xi_prime(xi: float, ell: float) -> float:
    """
    Derivative of f_xi with respect to ell

    Args:
        xi: Kernel argument, positive
        ell: Distance away from the breakpoints

    Returns:
        f_xi'(ell)
    """
    value = f_xi_prime_values(xi, float(ell))
    if np.isnan(value):
        bp = breakpoints(xi)
        raise NonDifferentiableError(
            f"f_xi is not differentiable at ell={ell} (breakpoints {bp.ell1:.12g}, {bp.ell2:.12g})"
        )
    return float(value)


def _phi_bottom(z: np.ndarray, A, B, E) -> np.ndarray:
    s = np.sqrt(np.maximum(B * B - z * z, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.log1p(z * z / ((B + s) * (A + s)))
        val = -2.0 * h / z + 4.0 * np.arctan(E * z / (B + s))
    return np.where(z > 0, val, 0.0)


def _phi_middle(z: np.ndarray, A, B, E) -> np.ndarray:
    s = np.sqrt(np.maximum(B * B - z * z, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.log1p(z * z / ((B + s) * (A + s))) + np.log((1.0 + z * z) / (A + s))
        val = -2.0 * h / z + 4.0 * np.arctan(z) + 8.0 * np.arctan(E * z / (B + s))
    return np.where(z > 0, val, 0.0)


def f_xi_antiderivative(xi: float, ell: ArrayLike) -> ArrayLike:
    """
    Exact integral F(xi; ell) = int_0^xi f_zeta(ell) d zeta

    Obtained piecewise by integrating each case by parts; the pieces are
    glued at zeta = C and zeta = B.

    Args:
        xi: Upper limit (0 gives 0)
        ell: Distance(s)

    Returns:
        F(xi; ell), same shape as ell
    """
    xi = _check_xi(xi)
    ell = _check_ell(ell)
    scalar = ell.ndim == 0
    ell = np.atleast_1d(ell)
    out = np.zeros_like(ell)

    pos = ell > 0
    if xi > 0.0 and np.any(pos):
        el = ell[pos]
        A, B, C = abc(el)
        E = np.exp(-el)

        F = _phi_bottom(np.minimum(xi, C), A, B, E)
        F = F + np.where(
            xi > C,
            _phi_middle(np.minimum(xi, B), A, B, E) - _phi_middle(C, A, B, E),
            0.0,
        )
        F = F + np.where(xi > B, 2.0 * el * (1.0 / B - 1.0 / xi), 0.0)
        out[pos] = F

    return float(out[0]) if scalar else out


def f_xi_antiderivative_quad(xi: float, ell: float) -> float:
    """Adaptive quadrature of f_zeta(ell) over [0, xi], split at C and B"""
    xi = _check_xi(xi)
    ell = float(_check_ell(ell))
    if xi == 0.0 or ell == 0.0:
        return 0.0
    _, B, C = (float(x) for x in abc(ell))
    points = [p for p in (C, B) if 0.0 < p < xi]
    value, abserr = integrate.quad(
        lambda z: f_xi_values(z, ell), 0.0, xi,
        points=points or None, limit=200, epsabs=1e-14, epsrel=1e-12,
    )
    logger.debug(f"quad F({xi}; {ell}) = {value} +/- {abserr}")
    return float(value)
