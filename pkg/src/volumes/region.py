"""
The region R_M(Q, xi) of pairs (g, gM) with close angles, and the exact
one-dimensional integral of its leading volume term
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
from scipy import integrate, optimize

from src.geometry.cartan import (
    angle_of,
    decompose_cartan,
    displacement,
    pair_norm_and_angle,
)
from src.geometry.group_element import GroupElement, ZERO_TOLERANCE
from src.utils.exceptions import RegionError
from src.utils.helpers import circle_distance, wrap_angle
from src.utils.logger import get_logger

logger = get_logger(__name__)

Interval = Tuple[float, float]


@dataclass(frozen=True)
class RegionSpec:
    """
    Region {g : ||g|| < Q, ||gM|| < Q, |theta_g - theta_gM| < 2 xi / Q^2}.

    Derived: ell = d(i, M i), A = cosh ell, B = sinh ell,
    C = 2 sinh(ell/2), and m = theta(M).
    """

    M: GroupElement
    Q: float
    xi: float
    ell: float = field(init=False)
    A: float = field(init=False)
    B: float = field(init=False)
    C: float = field(init=False)
    m: float = field(init=False)

    def __post_init__(self):
        if self.M.norm_sq - 2.0 <= ZERO_TOLERANCE:
            raise RegionError(f"M = {self.M} fixes i (it lies in K); the region is undefined")
        if not self.Q > 0:
            raise RegionError(f"Q must be positive, got {self.Q}")
        # xi = 0 is the empty limiting region
        if not self.xi >= 0:
            raise RegionError(f"xi must be nonnegative, got {self.xi}")
        ell = displacement(self.M.norm_sq)
        object.__setattr__(self, "ell", ell)
        object.__setattr__(self, "A", float(np.cosh(ell)))
        object.__setattr__(self, "B", float(np.sinh(ell)))
        object.__setattr__(self, "C", float(2.0 * np.sinh(0.5 * ell)))
        object.__setattr__(self, "m", decompose_cartan(self.M).theta)

    def with_xi(self, xi: float) -> "RegionSpec":
        return RegionSpec(self.M, self.Q, xi)

    def with_Q(self, Q: float) -> "RegionSpec":
        return RegionSpec(self.M, Q, self.xi)


@dataclass(frozen=True)
class IntervalSet:
    """
    Pieces of [-1, 1] (in y = cos phi) where |J_xi(y)| takes each form.

    On I1 the length is 1 - B sqrt(1-y^2)/(xi(A+By)); on I2 it is
    1/(A+By) - B sqrt(1-y^2)/(xi(A+By)); elsewhere it vanishes.
    """

    I1: Tuple[Interval, ...]
    I2: Tuple[Interval, ...]
    lambda_minus: Optional[float]
    lambda_plus: Optional[float]
    alpha: Optional[float]
    case_tag: str

    def i3(self) -> Tuple[Interval, ...]:
        """Complement of I1 and I2 in [-1, 1]"""
        covered = sorted(self.I1 + self.I2)
        gaps = []
        cursor = -1.0
        for lo, hi in covered:
            if lo > cursor:
                gaps.append((cursor, lo))
            cursor = max(cursor, hi)
        if cursor < 1.0:
            gaps.append((cursor, 1.0))
        return tuple(gaps)


def _pieces(*intervals: Interval) -> Tuple[Interval, ...]:
    return tuple((float(lo), float(hi)) for lo, hi in intervals if hi > lo)


def interval_endpoints(spec: RegionSpec) -> IntervalSet:
    """
    Split [-1, 1] according to the form of |J_xi(y)|

    The roots of B^2(xi^2+1)y^2 + 2AB xi^2 y + A^2 xi^2 - B^2 = 0 are taken
    from the cancellation-free pair
        lambda_- = -(A xi^2 + s)/(B(1 + xi^2)),
        lambda_+ = (B^2 - A^2 xi^2)/(B(A xi^2 + s)),   s = sqrt(B^2 - xi^2),
    and alpha = sqrt(1 - xi^2/B^2) solves B sqrt(1 - y^2) = xi.

    Args:
        spec: Region description

    Returns:
        IntervalSet for the case selected by xi against B and C
    """
    A, B, C, xi = spec.A, spec.B, spec.C, spec.xi
    knee = (1.0 - A) / B

    if B < xi:
        return IntervalSet(
            I1=_pieces((-1.0, knee)),
            I2=_pieces((knee, 1.0)),
            lambda_minus=None,
            lambda_plus=None,
            alpha=None,
            case_tag="B<xi",
        )

    s = np.sqrt(max(B * B - xi * xi, 0.0))
    lam_minus = -(A * xi * xi + s) / (B * (1.0 + xi * xi))
    lam_plus = (B * B - A * A * xi * xi) / (B * (A * xi * xi + s))
    alpha = float(np.sqrt(max(1.0 - (xi / B) ** 2, 0.0)))

    if C < xi:
        return IntervalSet(
            I1=_pieces((-1.0, lam_minus), (lam_plus, knee)),
            I2=_pieces((knee, -alpha), (alpha, 1.0)),
            lambda_minus=float(lam_minus),
            lambda_plus=float(lam_plus),
            alpha=alpha,
            case_tag="C<xi<=B",
        )

    return IntervalSet(
        I1=_pieces((-1.0, lam_minus)),
        I2=_pieces((alpha, 1.0)),
        lambda_minus=float(lam_minus),
        lambda_plus=float(lam_plus),
        alpha=alpha,
        case_tag="xi<=C",
    )


def J_length(spec: RegionSpec, y: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """|J_xi(y)| evaluated directly from its defining inequalities"""
    y = np.asarray(y, dtype=float)
    A, B, xi = spec.A, spec.B, spec.xi
    with np.errstate(divide="ignore", invalid="ignore"):
        lower = B * np.sqrt(np.maximum(1.0 - y * y, 0.0)) / (xi * (A + B * y))
        upper = np.minimum(1.0, 1.0 / (A + B * y))
    out = np.nan_to_num(np.maximum(upper - lower, 0.0))
    return float(out) if out.ndim == 0 else out


def F_M(spec: RegionSpec) -> float:
    """
    Leading volume coefficient int_{-1}^{1} |J_xi(y)| / sqrt(1 - y^2) dy

    Integrated in phi with y = cos phi, which removes the endpoint
    singularity; each piece of I1 and I2 has a smooth integrand.

    Args:
        spec: Region description

    Returns:
        F_M(xi), with vol(R_M(Q, xi)) ~ Q^2 F_M(xi)
    """
    if spec.xi == 0:
        return 0.0
    A, B, xi = spec.A, spec.B, spec.xi
    intervals = interval_endpoints(spec)

    def on_i1(phi):
        return 1.0 - B * np.sin(phi) / (xi * (A + B * np.cos(phi)))

    def on_i2(phi):
        return (1.0 - B * np.sin(phi) / xi) / (A + B * np.cos(phi))

    total = 0.0
    for integrand, pieces in ((on_i1, intervals.I1), (on_i2, intervals.I2)):
        for lo, hi in pieces:
            # y in [lo, hi] maps to phi in [arccos hi, arccos lo]
            phi_lo = float(np.arccos(np.clip(hi, -1.0, 1.0)))
            phi_hi = float(np.arccos(np.clip(lo, -1.0, 1.0)))
            if phi_hi <= phi_lo:
                continue
            value, _ = integrate.quad(integrand, phi_lo, phi_hi, limit=200,
                                      epsabs=1e-14, epsrel=1e-13)
            total += value
    return float(total)


def main_term(spec: RegionSpec) -> float:
    """Q^2 F_M(xi)"""
    return spec.Q ** 2 * F_M(spec)


def region_contains_direct(spec: RegionSpec, g: GroupElement) -> bool:
    """
    Membership of g by multiplying out gM and measuring both angles

    Args:
        spec: Region description
        g: Group element outside K

    Returns:
        True iff g lies in R_M(Q, xi)
    """
    q_sq = spec.Q ** 2
    if not g.norm_sq < q_sq:
        return False
    gm = g.as_float() @ spec.M.as_float()
    if not gm.norm_sq < q_sq:
        return False
    theta_g = angle_of(g)
    theta_gm = angle_of(gm)
    if theta_g.is_stabilizer or theta_gm.is_stabilizer:
        return False
    return circle_distance(theta_g.theta, theta_gm.theta) < 2.0 * spec.xi / q_sq


def region_contains(spec: RegionSpec, g: GroupElement) -> bool:
    """
    Membership of g from the closed forms in (t, phi)

    Writes g = k_theta a_t k_phi k_{-m}. When ||M|| <= ||g|| the angle
    between g and gM is at most pi/2, so the arctangent of the closed form
    identifies it; otherwise the direct computation decides.

    Args:
        spec: Region description
        g: Group element outside K

    Returns:
        True iff g lies in R_M(Q, xi)
    """
    if g.norm_sq < spec.M.norm_sq:
        return region_contains_direct(spec, g)

    q_sq = spec.Q ** 2
    if not g.norm_sq < q_sq:
        return False
    coords = decompose_cartan(g)
    phi = wrap_angle(coords.phi + spec.m)
    pair = pair_norm_and_angle(coords.t, phi, spec.ell)
    if not pair.norm_sq < q_sq:
        return False
    if pair.degenerate:
        return False
    return abs(float(np.arctan(pair.tan_delta))) < 2.0 * spec.xi / q_sq


def xy_conditions(spec: RegionSpec, t: Union[float, np.ndarray],
                  phi: Union[float, np.ndarray]) -> Union[bool, np.ndarray]:
    """
    Region conditions in the coordinates x = 2 cosh t / Q^2, y = cos phi

        x < 1,  x (A + y B z) < 1,
        B sqrt(1 - y^2) / (x |A z + y B|) < (Q^2/2) tan(2 xi / Q^2)

    with z = sqrt(1 - 4/(Q^4 x^2)) = tanh t. Valid where ||g|| >= ||M||.
    """
    t = np.asarray(t, dtype=float)
    phi = np.asarray(phi, dtype=float)
    q_sq = spec.Q ** 2
    x = 2.0 * np.cosh(t) / q_sq
    y = np.cos(phi)
    z = np.sqrt(np.maximum(1.0 - 4.0 / (q_sq * q_sq * x * x), 0.0))
    A, B = spec.A, spec.B
    with np.errstate(divide="ignore", invalid="ignore"):
        angle_term = B * np.sqrt(np.maximum(1.0 - y * y, 0.0)) / (x * np.abs(A * z + y * B))
    inside = (
        (x < 1.0)
        & (x * (A + y * B * z) < 1.0)
        & (angle_term < 0.5 * q_sq * np.tan(2.0 * spec.xi / q_sq))
    )
    return bool(inside) if inside.ndim == 0 else inside


def tphi_conditions(spec: RegionSpec, t: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """
    Vectorized membership from (t, phi) with g = k_theta a_t k_phi k_{-m}

    Uses the exact angle atan2(B sin phi, A sinh t + B cos phi cosh t), so
    no restriction on ||g|| is needed.
    """
    t = np.asarray(t, dtype=float)
    phi = np.asarray(phi, dtype=float)
    q_sq = spec.Q ** 2
    A, B = spec.A, spec.B
    cosh_t, sinh_t = np.cosh(t), np.sinh(t)
    cos_phi, sin_phi = np.cos(phi), np.sin(phi)
    norm_gm = 2.0 * (A * cosh_t + B * cos_phi * sinh_t)
    delta = np.arctan2(B * sin_phi, A * sinh_t + B * cos_phi * cosh_t)
    return (2.0 * cosh_t < q_sq) & (norm_gm < q_sq) & (np.abs(delta) < 2.0 * spec.xi / q_sq)


def _t_bounds(spec: RegionSpec, phi: np.ndarray) -> Tuple[np.ndarray, float, np.ndarray]:
    """
    Bounds on t for fixed phi in (0, pi)

    Writes A sinh t + B cos phi cosh t = r sinh(t + psi) with
    r = sqrt(A^2 - B^2 cos^2 phi) and tanh psi = B cos phi / A, so the angle
    condition reads t > t_angle and ||gM|| < Q reads t < t_gm.
    """
    A, B = spec.A, spec.B
    half_q = 0.5 * spec.Q ** 2
    tau = np.tan(2.0 * spec.xi / spec.Q ** 2)
    c, s = np.cos(phi), np.abs(np.sin(phi))
    r = np.sqrt(A * A - (B * c) ** 2)
    psi = np.arctanh(B * c / A)
    t_angle = np.arcsinh(B * s / (tau * r)) - psi
    with np.errstate(invalid="ignore"):
        t_gm = np.where(half_q >= r, np.arccosh(np.maximum(half_q / r, 1.0)) - psi, -np.inf)
    return t_angle, float(np.arccosh(half_q)), t_gm


def _u_length(spec: RegionSpec, phi: float) -> float:
    t_angle, t_g, t_gm = _t_bounds(spec, np.asarray(phi, dtype=float))
    lo = max(float(t_angle), 0.0)
    hi = min(t_g, float(t_gm))
    return float(np.cosh(hi) - np.cosh(lo)) if hi > lo else 0.0


def _kink_points(spec: RegionSpec) -> np.ndarray:
    """Angles in [0, pi] where a bound of the t-range changes or the range closes"""
    edge = np.geomspace(1e-13, 0.1, 600)
    grid = np.unique(np.concatenate([[0.0, np.pi], edge, np.linspace(0.1, np.pi - 0.1, 4000), np.pi - edge]))
    inner = grid[1:-1]

    def switches(phi):
        t_angle, t_g, t_gm = _t_bounds(spec, phi)
        hi = np.minimum(t_g, t_gm)
        return (t_angle, t_g - t_gm, hi - np.maximum(t_angle, 0.0))

    points = [0.0, 0.5 * np.pi, np.pi]
    for k in range(3):
        values = switches(inner)[k]
        sign = np.sign(np.nan_to_num(values, neginf=-1.0, posinf=1.0))
        for j in np.flatnonzero(sign[:-1] * sign[1:] < 0):
            def f(phi, k=k):
                return float(np.nan_to_num(switches(np.asarray(phi))[k], neginf=-1.0, posinf=1.0))
            points.append(optimize.brentq(f, inner[j], inner[j + 1], xtol=1e-15))
    return np.unique(points)


def region_volume_quad(spec: RegionSpec) -> float:
    """
    Haar volume of R_M(Q, xi) by deterministic quadrature

    For fixed phi the admissible cosh t form one interval, so the volume is
    2 int_0^pi (cosh t_hi - cosh t_lo) dphi, integrated piecewise between
    the points where either end of the interval switches.

    Args:
        spec: Region description

    Returns:
        vol(R_M(Q, xi)) in the normalization of the Monte Carlo estimate;
        NaN when the angular window 2 xi / Q^2 reaches pi/2
    """
    if spec.xi == 0 or spec.Q ** 2 <= 2.0:
        return 0.0
    if 2.0 * spec.xi / spec.Q ** 2 >= 0.5 * np.pi:
        logger.warning(f"Window 2 xi / Q^2 = {2.0 * spec.xi / spec.Q ** 2:.4g} is too wide for the quadrature volume")
        return float("nan")
    points = _kink_points(spec)
    scale = 0.5 * spec.Q ** 2
    total = 0.0
    for lo, hi in zip(points[:-1], points[1:]):
        value, _ = integrate.quad(lambda phi: _u_length(spec, phi), lo, hi, limit=200,
                                  epsabs=1e-13 * scale, epsrel=1e-12)
        total += value
    logger.debug(f"Quadrature volume over {points.size - 1} pieces: {2.0 * total:.12g}")
    return 2.0 * float(total)
