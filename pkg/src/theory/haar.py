"""
Haar integrals of the kernel over G

With dg = (1/2pi) d theta sinh t dt d phi the angular integrals contribute
a factor 2pi, leaving one-dimensional integrals in t.
"""
import numpy as np
from scipy import integrate

from src.theory.kernel import breakpoints, f_xi_values
from src.utils.exceptions import GridError
from src.utils.logger import get_logger

logger = get_logger(__name__)

# Beyond ell2 + TAIL_SPAN the integrand is below e^{-TAIL_SPAN} relative
TAIL_SPAN = 60.0


def _radial_integral(xi: float, weight) -> float:
    if not xi > 0:
        raise GridError(f"Haar integral of f_xi needs xi > 0, got {xi}")
    bp = breakpoints(xi)
    pieces = [(0.0, bp.ell1), (bp.ell1, bp.ell2), (bp.ell2, bp.ell2 + 1.0),
              (bp.ell2 + 1.0, bp.ell2 + TAIL_SPAN)]

    def integrand(t):
        return f_xi_values(xi, t) * np.sinh(t) * weight(t)

    total = 0.0
    for lo, hi in pieces:
        if hi <= lo:
            continue
        value, abserr = integrate.quad(integrand, lo, hi, limit=500, epsabs=1e-13, epsrel=1e-12)
        logger.debug(f"Haar piece [{lo:.6g}, {hi:.6g}] = {value:.15g} +/- {abserr:.2g}")
        total += value
    return 2.0 * np.pi * total


def integral_f_xi(xi: float) -> float:
    """
    Integral of f_xi(ell(g)) over G against Haar measure

    Args:
        xi: Kernel argument, positive

    Returns:
        2pi int_0^inf f_xi(t) sinh t dt, equal to 2pi for every xi
    """
    return _radial_integral(xi, lambda t: 1.0)


def integral_f_xi_weighted(xi: float, alpha: float) -> float:
    """
    Integral of f_xi(ell(g)) ||g||^{-alpha} over G

    Args:
        xi: Kernel argument, positive
        alpha: Exponent of the norm weight, ||g||^2 = 2 cosh t

    Returns:
        2pi int_0^inf f_xi(t) (2 cosh t)^{-alpha/2} sinh t dt
    """
    return _radial_integral(xi, lambda t: (2.0 * np.cosh(t)) ** (-0.5 * alpha))
