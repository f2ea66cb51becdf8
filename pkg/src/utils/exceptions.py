"""
Domain exceptions. Every class also derives from ValueError.
"""


class HypAnglesError(ValueError):
    """Base class for all toolkit errors"""


class LatticeSpecError(HypAnglesError):
    """Invalid lattice description or generator file"""


class EnumerationError(HypAnglesError):
    """Ball enumeration could not be produced"""


class GridError(HypAnglesError):
    """Invalid xi grid or angular interval"""


class TruncationError(HypAnglesError):
    """Lattice sum truncated below the support knee of the kernel"""


class NonDifferentiableError(HypAnglesError):
    """Derivative requested at a breakpoint of the kernel"""


class RegionError(HypAnglesError):
    """Invalid region parameters (e.g. M in K)"""


class ConfigError(HypAnglesError):
    """Invalid run configuration"""
