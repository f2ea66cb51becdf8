"""
Comparison metrics between empirical and theoretical correlation curves
"""
from typing import Any, Dict, Sequence

import numpy as np
from scipy import stats

from src.utils.logger import get_logger

logger = get_logger(__name__)

# Floor on the denominator of the relative gap, keeps small-xi values meaningful
RELATIVE_FLOOR = 0.1


def relative_gap(empirical: np.ndarray, theory: np.ndarray,
                 floor: float = RELATIVE_FLOOR) -> np.ndarray:
    """
    Pointwise |empirical - theory| / max(theory, floor)

    Args:
        empirical: Measured values
        theory: Reference values
        floor: Lower bound for the denominator

    Returns:
        Array of relative gaps
    """
    empirical = np.asarray(empirical, dtype=float)
    theory = np.asarray(theory, dtype=float)
    return np.abs(empirical - theory) / np.maximum(theory, floor)


def max_relative_gap(empirical: np.ndarray, theory: np.ndarray,
                     floor: float = RELATIVE_FLOOR) -> float:
    """Largest relative gap over the grid (0 for an empty grid)"""
    gaps = relative_gap(empirical, theory, floor)
    return float(gaps.max()) if gaps.size else 0.0


class CurveEvaluator:
    """Evaluation of empirical pair correlation curves against the limit"""

    def __init__(self, tolerance: float = 0.10, floor: float = RELATIVE_FLOOR):
        self.tolerance = tolerance
        self.floor = floor

    def calculate_metrics(
        self,
        xi: np.ndarray,
        empirical: np.ndarray,
        theory: np.ndarray,
    ) -> Dict[str, Any]:
        """
        Summary statistics of one empirical curve against its limit

        Args:
            xi: Grid
            empirical: Empirical values on the grid
            theory: Theoretical values on the grid

        Returns:
            Dictionary with max/mean relative gap, worst grid point,
            absolute RMSE, Pearson correlation and the tolerance verdict
        """
        xi = np.asarray(xi, dtype=float)
        empirical = np.asarray(empirical, dtype=float)
        theory = np.asarray(theory, dtype=float)
        gaps = relative_gap(empirical, theory, self.floor)

        metrics: Dict[str, Any] = {}
        metrics["max_relative_gap"] = float(gaps.max()) if gaps.size else 0.0
        metrics["mean_relative_gap"] = float(gaps.mean()) if gaps.size else 0.0
        metrics["worst_xi"] = float(xi[int(np.argmax(gaps))]) if gaps.size else float("nan")
        metrics["max_abs_gap"] = float(np.max(np.abs(empirical - theory))) if gaps.size else 0.0
        metrics["rmse"] = float(np.sqrt(np.mean((empirical - theory) ** 2))) if gaps.size else 0.0

        # Pearson needs two non-constant series
        if xi.size > 2 and np.ptp(empirical) > 0 and np.ptp(theory) > 0:
            correlation, _ = stats.pearsonr(empirical, theory)
            metrics["correlation"] = float(correlation)
        else:
            metrics["correlation"] = float("nan")

        metrics["passed"] = bool(metrics["max_relative_gap"] <= self.tolerance)

        logger.info(
            f"Curve gap: max relative {metrics['max_relative_gap']:.4g} at xi={metrics['worst_xi']:.4g}, "
            f"mean {metrics['mean_relative_gap']:.4g} (tolerance {self.tolerance})"
        )
        return metrics

    def convergence_trend(self, Q_values: Sequence[float], gaps: Sequence[float]) -> Dict[str, Any]:
        """
        Trend of a gap statistic as the ball grows

        Fits log(gap) against log(Q) with a least-squares line.

        Args:
            Q_values: Increasing ball radii
            gaps: Gap statistic at each radius

        Returns:
            Dictionary with the fitted slope, its standard error, and
            whether the gaps are strictly decreasing
        """
        Q_values = np.asarray(Q_values, dtype=float)
        gaps = np.asarray(gaps, dtype=float)
        trend: Dict[str, Any] = {
            "decreasing": bool(np.all(np.diff(gaps) < 0)),
            "slope": float("nan"),
            "slope_stderr": float("nan"),
        }
        positive = gaps > 0
        if np.count_nonzero(positive) >= 2:
            fit = stats.linregress(np.log(Q_values[positive]), np.log(gaps[positive]))
            trend["slope"] = float(fit.slope)
            trend["slope_stderr"] = float(fit.stderr)
        logger.info(f"Convergence trend over Q={Q_values.tolist()}: slope {trend['slope']:.3g}, "
                    f"decreasing={trend['decreasing']}")
        return trend
