"""
Subcommand implementations: enumeration, pair correlation, density and
volume checks, each writing CSV tables and returning an exit code
"""
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from src.correlation.angle_records import AngleTable
from src.correlation.pair_correlation import (
    CorrelationCurve,
    empirical_R2,
    restricted_R2,
)
from src.evaluation.metrics import CurveEvaluator
from src.lattices.enumeration import (
    count_vs_asymptotic,
    enumerate_lattice,
    enumeration_frame,
)
from src.reporting.run_config import RunConfig
from src.theory.lattice_sums import TheoryCurve, theory_curve, theory_enumeration, theory_frame
from src.utils.helpers import write_long_format, write_table
from src.utils.logger import get_logger
from src.volumes.monte_carlo import check_volume
from src.volumes.region import F_M, RegionSpec, region_volume_quad

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2

PAIRCORR_COLUMNS = ["xi", "N_Q", "R2_emp", "R2_theory", "g2_emp", "g2_theory", "abs_gap"]
VOLCHECK_COLUMNS = [
    "Q", "xi", "ell", "F_M", "mc_mean", "mc_stderr", "closed_form", "quad_volume",
    "samples", "seed", "abs_gap", "allowed", "passed",
]


def _out(config: RunConfig, name: str) -> Path:
    return Path(config.output_dir) / name


def cmd_enumerate(config: RunConfig, n_jobs: Optional[int] = None) -> int:
    """
    Write enumeration.csv with every element of the ball and a summary
    footer comparing the count with pi Q^2 / V

    Args:
        config: Run configuration
        n_jobs: Worker count

    Returns:
        Exit code
    """
    spec = config.lattice_spec()
    enum = enumerate_lattice(spec, config.Q, n_jobs=n_jobs)
    asymptotic = np.pi * config.Q ** 2 / spec.covolume
    ratio = count_vs_asymptotic(enum, spec)

    footer = [
        f"lattice={spec.label}",
        f"count={enum.count}",
        f"asymptotic={asymptotic:.17g}",
        f"ratio={ratio:.17g}",
        f"complete={enum.complete}",
    ]
    write_table(enumeration_frame(enum), _out(config, "enumeration.csv"),
                "enumerate", config.digest(), footer=footer)
    logger.info(f"{spec.label}: {enum.count} elements in B_Q (Q={config.Q}), "
                f"pi Q^2/V = {asymptotic:.6g}, ratio {ratio:.6f}")
    return EXIT_OK


def _paircorr_frame(curve: CorrelationCurve, theory: TheoryCurve) -> pd.DataFrame:
    return pd.DataFrame({
        "xi": curve.xi_grid,
        "N_Q": curve.N_Q,
        "R2_emp": curve.R2_emp,
        "R2_theory": theory.R2,
        "g2_emp": curve.g2_emp,
        "g2_theory": theory.g2,
        "abs_gap": np.abs(curve.R2_emp - theory.R2),
    }, columns=PAIRCORR_COLUMNS)


def cmd_paircorr(config: RunConfig, n_jobs: Optional[int] = None) -> int:
    """
    Compare the empirical pair correlation with its limit

    Writes paircorr.csv (and paircorr_restricted.csv when an interval is
    set) plus their long forms.

    Args:
        config: Run configuration
        n_jobs: Worker count

    Returns:
        0 when the largest |R2_emp - R2_theory| / max(R2_theory, 0.1)
        is within the tolerance, 1 otherwise
    """
    config.require_ball()
    spec = config.lattice_spec()
    grid = config.xi_grid()
    digest = config.digest()

    enum = enumerate_lattice(spec, config.Q, n_jobs=n_jobs)
    table = AngleTable.from_enumeration(enum)
    curve = empirical_R2(table, config.Q, grid, spec.covolume, n_jobs=n_jobs)

    theory_enum = theory_enumeration(spec, float(grid.max()), existing=enum,
                                     truncation=config.theory_truncation, n_jobs=n_jobs)
    theory = theory_curve(grid, theory_enum, spec, method=config.method, n_jobs=n_jobs)

    evaluator = CurveEvaluator(tolerance=config.tolerance)
    metrics = evaluator.calculate_metrics(grid, curve.R2_emp, theory.R2)
    footer = [
        f"lattice={spec.label}",
        f"records={curve.n_records}",
        f"truncation={theory.truncation:.17g}",
        f"max_relative_gap={metrics['max_relative_gap']:.17g}",
        f"tolerance={config.tolerance:.17g}",
        f"passed={metrics['passed']}",
    ]
    frame = _paircorr_frame(curve, theory)
    write_table(frame, _out(config, "paircorr.csv"), "paircorr", digest, footer=footer)
    write_long_format(frame, _out(config, "paircorr_long.csv"), "xi", "paircorr", digest)

    arc = config.arc()
    if arc is not None:
        restricted = restricted_R2(table, config.Q, grid, spec.covolume, arc, n_jobs=n_jobs)
        restricted_metrics = evaluator.calculate_metrics(grid, restricted.R2_emp, theory.R2)
        restricted_frame = _paircorr_frame(restricted, theory)
        write_table(
            restricted_frame, _out(config, "paircorr_restricted.csv"), "paircorr", digest,
            footer=[f"interval={arc}", f"records={restricted.n_records}",
                    f"max_relative_gap={restricted_metrics['max_relative_gap']:.17g}"],
        )
        write_long_format(restricted_frame, _out(config, "paircorr_restricted_long.csv"),
                          "xi", "paircorr", digest)

    if not metrics["passed"]:
        logger.warning(
            f"Pair correlation gap {metrics['max_relative_gap']:.4g} exceeds tolerance {config.tolerance}"
        )
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_density(config: RunConfig, n_jobs: Optional[int] = None) -> int:
    """
    Write density.csv with the theoretical g2, R2 and tail bounds

    Args:
        config: Run configuration
        n_jobs: Worker count

    Returns:
        Exit code
    """
    spec = config.lattice_spec()
    grid = config.xi_grid()
    digest = config.digest()
    enum = theory_enumeration(spec, float(grid.max()), truncation=config.theory_truncation,
                              n_jobs=n_jobs)
    theory = theory_curve(grid, enum, spec, method=config.method, n_jobs=n_jobs)
    frame = theory_frame(theory)
    write_table(frame, _out(config, "density.csv"), "density", digest,
                footer=[f"lattice={spec.label}", f"truncation={theory.truncation:.17g}"])
    write_long_format(frame, _out(config, "density_long.csv"), "xi", "density", digest)
    return EXIT_OK


def cmd_volcheck(config: RunConfig, n_jobs: Optional[int] = None) -> int:
    """
    Monte Carlo check of vol(R_M(Q, xi)) against Q^2 F_M(xi)

    One row per (Q, xi) in q_values x xi_values.

    Args:
        config: Run configuration (M selects the element)
        n_jobs: Worker count

    Returns:
        0 when every row passes, 1 otherwise
    """
    M = config.element()
    digest = config.digest()
    rows: List[dict] = []
    evaluator = CurveEvaluator(tolerance=config.tolerance)

    for xi in config.xi_values:
        relative = []
        for Q in config.q_values:
            spec = RegionSpec(M, float(Q), float(xi))
            check = check_volume(spec, config.samples, config.seed, config.slack, n_jobs=n_jobs)
            quad = region_volume_quad(spec)
            rows.append({
                "Q": float(Q),
                "xi": float(xi),
                "ell": spec.ell,
                "F_M": F_M(spec),
                "mc_mean": check.estimate.mean,
                "mc_stderr": check.estimate.stderr,
                "closed_form": check.closed_form,
                "quad_volume": quad,
                "samples": check.estimate.samples,
                "seed": check.estimate.seed,
                "abs_gap": check.abs_gap,
                "allowed": check.allowed,
                "passed": check.passed,
            })
            # Trend of the quadrature gap; Monte Carlo noise hides it
            if check.closed_form > 0:
                relative.append(abs(quad - check.closed_form) / check.closed_form)
        if len(relative) == len(config.q_values) and len(relative) > 1:
            evaluator.convergence_trend(config.q_values, relative)

    frame = pd.DataFrame(rows, columns=VOLCHECK_COLUMNS)
    all_passed = bool(frame["passed"].all()) if len(frame) else True
    write_table(frame, _out(config, "volcheck.csv"), "volcheck", digest,
                footer=[f"M={M}", f"slack={config.slack:.17g}", f"passed={all_passed}"])
    write_long_format(frame, _out(config, "volcheck_long.csv"), ["Q", "xi"], "volcheck", digest)
    return EXIT_OK if all_passed else EXIT_CHECK_FAILED


COMMANDS = {
    "enumerate": cmd_enumerate,
    "paircorr": cmd_paircorr,
    "density": cmd_density,
    "volcheck": cmd_volcheck,
}
