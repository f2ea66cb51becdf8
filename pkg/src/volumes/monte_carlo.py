"""
Monte Carlo volume of R_M(Q, xi) against Haar measure

The region is invariant under left multiplication by K, so only (t, phi)
are sampled: cosh t uniform on [1, Q^2/2) reproduces the sinh t dt weight
and phi is uniform on the circle.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from joblib import Parallel, delayed

from config.settings import settings
from src.utils.exceptions import RegionError
from src.utils.helpers import chunk_bounds, resolve_n_jobs
from src.utils.logger import get_logger
from src.volumes.region import RegionSpec, main_term, tphi_conditions

logger = get_logger(__name__)

# Smallest sample count with a trustworthy normal error bar
MIN_SAMPLES = 10_000


@dataclass(frozen=True)
class VolumeEstimate:
    """Monte Carlo volume with its standard error"""

    mean: float
    stderr: float
    samples: int
    seed: int
    hits: int = 0


@dataclass(frozen=True)
class VolumeCheck:
    """Comparison of a Monte Carlo volume with Q^2 F_M(xi)"""

    closed_form: float
    estimate: VolumeEstimate
    abs_gap: float
    allowed: float
    passed: bool


def ball_volume(Q: float) -> float:
    """Haar volume of {g : ||g|| < Q}, equal to 2pi(Q^2/2 - 1)"""
    return 2.0 * np.pi * max(0.5 * Q * Q - 1.0, 0.0)


def _shard_hits(spec: RegionSpec, size: int, seed_seq: np.random.SeedSequence) -> int:
    rng = np.random.Generator(np.random.Philox(seed_seq))
    cosh_t = rng.uniform(1.0, 0.5 * spec.Q ** 2, size)
    phi = rng.uniform(-np.pi, np.pi, size)
    t = np.arccosh(cosh_t)
    return int(np.count_nonzero(tphi_conditions(spec, t, phi)))


def mc_volume(spec: RegionSpec, samples: int, seed: int,
              n_jobs: Optional[int] = None) -> VolumeEstimate:
    """
    Estimate vol(R_M(Q, xi)) by uniform sampling of the ball B_Q

    Samples are split into shards of MC_SHARD_SIZE with independent Philox
    streams spawned from one SeedSequence, so the result depends only on
    (samples, seed) and not on the worker count.

    Args:
        spec: Region description
        samples: Number of sample points (at least 2)
        seed: Root seed
        n_jobs: Worker count

    Returns:
        VolumeEstimate with mean vol(B_Q) * hits / n and its standard error
    """
    samples = int(samples)
    if samples < 2:
        raise RegionError(f"Monte Carlo needs at least 2 samples, got {samples}")
    if samples < MIN_SAMPLES:
        logger.warning(f"Only {samples} Monte Carlo samples; error bars below {MIN_SAMPLES} are unreliable")
    if spec.Q ** 2 <= 2.0:
        return VolumeEstimate(0.0, 0.0, samples, int(seed))

    shard = max(1, int(settings.MC_SHARD_SIZE))
    n_shards = -(-samples // shard)
    sizes = [hi - lo for lo, hi in chunk_bounds(samples, n_shards)]
    children = np.random.SeedSequence(int(seed)).spawn(len(sizes))

    n_jobs = resolve_n_jobs(n_jobs)
    logger.info(
        f"Monte Carlo volume: Q={spec.Q}, xi={spec.xi}, ell={spec.ell:.6g}, "
        f"{samples} samples in {len(sizes)} shards, {n_jobs} workers"
    )
    if n_jobs == 1 or len(sizes) == 1:
        parts = [_shard_hits(spec, size, child) for size, child in zip(sizes, children)]
    else:
        parts = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_shard_hits)(spec, size, child) for size, child in zip(sizes, children)
        )
    hits = int(sum(parts))

    vol = ball_volume(spec.Q)
    mean = vol * hits / samples
    variance = (hits - hits * hits / samples) / (samples - 1)
    stderr = vol * np.sqrt(max(variance, 0.0)) / np.sqrt(samples)
    logger.debug(f"hits={hits} of {samples}, volume={mean:.6g} +/- {stderr:.3g}")
    return VolumeEstimate(float(mean), float(stderr), samples, int(seed), hits)


def acceptance_allowance(spec: RegionSpec, stderr: float, slack: float) -> float:
    """
    Allowed gap 3 stderr + slack Q^{2/3} ||M||^2

    The second term is the size of the error of the main-term asymptotic.
    """
    return 3.0 * stderr + slack * spec.Q ** (2.0 / 3.0) * spec.M.norm_sq


def check_volume(spec: RegionSpec, samples: int, seed: int, slack: float,
                 n_jobs: Optional[int] = None) -> VolumeCheck:
    """
    Compare the Monte Carlo volume with Q^2 F_M(xi)

    Args:
        spec: Region description
        samples: Monte Carlo sample count
        seed: Root seed
        slack: Multiplier of the Q^{2/3} ||M||^2 allowance
        n_jobs: Worker count

    Returns:
        VolumeCheck with the gap, the allowed gap and the verdict
    """
    closed = main_term(spec)
    estimate = mc_volume(spec, samples, seed, n_jobs=n_jobs)
    gap = abs(estimate.mean - closed)
    allowed = acceptance_allowance(spec, estimate.stderr, slack)
    passed = gap <= allowed
    if not passed:
        logger.warning(
            f"Volume check failed at Q={spec.Q}, xi={spec.xi}: |{estimate.mean:.6g} - "
            f"{closed:.6g}| = {gap:.6g} > {allowed:.6g}"
        )
    return VolumeCheck(closed, estimate, gap, allowed, passed)
