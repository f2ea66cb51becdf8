"""
Helper functions for the hyperbolic angle toolkit
"""
import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config.settings import settings
from src.utils.logger import get_logger

logger = get_logger(__name__)

TWO_PI = 2.0 * np.pi


def wrap_angle(theta: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Reduce angles to the half-open range [-pi, pi)

    Args:
        theta: Angle or array of angles in radians

    Returns:
        Wrapped angle(s)
    """
    wrapped = np.mod(np.asarray(theta, dtype=float) + np.pi, TWO_PI) - np.pi
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def circle_distance(
    theta1: Union[float, np.ndarray],
    theta2: Union[float, np.ndarray]
) -> Union[float, np.ndarray]:
    """
    Distance between angles measured on R/2piZ

    Args:
        theta1: First angle(s)
        theta2: Second angle(s)

    Returns:
        Distance to 2piZ of the difference, in [0, pi]
    """
    diff = np.mod(np.asarray(theta1, dtype=float) - np.asarray(theta2, dtype=float), TWO_PI)
    dist = np.minimum(diff, TWO_PI - diff)
    if np.ndim(dist) == 0:
        return float(dist)
    return dist


def resolve_n_jobs(n_jobs: Optional[int] = None) -> int:
    """
    Number of joblib workers, capped by HYPANGLES_THREADS

    Args:
        n_jobs: Requested worker count (None uses the configured cap)

    Returns:
        Positive worker count
    """
    cap = max(1, int(settings.THREADS))
    if n_jobs is None or n_jobs < 1:
        return cap
    return min(int(n_jobs), cap)


def chunk_bounds(n: int, n_chunks: int) -> List[Tuple[int, int]]:
    """
    Split range(n) into contiguous, ordered, nonempty chunks

    Args:
        n: Length of the range
        n_chunks: Desired number of chunks

    Returns:
        List of (start, stop) pairs covering range(n) in order
    """
    if n <= 0:
        return []
    n_chunks = max(1, min(n_chunks, n))
    edges = np.linspace(0, n, n_chunks + 1).astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def config_hash(config: Dict[str, Any]) -> str:
    """
    Stable short hash of a configuration mapping

    Args:
        config: JSON-serializable configuration

    Returns:
        First 12 hex characters of the sha256 digest
    """
    payload = json.dumps(config, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def header_line(command: str, digest: str) -> str:
    """Comment line heading every CSV written by the CLI"""
    return f"# hypangles {settings.VERSION} command={command} config_hash={digest}"


def write_table(
    df: pd.DataFrame,
    path: Path,
    command: str,
    digest: str,
    footer: Optional[Iterable[str]] = None
) -> Path:
    """
    Write a DataFrame as CSV with a header comment and 17-digit floats

    Args:
        df: Table to write
        path: Destination file
        command: Subcommand name recorded in the header
        digest: Configuration hash recorded in the header
        footer: Optional extra comment lines appended after the table

    Returns:
        Path of the written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(header_line(command, digest) + "\n")
        df.to_csv(f, index=False, float_format="%.17g", lineterminator="\n")
        for line in footer or []:
            f.write(f"# {line}\n")

    logger.info(f"Wrote {len(df)} rows to {path}")
    return path


def write_long_format(
    df: pd.DataFrame,
    path: Path,
    id_columns: Union[str, Sequence[str]],
    command: str,
    digest: str
) -> Path:
    """
    Write the long (id, series, value) form of a table for plotting tools

    Args:
        df: Wide table
        path: Destination file
        id_columns: Column(s) kept as identifiers (e.g. 'xi' or ['Q', 'xi'])
        command: Subcommand name recorded in the header
        digest: Configuration hash recorded in the header

    Returns:
        Path of the written file
    """
    ids = [id_columns] if isinstance(id_columns, str) else list(id_columns)
    value_columns = [c for c in df.columns if c not in ids]
    long_df = df.melt(id_vars=ids, value_vars=value_columns,
                      var_name="series", value_name="value")
    return write_table(long_df, path, command, digest)


def read_table(path: Path) -> pd.DataFrame:
    """Read a CSV written by write_table"""
    return pd.read_csv(path, comment="#")
