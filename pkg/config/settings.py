"""
Configuration settings for the hyperbolic angle pair-correlation toolkit
"""
from pathlib import Path
from typing import Optional

from joblib import cpu_count

try:
    from pydantic_settings import BaseSettings
    from pydantic import validator
except ImportError:
    from pydantic import BaseSettings, validator


class Settings(BaseSettings):
    """Application settings"""

    VERSION: str = "1.0.0"

    # Parallelism (HYPANGLES_THREADS caps joblib workers)
    THREADS: int = cpu_count()

    # Enumeration
    BFS_MARGIN: float = 4.0
    MAX_ELEMENTS: int = 5_000_000
    KEY_GRID: float = 1e-9

    # Lattice sums
    KNEE_FACTOR: float = 4.0
    THEORY_TRUNCATION: float = 200.0

    # Monte Carlo
    MC_SHARD_SIZE: int = 1_000_000

    # Default run parameters
    DEFAULT_LATTICE: str = "psl2z"
    DEFAULT_Q: float = 200.0
    DEFAULT_XI_MAX: float = 4.0
    DEFAULT_XI_STEP: float = 0.05
    DEFAULT_SAMPLES: int = 1_000_000
    DEFAULT_SEED: int = 12345
    DEFAULT_TOLERANCE: float = 0.10
    DEFAULT_SLACK: float = 5.0

    # Paths
    OUTPUT_DIR: Path = Path("results")

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None

    @validator("THREADS")
    def check_threads(cls, v):
        """Worker count must be positive"""
        if v < 1:
            raise ValueError("HYPANGLES_THREADS must be >= 1")
        return v

    @validator("BFS_MARGIN", "KNEE_FACTOR")
    def check_multipliers(cls, v):
        """Search and truncation multipliers are at least 1"""
        if v < 1.0:
            raise ValueError("multiplier must be >= 1")
        return v

    class Config:
        env_file = ".env"
        env_prefix = "HYPANGLES_"
        case_sensitive = True
        extra = "ignore"


# Global settings instance
settings = Settings()
