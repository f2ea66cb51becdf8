"""
Run configuration of one CLI invocation

Values are layered: Settings defaults, then a JSON config file, then the
flags given explicitly on the command line.
"""
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator

from config.settings import settings
from src.correlation.angle_records import Arc, parse_arc
from src.geometry.group_element import GroupElement, S, T
from src.lattices.lattice_spec import LatticeSpec, builtin_lattice, load_generator_file
from src.utils.exceptions import ConfigError, HypAnglesError
from src.utils.helpers import config_hash
from src.utils.logger import get_logger

logger = get_logger(__name__)

NAMED_ELEMENTS = {"T": T, "S": S, "TS": T @ S, "ST": S @ T}


def parse_element(text: str) -> GroupElement:
    """
    Parse a group element from 'a,b,c,d' or one of the names T, S, TS, ST

    Entries may be integers, decimals or rationals such as '1/2'.
    """
    text = str(text).strip()
    if text.upper() in NAMED_ELEMENTS:
        return NAMED_ELEMENTS[text.upper()]
    cleaned = text.replace("[", " ").replace("]", " ").replace(";", ",")
    tokens = [tok.strip() for tok in cleaned.split(",") if tok.strip()]
    if len(tokens) != 4:
        raise ConfigError(f"Element '{text}' must have four entries a,b,c,d")
    entries = []
    for tok in tokens:
        try:
            value = Fraction(tok)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"Element entry '{tok}' is not a number") from None
        if "." in tok or "e" in tok.lower():
            entries.append(float(tok))
        else:
            entries.append(int(value) if value.denominator == 1 else value)
    try:
        return GroupElement(*entries)
    except HypAnglesError as e:
        raise ConfigError(f"Element '{text}': {e}") from e


class RunConfig(BaseModel):
    """Parameters of one run"""

    lattice: str = settings.DEFAULT_LATTICE
    generators: Optional[Path] = None
    Q: float = settings.DEFAULT_Q
    xi_max: float = Field(default=settings.DEFAULT_XI_MAX, gt=0)
    xi_step: float = settings.DEFAULT_XI_STEP
    interval: Optional[str] = None
    samples: int = Field(default=settings.DEFAULT_SAMPLES, ge=2)
    seed: int = settings.DEFAULT_SEED
    tolerance: float = Field(default=settings.DEFAULT_TOLERANCE, ge=0)
    slack: float = Field(default=settings.DEFAULT_SLACK, ge=0)
    M: str = "T"
    q_values: List[float] = [50.0, 100.0, 200.0]
    xi_values: List[float] = [1.0]
    theory_truncation: Optional[float] = None
    method: str = "closed_form"
    output_dir: Path = settings.OUTPUT_DIR

    @field_validator("xi_step")
    @classmethod
    def check_step(cls, v):
        if not v > 0:
            raise ValueError("xi_step must be positive")
        return v

    @field_validator("interval")
    @classmethod
    def check_interval(cls, v):
        if v is not None:
            parse_arc(v)
        return v

    @field_validator("M")
    @classmethod
    def check_element(cls, v):
        parse_element(v)
        return v

    @field_validator("q_values")
    @classmethod
    def check_q_values(cls, v):
        if not v or any(not q > 0 for q in v):
            raise ValueError("q_values must be a nonempty list of positive radii")
        return v

    @field_validator("xi_values")
    @classmethod
    def check_xi_values(cls, v):
        if not v or any(x < 0 for x in v):
            raise ValueError("xi_values must be a nonempty list of nonnegative values")
        return v

    @field_validator("method")
    @classmethod
    def check_method(cls, v):
        if v not in ("closed_form", "quad"):
            raise ValueError("method must be 'closed_form' or 'quad'")
        return v

    def require_ball(self) -> None:
        """Statistics need a ball containing lattice points"""
        if self.Q < np.sqrt(2.0):
            raise ConfigError(f"Q must be at least sqrt(2), got {self.Q}")

    def xi_grid(self) -> np.ndarray:
        """Grid xi_step, 2 xi_step, ... up to xi_max"""
        n = int(np.floor(self.xi_max / self.xi_step + 1e-9))
        if n < 1:
            raise ConfigError(f"xi_max={self.xi_max} is below xi_step={self.xi_step}")
        return self.xi_step * np.arange(1, n + 1)

    def arc(self) -> Optional[Arc]:
        return parse_arc(self.interval) if self.interval else None

    def element(self) -> GroupElement:
        return parse_element(self.M)

    def lattice_spec(self) -> LatticeSpec:
        if self.generators is not None:
            return load_generator_file(self.generators)
        return builtin_lattice(self.lattice)

    def digest(self) -> str:
        return config_hash(self.model_dump(mode="json"))


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a JSON config file into a plain mapping"""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object")
    return raw


def build_config(config_file: Optional[Union[str, Path]] = None,
                 overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Layer the config file and explicit overrides over the defaults

    Args:
        config_file: Optional JSON file
        overrides: Values given explicitly (None entries are ignored)

    Returns:
        Validated RunConfig
    """
    values: Dict[str, Any] = {}
    if config_file is not None:
        values.update(load_config_file(config_file))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        config = RunConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"Invalid run configuration: {e}") from e
    logger.debug(f"Run configuration {config.digest()}: {config.model_dump(mode='json')}")
    return config
