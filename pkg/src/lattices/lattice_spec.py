"""
Lattice descriptions: built-in arithmetic lattices and generator files
"""
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator

from src.geometry.group_element import GroupElement, S, T
from src.utils.exceptions import LatticeSpecError
from src.utils.logger import get_logger

logger = get_logger(__name__)

KINDS = ("psl2z", "generators")

Entry = Union[int, float, str]


def _close_under_inverses(generators: Tuple[GroupElement, ...]) -> Tuple[GroupElement, ...]:
    """Append missing inverses, dropping duplicate PSL classes and the identity"""
    identity_key = GroupElement.identity().key()
    seen = set()
    closed = []
    for g in list(generators) + [g.inverse() for g in generators]:
        k = g.key()
        if k in seen or k == identity_key:
            continue
        seen.add(k)
        closed.append(g.canonical())
    return tuple(closed)


@dataclass(frozen=True)
class LatticeSpec:
    """
    How to produce the lattice points in a ball, plus covolume metadata.

    Generators are stored in the frame where the base point is i; the
    conjugator records the map from the user's base point to i.
    """

    kind: str
    covolume: float
    stabilizer_order: int = 1
    generators: Tuple[GroupElement, ...] = ()
    conjugator: GroupElement = field(default_factory=GroupElement.identity)
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise LatticeSpecError(f"Unknown lattice kind '{self.kind}', expected one of {KINDS}")
        if not self.covolume > 0:
            raise LatticeSpecError(f"Covolume must be positive, got {self.covolume}")
        if int(self.stabilizer_order) < 1:
            raise LatticeSpecError(f"Stabilizer order must be >= 1, got {self.stabilizer_order}")
        object.__setattr__(self, "generators", _close_under_inverses(tuple(self.generators)))
        if not self.label:
            object.__setattr__(self, "label", self.kind)


def _psl2z() -> LatticeSpec:
    return LatticeSpec(kind="psl2z", covolume=np.pi / 3, stabilizer_order=2, label="psl2z")


def _psl2z_generators() -> LatticeSpec:
    return LatticeSpec(
        kind="generators",
        covolume=np.pi / 3,
        stabilizer_order=2,
        generators=(T, S),
        label="psl2z-generators",
    )


def _trivial() -> LatticeSpec:
    # Synthetic: S alone closes to {I, S}, the stabilizer of i in PSL2(Z)
    return LatticeSpec(
        kind="generators",
        covolume=np.pi / 3,
        stabilizer_order=2,
        generators=(S,),
        label="trivial",
    )


BUILTIN_LATTICES = {
    "psl2z": _psl2z,
    "psl2z-generators": _psl2z_generators,
    "trivial": _trivial,
}


def builtin_lattice(name: str) -> LatticeSpec:
    """
    Look up a built-in lattice by name

    Args:
        name: One of 'psl2z', 'psl2z-generators', 'trivial'

    Returns:
        LatticeSpec
    """
    try:
        return BUILTIN_LATTICES[name]()
    except KeyError:
        raise LatticeSpecError(
            f"Unknown lattice '{name}', available: {sorted(BUILTIN_LATTICES)}"
        ) from None


def _parse_entry(x: Entry) -> Union[int, Fraction, float]:
    if isinstance(x, bool):
        raise LatticeSpecError(f"Invalid matrix entry {x!r}")
    if isinstance(x, (int, float)):
        return x
    try:
        return Fraction(str(x).strip())
    except (ValueError, ZeroDivisionError):
        raise LatticeSpecError(f"Matrix entry {x!r} is neither a number nor a rational string") from None


class GeneratorFile(BaseModel):
    """JSON layout of a user generator file"""

    generators: List[List[List[Entry]]]
    covolume: float = Field(gt=0)
    stabilizer_order: int = Field(default=1, ge=1)
    label: str = "custom"
    base_point: Optional[Tuple[float, float]] = None

    @field_validator("generators")
    @classmethod
    def check_shapes(cls, v):
        if not v:
            raise ValueError("generator list is empty")
        for m in v:
            if len(m) != 2 or any(len(row) != 2 for row in m):
                raise ValueError(f"generator {m} is not a 2x2 matrix")
        return v

    @field_validator("base_point")
    @classmethod
    def check_base_point(cls, v):
        if v is not None and not v[1] > 0:
            raise ValueError("base point must lie in the upper half-plane")
        return v


def conjugator_for(base_point: Optional[Tuple[float, float]]) -> GroupElement:
    """Element sending x + iy to i, i.e. z -> (z - x)/y"""
    if base_point is None:
        return GroupElement.identity()
    x, y = base_point
    if x == 0 and y == 1:
        return GroupElement.identity()
    r = float(np.sqrt(y))
    return GroupElement(1.0 / r, -x / r, 0.0, r)


def load_generator_file(path: Union[str, Path]) -> LatticeSpec:
    """
    Load a lattice from a JSON generator file

    Args:
        path: File with generators (2x2 arrays of numbers or rational
            strings), covolume, stabilizer_order, label and an optional
            base_point [x, y]

    Returns:
        LatticeSpec of kind 'generators' in the frame where the base point is i
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise LatticeSpecError(f"Cannot read generator file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise LatticeSpecError(f"Generator file {path} is not valid JSON: {e}") from e

    if isinstance(raw, list):
        raise LatticeSpecError(
            f"Generator file {path} must be an object with 'generators' and 'covolume'"
        )

    try:
        parsed = GeneratorFile(**raw)
    except ValidationError as e:
        raise LatticeSpecError(f"Invalid generator file {path}: {e}") from e

    generators = [
        GroupElement.from_matrix([[_parse_entry(x) for x in row] for row in m])
        for m in parsed.generators
    ]

    conj = conjugator_for(parsed.base_point)
    if conj != GroupElement.identity():
        conj_inv = conj.inverse()
        generators = [conj @ g @ conj_inv for g in generators]

    spec = LatticeSpec(
        kind="generators",
        covolume=parsed.covolume,
        stabilizer_order=parsed.stabilizer_order,
        generators=tuple(generators),
        conjugator=conj,
        label=parsed.label,
    )
    logger.info(
        f"Loaded lattice '{spec.label}' from {path}: "
        f"{len(spec.generators)} generators after inverse closure, V={spec.covolume:.6f}"
    )
    return spec
