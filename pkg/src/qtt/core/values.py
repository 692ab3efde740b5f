"""
🔮 Semantic Values - NbE Domain
Closures, neutrals and glued global applications produced by evaluation
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

from .multiplicity import OMEGA, Multiplicity
from .syntax import Plicity
from .terms import Case, LitValue, Term


@dataclass(frozen=True)
class Closure:
    env: Tuple["Value", ...]
    body: Term


@dataclass(frozen=True)
class SpineArg:
    value: "Value"
    mult: Multiplicity = OMEGA
    plicity: Plicity = Plicity.EXPLICIT


Spine = Tuple[SpineArg, ...]


@dataclass(frozen=True)
class VType:
    pass


@dataclass(frozen=True)
class VLit:
    value: LitValue


@dataclass(frozen=True)
class VCon:
    """Rigid head: data or type constructor, possibly partially applied"""

    name: str
    args: Spine = ()


@dataclass(frozen=True)
class VPi:
    name: str
    mult: Multiplicity
    plicity: Plicity
    domain: "Value"
    codomain: Closure
    default: Optional["Value"] = None


@dataclass(frozen=True)
class VLam:
    name: str
    mult: Multiplicity
    plicity: Plicity
    body: Closure


@dataclass(frozen=True)
class HVar:
    level: int


@dataclass(frozen=True)
class HMeta:
    id: int


@dataclass(frozen=True)
class HCase:
    """A case whose scrutinee did not reduce to a constructor or literal"""

    scrutinee: "Value"
    env: Tuple["Value", ...]
    case: Case


Head = Union[HVar, HMeta, HCase]


@dataclass(frozen=True)
class VNeutral:
    head: Head
    spine: Spine = ()


@dataclass(frozen=True)
class VGlobal:
    """Global function applied to a spine; unfolded on demand"""

    name: str
    spine: Spine = ()


Value = Union[VType, VLit, VCon, VPi, VLam, VNeutral, VGlobal]


def vvar(level: int) -> VNeutral:
    return VNeutral(HVar(level))


def vmeta(id: int) -> VNeutral:
    return VNeutral(HMeta(id))


def with_arg(spine: Spine, arg: SpineArg) -> Spine:
    return spine + (arg,)


def explicit_args(spine: Spine) -> Tuple["Value", ...]:
    return tuple(a.value for a in spine if a.plicity is Plicity.EXPLICIT)


def is_var(v: Value) -> Optional[int]:
    """Level of a bare bound variable, else None"""
    if isinstance(v, VNeutral) and isinstance(v.head, HVar) and not v.spine:
        return v.head.level
    return None
