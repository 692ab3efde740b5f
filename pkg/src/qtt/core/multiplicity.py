"""
⚖️ Multiplicities - Quantity Semiring
The three-point semiring {0, 1, ω} and per-variable usage vectors
"""

from __future__ import annotations

import logging
from enum import Enum
from typing import Dict, Iterable, Iterator, Optional, Tuple

logger = logging.getLogger(__name__)


class Multiplicity(Enum):
    """How often a bound variable may be used at run time"""

    ZERO = 0
    ONE = 1
    OMEGA = 2

    @property
    def display(self) -> str:
        """Hole-context column: ω prints as nothing"""
        return _DISPLAY[self]

    @classmethod
    def from_literal(cls, text: str) -> "Multiplicity":
        if text == "0":
            return cls.ZERO
        if text == "1":
            return cls.ONE
        raise ValueError(f"not a multiplicity annotation: {text!r}")

    def __lt__(self, other: "Multiplicity") -> bool:
        return self.value < other.value

    def __le__(self, other: "Multiplicity") -> bool:
        return self.value <= other.value

    def __str__(self) -> str:
        return "ω" if self is Multiplicity.OMEGA else str(self.value)


ZERO = Multiplicity.ZERO
ONE = Multiplicity.ONE
OMEGA = Multiplicity.OMEGA

_DISPLAY = {ZERO: "0", ONE: "1", OMEGA: ""}


def add(a: Multiplicity, b: Multiplicity) -> Multiplicity:
    """Saturating sum: two definite uses exceed the linear budget"""
    if a is ZERO:
        return b
    if b is ZERO:
        return a
    return OMEGA


def mul(a: Multiplicity, b: Multiplicity) -> Multiplicity:
    if a is ZERO or b is ZERO:
        return ZERO
    if a is ONE:
        return b
    if b is ONE:
        return a
    return OMEGA


def admissible(declared: Multiplicity, used: Multiplicity) -> bool:
    if declared is OMEGA:
        return True
    return declared is used


def lub(a: Multiplicity, b: Multiplicity) -> Multiplicity:
    return a if b <= a else b


def remaining(declared: Multiplicity, used: Multiplicity) -> Multiplicity:
    """What a hole may still use of a binder after the rest of its scope"""
    if declared is OMEGA:
        return OMEGA
    if declared is ONE and used is ZERO:
        return ONE
    return ZERO


class UsageVector:
    """
    Sparse map from context level to multiplicity; absent means Zero.
    `has_holes` marks usages that came from a body still containing holes.
    """

    __slots__ = ("counts", "has_holes")

    def __init__(self, counts: Optional[Dict[int, Multiplicity]] = None, has_holes: bool = False):
        self.counts: Dict[int, Multiplicity] = {
            k: v for k, v in (counts or {}).items() if v is not ZERO
        }
        self.has_holes = has_holes

    @classmethod
    def empty(cls) -> "UsageVector":
        return cls()

    @classmethod
    def single(cls, level: int, mult: Multiplicity) -> "UsageVector":
        return cls({level: mult})

    def get(self, level: int) -> Multiplicity:
        return self.counts.get(level, ZERO)

    def __add__(self, other: "UsageVector") -> "UsageVector":
        counts = dict(self.counts)
        for level, m in other.counts.items():
            counts[level] = add(counts.get(level, ZERO), m)
        return UsageVector(counts, self.has_holes or other.has_holes)

    def scale(self, m: Multiplicity) -> "UsageVector":
        return UsageVector({k: mul(m, v) for k, v in self.counts.items()}, self.has_holes)

    def without(self, level: int) -> "UsageVector":
        counts = {k: v for k, v in self.counts.items() if k != level}
        return UsageVector(counts, self.has_holes)

    def below(self, depth: int) -> "UsageVector":
        """Drop every level bound at or past `depth`"""
        return UsageVector({k: v for k, v in self.counts.items() if k < depth}, self.has_holes)

    def with_holes(self) -> "UsageVector":
        return UsageVector(self.counts, True)

    def items(self) -> Iterator[Tuple[int, Multiplicity]]:
        return iter(sorted(self.counts.items()))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, UsageVector) and self.counts == other.counts

    def __bool__(self) -> bool:
        return bool(self.counts)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}:{v}" for k, v in self.items())
        return f"UsageVector({{{inner}}}{', holes' if self.has_holes else ''})"


def total(usages: Iterable[UsageVector]) -> UsageVector:
    acc = UsageVector.empty()
    for u in usages:
        acc = acc + u
    return acc
