"""
🧱 Core Terms - Elaborated Language
Nameless (de Bruijn indexed) terms with multiplicity-annotated binders and global definitions
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

from .errors import NO_SPAN, Span
from .multiplicity import OMEGA, ZERO, Multiplicity
from .syntax import Plicity


@dataclass(frozen=True)
class Char:
    """Character literal payload; kept apart from one-character strings"""

    value: str

    def __str__(self) -> str:
        return self.value


LitValue = Union[int, str, Char]


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Global:
    name: str


@dataclass(frozen=True)
class Meta:
    id: int


@dataclass(frozen=True)
class InsertedMeta:
    """Meta applied to the bound (non-defined) variables selected by `mask`"""

    id: int
    mask: Tuple[bool, ...]


@dataclass(frozen=True)
class TypeU:
    pass


@dataclass(frozen=True)
class Pi:
    name: str = field(compare=False)
    mult: Multiplicity
    plicity: Plicity
    domain: "Term"
    codomain: "Term"
    default: Optional["Term"] = None


@dataclass(frozen=True)
class Lam:
    name: str = field(compare=False)
    mult: Multiplicity
    plicity: Plicity
    body: "Term"


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"
    mult: Multiplicity = OMEGA
    plicity: Plicity = Plicity.EXPLICIT


@dataclass(frozen=True)
class Let:
    name: str = field(compare=False)
    mult: Multiplicity
    type: "Term"
    value: "Term"
    body: "Term"


@dataclass(frozen=True)
class Alt:
    """A constructor arm binds `len(mults)` fields; a literal arm binds none"""

    con: Optional[str]
    lit: Optional[LitValue]
    names: Tuple[str, ...] = field(compare=False)
    mults: Tuple[Multiplicity, ...]
    body: "Term"

    @property
    def arity(self) -> int:
        return len(self.mults)


@dataclass(frozen=True)
class Case:
    scrutinee: "Term"
    scrut_mult: Multiplicity
    alts: Tuple[Alt, ...]
    default: Optional["Term"] = None
    motive: Optional["Term"] = field(default=None, compare=False)


@dataclass(frozen=True)
class Lit:
    value: LitValue


Term = Union[Var, Global, Meta, InsertedMeta, TypeU, Pi, Lam, App, Let, Case, Lit]


# ---------------------------------------------------------------- global table


class DefKind(Enum):
    FUNCTION = "function"
    CONSTRUCTOR = "constructor"
    TYPE_CONSTRUCTOR = "type constructor"
    PRIMITIVE = "primitive"
    HOLE = "hole"


@dataclass
class GlobalDef:
    name: str
    display: str
    kind: DefKind
    type: Term
    body: Optional[Term] = None
    # constructors
    tag: int = 0
    family: Optional[str] = None
    field_mults: Tuple[Multiplicity, ...] = ()
    field_names: Tuple[str, ...] = ()
    field_plicities: Tuple[Plicity, ...] = ()
    # type constructors
    arity: int = 0
    constructors: List[str] = field(default_factory=list)
    span: Span = NO_SPAN
    module: Optional[str] = None

    @property
    def is_constructor(self) -> bool:
        return self.kind is DefKind.CONSTRUCTOR


class Globals:
    """Ordered global table; overloads share a display name"""

    def __init__(self) -> None:
        self.defs: Dict[str, GlobalDef] = {}
        self.by_display: Dict[str, List[str]] = {}

    def add(self, d: GlobalDef) -> None:
        self.defs[d.name] = d
        names = self.by_display.setdefault(d.display, [])
        if d.name not in names:
            names.append(d.name)

    def fresh_name(self, display: str) -> str:
        existing = self.by_display.get(display, [])
        if not existing:
            return display
        return f"{display}#{len(existing) + 1}"

    def get(self, name: str) -> GlobalDef:
        return self.defs[name]

    def lookup(self, display: str) -> List[GlobalDef]:
        return [self.defs[n] for n in self.by_display.get(display, [])]

    def __contains__(self, name: str) -> bool:
        return name in self.defs

    def display_names(self) -> List[str]:
        return list(self.by_display)

    def copy(self) -> "Globals":
        other = Globals()
        other.defs = dict(self.defs)
        other.by_display = {k: list(v) for k, v in self.by_display.items()}
        return other


# ------------------------------------------------------------------- helpers


def well_scoped(t: Term, depth: int) -> bool:
    """True iff every variable index is below its binder depth"""
    if isinstance(t, Var):
        return 0 <= t.index < depth
    if isinstance(t, InsertedMeta):
        return len(t.mask) <= depth
    if isinstance(t, Pi):
        return (
            well_scoped(t.domain, depth)
            and well_scoped(t.codomain, depth + 1)
            and (t.default is None or well_scoped(t.default, depth))
        )
    if isinstance(t, Lam):
        return well_scoped(t.body, depth + 1)
    if isinstance(t, App):
        return well_scoped(t.fn, depth) and well_scoped(t.arg, depth)
    if isinstance(t, Let):
        return (
            well_scoped(t.type, depth)
            and well_scoped(t.value, depth)
            and well_scoped(t.body, depth + 1)
        )
    if isinstance(t, Case):
        return (
            well_scoped(t.scrutinee, depth)
            and all(well_scoped(a.body, depth + a.arity) for a in t.alts)
            and (t.default is None or well_scoped(t.default, depth))
        )
    return True


def mentions(t: Term, index: int) -> bool:
    """Does `t` refer to the variable with de Bruijn index `index`"""
    if isinstance(t, Var):
        return t.index == index
    if isinstance(t, InsertedMeta):
        # the meta may be solved with that variable
        pos = len(t.mask) - 1 - index
        return 0 <= pos < len(t.mask) and t.mask[pos]
    if isinstance(t, Pi):
        return (
            mentions(t.domain, index)
            or mentions(t.codomain, index + 1)
            or (t.default is not None and mentions(t.default, index))
        )
    if isinstance(t, Lam):
        return mentions(t.body, index + 1)
    if isinstance(t, App):
        return mentions(t.fn, index) or mentions(t.arg, index)
    if isinstance(t, Let):
        return mentions(t.type, index) or mentions(t.value, index) or mentions(t.body, index + 1)
    if isinstance(t, Case):
        return (
            mentions(t.scrutinee, index)
            or any(mentions(a.body, index + a.arity) for a in t.alts)
            or (t.default is not None and mentions(t.default, index))
        )
    return False


def shift(t: Term, by: int, cutoff: int = 0) -> Term:
    """Add `by` to every free index at or above `cutoff`"""
    return rename(t, lambda i: i + by if i >= cutoff else i, 0) if by else t


def rename(t: Term, f, depth: int = 0) -> Term:
    """Apply `f` to the free indices of `t` (indices as seen from outside)"""
    if isinstance(t, Var):
        if t.index < depth:
            return t
        return Var(f(t.index - depth) + depth)
    if isinstance(t, InsertedMeta):
        # only unsolved holes survive zonking; their context no longer applies
        return Meta(t.id)
    if isinstance(t, Pi):
        return Pi(
            t.name, t.mult, t.plicity, rename(t.domain, f, depth), rename(t.codomain, f, depth + 1),
            rename(t.default, f, depth) if t.default is not None else None,
        )
    if isinstance(t, Lam):
        return Lam(t.name, t.mult, t.plicity, rename(t.body, f, depth + 1))
    if isinstance(t, App):
        return App(rename(t.fn, f, depth), rename(t.arg, f, depth), t.mult, t.plicity)
    if isinstance(t, Let):
        return Let(
            t.name, t.mult, rename(t.type, f, depth), rename(t.value, f, depth),
            rename(t.body, f, depth + 1),
        )
    if isinstance(t, Case):
        return Case(
            rename(t.scrutinee, f, depth), t.scrut_mult,
            tuple(Alt(a.con, a.lit, a.names, a.mults, rename(a.body, f, depth + a.arity)) for a in t.alts),
            rename(t.default, f, depth) if t.default is not None else None,
            t.motive,
        )
    return t


def app_spine(t: Term) -> Tuple[Term, List[App]]:
    apps: List[App] = []
    while isinstance(t, App):
        apps.append(t)
        t = t.fn
    apps.reverse()
    return t, apps


def pi_arity(t: Term) -> int:
    n = 0
    while isinstance(t, Pi):
        n += 1
        t = t.codomain
    return n


def relevant_arity(t: Term) -> int:
    """Number of non-erased parameters in a Pi chain"""
    n = 0
    while isinstance(t, Pi):
        if t.mult is not ZERO:
            n += 1
        t = t.codomain
    return n


def free_levels(t: Term, depth: int) -> List[int]:
    """Context levels of the free variables of `t`; metas are not looked into"""
    found: List[int] = []

    def go(t: Term, local: int) -> None:
        if isinstance(t, Var):
            if t.index >= local:
                level = depth - 1 - (t.index - local)
                if level not in found:
                    found.append(level)
        elif isinstance(t, Pi):
            go(t.domain, local)
            go(t.codomain, local + 1)
        elif isinstance(t, Lam):
            go(t.body, local + 1)
        elif isinstance(t, App):
            go(t.fn, local)
            go(t.arg, local)
        elif isinstance(t, Let):
            go(t.value, local)
            go(t.body, local + 1)
        elif isinstance(t, Case):
            go(t.scrutinee, local)
            for a in t.alts:
                go(a.body, local + a.arity)
            if t.default is not None:
                go(t.default, local)

    go(t, 0)
    return found


def occurs(s: Term, t: Term) -> bool:
    """Does the closed-over term `s` appear as a subterm of `t`"""
    if s == t:
        return True
    if isinstance(t, Pi):
        return occurs(s, t.domain) or occurs(shift(s, 1), t.codomain)
    if isinstance(t, Lam):
        return occurs(shift(s, 1), t.body)
    if isinstance(t, App):
        return occurs(s, t.fn) or occurs(s, t.arg)
    if isinstance(t, Let):
        return occurs(s, t.value) or occurs(shift(s, 1), t.body)
    if isinstance(t, Case):
        return (
            occurs(s, t.scrutinee)
            or any(occurs(shift(s, a.arity), a.body) for a in t.alts)
            or (t.default is not None and occurs(s, t.default))
        )
    return False
