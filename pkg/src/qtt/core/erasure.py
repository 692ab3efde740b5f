"""
✂️ Erasure - Removing Compile-Time-Only Code
Zero-multiplicity binders, arguments and constructor fields are deleted and indices renumbered
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import ErasureLeak
from .multiplicity import ONE, ZERO, Multiplicity
from .pretty import show_literal
from .syntax import OPERATORS
from .terms import (
    App, Case, DefKind, Global, GlobalDef, Globals, InsertedMeta, Lam, Let, Lit, LitValue, Meta,
    Pi, Term, TypeU, Var,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RVar:
    index: int


@dataclass(frozen=True)
class RGlobal:
    name: str


@dataclass(frozen=True)
class RLam:
    name: str
    mult: Multiplicity
    body: "RTerm"


@dataclass(frozen=True)
class RApp:
    fn: "RTerm"
    arg: "RTerm"


@dataclass(frozen=True)
class RLet:
    name: str
    mult: Multiplicity
    value: "RTerm"
    body: "RTerm"


@dataclass(frozen=True)
class RAlt:
    """Only the fields that survive erasure are bound"""

    con: Optional[str]
    lit: Optional[LitValue]
    names: Tuple[str, ...]
    mults: Tuple[Multiplicity, ...]
    body: "RTerm"


@dataclass(frozen=True)
class RCase:
    scrutinee: "RTerm"
    alts: Tuple[RAlt, ...]
    default: Optional["RTerm"] = None


@dataclass(frozen=True)
class RLit:
    value: LitValue


@dataclass(frozen=True)
class RType:
    pass


@dataclass(frozen=True)
class RHole:
    name: str


RTerm = Union[RVar, RGlobal, RLam, RApp, RLet, RCase, RLit, RType, RHole]


@dataclass
class RuntimeDef:
    name: str
    display: str
    kind: DefKind
    # number of run-time arguments
    arity: int
    body: Optional[RTerm] = None
    mults: Tuple[Multiplicity, ...] = ()


Scope = List[Tuple[str, Multiplicity]]


class Eraser:
    """Erases closed core terms against a global table"""

    def __init__(self, globals: Globals, hole_names: Optional[Dict[int, str]] = None):
        self.globals = globals
        self.hole_names = hole_names or {}

    def erase_def(self, d: GlobalDef) -> RuntimeDef:
        mults = runtime_mults(d)
        body = None
        if d.kind is DefKind.FUNCTION and d.body is not None:
            try:
                body = self.erase(d.body, [])
            except ErasureLeak as e:
                raise e.located(d.span)
        return RuntimeDef(d.name, d.display, d.kind, len(mults), body, mults)

    def erase_program(self) -> Dict[str, RuntimeDef]:
        return {name: self.erase_def(d) for name, d in self.globals.defs.items()}

    def erase(self, t: Term, scope: Scope) -> RTerm:
        if isinstance(t, Var):
            name, mult = scope[len(scope) - 1 - t.index]
            if mult is ZERO:
                raise ErasureLeak(f"erased variable {name} is reachable at run time")
            kept = sum(1 for _, m in scope[len(scope) - t.index:] if m is not ZERO)
            return RVar(kept)
        if isinstance(t, Global):
            return RGlobal(t.name)
        if isinstance(t, Lam):
            body = self.erase(t.body, scope + [(t.name, t.mult)])
            return body if t.mult is ZERO else RLam(t.name, t.mult, body)
        if isinstance(t, App):
            fn = self.erase(t.fn, scope)
            if t.mult is ZERO:
                return fn
            return RApp(fn, self.erase(t.arg, scope))
        if isinstance(t, Let):
            body = self.erase(t.body, scope + [(t.name, t.mult)])
            if t.mult is ZERO:
                return body
            return RLet(t.name, t.mult, self.erase(t.value, scope), body)
        if isinstance(t, Case):
            alts = []
            for a in t.alts:
                inner = scope + list(zip(a.names, a.mults))
                kept = [(n, m) for n, m in zip(a.names, a.mults) if m is not ZERO]
                names = tuple(n for n, _ in kept)
                mults = tuple(m for _, m in kept)
                alts.append(RAlt(a.con, a.lit, names, mults, self.erase(a.body, inner)))
            default = self.erase(t.default, scope) if t.default is not None else None
            return RCase(self.erase(t.scrutinee, scope), tuple(alts), default)
        if isinstance(t, Lit):
            return RLit(t.value)
        if isinstance(t, (TypeU, Pi)):
            return RType()
        if isinstance(t, (Meta, InsertedMeta)):
            return RHole(self.hole_names.get(t.id, f"_{t.id}"))
        raise TypeError(f"cannot erase {t!r}")


def runtime_mults(d: GlobalDef) -> Tuple[Multiplicity, ...]:
    """Multiplicities of the run-time parameters of a definition"""
    if d.kind is DefKind.CONSTRUCTOR:
        return tuple(m for m in d.field_mults if m is not ZERO)
    if d.kind is DefKind.PRIMITIVE:
        out = []
        t = d.type
        while isinstance(t, Pi):
            if t.mult is not ZERO:
                out.append(t.mult)
            t = t.codomain
        return tuple(out)
    if d.kind is DefKind.FUNCTION and d.body is not None:
        out = []
        t = d.body
        while isinstance(t, Lam):
            if t.mult is not ZERO:
                out.append(t.mult)
            t = t.body
        return tuple(out)
    return ()


# ---------------------------------------------------------------- checking


def check_erased(rdef: RuntimeDef, original: GlobalDef) -> bool:
    """Every run-time variable resolves to a kept binder of the original definition"""
    if rdef.body is None:
        return True
    expected = runtime_mults(original)
    if tuple(_lam_mults(rdef.body)[: len(expected)]) != expected:
        return False
    return _scoped(rdef.body, [])


def _lam_mults(t: RTerm) -> List[Multiplicity]:
    out = []
    while isinstance(t, RLam):
        out.append(t.mult)
        t = t.body
    return out


def _scoped(t: RTerm, scope: List[Multiplicity]) -> bool:
    if isinstance(t, RVar):
        return 0 <= t.index < len(scope) and scope[len(scope) - 1 - t.index] is not ZERO
    if isinstance(t, RLam):
        return t.mult is not ZERO and _scoped(t.body, scope + [t.mult])
    if isinstance(t, RApp):
        return _scoped(t.fn, scope) and _scoped(t.arg, scope)
    if isinstance(t, RLet):
        return t.mult is not ZERO and _scoped(t.value, scope) and _scoped(t.body, scope + [t.mult])
    if isinstance(t, RCase):
        return (
            _scoped(t.scrutinee, scope)
            and all(ZERO not in a.mults and _scoped(a.body, scope + list(a.mults)) for a in t.alts)
            and (t.default is None or _scoped(t.default, scope))
        )
    return True


def count_uses(t: RTerm, index: int) -> int:
    """Occurrences of a variable, taking the largest count over case branches"""
    if isinstance(t, RVar):
        return 1 if t.index == index else 0
    if isinstance(t, RLam):
        return count_uses(t.body, index + 1)
    if isinstance(t, RApp):
        return count_uses(t.fn, index) + count_uses(t.arg, index)
    if isinstance(t, RLet):
        return count_uses(t.value, index) + count_uses(t.body, index + 1)
    if isinstance(t, RCase):
        branches = [count_uses(a.body, index + len(a.mults)) for a in t.alts]
        if t.default is not None:
            branches.append(count_uses(t.default, index))
        return count_uses(t.scrutinee, index) + max(branches, default=0)
    return 0


def linear_violations(t: RTerm, path: str = "") -> List[str]:
    """Linear lambda and let binders whose bodies do not mention them exactly once"""
    found: List[str] = []
    if isinstance(t, RLam):
        if t.mult is ONE and count_uses(t.body, 0) != 1:
            found.append(f"{path}{t.name}")
        found += linear_violations(t.body, path)
    elif isinstance(t, RApp):
        found += linear_violations(t.fn, path) + linear_violations(t.arg, path)
    elif isinstance(t, RLet):
        if t.mult is ONE and count_uses(t.body, 0) != 1:
            found.append(f"{path}{t.name}")
        found += linear_violations(t.value, path) + linear_violations(t.body, path)
    elif isinstance(t, RCase):
        found += linear_violations(t.scrutinee, path)
        for a in t.alts:
            found += linear_violations(a.body, path)
        if t.default is not None:
            found += linear_violations(t.default, path)
    return found


# ---------------------------------------------------------------- printing


def show_runtime(t: RTerm, globals: Optional[Globals] = None, names: Sequence[str] = ()) -> str:
    return _RuntimePrinter(globals).go(t, list(names), 0)


class _RuntimePrinter:
    def __init__(self, globals: Optional[Globals]):
        self.globals = globals

    def display(self, name: str) -> str:
        if self.globals is not None and name in self.globals:
            shown = self.globals.get(name).display
        else:
            shown = name.split("#")[0]
        return f"({shown})" if shown in OPERATORS else shown

    def go(self, t: RTerm, names: List[str], prec: int) -> str:
        if isinstance(t, RVar):
            i = len(names) - 1 - t.index
            return names[i] if 0 <= i < len(names) else f"#{t.index}"
        if isinstance(t, RGlobal):
            return self.display(t.name)
        if isinstance(t, RLit):
            return show_literal(t.value)
        if isinstance(t, RType):
            return "[type]"
        if isinstance(t, RHole):
            return f"?{t.name}"
        if isinstance(t, RLam):
            body = self.go(t.body, names + [t.name], 0)
            return _paren(prec > 0, f"\\{t.name} => {body}")
        if isinstance(t, RLet):
            value = self.go(t.value, names, 0)
            return _paren(prec > 0, f"let {t.name} = {value} in {self.go(t.body, names + [t.name], 0)}")
        if isinstance(t, RCase):
            arms = []
            for a in t.alts:
                lhs = self.display(a.con) if a.con is not None else show_literal(a.lit)
                lhs = " ".join([lhs, *a.names])
                arms.append(f"{lhs} => {self.go(a.body, names + list(a.names), 0)}")
            if t.default is not None:
                arms.append(f"_ => {self.go(t.default, names, 0)}")
            scrut = self.go(t.scrutinee, names, 0)
            return _paren(prec > 0, f"case {scrut} of {{ {'; '.join(arms)} }}")
        assert isinstance(t, RApp)
        fn = self.go(t.fn, names, 9)
        arg = self.go(t.arg, names, 10)
        return _paren(prec >= 10, f"{fn} {arg}")


def _paren(needed: bool, s: str) -> str:
    return f"({s})" if needed else s
