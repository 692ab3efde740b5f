"""
🌳 Surface Syntax - Parsed AST
Sugar-bearing terms and declarations, plus a printer that re-parses to the same tree
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple, Union

from .errors import NO_SPAN, Span
from .multiplicity import Multiplicity


class Plicity(Enum):
    EXPLICIT = "explicit"
    IMPLICIT = "implicit"
    AUTO = "auto"
    DEFAULT = "default"

    @property
    def is_implicit(self) -> bool:
        return self is not Plicity.EXPLICIT


def _span() -> Span:
    return field(default=NO_SPAN, compare=False, repr=False)


@dataclass
class SVar:
    name: str
    span: Span = _span()


@dataclass
class SHole:
    name: str
    span: Span = _span()


@dataclass
class SWildcard:
    span: Span = _span()


@dataclass
class SType:
    span: Span = _span()


@dataclass
class SWorld:
    span: Span = _span()


@dataclass
class SIntLit:
    """Raw integer literal straight from the parser"""

    value: int
    span: Span = _span()


@dataclass
class SFromInteger:
    """Integer literal after desugaring; resolved against the expected type"""

    value: int
    span: Span = _span()


@dataclass
class SStrLit:
    value: str
    span: Span = _span()


@dataclass
class SCharLit:
    value: str
    span: Span = _span()


@dataclass
class SApp:
    fn: "STerm"
    arg: "STerm"
    # None for a positional argument, otherwise the implicit binder name given
    named: Optional[str] = None
    span: Span = _span()


@dataclass
class SLam:
    name: str
    body: "STerm"
    pattern: Optional["STerm"] = None
    span: Span = _span()


@dataclass
class SPi:
    name: Optional[str]
    mult: Optional[Multiplicity]
    plicity: Plicity
    domain: "STerm"
    codomain: "STerm"
    default: Optional["STerm"] = None
    span: Span = _span()


@dataclass
class SLet:
    pattern: "STerm"
    value: "STerm"
    body: "STerm"
    span: Span = _span()


@dataclass
class SAlt:
    pattern: "STerm"
    rhs: "STerm"
    span: Span = _span()


@dataclass
class SCase:
    scrutinee: "STerm"
    alts: List[SAlt]
    span: Span = _span()


@dataclass
class DoBind:
    pattern: "STerm"
    expr: "STerm"
    span: Span = _span()


@dataclass
class DoLet:
    pattern: "STerm"
    expr: "STerm"
    span: Span = _span()


@dataclass
class DoExpr:
    expr: "STerm"
    span: Span = _span()


DoStmt = Union[DoBind, DoLet, DoExpr]


@dataclass
class SDo:
    stmts: List[DoStmt]
    span: Span = _span()


@dataclass
class SList:
    items: List["STerm"]
    span: Span = _span()


@dataclass
class SUnit:
    span: Span = _span()


@dataclass
class STuple:
    items: List["STerm"]
    span: Span = _span()


STerm = Union[
    SVar, SHole, SWildcard, SType, SWorld, SIntLit, SFromInteger, SStrLit, SCharLit,
    SApp, SLam, SPi, SLet, SCase, SDo, SList, SUnit, STuple,
]


# ---------------------------------------------------------------- declarations


@dataclass
class DSig:
    names: List[str]
    type: STerm
    span: Span = _span()


@dataclass
class DClause:
    lhs: STerm
    rhs: STerm
    span: Span = _span()


@dataclass
class DData:
    name: str
    type: STerm
    # None marks an abstract (opaque) type constructor
    constructors: Optional[List[DSig]]
    short_form: bool = False
    # parameter names of a short-form declaration such as `data Maybe a = ...`
    params: List[str] = field(default_factory=list)
    span: Span = _span()


@dataclass
class DPrimitive:
    names: List[str]
    type: STerm
    span: Span = _span()


@dataclass
class DImport:
    module: str
    span: Span = _span()


Declaration = Union[DSig, DClause, DData, DPrimitive, DImport]


@dataclass
class SourceModule:
    name: str
    imports: List[str]
    declarations: List[Declaration]
    file: Optional[str] = None

    def spans(self) -> List[Tuple[Declaration, Span]]:
        return [(d, d.span) for d in self.declarations]


# ------------------------------------------------------------------- helpers

OPERATORS = {">>=": (1, "left"), "#": (2, "none"), "::": (5, "right"), "++": (5, "right"), "+": (8, "left")}


def is_operator(name: str) -> bool:
    return name in OPERATORS


def is_lower(name: str) -> bool:
    return bool(name) and (name[0].islower() or name[0] == "_") and not is_operator(name)


def app_spine(term: STerm) -> Tuple[STerm, List[Tuple[Optional[str], STerm]]]:
    """Split `f a {x = b} c` into head and (name, arg) list"""
    args: List[Tuple[Optional[str], STerm]] = []
    while isinstance(term, SApp):
        args.append((term.named, term.arg))
        term = term.fn
    args.reverse()
    return term, args


def mk_app(head: STerm, *args: STerm, span: Span = NO_SPAN) -> STerm:
    for a in args:
        head = SApp(head, a, None, span)
    return head


def binop(op: str, left: STerm, right: STerm, span: Span = NO_SPAN) -> STerm:
    return SApp(SApp(SVar(op, span), left, None, span), right, None, span)


# ------------------------------------------------------------------- printer


def show_term(t: STerm) -> str:
    """Single-line rendering accepted by the parser"""
    return _Printer().term(t, 0)


class _Printer:
    # precedence contexts: 0 top, 1..8 operators, 9 application fn, 10 atom

    def term(self, t: STerm, prec: int) -> str:
        if isinstance(t, SPi):
            return self._paren(prec > 0, self._pi(t))
        if isinstance(t, (SLam, SLet, SCase, SDo)):
            return self._paren(prec > 0, self._block(t))
        if isinstance(t, SApp):
            return self._app(t, prec)
        return self._atom(t)

    def _paren(self, needed: bool, s: str) -> str:
        return f"({s})" if needed else s

    def _pi(self, t: SPi) -> str:
        cod = self.term(t.codomain, 0)
        mult = f"{t.mult.value} " if t.mult is not None else ""
        name = t.name if t.name is not None else "_"
        dom = self.term(t.domain, 0)
        if t.plicity is Plicity.EXPLICIT:
            if t.name is None and t.mult is None:
                return f"{self.term(t.domain, 1)} -> {cod}"
            return f"({mult}{name} : {dom}) -> {cod}"
        if t.plicity is Plicity.DEFAULT:
            return f"{{default {self.term(t.default, 10)} {mult}{name} : {dom}}} -> {cod}"
        if t.plicity is Plicity.AUTO:
            return f"{{auto {mult}{name} : {dom}}} -> {cod}"
        return f"{{{mult}{name} : {dom}}} -> {cod}"

    def _block(self, t: STerm) -> str:
        if isinstance(t, SLam):
            binder = t.name if t.pattern is None else f"({self.term(t.pattern, 0)})"
            return f"\\{binder} => {self.term(t.body, 0)}"
        if isinstance(t, SLet):
            return f"let {self.term(t.pattern, 1)} = {self.term(t.value, 0)} in {self.term(t.body, 0)}"
        if isinstance(t, SCase):
            alts = "; ".join(f"{self.term(a.pattern, 1)} => {self.term(a.rhs, 1)}" for a in t.alts)
            return f"case {self.term(t.scrutinee, 0)} of {alts}"
        assert isinstance(t, SDo)
        parts = []
        for s in t.stmts:
            if isinstance(s, DoBind):
                parts.append(f"{self.term(s.pattern, 1)} <- {self.term(s.expr, 1)}")
            elif isinstance(s, DoLet):
                parts.append(f"let {self.term(s.pattern, 1)} = {self.term(s.expr, 1)}")
            else:
                parts.append(self.term(s.expr, 1))
        return "do " + "; ".join(parts)

    def _app(self, t: SApp, prec: int) -> str:
        head, args = app_spine(t)
        positional = [a for n, a in args if n is None]
        if isinstance(head, SVar) and is_operator(head.name) and len(args) == 2 and len(positional) == 2:
            level, assoc = OPERATORS[head.name]
            lp = level + (0 if assoc == "left" else 1)
            rp = level + (0 if assoc == "right" else 1)
            left = self.term(positional[0], lp)
            right = self.term(positional[1], rp)
            return self._paren(prec > level, f"{left} {head.name} {right}")
        parts = [self.term(head, 10)]
        for name, a in args:
            if name is None:
                parts.append(self.term(a, 10))
            else:
                parts.append(f"{{{name} = {self.term(a, 0)}}}")
        return self._paren(prec >= 9, " ".join(parts))

    def _atom(self, t: STerm) -> str:
        if isinstance(t, SVar):
            return f"({t.name})" if is_operator(t.name) else t.name
        if isinstance(t, SHole):
            return f"?{t.name}"
        if isinstance(t, SWildcard):
            return "_"
        if isinstance(t, SType):
            return "Type"
        if isinstance(t, SWorld):
            return "%World"
        if isinstance(t, (SIntLit, SFromInteger)):
            return str(t.value)
        if isinstance(t, SStrLit):
            return '"' + t.value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'
        if isinstance(t, SCharLit):
            esc = {"\n": "\\n", "'": "\\'", "\\": "\\\\"}.get(t.value, t.value)
            return f"'{esc}'"
        if isinstance(t, SList):
            return "[" + ", ".join(self.term(i, 0) for i in t.items) + "]"
        if isinstance(t, SUnit):
            return "()"
        if isinstance(t, STuple):
            return "(" + ", ".join(self.term(i, 0) for i in t.items) + ")"
        raise TypeError(f"cannot print {t!r}")


def show_declaration(d: Declaration) -> str:
    if isinstance(d, DSig):
        return f"{', '.join(_name(n) for n in d.names)} : {show_term(d.type)}"
    if isinstance(d, DPrimitive):
        return f"%primitive {', '.join(_name(n) for n in d.names)} : {show_term(d.type)}"
    if isinstance(d, DClause):
        return f"{_Printer().term(d.lhs, 1)} = {show_term(d.rhs)}"
    if isinstance(d, DImport):
        return f"import {d.module}"
    assert isinstance(d, DData)
    if d.constructors is None:
        return f"data {_name(d.name)} : {show_term(d.type)}"
    if d.short_form:
        cons = " | ".join(_short_con(c) for c in d.constructors)
        head = " ".join([d.name] + d.params)
        return f"data {head} = {cons}"
    lines = [f"data {_name(d.name)} : {show_term(d.type)} where"]
    lines += [f"  {show_declaration(c)}" for c in d.constructors]
    return "\n".join(lines)


def _short_con(c: DSig) -> str:
    # short-form constructors are stored with their full arrow type
    args = []
    ty = c.type
    while isinstance(ty, SPi):
        args.append(_Printer().term(ty.domain, 10))
        ty = ty.codomain
    return " ".join([c.names[0]] + args)


def _name(n: str) -> str:
    return f"({n})" if is_operator(n) else n


def show_module(m: SourceModule) -> str:
    return "\n".join(show_declaration(d) for d in m.declarations) + "\n"
