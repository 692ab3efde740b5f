"""
📜 Declarations - Module Elaboration
Signatures, data types, primitives and clause groups, elaborated in source order into the global table
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Set, Tuple

from .context import Context, MetaEntry, MetaKind
from .desugar import autobind_implicits, desugar
from .elaborator import Elaborator, Hole
from .errors import (
    NO_SPAN, Diagnostic, InvalidConstructorReturnType, LoadError, QttError, Span, UnknownHole,
    UnknownName, UnsolvedMeta,
)
from .multiplicity import ZERO
from .patterns import CaseTreeCompiler, ClauseElaborator, ElaboratedClause
from .primitives import is_known_primitive
from .syntax import DClause, DData, DImport, DPrimitive, DSig, Plicity, SourceModule, STerm, SVar, app_spine
from .terms import (
    Alt, App, Case, DefKind, Global, GlobalDef, Globals, InsertedMeta, Lam, Let, Meta, Pi, Term,
    TypeU, Var, free_levels, pi_arity,
)

logger = logging.getLogger(__name__)

BUILTIN_TYPES = ("Int", "String", "Char", "%World")


@dataclass
class ModuleResult:
    """What one source module contributed to the program"""

    name: str
    file: Optional[str] = None
    declarations: List[str] = field(default_factory=list)
    holes: List[Hole] = field(default_factory=list)
    diagnostics: List[Diagnostic] = field(default_factory=list)

    @property
    def declaration_count(self) -> int:
        return len(self.declarations)

    def summary(self) -> str:
        return f"{self.declaration_count} declarations, {len(self.holes)} holes"


def install_builtins(globals: Globals) -> None:
    for name in BUILTIN_TYPES:
        if name not in globals:
            globals.add(GlobalDef(name, name, DefKind.TYPE_CONSTRUCTOR, TypeU()))


class ModuleElaborator:
    """Elaborates modules one after another into a shared global table"""

    def __init__(self, globals: Optional[Globals] = None, search_depth: int = 8):
        self.globals = globals if globals is not None else Globals()
        install_builtins(self.globals)
        self.elab = Elaborator(self.globals, search_depth)
        self.clause_elaborator = ClauseElaborator(self.elab)
        self.clauses: Dict[str, List[ElaboratedClause]] = {}
        self.modules: List[ModuleResult] = []
        self.generalized: Set[int] = set()

    @property
    def holes(self) -> List[Hole]:
        return self.elab.holes

    # ---------------------------------------------------------------- modules

    def elaborate_module(self, module: SourceModule) -> ModuleResult:
        result = ModuleResult(module.name, module.file)
        holes_from = len(self.elab.holes)
        diagnostics_from = len(self.elab.diagnostics)
        open_fn: Optional[Tuple[GlobalDef, List[DClause]]] = None

        for decl in module.declarations:
            try:
                if isinstance(decl, DClause):
                    name = _clause_head(decl)
                    if open_fn is not None and open_fn[0].display == name:
                        open_fn[1].append(decl)
                        continue
                    if open_fn is not None:
                        self.finish_function(*open_fn)
                    open_fn = (self._signature_for(name, decl.span), [decl])
                    continue
                if open_fn is not None:
                    self.finish_function(*open_fn)
                    open_fn = None
                result.declarations.extend(self.elaborate_declaration(decl, module.name))
            except QttError as e:
                raise e.located(decl.span, module.file)
        if open_fn is not None:
            try:
                self.finish_function(*open_fn)
            except QttError as e:
                raise e.located(open_fn[1][0].span, module.file)

        self._check_bodies(result, module.name)
        result.holes = self.elab.holes[holes_from:]
        result.diagnostics = self.elab.diagnostics[diagnostics_from:]
        for d in result.diagnostics:
            d.file = d.file or module.file
            logger.warning(d.format())
        self.modules.append(result)
        logger.info(f"Elaborated module {module.name}: {result.summary()}")
        return result

    def elaborate_declaration(self, decl, module: Optional[str] = None) -> List[str]:
        if isinstance(decl, DImport):
            return []
        if isinstance(decl, DSig):
            return [self.signature(n, decl.type, decl.span, module).name for n in decl.names]
        if isinstance(decl, DPrimitive):
            return [self.primitive(n, decl.type, decl.span, module).name for n in decl.names]
        if isinstance(decl, DData):
            return [self.data(decl, module).name]
        raise LoadError(f"unexpected declaration {decl!r}", decl.span)

    def _check_bodies(self, result: ModuleResult, module: str) -> None:
        for name in result.declarations:
            d = self.globals.get(name)
            if d.kind is DefKind.FUNCTION and d.body is None:
                self.elab.warn("MissingCases", f"{d.display} has a signature but no clauses", d.span)

    # -------------------------------------------------------------- signatures

    def elaborate_type(self, sig: STerm, span: Span = NO_SPAN) -> Term:
        """A closed type with unbound lowercase names bound as erased implicits"""
        known = set(self.globals.display_names())
        sig = autobind_implicits(desugar(sig), known)
        start = self.elab.metas.next_id
        holes = len(self.elab.holes)
        ty = self.elab.check_type(Context(), sig)
        ty = self.elab.ev.zonk(0, ty)
        ty = self.generalize(ty, start)
        self.check_solved(start, span, allow_implicit=len(self.elab.holes) > holes)
        return ty

    def signature(self, name: str, sig: STerm, span: Span, module: Optional[str] = None) -> GlobalDef:
        ty = self.elaborate_type(sig, span)
        d = GlobalDef(self.globals.fresh_name(name), name, DefKind.FUNCTION, ty, span=span, module=module)
        self.globals.add(d)
        logger.debug(f"Declared {d.name} : {self.elab.printer.term(ty)}")
        return d

    def primitive(self, name: str, sig: STerm, span: Span, module: Optional[str] = None) -> GlobalDef:
        if not is_known_primitive(name):
            raise LoadError(f"the run time has no primitive named {name}", span)
        ty = self.elaborate_type(sig, span)
        d = GlobalDef(
            self.globals.fresh_name(name), name, DefKind.PRIMITIVE, ty,
            arity=pi_arity(ty), span=span, module=module,
        )
        self.globals.add(d)
        return d

    def generalize(self, ty: Term, start: int) -> Term:
        """Turn unsolved closed metas of a signature into leading erased implicits"""
        metas = self.elab.metas
        found: List[int] = []
        _collect_metas(ty, found)
        closed = [
            id for id in found
            if id >= start
            and metas.solution(id) is None
            and metas.kind(id) is MetaKind.IMPLICIT
            and self._generalizable(metas.entries[id])
        ]
        if not closed:
            return ty
        n = len(closed)
        body = _abstract_metas(ty, closed, 0)
        for k in reversed(range(n)):
            entry = metas.entries[closed[k]]
            dom = _abstract_metas(self.elab.ev.quote(0, entry.type), closed[:k], 0)
            body = Pi(f"t{k}", ZERO, Plicity.IMPLICIT, dom, body)
            self.generalized.add(closed[k])
        logger.debug(f"Generalized {n} metas")
        return body

    def _generalizable(self, entry: MetaEntry) -> bool:
        """A meta that is closed or whose type ignores the binders it was made under"""
        if not entry.ctx.bound_levels():
            return True
        ty = self.elab.ev.zonk(entry.ctx.depth, self.elab.ev.quote(entry.ctx.depth, entry.type))
        return not free_levels(ty, entry.ctx.depth)

    def check_solved(self, start: int, span: Span, allow_implicit: bool = False) -> None:
        for entry in self.elab.metas.unsolved(start):
            if entry.kind in (MetaKind.HOLE, MetaKind.HOLE_TYPE) or entry.id in self.generalized:
                continue
            if allow_implicit and entry.kind is MetaKind.IMPLICIT:
                continue
            shown = self.elab.show(entry.ctx, entry.type)
            raise UnsolvedMeta(f"could not infer a value of type {shown}", entry.span if entry.span.known else span)

    # ------------------------------------------------------------------- data

    def data(self, decl: DData, module: Optional[str] = None) -> GlobalDef:
        ty = self.elaborate_type(decl.type, decl.span)
        family = GlobalDef(
            self.globals.fresh_name(decl.name), decl.name, DefKind.TYPE_CONSTRUCTOR, ty,
            arity=pi_arity(ty), span=decl.span, module=module,
        )
        self.globals.add(family)
        for tag, con in enumerate(decl.constructors or []):
            for con_name in con.names:
                d = self.constructor(family, con_name, con.type, tag, con.span, module)
                family.constructors.append(d.name)
        logger.debug(f"Data {family.name} with {len(family.constructors)} constructors")
        return family

    def constructor(
        self, family: GlobalDef, name: str, sig: STerm, tag: int, span: Span, module: Optional[str]
    ) -> GlobalDef:
        ty = self.elaborate_type(sig, span)
        names, mults, plicities = [], [], []
        ret = ty
        while isinstance(ret, Pi):
            names.append(ret.name)
            mults.append(ret.mult)
            plicities.append(ret.plicity)
            ret = ret.codomain
        head, _ = _core_spine(ret)
        if not (isinstance(head, Global) and head.name == family.name):
            shown = self.elab.printer.term(ret, names)
            raise InvalidConstructorReturnType(
                f"{name} must construct a value of {family.display}, not {shown}", span
            )
        d = GlobalDef(
            self.globals.fresh_name(name), name, DefKind.CONSTRUCTOR, ty,
            tag=tag, family=family.name, field_mults=tuple(mults), field_names=tuple(names),
            field_plicities=tuple(plicities), arity=len(mults), span=span, module=module,
        )
        self.globals.add(d)
        return d

    # -------------------------------------------------------------- functions

    def _signature_for(self, name: str, span: Span) -> GlobalDef:
        candidates = [d for d in self.globals.lookup(name) if d.kind is DefKind.FUNCTION]
        if not candidates:
            raise UnknownName(f"{name} has clauses but no type declaration", span)
        return candidates[-1]

    def finish_function(self, d: GlobalDef, clauses: List[DClause]) -> GlobalDef:
        start = self.elab.metas.next_id
        holes = len(self.elab.holes)
        elaborated = []
        for clause in clauses:
            clause = DClause(clause.lhs, desugar(clause.rhs), clause.span)
            elaborated.append(self.clause_elaborator.elaborate(d, clause))
        self.check_solved(start, d.span, allow_implicit=len(self.elab.holes) > holes)
        for c in elaborated:
            c.rhs = self.elab.ev.zonk(c.depth, c.rhs)
        d.body = CaseTreeCompiler(self.elab, d, elaborated).compile()
        d.arity = len(elaborated[0].positions)
        self.clauses[d.name] = elaborated
        logger.debug(f"Defined {d.name} with {len(clauses)} clauses")
        return d

    # ------------------------------------------------------------------- holes

    def hole(self, name: str) -> Hole:
        for h in self.elab.holes:
            if h.name == name:
                return h
        raise UnknownHole(f"there is no hole named {name}")

    def hole_report(self, name: str, width: int = 30) -> str:
        return self.elab.printer.hole_report(self.elab.ev, self.hole(name), width)

    def get_stats(self) -> Dict[str, Any]:
        kinds: Dict[str, int] = {}
        for d in self.globals.defs.values():
            kinds[d.kind.value] = kinds.get(d.kind.value, 0) + 1
        return {
            "modules": [m.name for m in self.modules],
            "definitions": kinds,
            "holes": len(self.elab.holes),
            "warnings": len(self.elab.diagnostics),
        }


# ------------------------------------------------------------------ helpers


def _clause_head(clause: DClause) -> str:
    head, _ = app_spine(clause.lhs)
    if not isinstance(head, SVar):
        raise UnknownName("a clause must start with the name it defines", clause.span)
    return head.name


def _core_spine(t: Term) -> Tuple[Term, List[Term]]:
    args: List[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    return t, list(reversed(args))


def _collect_metas(t: Term, out: List[int]) -> None:
    if isinstance(t, (Meta, InsertedMeta)):
        if t.id not in out:
            out.append(t.id)
    elif isinstance(t, App):
        _collect_metas(t.fn, out)
        _collect_metas(t.arg, out)
    elif isinstance(t, Pi):
        _collect_metas(t.domain, out)
        _collect_metas(t.codomain, out)
        if t.default is not None:
            _collect_metas(t.default, out)
    elif isinstance(t, Lam):
        _collect_metas(t.body, out)
    elif isinstance(t, Let):
        _collect_metas(t.type, out)
        _collect_metas(t.value, out)
        _collect_metas(t.body, out)
    elif isinstance(t, Case):
        _collect_metas(t.scrutinee, out)
        for a in t.alts:
            _collect_metas(a.body, out)
        if t.default is not None:
            _collect_metas(t.default, out)


def _abstract_metas(t: Term, ids: List[int], depth: int) -> Term:
    """Replace each listed meta by the variable of a new outer binder"""
    n = len(ids)

    def go(t: Term, local: int) -> Term:
        head, _ = _core_spine(t)
        if isinstance(head, (Meta, InsertedMeta)) and head.id in ids:
            return Var(local + n - 1 - ids.index(head.id))
        if isinstance(t, Var):
            return Var(t.index + n) if t.index >= local else t
        if isinstance(t, App):
            return App(go(t.fn, local), go(t.arg, local), t.mult, t.plicity)
        if isinstance(t, Pi):
            default = go(t.default, local) if t.default is not None else None
            return Pi(t.name, t.mult, t.plicity, go(t.domain, local), go(t.codomain, local + 1), default)
        if isinstance(t, Lam):
            return Lam(t.name, t.mult, t.plicity, go(t.body, local + 1))
        if isinstance(t, Let):
            return Let(t.name, t.mult, go(t.type, local), go(t.value, local), go(t.body, local + 1))
        if isinstance(t, Case):
            alts = tuple(Alt(a.con, a.lit, a.names, a.mults, go(a.body, local + a.arity)) for a in t.alts)
            default = go(t.default, local) if t.default is not None else None
            return Case(go(t.scrutinee, local), t.scrut_mult, alts, default)
        return t

    return go(t, depth)
