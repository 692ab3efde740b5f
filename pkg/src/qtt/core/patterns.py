"""
🧩 Patterns - Clause Elaboration and Case-Tree Compilation
Left-hand sides become pattern trees over context entries; clause lists become core case trees
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .context import Context
from .elaborator import Elaborator, literal_type, literal_value
from .errors import NO_SPAN, ErasedUsage, PatternArityMismatch, Span
from .multiplicity import OMEGA, ONE, ZERO, Multiplicity
from .syntax import DClause, Plicity, STerm, SWildcard, SVar, app_spine
from .terms import Alt, Case, GlobalDef, Lam, LitValue, Term, Var, rename
from .values import Value, VCon, VLit, VPi, vvar

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PVar:
    level: int


@dataclass(frozen=True)
class PLit:
    value: LitValue
    level: int


@dataclass(frozen=True)
class PCon:
    con: str
    level: int
    fields: Tuple["Pat", ...]


Pat = Union[PVar, PLit, PCon]


@dataclass
class Position:
    name: str
    mult: Multiplicity
    plicity: Plicity


@dataclass
class ElaboratedClause:
    """One clause: a pattern per argument position and a right-hand side over the clause context"""

    positions: List[Position]
    patterns: List[Pat]
    ctx: Context
    rhs: Term
    span: Span = NO_SPAN
    matched: List[int] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return self.ctx.depth


class ClauseElaborator:
    """Checks clause left-hand sides against a signature and their right-hand sides in the result"""

    def __init__(self, elab: Elaborator):
        self.elab = elab
        self.ev = elab.ev

    def elaborate(self, d: GlobalDef, clause: DClause) -> ElaboratedClause:
        elab = self.elab
        _, args = app_spine(clause.lhs)
        positional = [a for name, a in args if name is None]
        named = {name: a for name, a in args if name is not None}
        ctx = Context()
        ty = self.ev.eval((), d.type)
        positions: List[Position] = []
        pending: List[Tuple[int, Optional[STerm]]] = []

        while positional or named:
            pi = self.ev.force(ty)
            if not isinstance(pi, VPi):
                raise PatternArityMismatch(f"{d.display} is applied to too many patterns", clause.span)
            if pi.plicity.is_implicit:
                sub = named.pop(pi.name, None)
            elif positional:
                sub = positional.pop(0)
            else:
                raise PatternArityMismatch(
                    f"{d.display} has no implicit argument {next(iter(named))}", clause.span
                )
            name, visible, sub = self._binder(sub, pi.name)
            level = ctx.depth
            ctx = ctx.bind(name, pi.mult, pi.domain, visible=visible, span=clause.span)
            positions.append(Position(name, pi.mult, pi.plicity))
            pending.append((level, sub))
            ty = self.ev.instantiate(pi.codomain, vvar(level))

        patterns: List[Pat] = []
        matched: List[int] = []
        extra = [ty]
        for level, sub in pending:
            if sub is None:
                patterns.append(PVar(level))
                continue
            entry = ctx.entry(level)
            if entry.mult is ZERO:
                raise ErasedUsage(entry.name, clause.span)
            ctx, pat, extra = self.match(ctx, level, sub, extra, matched, clause.span)
            patterns.append(pat)
        [ty] = extra

        start = len(elab.holes)
        rhs, usage = elab.check(ctx, ONE, clause.rhs, ty)
        for level in range(ctx.depth):
            used = usage.get(level)
            for hole in elab.holes[start:]:
                hole.used[level] = used
            if level in matched:
                continue
            entry = ctx.entry(level)
            elab.check_usage(entry.name, entry.mult, used, usage.has_holes, clause.span)
        rhs = self.ev.zonk(ctx.depth, rhs)
        return ElaboratedClause(positions, patterns, ctx, rhs, clause.span, matched)

    def _binder(self, sub: Optional[STerm], name: str) -> Tuple[str, bool, Optional[STerm]]:
        if sub is None:
            return name, True, None
        if isinstance(sub, SWildcard):
            return "_", False, None
        if self.elab.is_var_pattern(sub):
            assert isinstance(sub, SVar)
            return sub.name, True, None
        return f"_{name}", False, sub

    def match(
        self,
        ctx: Context,
        level: int,
        pattern: STerm,
        extra: List[Value],
        matched: List[int],
        span: Span,
    ) -> Tuple[Context, Pat, List[Value]]:
        """Refine the entry at `level` by a constructor or literal pattern"""
        elab = self.elab
        entry = ctx.entry(level)
        pattern = elab.pattern_surface(pattern, entry.type)
        matched.append(level)
        lit = literal_value(pattern)
        if lit is not None:
            elab.expect(ctx, literal_type(lit), entry.type, span)
            if ctx.entry(level).bound:
                ctx, extra = ctx.refine(self.ev, level, VLit(lit), extra)
            return ctx.hide(level), PLit(lit, level), extra

        head, args = app_spine(pattern)
        con = elab.resolve_constructor(head, entry.type, span)
        ctx, levels, subs, ret = elab.open_constructor(ctx, con, args, entry.mult, span)
        parent = ctx.display_order(level)
        for i, lv in enumerate(levels):
            ctx = ctx.place(lv, parent + (i,))
        ctx, extra = elab.refine_by(ctx, ret, ctx.entry(level).type, extra, con, span)
        if ctx.entry(level).bound:
            ctx, extra = ctx.refine(self.ev, level, elab.constructor_value(ctx, con, levels), extra)
        fields: List[Pat] = []
        for lv, sub in zip(levels, subs):
            if sub is None:
                fields.append(PVar(lv))
            else:
                ctx, pat, extra = self.match(ctx, lv, sub, extra, matched, span)
                fields.append(pat)
        return ctx.hide(level), PCon(con.name, level, tuple(fields)), extra


# ------------------------------------------------------------ compilation


@dataclass
class _Row:
    clause: int
    pending: List[Tuple[int, Pat]]
    env: Dict[int, int]


class CaseTreeCompiler:
    """
    Leftmost-constructor splitting with first-match priority. Constructors
    that no row covers get no arm and a MissingCases warning.
    """

    def __init__(self, elab: Elaborator, d: GlobalDef, clauses: Sequence[ElaboratedClause]):
        self.elab = elab
        self.globals = elab.globals
        self.d = d
        self.clauses = clauses
        self.reached: set = set()

    def compile(self) -> Term:
        first = self.clauses[0]
        arity = len(first.positions)
        for c in self.clauses[1:]:
            if len(c.positions) != arity:
                raise PatternArityMismatch(
                    f"all clauses of {self.d.display} need {arity} arguments", c.span
                )
        rows = [_Row(i, list(enumerate(c.patterns)), {}) for i, c in enumerate(self.clauses)]
        tree = self._compile(rows, arity)
        for i, c in enumerate(self.clauses):
            if i not in self.reached:
                self.elab.warn("OverlappingCatchAll", f"a clause of {self.d.display} is never reached", c.span)
        assert tree is not None
        for p in reversed(first.positions):
            tree = Lam(p.name, p.mult, p.plicity, tree)
        return tree

    def _compile(self, rows: List[_Row], depth: int) -> Optional[Term]:
        if not rows:
            return None
        row = rows[0]
        split = next(((v, p) for v, p in row.pending if not isinstance(p, PVar)), None)
        if split is None:
            env = dict(row.env)
            for v, p in row.pending:
                env[p.level] = v
            self.reached.add(row.clause)
            return self._leaf(self.clauses[row.clause], env, depth)
        var, pat = split
        mult = self.clauses[row.clause].ctx.entry(pat.level).mult
        scrut = Var(depth - 1 - var)
        if isinstance(pat, PLit):
            return self._literals(rows, var, scrut, mult, depth)
        return self._constructors(rows, var, scrut, mult, pat, depth)

    def _constructors(self, rows, var, scrut, mult, pat: PCon, depth) -> Term:
        family = self.globals.get(self.globals.get(pat.con).family)
        alts: List[Alt] = []
        for name in family.constructors:
            con = self.globals.get(name)
            arity = len(con.field_mults)
            fresh = list(range(depth, depth + arity))
            sub_rows = []
            for r in rows:
                out = _specialise(r, var, name, fresh)
                if out is not None:
                    sub_rows.append(out)
            body = self._compile(sub_rows, depth + arity)
            if body is None:
                self.elab.warn("MissingCases", f"{self.d.display} does not cover {con.display}")
                continue
            alts.append(Alt(name, None, con.field_names, con.field_mults, body))
        return Case(scrut, _scrut_mult(mult), tuple(alts))

    def _literals(self, rows, var, scrut, mult, depth) -> Term:
        values: List[LitValue] = []
        for r in rows:
            p = dict(r.pending).get(var)
            if isinstance(p, PLit) and p.value not in values:
                values.append(p.value)
        alts = []
        for value in values:
            body = self._compile([o for o in (_specialise_lit(r, var, value) for r in rows) if o], depth)
            if body is not None:
                alts.append(Alt(None, value, (), (), body))
        default = self._compile([o for o in (_specialise_lit(r, var, None) for r in rows) if o], depth)
        if default is None:
            self.elab.warn("MissingCases", f"{self.d.display} has no catch-all for literal patterns")
        return Case(scrut, _scrut_mult(mult), tuple(alts), default)

    def _leaf(self, clause: ElaboratedClause, env: Dict[int, int], depth: int) -> Term:
        missing = [lv for lv in range(clause.depth) if lv not in env]
        assert not missing, f"clause entries {missing} have no case-tree variable"
        d = clause.depth
        return rename(clause.rhs, lambda i: depth - 1 - env[d - 1 - i])


def _scrut_mult(m: Multiplicity) -> Multiplicity:
    return ONE if m is ONE else OMEGA


def _specialise(row: _Row, var: int, con: str, fresh: List[int]) -> Optional[_Row]:
    pending = []
    env = dict(row.env)
    keep = True
    for v, p in row.pending:
        if v != var:
            pending.append((v, p))
        elif isinstance(p, PVar):
            env[p.level] = var
        elif isinstance(p, PCon) and p.con == con:
            env[p.level] = var
            pending.extend(zip(fresh, p.fields))
        else:
            keep = False
    return _Row(row.clause, pending, env) if keep else None


def _specialise_lit(row: _Row, var: int, value: Optional[LitValue]) -> Optional[_Row]:
    """Rows for one literal arm, or for the default arm when `value` is None"""
    pending = []
    env = dict(row.env)
    for v, p in row.pending:
        if v != var:
            pending.append((v, p))
        elif isinstance(p, PVar):
            env[p.level] = var
        elif isinstance(p, PLit) and value is not None and _same_literal(p.value, value):
            env[p.level] = var
        else:
            return None
    return _Row(row.clause, pending, env)


def _same_literal(a: LitValue, b: LitValue) -> bool:
    return type(a) is type(b) and a == b


# ---------------------------------------------------------------- oracle


def match_clauses(elab: Elaborator, clauses: Sequence[ElaboratedClause], args: Sequence[Value]) -> Optional[Value]:
    """Evaluate by trying the clauses in order, without the case tree"""
    ev = elab.ev
    for clause in clauses:
        env: Dict[int, Value] = {}
        if all(_match_value(ev, p, a, env) for p, a in zip(clause.patterns, args)):
            values = tuple(env[lv] for lv in range(clause.depth))
            return ev.eval(values, clause.rhs)
    return None


def _match_value(ev, p: Pat, v: Value, env: Dict[int, Value]) -> bool:
    env[p.level] = v
    if isinstance(p, PVar):
        return True
    v = ev.force(v)
    if isinstance(p, PLit):
        return isinstance(v, VLit) and _same_literal(v.value, p.value)
    if not isinstance(v, VCon) or v.name != p.con or len(v.args) != len(p.fields):
        return False
    return all(_match_value(ev, f, a.value, env) for f, a in zip(p.fields, v.args))
