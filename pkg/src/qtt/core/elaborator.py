"""
🧠 Elaborator - Bidirectional Checking with Usage Accounting
Surface terms to core terms: implicit insertion, overloads, literals, holes and multiplicity checks
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

from .context import Context, MetaKind, MetaStore
from .errors import (
    NO_SPAN, CannotRefineNonVariableScrutinee, Diagnostic, ErasedUsage, LinearityError,
    NonPatternSpine, NotAFunction, OccursCheck, PatternArityMismatch, QttError, Span,
    TypeMismatch, UnifyError, UnknownName,
)
from .evaluator import Evaluator
from .multiplicity import OMEGA, ONE, ZERO, Multiplicity, UsageVector, admissible, lub, mul
from .pretty import Printer
from .search import AutoSearch
from .syntax import (
    Plicity, SAlt, SApp, SCase, SCharLit, SFromInteger, SHole, SIntLit, SLam, SLet, SList, SPi,
    SStrLit, STerm, STuple, SType, SUnit, SVar, SWildcard, SWorld, app_spine, binop, is_lower, mk_app,
)
from .syntax import show_term as show_surface
from .terms import (
    Alt, App, Case, Char, GlobalDef, Global, Globals, InsertedMeta, Lam, Let, Lit, Pi, Term,
    TypeU, Var, free_levels, mentions, occurs,
)
from .unify import Unifier
from .values import HMeta, SpineArg, Value, VCon, VLit, VNeutral, VPi, VType, vvar

logger = logging.getLogger(__name__)

WORLD = "%World"

Checked = Tuple[Term, UsageVector]
Inferred = Tuple[Term, Value, UsageVector]
BodyFn = Callable[[Context, Value], Checked]
Arm = Tuple[STerm, BodyFn, Span]


@dataclass
class Hole:
    """A named hole with the context and goal it was elaborated in"""

    name: str
    meta: int
    ctx: Context
    goal: Value
    span: Span = NO_SPAN
    # scope usage of each enclosing binder, recorded when the binder closes
    used: Dict[int, Multiplicity] = field(default_factory=dict)


@dataclass
class _Pending:
    """Argument metas that are finished once their application is complete"""

    autos: List[Tuple[Term, Value, Span]] = field(default_factory=list)
    defaults: List[Tuple[Term, Value]] = field(default_factory=list)
    relevant: List[Tuple[Term, Multiplicity]] = field(default_factory=list)


class Elaborator:
    """
    Checks surface terms against types (or infers them) in a context.

    `sigma` is the usage mode: ZERO elaborates type-level code where nothing
    is counted, ONE elaborates run-time code and returns a usage vector.
    """

    def __init__(self, globals: Globals, search_depth: int = 8):
        self.globals = globals
        self.metas = MetaStore()
        self.ev = Evaluator(globals, self.metas)
        self.unifier = Unifier(self.ev, self.metas)
        self.printer = Printer(globals, self.metas)
        self.search = AutoSearch(self, search_depth)
        self.holes: List[Hole] = []
        self.hole_names: Set[str] = set()
        self.diagnostics: List[Diagnostic] = []

    # ------------------------------------------------------------- utilities

    def save(self) -> tuple:
        return self.metas.snapshot(), len(self.holes), set(self.hole_names), len(self.diagnostics)

    def restore(self, state: tuple) -> None:
        snap, holes, names, diagnostics = state
        self.metas.restore(snap)
        del self.holes[holes:]
        self.hole_names = names
        del self.diagnostics[diagnostics:]

    def warn(self, kind: str, detail: str, span: Span = NO_SPAN) -> None:
        logger.debug(f"{kind}: {detail}")
        self.diagnostics.append(Diagnostic(kind, detail, span))

    def show(self, ctx: Context, v: Value) -> str:
        return self.printer.value(self.ev, ctx, v)

    def show_term(self, ctx: Context, t: Term) -> str:
        return self.printer.term(t, ctx.names)

    def global_term(self, name: str) -> Term:
        return Global(name)

    def fresh_meta(
        self, ctx: Context, type: Value, kind: MetaKind = MetaKind.IMPLICIT, span: Span = NO_SPAN
    ) -> Tuple[Term, Value]:
        id = self.metas.fresh(kind, ctx, type, span)
        t = InsertedMeta(id, ctx.mask())
        return t, self.ev.eval(ctx.env, t)

    def is_unsolved(self, v: Value) -> bool:
        v = self.ev.force(v)
        return isinstance(v, VNeutral) and isinstance(v.head, HMeta)

    def expect(self, ctx: Context, got: Value, expected: Value, span: Span) -> None:
        try:
            self.unifier.unify(ctx.depth, got, expected)
        except (OccursCheck, NonPatternSpine) as e:
            raise e.located(span)
        except UnifyError as e:
            raise TypeMismatch(
                f"{self.show(ctx, got)} does not match {self.show(ctx, expected)}", span
            ) from e

    def is_constructor(self, name: str) -> bool:
        return any(d.is_constructor for d in self.globals.lookup(name))

    def is_var_pattern(self, p: STerm) -> bool:
        if isinstance(p, SWildcard):
            return True
        return isinstance(p, SVar) and is_lower(p.name) and not self.is_constructor(p.name)

    # ----------------------------------------------------------------- usage

    def use(self, ctx: Context, sigma: Multiplicity, level: int, span: Span) -> UsageVector:
        if sigma is ZERO:
            return UsageVector.empty()
        entry = ctx.entry(level)
        if entry.mult is ZERO:
            raise ErasedUsage(entry.name, span)
        return UsageVector.single(level, ONE)

    def close_binder(
        self, ctx: Context, level: int, usage: UsageVector, sigma: Multiplicity, holes_from: int, span: Span
    ) -> UsageVector:
        """Record the binder's usage for holes in its scope, then check it"""
        used = usage.get(level)
        for hole in self.holes[holes_from:]:
            hole.used[level] = used
        if sigma is not ZERO:
            self.check_usage(ctx.entry(level).name, ctx.entry(level).mult, used, usage.has_holes, span)
        return usage.without(level)

    def check_usage(
        self, name: str, declared: Multiplicity, used: Multiplicity, has_holes: bool, span: Span
    ) -> None:
        if admissible(declared, used):
            return
        if has_holes:
            return
        raise LinearityError(name, 2 if used is OMEGA else used.value, span)

    def _let_mult(self, ctx: Context, usage: UsageVector) -> Multiplicity:
        linear = any(ctx.entry(level).mult is ONE for level, _ in usage.items())
        return ONE if linear else OMEGA

    # ----------------------------------------------------------------- check

    def check_type(self, ctx: Context, t: STerm) -> Term:
        return self.check(ctx, ZERO, t, VType())[0]

    def check(self, ctx: Context, sigma: Multiplicity, t: STerm, expected: Value) -> Checked:
        forced = self.ev.force(expected)
        if isinstance(forced, VPi) and forced.plicity.is_implicit and not isinstance(t, SHole):
            return self._implicit_lambda(ctx, sigma, t, forced)
        if isinstance(t, SLam) and isinstance(forced, VPi):
            return self._lambda(ctx, sigma, t, forced)
        if isinstance(t, SLet):
            return self._let(ctx, sigma, t, expected)
        if isinstance(t, SCase):
            scrut, scrut_ty, usage = self.infer(ctx, sigma, t.scrutinee)
            return self.check_case(ctx, sigma, scrut, scrut_ty, usage, t.alts, expected, t.span)
        if isinstance(t, SHole):
            return self._hole(ctx, t, expected)
        if isinstance(t, (SFromInteger, SIntLit)):
            return self._literal(ctx, sigma, t.value, expected, t.span)
        if isinstance(t, (STuple, SUnit)):
            return self.check(ctx, sigma, self._tuple_surface(ctx, t, forced), expected)
        if isinstance(t, SWildcard):
            term, _ = self.fresh_meta(ctx, expected, span=t.span)
            return term, UsageVector.empty()
        if isinstance(t, (SVar, SApp)):
            term, _, usage = self.elab_app(ctx, sigma, t, expected)
            return term, usage
        term, ty, usage = self.infer(ctx, sigma, t)
        self.expect(ctx, ty, expected, t.span)
        return term, usage

    def _implicit_lambda(self, ctx: Context, sigma: Multiplicity, t: STerm, pi: VPi) -> Checked:
        level = ctx.depth
        inner = ctx.bind(pi.name, pi.mult, pi.domain, visible=False)
        start = len(self.holes)
        body, usage = self.check(inner, sigma, t, self.ev.instantiate(pi.codomain, vvar(level)))
        usage = self.close_binder(inner, level, usage, sigma, start, t.span)
        return Lam(pi.name, pi.mult, pi.plicity, body), usage

    def _lambda(self, ctx: Context, sigma: Multiplicity, t: SLam, pi: VPi) -> Checked:
        if pi.plicity is not Plicity.EXPLICIT:
            raise TypeMismatch("a lambda cannot bind an implicit argument", t.span)
        level = ctx.depth
        inner = ctx.bind(t.name, pi.mult, pi.domain, visible=t.name != "_" and t.pattern is None, span=t.span)
        cod = self.ev.instantiate(pi.codomain, vvar(level))
        start = len(self.holes)
        if t.pattern is None:
            body, usage = self.check(inner, sigma, t.body, cod)
        else:
            scrut_usage = self.use(inner, sigma, level, t.span)
            alt = SAlt(t.pattern, t.body, t.span)
            body, usage = self.check_case(inner, sigma, Var(0), pi.domain, scrut_usage, [alt], cod, t.span)
        usage = self.close_binder(inner, level, usage, sigma, start, t.span)
        return Lam(t.name, pi.mult, Plicity.EXPLICIT, body), usage

    def _let(self, ctx: Context, sigma: Multiplicity, t: SLet, expected: Value) -> Checked:
        if not self.is_var_pattern(t.pattern):
            scrut, scrut_ty, usage = self.infer(ctx, sigma, t.value)
            alt = SAlt(t.pattern, t.body, t.span)
            return self.check_case(ctx, sigma, scrut, scrut_ty, usage, [alt], expected, t.span)
        name = t.pattern.name if isinstance(t.pattern, SVar) else "_"
        value, value_ty, value_usage = self.infer(ctx, sigma, t.value)
        mult = self._let_mult(ctx, value_usage)
        level = ctx.depth
        inner = ctx.define(name, mult, value_ty, self.ev.eval(ctx.env, value), visible=name != "_")
        start = len(self.holes)
        body, usage = self.check(inner, sigma, t.body, expected)
        usage = self.close_binder(inner, level, usage, sigma, start, t.span)
        return Let(name, mult, self.ev.quote(ctx.depth, value_ty), value, body), value_usage + usage

    # ----------------------------------------------------------------- infer

    def infer(self, ctx: Context, sigma: Multiplicity, t: STerm) -> Inferred:
        empty = UsageVector.empty()
        if isinstance(t, (SVar, SApp)):
            return self.elab_app(ctx, sigma, t, None)
        if isinstance(t, SType):
            return TypeU(), VType(), empty
        if isinstance(t, SWorld):
            return Global(WORLD), VType(), empty
        if isinstance(t, SPi):
            return self._pi(ctx, t), VType(), empty
        if isinstance(t, SStrLit):
            return Lit(t.value), VCon("String"), empty
        if isinstance(t, SCharLit):
            return Lit(Char(t.value)), VCon("Char"), empty
        if isinstance(t, (SFromInteger, SIntLit)):
            return Lit(t.value), VCon("Int"), empty
        if isinstance(t, SWildcard):
            _, ty = self.fresh_meta(ctx, VType(), span=t.span)
            term, _ = self.fresh_meta(ctx, ty, span=t.span)
            return term, ty, empty
        if isinstance(t, SHole):
            _, ty = self.fresh_meta(ctx, VType(), MetaKind.HOLE_TYPE, t.span)
            term, usage = self._hole(ctx, t, ty)
            return term, ty, usage
        if isinstance(t, SLam):
            dom, dom_v = self.fresh_meta(ctx, VType(), span=t.span)
            inner = ctx.bind(t.name, OMEGA, dom_v)
            cod, _ = self.fresh_meta(inner, VType(), span=t.span)
            ty = self.ev.eval(ctx.env, Pi(t.name, OMEGA, Plicity.EXPLICIT, dom, cod))
            term, usage = self.check(ctx, sigma, t, ty)
            return term, ty, usage
        if isinstance(t, (SLet, SCase, STuple, SUnit)):
            _, ty = self.fresh_meta(ctx, VType(), span=t.span)
            term, usage = self.check(ctx, sigma, t, ty)
            return term, ty, usage
        raise TypeMismatch(f"cannot infer a type for {show_surface(t)}", getattr(t, "span", None))

    def _pi(self, ctx: Context, t: SPi) -> Term:
        dom = self.check_type(ctx, t.domain)
        dom_v = self.ev.eval(ctx.env, dom)
        mult = t.mult if t.mult is not None else OMEGA
        name = t.name or "_"
        default = None
        if t.default is not None:
            default, _ = self.check(ctx, ZERO, t.default, dom_v)
        inner = ctx.bind(name, mult, dom_v, visible=name != "_", span=t.span)
        cod = self.check_type(inner, t.codomain)
        return Pi(name, mult, t.plicity, dom, cod, default)

    # ---------------------------------------------------------- applications

    def elab_app(self, ctx: Context, sigma: Multiplicity, t: STerm, expected: Optional[Value]) -> Inferred:
        head, args = app_spine(t)
        span = t.span
        if isinstance(head, SVar):
            found = ctx.lookup(head.name)
            if found is not None:
                level, entry = found
                usage = self.use(ctx, sigma, level, head.span)
                var = Var(ctx.depth - 1 - level)
                return self.apply(ctx, sigma, var, entry.type, usage, args, expected, span)
            candidates = self.globals.lookup(head.name)
            if not candidates:
                raise UnknownName(f"{head.name} is not defined", head.span)
            if len(candidates) > 1:
                return self._overloaded(ctx, sigma, candidates, args, expected, span)
            return self.apply_global(ctx, sigma, candidates[0], args, expected, span)
        fn, fn_ty, usage = self.infer(ctx, sigma, head)
        return self.apply(ctx, sigma, fn, fn_ty, usage, args, expected, span)

    def apply_global(
        self, ctx: Context, sigma: Multiplicity, d: GlobalDef, args, expected: Optional[Value], span: Span
    ) -> Inferred:
        fn_ty = self.ev.eval((), d.type)
        return self.apply(ctx, sigma, Global(d.name), fn_ty, UsageVector.empty(), args, expected, span)

    def apply(
        self,
        ctx: Context,
        sigma: Multiplicity,
        fn: Term,
        fn_ty: Value,
        usage: UsageVector,
        args: Sequence[Tuple[Optional[str], STerm]],
        expected: Optional[Value],
        span: Span,
    ) -> Inferred:
        pending = _Pending()
        positional = sum(1 for name, _ in args if name is None)
        early = expected is not None and positional == len(args)
        for name, arg in args:
            if name is None:
                fn, fn_ty = self.insert_implicits(ctx, fn, fn_ty, pending, span)
                if early:
                    early = False
                    self._unify_result_early(ctx, fn_ty, positional, expected)
                pi = self.ev.force(fn_ty)
                if self.is_unsolved(pi):
                    pi = self._refine_to_pi(ctx, fn_ty, span)
                if not isinstance(pi, VPi) or pi.plicity is not Plicity.EXPLICIT:
                    raise NotAFunction(
                        f"{self.show_term(ctx, fn)} cannot be applied to {show_surface(arg)}", span
                    )
            else:
                fn, fn_ty = self.insert_implicits(ctx, fn, fn_ty, pending, span, until=name)
                pi = self.ev.force(fn_ty)
                if not isinstance(pi, VPi) or not pi.plicity.is_implicit or pi.name != name:
                    raise TypeMismatch(f"there is no implicit argument named {name}", span)
            arg_sigma = ZERO if mul(sigma, pi.mult) is ZERO else ONE
            arg_term, arg_usage = self.check(ctx, arg_sigma, arg, pi.domain)
            usage = usage + arg_usage.scale(pi.mult)
            fn = App(fn, arg_term, pi.mult, pi.plicity)
            fn_ty = self.ev.instantiate(pi.codomain, self.ev.eval(ctx.env, arg_term))
        if expected is None or not _implicit_pi(self.ev.force(expected)):
            fn, fn_ty = self.insert_implicits(ctx, fn, fn_ty, pending, span)
        if expected is not None:
            self.expect(ctx, fn_ty, expected, span)
        self._finish(ctx, pending)
        usage = usage + self._meta_usage(ctx, sigma, pending, span)
        return fn, fn_ty, usage

    def _refine_to_pi(self, ctx: Context, fn_ty: Value, span: Span) -> Value:
        """Solve an unknown function type with a fresh explicit Pi"""
        dom, dom_v = self.fresh_meta(ctx, VType(), span=span)
        inner = ctx.bind("x", OMEGA, dom_v, visible=False)
        cod, _ = self.fresh_meta(inner, VType(), span=span)
        pi = self.ev.eval(ctx.env, Pi("x", OMEGA, Plicity.EXPLICIT, dom, cod))
        self.expect(ctx, fn_ty, pi, span)
        return self.ev.force(pi)

    def insert_implicits(
        self, ctx: Context, fn: Term, ty: Value, pending: _Pending, span: Span, until: Optional[str] = None
    ) -> Tuple[Term, Value]:
        while True:
            pi = self.ev.force(ty)
            if not _implicit_pi(pi) or (until is not None and pi.name == until):
                return fn, ty
            kind = MetaKind.AUTO if pi.plicity is Plicity.AUTO else MetaKind.IMPLICIT
            meta, value = self.fresh_meta(ctx, pi.domain, kind, span)
            if pi.plicity is Plicity.AUTO:
                pending.autos.append((meta, pi.domain, span))
            if pi.plicity is Plicity.DEFAULT and pi.default is not None:
                pending.defaults.append((meta, pi.default))
            if pi.mult is not ZERO:
                pending.relevant.append((meta, pi.mult))
            fn = App(fn, meta, pi.mult, pi.plicity)
            ty = self.ev.instantiate(pi.codomain, value)

    def _finish(self, ctx: Context, pending: _Pending) -> None:
        for meta, default in pending.defaults:
            value = self.ev.eval(ctx.env, meta)
            if self.is_unsolved(value):
                self.unifier.unify(ctx.depth, value, default)
        for meta, goal, span in pending.autos:
            if self.is_unsolved(self.ev.eval(ctx.env, meta)):
                self.search.resolve(ctx, meta, goal, span)

    def _meta_usage(self, ctx: Context, sigma: Multiplicity, pending: _Pending, span: Span) -> UsageVector:
        """Run-time implicit arguments count the variables their solutions mention"""
        usage = UsageVector.empty()
        if sigma is ZERO:
            return usage
        for meta, mult in pending.relevant:
            solved = self.ev.zonk(ctx.depth, meta)
            for level in free_levels(solved, ctx.depth):
                entry = ctx.entry(level)
                if entry.mult is ZERO:
                    raise ErasedUsage(entry.name, span)
                usage = usage + UsageVector.single(level, mult)
        return usage

    def _result_after(self, ctx: Context, ty: Value, n: int, pending: _Pending, span: Span) -> Optional[Value]:
        """The type left after `n` explicit arguments, with placeholder variables for them"""
        for k in range(n):
            _, ty = self.insert_implicits(ctx, Global("?"), ty, pending, span)
            pi = self.ev.force(ty)
            if not isinstance(pi, VPi) or pi.plicity is not Plicity.EXPLICIT:
                return None
            ty = self.ev.instantiate(pi.codomain, vvar(ctx.depth + k))
        return ty

    def _independent(self, ctx: Context, ty: Value, n: int) -> bool:
        body = self.ev.quote(ctx.depth + n, ty, unfold=False)
        return not any(mentions(body, k) for k in range(n))

    def _unify_result_early(self, ctx: Context, fn_ty: Value, n: int, expected: Value) -> None:
        """Use the expected type before the arguments when the result cannot depend on them"""
        ty = fn_ty
        for k in range(n):
            pi = self.ev.force(ty)
            if not isinstance(pi, VPi) or pi.plicity is not Plicity.EXPLICIT:
                return
            ty = self.ev.instantiate(pi.codomain, vvar(ctx.depth + k))
        if _implicit_pi(self.ev.force(ty)) or _implicit_pi(self.ev.force(expected)):
            return
        if not self._independent(ctx, ty, n):
            return
        snap = self.metas.snapshot()
        try:
            self.unifier.unify(ctx.depth, ty, expected)
        except UnifyError:
            self.metas.restore(snap)

    def _plausible(self, ctx: Context, d: GlobalDef, n: int, expected: Optional[Value]) -> bool:
        """Could this overload produce the expected type from `n` arguments"""
        if expected is None:
            return True
        snap = self.metas.snapshot()
        try:
            pending = _Pending()
            ty = self._result_after(ctx, self.ev.eval((), d.type), n, pending, NO_SPAN)
            if ty is None:
                return False
            if not _implicit_pi(self.ev.force(expected)):
                _, ty = self.insert_implicits(ctx, Global(d.name), ty, pending, NO_SPAN)
            if not self._independent(ctx, ty, n):
                return True
            self.unifier.unify(ctx.depth, ty, expected)
            return True
        except UnifyError:
            return False
        finally:
            self.metas.restore(snap)

    def _overloaded(
        self, ctx: Context, sigma: Multiplicity, candidates: List[GlobalDef], args, expected, span: Span
    ) -> Inferred:
        positional = sum(1 for name, _ in args if name is None)
        passing = [d for d in candidates if self._plausible(ctx, d, positional, expected)]
        if len(passing) == 1:
            return self.apply_global(ctx, sigma, passing[0], args, expected, span)
        first: Optional[QttError] = None
        for d in passing or candidates:
            state = self.save()
            try:
                return self.apply_global(ctx, sigma, d, args, expected, span)
            except QttError as e:
                self.restore(state)
                logger.debug(f"Overload {d.name} rejected: {e.detail}")
                first = first or e
        assert first is not None
        raise first

    # -------------------------------------------------------------- literals

    def _literal(self, ctx: Context, sigma: Multiplicity, value: int, expected: Value, span: Span) -> Checked:
        forced = self.ev.force(expected)
        empty = UsageVector.empty()
        if isinstance(forced, VCon) and forced.name == "Int":
            return Lit(value), empty
        if isinstance(forced, VCon) and self.printer.display(forced.name) == "Nat" and not forced.args:
            zero = self.ev.constructor(forced.name, "Z")
            succ = self.ev.constructor(forced.name, "S")
            term: Term = Global(zero)
            for _ in range(value):
                term = App(Global(succ), term)
            return term, empty
        if self.is_unsolved(forced):
            self.expect(ctx, VCon("Int"), expected, span)
            return Lit(value), empty
        for d in self.globals.lookup("fromInteger"):
            state = self.save()
            try:
                arg = SFromInteger(value, span)
                term, _, usage = self.apply_global(ctx, sigma, d, [(None, arg)], expected, span)
                return term, usage
            except QttError:
                self.restore(state)
        raise TypeMismatch(f"the literal {value} cannot have type {self.show(ctx, expected)}", span)

    def _tuple_surface(self, ctx: Context, t: STerm, expected: Value) -> STerm:
        """Rewrite (a, b) and () to the pair and unit types or values"""
        if isinstance(expected, VType):
            as_type = True
        elif self.is_unsolved(expected) and isinstance(t, STuple):
            state = self.save()
            try:
                _, ty, _ = self.infer(ctx, ZERO, t.items[0])
                as_type = isinstance(self.ev.force(ty), VType)
            except QttError:
                as_type = False
            finally:
                self.restore(state)
        else:
            as_type = False
        if isinstance(t, SUnit):
            return SVar("Unit" if as_type else "MkUnit", t.span)
        return tuple_surface(t.items, "Pair" if as_type else "MkPair", t.span)

    # ----------------------------------------------------------------- holes

    def _hole(self, ctx: Context, t: SHole, expected: Value) -> Checked:
        name = t.name
        k = 1
        while name in self.hole_names:
            name = f"{t.name}_{k}"
            k += 1
        id = self.metas.fresh(MetaKind.HOLE, ctx, expected, t.span, hole=name)
        self.holes.append(Hole(name, id, ctx, expected, t.span))
        self.hole_names.add(name)
        logger.debug(f"Hole ?{name} at {t.span}")
        return InsertedMeta(id, ctx.mask()), UsageVector.empty().with_holes()

    # ------------------------------------------------------------------ case

    def check_case(
        self,
        ctx: Context,
        sigma: Multiplicity,
        scrut: Term,
        scrut_ty: Value,
        scrut_usage: UsageVector,
        alts: Sequence[SAlt],
        expected: Value,
        span: Span,
    ) -> Checked:
        arms: List[Arm] = [(a.pattern, self._rhs(sigma, a.rhs), a.span) for a in alts]
        return self._case(ctx, sigma, scrut, scrut_ty, scrut_usage, arms, expected, span)

    def _rhs(self, sigma: Multiplicity, rhs: STerm) -> BodyFn:
        return lambda ctx, expected: self.check(ctx, sigma, rhs, expected)

    def _case(
        self,
        ctx: Context,
        sigma: Multiplicity,
        scrut: Term,
        scrut_ty: Value,
        scrut_usage: UsageVector,
        arms: Sequence[Arm],
        expected: Value,
        span: Span,
    ) -> Checked:
        level = ctx.depth - 1 - scrut.index if isinstance(scrut, Var) else None
        if level is None and occurs(scrut, self.ev.quote(ctx.depth, expected, unfold=False)):
            raise CannotRefineNonVariableScrutinee(
                f"the expected type depends on {self.show_term(ctx, scrut)}", span
            )
        rho = OMEGA
        if sigma is not ZERO and any(ctx.entry(lv).mult is ONE for lv, _ in scrut_usage.items()):
            rho = ONE
        scrut_v = self.ev.eval(ctx.env, scrut)
        alts: List[Alt] = []
        default: Optional[Term] = None
        usages: List[UsageVector] = []
        for pattern, body_fn, arm_span in arms:
            pattern = self.pattern_surface(pattern, scrut_ty)
            start = len(self.holes)
            if self.is_var_pattern(pattern):
                if default is not None:
                    self.warn("OverlappingCatchAll", "a later catch-all alternative is never reached", arm_span)
                    continue
                name = pattern.name if isinstance(pattern, SVar) else "_"
                inner = ctx.define(name, rho, scrut_ty, scrut_v, visible=name != "_")
                body, usage = body_fn(inner, expected)
                usage = self.close_binder(inner, ctx.depth, usage, sigma, start, arm_span)
                default = Let(name, rho, self.ev.quote(ctx.depth, scrut_ty), scrut, body)
            elif literal_value(pattern) is not None:
                value = literal_value(pattern)
                self.expect(ctx, literal_type(value), scrut_ty, arm_span)
                inner, exp = ctx, expected
                if level is not None and ctx.entry(level).bound:
                    inner, [exp] = ctx.refine(self.ev, level, VLit(value), [expected])
                body, usage = body_fn(inner, exp)
                alts.append(Alt(None, value, (), (), body))
            else:
                alt, usage = self._constructor_arm(
                    ctx, sigma, rho, level, scrut_ty, pattern, body_fn, expected, arm_span
                )
                alts.append(alt)
            usages.append(usage)
        combined = self.join_branches(ctx, sigma, usages, span)
        return Case(scrut, rho, tuple(alts), default), scrut_usage + combined

    def _constructor_arm(
        self,
        ctx: Context,
        sigma: Multiplicity,
        rho: Multiplicity,
        level: Optional[int],
        scrut_ty: Value,
        pattern: STerm,
        body_fn: BodyFn,
        expected: Value,
        span: Span,
    ) -> Tuple[Alt, UsageVector]:
        head, args = app_spine(pattern)
        con = self.resolve_constructor(head, scrut_ty, span)
        start = len(self.holes)
        inner, levels, subs, ret = self.open_constructor(ctx, con, args, rho, span)
        inner, [exp] = self.refine_by(inner, ret, scrut_ty, [expected], con, span)
        if level is not None and inner.entry(level).bound:
            inner, [exp] = inner.refine(self.ev, level, self.constructor_value(inner, con, levels), [exp])
        nested = [(lv, sub) for lv, sub in zip(levels, subs) if sub is not None]
        body, usage = self._nested(inner, sigma, nested, body_fn, exp, span)
        for lv in reversed(levels):
            usage = self.close_binder(inner, lv, usage, sigma, start, span)
        names = tuple(inner.entry(lv).name for lv in levels)
        return Alt(con.name, None, names, con.field_mults, body), usage

    def _nested(
        self,
        ctx: Context,
        sigma: Multiplicity,
        nested: List[Tuple[int, STerm]],
        body_fn: BodyFn,
        expected: Value,
        span: Span,
    ) -> Checked:
        """Single-alternative cases for the nested sub-patterns of one arm"""
        if not nested:
            return body_fn(ctx, expected)
        (level, pattern), rest = nested[0], nested[1:]
        usage = self.use(ctx, sigma, level, span)

        def inner(c: Context, e: Value) -> Checked:
            return self._nested(c, sigma, rest, body_fn, e, span)

        scrut = Var(ctx.depth - 1 - level)
        arms: List[Arm] = [(pattern, inner, span)]
        return self._case(ctx, sigma, scrut, ctx.entry(level).type, usage, arms, expected, span)

    def join_branches(
        self, ctx: Context, sigma: Multiplicity, usages: List[UsageVector], span: Span
    ) -> UsageVector:
        """Branches agree on every 0/1 variable; ω variables take the largest use"""
        if not usages:
            return UsageVector.empty()
        levels = sorted({lv for u in usages for lv in u.counts})
        if sigma is not ZERO:
            for lv in levels:
                entry = ctx.entry(lv)
                if entry.mult is OMEGA:
                    continue
                counts = {u.get(lv) for u in usages if not u.has_holes}
                if len(counts) > 1:
                    raise LinearityError(entry.name, 2 if OMEGA in counts else 0, span)
        counts = {lv: reduce(lub, (u.get(lv) for u in usages)) for lv in levels}
        return UsageVector(counts, any(u.has_holes for u in usages))

    # ------------------------------------------------------ constructor helpers

    def resolve_constructor(self, head: STerm, scrut_ty: Value, span: Span) -> GlobalDef:
        if not isinstance(head, SVar):
            raise TypeMismatch(f"{show_surface(head)} is not a valid pattern", span)
        candidates = [d for d in self.globals.lookup(head.name) if d.is_constructor]
        if not candidates:
            raise UnknownName(f"{head.name} is not a constructor", span)
        family = self.ev.force(scrut_ty)
        if len(candidates) > 1 and isinstance(family, VCon):
            for d in candidates:
                if d.family == family.name:
                    return d
        return candidates[0]

    def open_constructor(
        self, ctx: Context, con: GlobalDef, args, scale: Multiplicity, span: Span
    ) -> Tuple[Context, List[int], List[Optional[STerm]], Value]:
        """
        Bind one context entry per constructor field. Sub-patterns that are
        not plain variables are returned for the caller to match on.
        """
        positional = [a for name, a in args if name is None]
        named = {name: a for name, a in args if name is not None}
        explicit = sum(1 for p in con.field_plicities if p is Plicity.EXPLICIT)
        if len(positional) != explicit:
            raise PatternArityMismatch(
                f"{con.display} expects {explicit} arguments but was given {len(positional)}", span
            )
        ty = self.ev.eval((), con.type)
        levels: List[int] = []
        subs: List[Optional[STerm]] = []
        given = iter(positional)
        for fname, fmult, fplicity in zip(con.field_names, con.field_mults, con.field_plicities):
            pi = self.ev.force(ty)
            assert isinstance(pi, VPi)
            sub = next(given) if fplicity is Plicity.EXPLICIT else named.pop(fname, None)
            name, visible, sub = self._field_binder(sub, fname)
            level = ctx.depth
            ctx = ctx.bind(name, mul(scale, fmult), pi.domain, visible=visible, span=span)
            levels.append(level)
            subs.append(sub)
            ty = self.ev.instantiate(pi.codomain, vvar(level))
        if named:
            raise PatternArityMismatch(f"{con.display} has no implicit argument {next(iter(named))}", span)
        return ctx, levels, subs, ty

    def _field_binder(self, sub: Optional[STerm], fname: str) -> Tuple[str, bool, Optional[STerm]]:
        if sub is None:
            return fname, False, None
        if isinstance(sub, SWildcard):
            return "_", False, None
        if self.is_var_pattern(sub):
            assert isinstance(sub, SVar)
            return sub.name, True, None
        return f"_{fname}", False, sub

    def refine_by(
        self, ctx: Context, ret: Value, scrut_ty: Value, extra: List[Value], con: GlobalDef, span: Span
    ) -> Tuple[Context, List[Value]]:
        """Unify a constructor's result type with the scrutinee type and apply the refinement"""
        u = self.unifier.refining(set(ctx.bound_levels()))
        try:
            u.unify(ctx.depth, ret, scrut_ty)
        except UnifyError as e:
            raise TypeMismatch(
                f"{con.display} cannot construct a value of {self.show(ctx, scrut_ty)}", span
            ) from e
        return self.apply_sigma(ctx, u.sigma, extra)

    def apply_sigma(
        self, ctx: Context, sigma: Dict[int, Value], extra: List[Value]
    ) -> Tuple[Context, List[Value]]:
        items = list(sigma.items())
        values = [v for _, v in items]
        for i, (level, _) in enumerate(items):
            ctx, out = ctx.refine(self.ev, level, values[i], list(extra) + values[i + 1:])
            extra = out[: len(extra)]
            values[i + 1:] = out[len(extra):]
        return ctx, list(extra)

    def constructor_value(self, ctx: Context, con: GlobalDef, levels: List[int]) -> Value:
        args = tuple(
            SpineArg(ctx.entry(lv).value, m, p)
            for lv, m, p in zip(levels, con.field_mults, con.field_plicities)
        )
        return VCon(con.name, args)

    def pattern_surface(self, p: STerm, scrut_ty: Optional[Value] = None) -> STerm:
        """Tuples, unit and Nat literals as ordinary constructor patterns"""
        if isinstance(p, STuple):
            return tuple_surface([self.pattern_surface(i) for i in p.items], "MkPair", p.span)
        if isinstance(p, SUnit):
            return SVar("MkUnit", p.span)
        if isinstance(p, SList):
            acc: STerm = SVar("Nil", p.span)
            for item in reversed(p.items):
                acc = binop("::", self.pattern_surface(item), acc, p.span)
            return acc
        if isinstance(p, (SFromInteger, SIntLit)) and scrut_ty is not None:
            forced = self.ev.force(scrut_ty)
            if isinstance(forced, VCon) and self.printer.display(forced.name) == "Nat":
                pat: STerm = SVar("Z", p.span)
                for _ in range(p.value):
                    pat = SApp(SVar("S", p.span), pat, None, p.span)
                return pat
        if isinstance(p, SApp):
            head, args = app_spine(p)
            rebuilt = head
            for name, a in args:
                rebuilt = SApp(rebuilt, self.pattern_surface(a), name, p.span)
            return rebuilt
        return p


# ----------------------------------------------------------------- helpers


def _implicit_pi(v: Value) -> bool:
    return isinstance(v, VPi) and v.plicity.is_implicit


def tuple_surface(items: Sequence[STerm], con: str, span: Span) -> STerm:
    acc = items[-1]
    for item in reversed(items[:-1]):
        acc = mk_app(SVar(con, span), item, acc, span=span)
    return acc


def literal_value(p: STerm):
    if isinstance(p, (SFromInteger, SIntLit)):
        return p.value
    if isinstance(p, SStrLit):
        return p.value
    if isinstance(p, SCharLit):
        return Char(p.value)
    return None


def literal_type(value) -> Value:
    if isinstance(value, Char):
        return VCon("Char")
    if isinstance(value, str):
        return VCon("String")
    return VCon("Int")

