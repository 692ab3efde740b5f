"""
🔗 Unification - Pattern Unification over Values
Miller-pattern meta solving with pruning, glued global heads and index refinement for case splits
"""

from __future__ import annotations

import logging
from dataclasses import replace
from typing import Callable, Dict, List, Optional, Set, Tuple

from .context import MetaKind, MetaStore
from .errors import NonPatternSpine, OccursCheck, UnifyError
from .evaluator import Evaluator
from .multiplicity import OMEGA
from .syntax import Plicity
from .terms import (
    Alt, App, Case, InsertedMeta, Lam, Let, Meta, Pi, Term, Var, app_spine, mentions, rename,
)
from .values import (
    HCase, HMeta, HVar, Spine, Value, VCon, VGlobal, VLam, VLit, VNeutral, VPi, VType, is_var, vvar,
)

logger = logging.getLogger(__name__)


class _OutOfScope(Exception):
    """A solution candidate mentions a variable the meta cannot see"""


class Unifier:
    """
    Structural unification after weak-head forcing.

    In refine mode the bound variables at the levels in `refinable` may be
    assigned; assignments are collected in `sigma` and applied by the caller
    through `Context.refine`.
    """

    def __init__(self, ev: Evaluator, metas: MetaStore, solve: bool = True):
        self.ev = ev
        self.metas = metas
        self.solving = solve
        self.refinable: Set[int] = set()
        self.sigma: Dict[int, Value] = {}

    def refining(self, levels: Set[int]) -> "Unifier":
        """A unifier that may also assign the given bound variables"""
        u = Unifier(self.ev, self.metas, self.solving)
        u.refinable = set(levels)
        return u

    def convertible(self, depth: int, a: Value, b: Value) -> bool:
        """Definitional equality; never solves metas"""
        checker = Unifier(self.ev, self.metas, solve=False)
        try:
            checker.unify(depth, a, b)
            return True
        except UnifyError:
            return False

    # ------------------------------------------------------------------ main

    def unify(self, depth: int, a: Value, b: Value) -> None:
        a = self._flex(a)
        b = self._flex(b)

        ma, mb = _meta_app(a), _meta_app(b)
        if ma is not None and mb is not None and ma[0] == mb[0]:
            self._unify_spines(depth, ma[1], mb[1])
            return
        if ma is not None and mb is not None and self._solvable(ma[0]) and self._solvable(mb[0]):
            # the younger meta is solved in terms of the older one
            if ma[0] < mb[0]:
                ma, mb, a, b = mb, ma, b, a
            try:
                self._solve(depth, ma[0], ma[1], b)
            except UnifyError:
                self._solve(depth, mb[0], mb[1], a)
            return
        if ma is not None and self._solvable(ma[0]):
            self._solve(depth, ma[0], ma[1], b)
            return
        if mb is not None and self._solvable(mb[0]):
            self._solve(depth, mb[0], mb[1], a)
            return

        if self.refinable and self._try_assign(depth, a, b):
            return

        if isinstance(a, VGlobal) and isinstance(b, VGlobal) and a.name == b.name and len(a.spine) == len(b.spine):
            snap = self.metas.snapshot()
            sigma = dict(self.sigma)
            try:
                self._unify_spines(depth, a.spine, b.spine)
                return
            except UnifyError:
                self.metas.restore(snap)
                self.sigma = sigma

        fa = self.ev.force(a)
        fb = self.ev.force(b)
        if fa is not a or fb is not b:
            self.unify(depth, fa, fb)
            return
        self._unify_rigid(depth, a, b)

    def _unify_rigid(self, depth: int, a: Value, b: Value) -> None:
        if isinstance(a, VType) and isinstance(b, VType):
            return
        if isinstance(a, VLit) and isinstance(b, VLit):
            if type(a.value) is type(b.value) and a.value == b.value:
                return
            raise UnifyError(f"literal {a.value!r} is not {b.value!r}")
        if isinstance(a, VCon) and isinstance(b, VCon):
            if a.name != b.name or len(a.args) != len(b.args):
                raise UnifyError(f"{_head_name(a)} is not {_head_name(b)}")
            self._unify_spines(depth, a.args, b.args)
            return
        if isinstance(a, VPi) and isinstance(b, VPi):
            if a.mult is not b.mult:
                raise UnifyError(f"binder multiplicity {a.mult} is not {b.mult}")
            if a.plicity is not b.plicity:
                raise UnifyError("binder plicity differs")
            self.unify(depth, a.domain, b.domain)
            x = vvar(depth)
            self.unify(depth + 1, self.ev.instantiate(a.codomain, x), self.ev.instantiate(b.codomain, x))
            return
        if isinstance(a, VLam) or isinstance(b, VLam):
            x = vvar(depth)
            self.unify(depth + 1, self._apply_fresh(a, x), self._apply_fresh(b, x))
            return
        if isinstance(a, VGlobal) or isinstance(b, VGlobal):
            # stuck on a case split: compare the unfolded case expressions
            ua = self.ev.unfold(a, saturated_only=False) if isinstance(a, VGlobal) else a
            ub = self.ev.unfold(b, saturated_only=False) if isinstance(b, VGlobal) else b
            if ua is None or ub is None or (ua is a and ub is b):
                raise UnifyError(f"{_head_name(a)} is not {_head_name(b)}")
            self.unify(depth, ua, ub)
            return
        if isinstance(a, VNeutral) and isinstance(b, VNeutral):
            ha, hb = a.head, b.head
            if isinstance(ha, HVar) and isinstance(hb, HVar) and ha.level == hb.level:
                self._unify_spines(depth, a.spine, b.spine)
                return
            if isinstance(ha, HMeta) and isinstance(hb, HMeta) and ha.id == hb.id:
                self._unify_spines(depth, a.spine, b.spine)
                return
            if isinstance(ha, HCase) and isinstance(hb, HCase):
                if self.ev.quote(depth, VNeutral(ha)) != self.ev.quote(depth, VNeutral(hb)):
                    raise UnifyError("stuck case expressions differ")
                self._unify_spines(depth, a.spine, b.spine)
                return
        raise UnifyError(f"{_head_name(a)} is not {_head_name(b)}")

    def _apply_fresh(self, v: Value, x: Value) -> Value:
        if isinstance(v, VLam):
            return self.ev.instantiate(v.body, x)
        return self.ev.apply(v, x)

    def _unify_spines(self, depth: int, sa: Spine, sb: Spine) -> None:
        if len(sa) != len(sb):
            raise UnifyError("applications differ in length")
        for x, y in zip(sa, sb):
            self.unify(depth, x.value, y.value)

    def _flex(self, v: Value) -> Value:
        """Follow solved metas and pending refinements, leaving globals folded"""
        while True:
            if isinstance(v, VNeutral) and isinstance(v.head, HVar) and v.head.level in self.sigma:
                v = self.ev.apply_spine(self.sigma[v.head.level], v.spine)
                continue
            forced = self.ev.force(v, unfold=False)
            if forced is v:
                return v
            v = forced

    # ---------------------------------------------------------------- refine

    def _try_assign(self, depth: int, a: Value, b: Value) -> bool:
        la, lb = is_var(a), is_var(b)
        if la is not None and la == lb:
            return True
        ra = la is not None and la in self.refinable
        rb = lb is not None and lb in self.refinable
        if ra and rb:
            # keep the older variable, define the younger one
            if la > lb:
                self._assign(depth, la, b)
            else:
                self._assign(depth, lb, a)
            return True
        if ra:
            self._assign(depth, la, b)
            return True
        if rb:
            self._assign(depth, lb, a)
            return True
        return False

    def _assign(self, depth: int, level: int, v: Value) -> None:
        if mentions(self.ev.quote(depth, v, unfold=False), depth - 1 - level):
            raise UnifyError("a variable cannot be refined to a term that contains it")
        logger.debug(f"Refined level {level}")
        self.sigma[level] = v

    # ----------------------------------------------------------------- metas

    def _solvable(self, id: int) -> bool:
        return self.solving and self.metas.kind(id) is not MetaKind.HOLE

    def _solve(self, depth: int, id: int, spine: Spine, rhs: Value) -> None:
        """?id spine := rhs, abstracting over the spine's distinct variables"""
        positions: Dict[int, int] = {}
        duplicated: Set[int] = set()
        pattern = True
        for j, arg in enumerate(spine):
            level = is_var(self._flex(arg.value))
            if level is None:
                pattern = False
                continue
            if level in positions:
                duplicated.add(level)
            positions[level] = j
        for level in duplicated:
            del positions[level]
            pattern = False

        n = len(spine)
        term = self.ev.quote(depth, rhs, unfold=False)
        if _mentions_meta(term, id):
            raise OccursCheck(f"?{id} occurs in its own solution")
        term = self._prune(depth, term, lambda level: level in positions)

        def remap(index: int) -> int:
            level = depth - 1 - index
            if level not in positions:
                raise _OutOfScope()
            return n - 1 - positions[level]

        try:
            body = rename(term, remap)
        except _OutOfScope:
            if not pattern:
                raise NonPatternSpine(f"?{id} is applied to arguments that are not distinct variables")
            raise UnifyError(f"?{id} cannot depend on a variable outside its scope")
        for j in reversed(range(n)):
            body = Lam(f"x{j}", spine[j].mult, spine[j].plicity, body)
        self.metas.solve(id, self.ev.eval((), body))

    def _prune(self, depth: int, t: Term, visible: Callable[[int], bool]) -> Term:
        """
        Unsolved metas applied to variables the solution cannot mention are
        re-solved with fresh metas over the variables that remain.
        """

        def go(t: Term, local: int) -> Term:
            head, apps = app_spine(t)
            if isinstance(head, Meta) and apps and self.metas.solution(head.id) is None:
                keep = []
                for a in apps:
                    if not isinstance(a.arg, Var):
                        return t
                    i = a.arg.index
                    keep.append(i < local or visible(depth - 1 - (i - local)))
                if all(keep):
                    return t
                fresh = self._narrow(head.id, keep)
                if fresh is None:
                    return t
                out: Term = Meta(fresh)
                for a, k in zip(apps, keep):
                    if k:
                        out = App(out, a.arg, a.mult, a.plicity)
                return out
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
                alts = tuple(
                    Alt(a.con, a.lit, a.names, a.mults, go(a.body, local + a.arity)) for a in t.alts
                )
                default = go(t.default, local) if t.default is not None else None
                return Case(go(t.scrutinee, local), t.scrut_mult, alts, default, t.motive)
            return t

        return go(t, 0)

    def _narrow(self, id: int, keep: List[bool]) -> Optional[int]:
        """Solve ?id with a fresh meta that ignores the dropped arguments"""
        entry = self.metas.entries[id]
        levels = entry.ctx.bound_levels()
        if len(levels) != len(keep):
            return None
        ctx = entry.ctx
        for level, k in zip(levels, keep):
            if not k:
                ctx = ctx.with_entry(level, replace(ctx.entry(level), bound=False))
        fresh = self.metas.fresh(entry.kind, ctx, entry.type, entry.span, entry.default, entry.hole)
        n = len(keep)
        body: Term = Meta(fresh)
        for j, k in enumerate(keep):
            if k:
                body = App(body, Var(n - 1 - j))
        for j in reversed(range(n)):
            body = Lam(f"x{j}", OMEGA, Plicity.EXPLICIT, body)
        self.metas.solve(id, self.ev.eval((), body))
        logger.debug(f"Pruned ?{id} to ?{fresh}")
        return fresh


def _meta_app(v: Value) -> Optional[Tuple[int, Spine]]:
    if isinstance(v, VNeutral) and isinstance(v.head, HMeta):
        return v.head.id, v.spine
    return None


def _mentions_meta(t: Term, id: int) -> bool:
    if isinstance(t, (Meta, InsertedMeta)):
        return t.id == id
    if isinstance(t, App):
        return _mentions_meta(t.fn, id) or _mentions_meta(t.arg, id)
    if isinstance(t, Pi):
        return (
            _mentions_meta(t.domain, id)
            or _mentions_meta(t.codomain, id)
            or (t.default is not None and _mentions_meta(t.default, id))
        )
    if isinstance(t, Lam):
        return _mentions_meta(t.body, id)
    if isinstance(t, Let):
        return _mentions_meta(t.type, id) or _mentions_meta(t.value, id) or _mentions_meta(t.body, id)
    if isinstance(t, Case):
        return (
            _mentions_meta(t.scrutinee, id)
            or any(_mentions_meta(a.body, id) for a in t.alts)
            or (t.default is not None and _mentions_meta(t.default, id))
        )
    return False


def _head_name(v: Value) -> str:
    if isinstance(v, (VCon, VGlobal)):
        return v.name.split("#")[0]
    if isinstance(v, VPi):
        return "a function type"
    if isinstance(v, VLam):
        return "a lambda"
    if isinstance(v, VType):
        return "Type"
    if isinstance(v, VLit):
        return repr(v.value)
    return "a stuck term"
