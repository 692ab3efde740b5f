"""
🔍 Auto Search - Resolving auto-Implicit Arguments
Depth-bounded proof search: local hypotheses first, then constructors in declaration order
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, List, Optional

from .context import Context, MetaKind
from .errors import AutoSearchFailure, Span, UnifyError
from .syntax import Plicity
from .terms import App, InsertedMeta, Term, Var
from .values import Value, VCon, VPi

if TYPE_CHECKING:
    from .elaborator import Elaborator

logger = logging.getLogger(__name__)


class AutoSearch:
    """Finds a term of a goal type for an unsolved auto meta"""

    def __init__(self, elab: "Elaborator", max_depth: int = 8):
        self.elab = elab
        self.max_depth = max_depth

    def resolve(self, ctx: Context, meta_term: Term, goal: Value, span: Span) -> None:
        ev = self.elab.ev
        found = self.search(ctx, goal, self.max_depth)
        if found is None:
            raise AutoSearchFailure(self.elab.show(ctx, goal), span)
        self.elab.unifier.unify(ctx.depth, ev.eval(ctx.env, meta_term), ev.eval(ctx.env, found))

    def search(self, ctx: Context, goal: Value, depth: int) -> Optional[Term]:
        if depth <= 0:
            return None
        ev, metas, unifier = self.elab.ev, self.elab.metas, self.elab.unifier
        goal = ev.force(goal)

        for level in range(ctx.depth - 1, -1, -1):
            snap = metas.snapshot()
            try:
                unifier.unify(ctx.depth, ctx.entry(level).type, goal)
                logger.debug(f"Auto search used local {ctx.entry(level).name}")
                return Var(ctx.depth - 1 - level)
            except UnifyError:
                metas.restore(snap)

        if not isinstance(goal, VCon) or goal.name not in self.elab.globals:
            return None
        family = self.elab.globals.get(goal.name)
        for con in family.constructors:
            snap = metas.snapshot()
            try:
                found = self._try_constructor(ctx, con, goal, depth)
            except UnifyError:
                found = None
            if found is not None:
                logger.debug(f"Auto search used constructor {con}")
                return found
            metas.restore(snap)
        return None

    def _try_constructor(self, ctx: Context, con: str, goal: Value, depth: int) -> Optional[Term]:
        ev, metas = self.elab.ev, self.elab.metas
        d = self.elab.globals.get(con)
        term: Term = self.elab.global_term(con)
        ty = ev.eval((), d.type)
        subgoals: List[tuple] = []
        while True:
            ty = ev.force(ty)
            if not isinstance(ty, VPi):
                break
            wanted = ty.plicity in (Plicity.EXPLICIT, Plicity.AUTO)
            id = metas.fresh(MetaKind.AUTO if wanted else MetaKind.IMPLICIT, ctx, ty.domain)
            arg = InsertedMeta(id, ctx.mask())
            if wanted:
                subgoals.append((arg, ty.domain))
            term = App(term, arg, ty.mult, ty.plicity)
            ty = ev.instantiate(ty.codomain, ev.eval(ctx.env, arg))
        self.elab.unifier.unify(ctx.depth, ty, goal)
        for arg, sub in subgoals:
            found = self.search(ctx, sub, depth - 1)
            if found is None:
                return None
            self.elab.unifier.unify(ctx.depth, ev.eval(ctx.env, arg), ev.eval(ctx.env, found))
        return term
