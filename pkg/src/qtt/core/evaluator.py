"""
⚙️ Evaluator - Normalization by Evaluation
eval / force / quote over the core language, with lazily unfolded global applications
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Any, Optional, Sequence, Tuple

from .multiplicity import OMEGA, Multiplicity
from .primitives import PURE_PRIMITIVES
from .syntax import Plicity
from .terms import (
    Alt, App, Case, Char, DefKind, Global, Globals, InsertedMeta, Lam, Let, Lit, Meta, Pi,
    Term, TypeU, Var, app_spine,
)
from .values import (
    Closure, HCase, HMeta, HVar, SpineArg, Spine, Value, VCon, VGlobal, VLam, VLit, VNeutral,
    VPi, VType, vmeta, vvar,
)

if TYPE_CHECKING:
    from .context import MetaStore

logger = logging.getLogger(__name__)

Env = Tuple[Value, ...]


def identity_env(depth: int) -> Env:
    return tuple(vvar(i) for i in range(depth))


class Evaluator:
    """Evaluation and read-back against a global table and a meta store"""

    def __init__(self, globals: Globals, metas: "MetaStore"):
        self.globals = globals
        self.metas = metas

    # ------------------------------------------------------------------ eval

    def eval(self, env: Env, t: Term) -> Value:
        if isinstance(t, Var):
            return env[len(env) - 1 - t.index]
        if isinstance(t, App):
            return self.apply(self.eval(env, t.fn), self.eval(env, t.arg), t.mult, t.plicity)
        if isinstance(t, Global):
            return self.global_value(t.name)
        if isinstance(t, Lam):
            return VLam(t.name, t.mult, t.plicity, Closure(env, t.body))
        if isinstance(t, Pi):
            default = self.eval(env, t.default) if t.default is not None else None
            return VPi(t.name, t.mult, t.plicity, self.eval(env, t.domain), Closure(env, t.codomain), default)
        if isinstance(t, Case):
            return self.eval_case(env, t)
        if isinstance(t, Let):
            return self.eval(env + (self.eval(env, t.value),), t.body)
        if isinstance(t, Lit):
            return VLit(t.value)
        if isinstance(t, TypeU):
            return VType()
        if isinstance(t, Meta):
            return self.meta_value(t.id)
        if isinstance(t, InsertedMeta):
            v = self.meta_value(t.id)
            for level, bound in enumerate(t.mask):
                if bound:
                    v = self.apply(v, env[level])
            return v
        raise TypeError(f"cannot evaluate {t!r}")

    def global_value(self, name: str) -> Value:
        d = self.globals.get(name)
        if d.kind in (DefKind.CONSTRUCTOR, DefKind.TYPE_CONSTRUCTOR):
            return VCon(name)
        return VGlobal(name)

    def meta_value(self, id: int) -> Value:
        sol = self.metas.solution(id)
        return sol if sol is not None else vmeta(id)

    def instantiate(self, c: Closure, v: Value) -> Value:
        return self.eval(c.env + (v,), c.body)

    def apply(
        self, f: Value, a: Value, mult: Multiplicity = OMEGA, plicity: Plicity = Plicity.EXPLICIT
    ) -> Value:
        if isinstance(f, VLam):
            return self.instantiate(f.body, a)
        arg = SpineArg(a, mult, plicity)
        if isinstance(f, VGlobal):
            return VGlobal(f.name, f.spine + (arg,))
        if isinstance(f, VCon):
            return VCon(f.name, f.args + (arg,))
        if isinstance(f, VNeutral):
            if isinstance(f.head, HMeta):
                sol = self.metas.solution(f.head.id)
                if sol is not None:
                    return self.apply(self.apply_spine(sol, f.spine), a, mult, plicity)
            return VNeutral(f.head, f.spine + (arg,))
        raise TypeError(f"cannot apply {f!r}")

    def apply_spine(self, f: Value, spine: Spine) -> Value:
        for a in spine:
            f = self.apply(f, a.value, a.mult, a.plicity)
        return f

    # ------------------------------------------------------------------ case

    def eval_case(self, env: Env, c: Case) -> Value:
        s = self.force(self.eval(env, c.scrutinee))
        r = self.match(s, env, c)
        if r is None:
            return VNeutral(HCase(s, env, c))
        return r

    def match(self, s: Value, env: Env, c: Case) -> Optional[Value]:
        if isinstance(s, VCon):
            for alt in c.alts:
                if alt.con == s.name:
                    if len(s.args) != alt.arity:
                        return None
                    return self.eval(env + tuple(a.value for a in s.args), alt.body)
        elif isinstance(s, VLit):
            for alt in c.alts:
                if alt.lit is not None and type(alt.lit) is type(s.value) and alt.lit == s.value:
                    return self.eval(env, alt.body)
        else:
            return None
        if c.default is not None:
            return self.eval(env, c.default)
        return None

    # ----------------------------------------------------------------- force

    def force(self, v: Value, unfold: bool = True) -> Value:
        """Weak head: follow solved metas, resume cases, unfold globals that make progress"""
        while True:
            if isinstance(v, VNeutral):
                head = v.head
                if isinstance(head, HMeta):
                    sol = self.metas.solution(head.id)
                    if sol is None:
                        return v
                    v = self.apply_spine(sol, v.spine)
                    continue
                if isinstance(head, HCase):
                    s = self.force(head.scrutinee, unfold)
                    r = self.match(s, head.env, head.case)
                    if r is None:
                        return v
                    v = self.apply_spine(r, v.spine)
                    continue
                return v
            if isinstance(v, VGlobal) and unfold:
                u = self.unfold(v)
                if u is None:
                    return v
                v = u
                continue
            return v

    def unfold(self, v: VGlobal, saturated_only: bool = True) -> Optional[Value]:
        """
        One unfolding of a global application. With `saturated_only` the result is
        returned only when it reduces past the definition's case tree.
        """
        d = self.globals.defs.get(v.name)
        if d is None:
            return None
        if d.kind is DefKind.PRIMITIVE:
            return self.reduce_primitive(v)
        if d.kind is not DefKind.FUNCTION or d.body is None:
            return None
        if saturated_only and len(v.spine) < d.arity:
            return None
        r = self.apply_spine(self.eval((), d.body), v.spine)
        if not saturated_only:
            return r
        r = self.force(r)
        if isinstance(r, VNeutral) and isinstance(r.head, HCase):
            return None
        return r

    def reduce_primitive(self, v: VGlobal) -> Optional[Value]:
        prim = PURE_PRIMITIVES.get(v.name)
        if prim is None or len(v.spine) != prim.arity:
            return None
        args = []
        for a in v.spine:
            x = self.force(a.value)
            if not isinstance(x, VLit):
                return None
            args.append(x.value)
        return self.reify(prim.fn(*args))

    def reify(self, x: Any) -> Value:
        if isinstance(x, bool):
            return VCon(self.constructor("Bool", "True" if x else "False"))
        if isinstance(x, list):
            nil = self.constructor("List", "Nil")
            cons = self.constructor("List", "::")
            elem = VCon("Char")
            acc: Value = self.con(nil, elem)
            for item in reversed(x):
                acc = self.con(cons, elem, self.reify(item), acc)
            return acc
        return VLit(x)

    def constructor(self, family: str, display: str) -> str:
        for name in self.globals.get(family).constructors:
            if self.globals.get(name).display == display:
                return name
        raise KeyError(f"{family} has no constructor {display}")

    def con(self, name: str, *fields: Value) -> Value:
        d = self.globals.get(name)
        args = tuple(
            SpineArg(f, m, p) for f, m, p in zip(fields, d.field_mults, d.field_plicities)
        )
        return VCon(name, args)

    # ----------------------------------------------------------------- quote

    def quote(self, depth: int, v: Value, unfold: bool = True) -> Term:
        """Read back a value; with `unfold=False` global applications stay folded"""
        v = self.force(v, unfold)
        if isinstance(v, VCon):
            return self._quote_spine(depth, Global(v.name), v.args, unfold)
        if isinstance(v, VGlobal):
            return self._quote_spine(depth, Global(v.name), v.spine, unfold)
        if isinstance(v, VNeutral):
            return self._quote_spine(depth, self._quote_head(depth, v.head, unfold), v.spine, unfold)
        if isinstance(v, VPi):
            default = self.quote(depth, v.default, unfold) if v.default is not None else None
            cod = self.quote(depth + 1, self.instantiate(v.codomain, vvar(depth)), unfold)
            return Pi(v.name, v.mult, v.plicity, self.quote(depth, v.domain, unfold), cod, default)
        if isinstance(v, VLam):
            body = self.quote(depth + 1, self.instantiate(v.body, vvar(depth)), unfold)
            return Lam(v.name, v.mult, v.plicity, body)
        if isinstance(v, VLit):
            return Lit(v.value)
        if isinstance(v, VType):
            return TypeU()
        raise TypeError(f"cannot quote {v!r}")

    def _quote_spine(self, depth: int, head: Term, spine: Spine, unfold: bool = True) -> Term:
        for a in spine:
            head = App(head, self.quote(depth, a.value, unfold), a.mult, a.plicity)
        return head

    def _quote_head(self, depth: int, h, unfold: bool = True) -> Term:
        if isinstance(h, HVar):
            return Var(depth - h.level - 1)
        if isinstance(h, HMeta):
            return Meta(h.id)
        assert isinstance(h, HCase)
        c = h.case
        alts = []
        for alt in c.alts:
            fresh = tuple(vvar(depth + i) for i in range(alt.arity))
            body = self.quote(depth + alt.arity, self.eval(h.env + fresh, alt.body), unfold)
            alts.append(Alt(alt.con, alt.lit, alt.names, alt.mults, body))
        default = self.quote(depth, self.eval(h.env, c.default), unfold) if c.default is not None else None
        return Case(self.quote(depth, h.scrutinee, unfold), c.scrut_mult, tuple(alts), default)

    def normalize(self, env: Env, t: Term) -> Term:
        return self.quote(len(env), self.eval(env, t))

    # ------------------------------------------------------------------ zonk

    def zonk(self, depth: int, t: Term) -> Term:
        """Replace solved metas by their solutions, leaving the rest of `t` alone"""
        if isinstance(t, (InsertedMeta, Meta)):
            if self.metas.solution(t.id) is None:
                return t
            return self.quote(depth, self.eval(identity_env(depth), t), unfold=False)
        if isinstance(t, App):
            head, _ = app_spine(t)
            if isinstance(head, (Meta, InsertedMeta)) and self.metas.solution(head.id) is not None:
                return self.quote(depth, self.eval(identity_env(depth), t), unfold=False)
            return App(self.zonk(depth, t.fn), self.zonk(depth, t.arg), t.mult, t.plicity)
        if isinstance(t, Pi):
            default = self.zonk(depth, t.default) if t.default is not None else None
            return Pi(t.name, t.mult, t.plicity, self.zonk(depth, t.domain), self.zonk(depth + 1, t.codomain), default)
        if isinstance(t, Lam):
            return Lam(t.name, t.mult, t.plicity, self.zonk(depth + 1, t.body))
        if isinstance(t, Let):
            return Let(
                t.name, t.mult, self.zonk(depth, t.type), self.zonk(depth, t.value),
                self.zonk(depth + 1, t.body),
            )
        if isinstance(t, Case):
            alts = tuple(
                Alt(a.con, a.lit, a.names, a.mults, self.zonk(depth + a.arity, a.body)) for a in t.alts
            )
            default = self.zonk(depth, t.default) if t.default is not None else None
            motive = self.zonk(depth + 1, t.motive) if t.motive is not None else None
            return Case(self.zonk(depth, t.scrutinee), t.scrut_mult, alts, default, motive)
        return t

    def eval_closed(self, t: Term) -> Value:
        return self.eval((), t)

    def spine_values(self, spine: Sequence[SpineArg]) -> Tuple[Value, ...]:
        return tuple(a.value for a in spine)
