"""
🖨️ Pretty Printer - Core Terms and Hole Reports
Readable rendering of elaborated terms, with names restored from the context
"""

from __future__ import annotations

from typing import TYPE_CHECKING, List, Optional, Sequence

from .multiplicity import OMEGA, ONE, ZERO, remaining
from .syntax import OPERATORS, Plicity
from .terms import (
    App, Case, Char, Global, Globals, InsertedMeta, Lam, Let, Lit, Meta, Pi, Term, TypeU, Var,
    app_spine, mentions,
)

if TYPE_CHECKING:
    from .context import Context, MetaStore
    from .elaborator import Hole
    from .evaluator import Evaluator

_MULT_PREFIX = {ZERO: "0 ", ONE: "1 ", OMEGA: ""}


def show_literal(value) -> str:
    if isinstance(value, Char):
        esc = {"\n": "\\n", "'": "\\'", "\\": "\\\\"}.get(value.value, value.value)
        return f"'{esc}'"
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'
    return str(value)


class Printer:
    """Core term printer; implicit arguments are left out, as in source code"""

    def __init__(self, globals: Globals, metas: Optional["MetaStore"] = None):
        self.globals = globals
        self.metas = metas

    def term(self, t: Term, names: Sequence[str] = ()) -> str:
        return self._go(t, list(names), 0)

    def value(self, ev: "Evaluator", ctx: "Context", v) -> str:
        return self.term(ev.quote(ctx.depth, v), ctx.names)

    def display(self, name: str) -> str:
        d = self.globals.defs.get(name)
        return d.display if d is not None else name.split("#")[0]

    # -------------------------------------------------------------- rendering

    def _go(self, t: Term, names: List[str], prec: int) -> str:
        if isinstance(t, Var):
            i = len(names) - 1 - t.index
            return names[i] if 0 <= i < len(names) else f"#{t.index}"
        if isinstance(t, Global):
            return self._global(t.name)
        if isinstance(t, (Meta, InsertedMeta)):
            return self._meta(t.id)
        if isinstance(t, TypeU):
            return "Type"
        if isinstance(t, Lit):
            return show_literal(t.value)
        if isinstance(t, Pi):
            return self._paren(prec > 0, self._pi(t, names))
        if isinstance(t, Lam):
            name = _binder(t.name, mentions(t.body, 0))
            body = self._go(t.body, names + [name], 0)
            return self._paren(prec > 0, f"\\{name} => {body}")
        if isinstance(t, Let):
            value = self._go(t.value, names, 0)
            body = self._go(t.body, names + [t.name], 0)
            return self._paren(prec > 0, f"let {t.name} = {value} in {body}")
        if isinstance(t, Case):
            return self._paren(prec > 0, self._case(t, names))
        if isinstance(t, App):
            return self._app(t, names, prec)
        return repr(t)

    def _paren(self, needed: bool, s: str) -> str:
        return f"({s})" if needed else s

    def _global(self, name: str) -> str:
        shown = self.display(name)
        if shown in ("Unit", "MkUnit"):
            return "()"
        if shown == "Nil":
            return "[]"
        if shown in OPERATORS:
            return f"({shown})"
        return shown

    def _meta(self, id: int) -> str:
        if self.metas is not None and id in self.metas.entries:
            hole = self.metas.entries[id].hole
            if hole is not None:
                return f"?{hole}"
        return f"?_{id}"

    def _pi(self, t: Pi, names: List[str]) -> str:
        dependent = mentions(t.codomain, 0)
        name = _binder(t.name, dependent)
        cod = self._go(t.codomain, names + [name], 0)
        if t.plicity is Plicity.EXPLICIT and t.mult is OMEGA and not dependent:
            return f"{self._go(t.domain, names, 1)} -> {cod}"
        mult = _MULT_PREFIX[t.mult]
        dom = self._go(t.domain, names, 0)
        if t.plicity is Plicity.EXPLICIT:
            return f"({mult}{name} : {dom}) -> {cod}"
        if t.plicity is Plicity.AUTO:
            return f"{{auto {mult}{name} : {dom}}} -> {cod}"
        if t.plicity is Plicity.DEFAULT and t.default is not None:
            default = self._go(t.default, names, 10)
            return f"{{default {default} {mult}{name} : {dom}}} -> {cod}"
        return f"{{{mult}{name} : {dom}}} -> {cod}"

    def _case(self, t: Case, names: List[str]) -> str:
        scrut = self._go(t.scrutinee, names, 0)
        arms = []
        for alt in t.alts:
            if alt.con is None:
                lhs = show_literal(alt.lit)
                body = self._go(alt.body, names, 0)
            else:
                fields = [n if n else "_" for n in alt.names]
                shown = [f for f, m in zip(fields, alt.mults) if m is not ZERO]
                lhs = " ".join([self._global(alt.con)] + shown)
                body = self._go(alt.body, names + fields, 0)
            arms.append(f"{lhs} => {body}")
        if t.default is not None:
            arms.append(f"_ => {self._go(t.default, names, 0)}")
        return f"case {scrut} of {{ {'; '.join(arms)} }}"

    def _app(self, t: App, names: List[str], prec: int) -> str:
        head, apps = app_spine(t)
        args = [a.arg for a in apps if a.plicity is Plicity.EXPLICIT]
        if isinstance(head, Global):
            shown = self.display(head.name)
            if shown in ("Pair", "MkPair") and len(args) == 2:
                return "(" + ", ".join(self._go(a, names, 0) for a in self._tuple(args)) + ")"
            if shown in OPERATORS and len(args) == 2:
                level, assoc = OPERATORS[shown]
                left = self._go(args[0], names, level + (0 if assoc == "left" else 1))
                right = self._go(args[1], names, level + (0 if assoc == "right" else 1))
                return self._paren(prec > level, f"{left} {shown} {right}")
        if not args:
            return self._go(head, names, prec)
        parts = [self._go(head, names, 10)] + [self._go(a, names, 10) for a in args]
        return self._paren(prec >= 9, " ".join(parts))

    def _tuple(self, args: List[Term]) -> List[Term]:
        first, rest = args
        head, apps = app_spine(rest)
        inner = [a.arg for a in apps if a.plicity is Plicity.EXPLICIT]
        if isinstance(head, Global) and self.display(head.name) in ("Pair", "MkPair") and len(inner) == 2:
            return [first] + self._tuple(inner)
        return [first, rest]

    # ------------------------------------------------------------ hole report

    def hole_report(self, ev: "Evaluator", hole: "Hole", width: int = 30) -> str:
        """Context entries with remaining multiplicities, a rule, then the goal"""
        ctx = hole.ctx
        names = ctx.names
        lines = []
        for level in shown_levels(ctx):
            entry = ctx.entry(level)
            left = remaining(entry.mult, hole.used.get(level, ZERO)).display or " "
            ty = self.term(ev.quote(ctx.depth, entry.type), names)
            lines.append(f" {left} {entry.name} : {ty}")
        lines.append("-" * width)
        goal = self.term(ev.quote(ctx.depth, hole.goal), names)
        lines.append(f"{hole.name} : {goal}")
        return "\n".join(lines)


def shown_levels(ctx: "Context") -> List[int]:
    """Visible entries that a later entry does not shadow"""
    seen = set()
    levels = []
    for level in range(ctx.depth - 1, -1, -1):
        e = ctx.entry(level)
        if not e.visible or e.name == "_" or e.name in seen:
            continue
        seen.add(e.name)
        levels.append(level)
    return sorted(levels, key=ctx.display_order)


def _binder(name: str, used: bool) -> str:
    if used and (not name or name == "_"):
        return "x"
    return name or "_"
