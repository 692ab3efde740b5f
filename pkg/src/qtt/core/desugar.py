"""
🍬 Desugaring - Purely Syntactic Passes
do-notation to >>=, list/integer literals, and auto-binding of unbound implicits
"""

from __future__ import annotations

import logging
from dataclasses import replace
from typing import Callable, Container, List, Set

from .errors import EmptyDoBlock
from .multiplicity import ZERO
from .syntax import (
    DoBind, DoExpr, DoLet, Plicity, SApp, SCase, SDo, SFromInteger, SIntLit, SLam,
    SLet, SList, SPi, STerm, STuple, SVar, SWildcard, app_spine, binop, is_lower,
)

logger = logging.getLogger(__name__)

BIND = ">>="


def map_children(t: STerm, f: Callable[[STerm], STerm]) -> STerm:
    """Rebuild `t` with `f` applied to each immediate subterm"""
    if isinstance(t, SApp):
        return replace(t, fn=f(t.fn), arg=f(t.arg))
    if isinstance(t, SLam):
        return replace(t, body=f(t.body), pattern=t.pattern)
    if isinstance(t, SPi):
        return replace(
            t, domain=f(t.domain), codomain=f(t.codomain),
            default=f(t.default) if t.default is not None else None,
        )
    if isinstance(t, SLet):
        return replace(t, value=f(t.value), body=f(t.body))
    if isinstance(t, SCase):
        return replace(t, scrutinee=f(t.scrutinee), alts=[replace(a, rhs=f(a.rhs)) for a in t.alts])
    if isinstance(t, SDo):
        stmts = []
        for s in t.stmts:
            stmts.append(replace(s, expr=f(s.expr)))
        return replace(t, stmts=stmts)
    if isinstance(t, SList):
        return replace(t, items=[f(i) for i in t.items])
    if isinstance(t, STuple):
        return replace(t, items=[f(i) for i in t.items])
    return t


# ----------------------------------------------------------------- do-blocks


def desugar_do(t: STerm) -> STerm:
    """Replace every do-block in `t` by applications of the name >>="""
    t = map_children(t, desugar_do)
    if isinstance(t, SDo):
        return _do_block(t)
    return t


def _do_block(block: SDo) -> STerm:
    stmts = block.stmts
    if not stmts:
        raise EmptyDoBlock("a do-block needs at least one statement", block.span)
    last = stmts[-1]
    if not isinstance(last, DoExpr):
        raise EmptyDoBlock("the last statement in a do-block must be an expression", last.span)
    acc: STerm = last.expr
    for stmt in reversed(stmts[:-1]):
        if isinstance(stmt, DoExpr):
            cont = SLam("_", acc, None, stmt.span)
            acc = binop(BIND, stmt.expr, cont, stmt.span)
        elif isinstance(stmt, DoBind):
            pat = stmt.pattern
            if isinstance(pat, SVar) and is_lower(pat.name):
                cont = SLam(pat.name, acc, None, stmt.span)
            elif isinstance(pat, SWildcard):
                cont = SLam("_", acc, None, stmt.span)
            else:
                cont = SLam("_pat", acc, pat, stmt.span)
            acc = binop(BIND, stmt.expr, cont, stmt.span)
        else:
            assert isinstance(stmt, DoLet)
            acc = SLet(stmt.pattern, stmt.expr, acc, stmt.span)
    return acc


# ----------------------------------------------------------------- literals


def desugar_literals(t: STerm) -> STerm:
    t = map_children(t, desugar_literals)
    if isinstance(t, SIntLit):
        return SFromInteger(t.value, t.span)
    if isinstance(t, SList):
        acc: STerm = SVar("Nil", t.span)
        for item in reversed(t.items):
            acc = binop("::", item, acc, t.span)
        return acc
    return t


def desugar(t: STerm) -> STerm:
    return desugar_literals(desugar_do(t))


# ---------------------------------------------------------- unbound implicits


def free_lowercase(t: STerm, known: Container[str] = frozenset()) -> List[str]:
    """Unbound lowercase names of `t` in first-use order"""
    found: List[str] = []
    _collect(t, set(), known, found)
    return found


def _pattern_vars(p: STerm, known: Container[str]) -> Set[str]:
    names: Set[str] = set()
    head, args = app_spine(p)
    if isinstance(head, SVar) and not args and is_lower(head.name) and head.name not in known:
        names.add(head.name)
    for _, a in args:
        names |= _pattern_vars(a, known)
    if isinstance(p, STuple):
        for i in p.items:
            names |= _pattern_vars(i, known)
    return names


def _collect(t: STerm, bound: Set[str], known: Container[str], out: List[str]) -> None:
    if isinstance(t, SVar):
        if is_lower(t.name) and t.name not in bound and t.name not in known and t.name not in out:
            out.append(t.name)
        return
    if isinstance(t, SPi):
        if t.default is not None:
            _collect(t.default, bound, known, out)
        _collect(t.domain, bound, known, out)
        inner = bound | {t.name} if t.name else bound
        _collect(t.codomain, inner, known, out)
        return
    if isinstance(t, SLam):
        inner = set(bound)
        inner.add(t.name)
        if t.pattern is not None:
            inner |= _pattern_vars(t.pattern, known)
        _collect(t.body, inner, known, out)
        return
    if isinstance(t, SLet):
        _collect(t.value, bound, known, out)
        _collect(t.body, bound | _pattern_vars(t.pattern, known), known, out)
        return
    if isinstance(t, SCase):
        _collect(t.scrutinee, bound, known, out)
        for a in t.alts:
            _collect(a.rhs, bound | _pattern_vars(a.pattern, known), known, out)
        return
    if isinstance(t, SDo):
        inner = set(bound)
        for s in t.stmts:
            _collect(s.expr, inner, known, out)
            if not isinstance(s, DoExpr):
                inner |= _pattern_vars(s.pattern, known)
        return
    if isinstance(t, SApp):
        _collect(t.fn, bound, known, out)
        _collect(t.arg, bound, known, out)
        return
    if isinstance(t, (SList, STuple)):
        for i in t.items:
            _collect(i, bound, known, out)


def autobind_implicits(sig: STerm, known: Container[str] = frozenset()) -> STerm:
    """Wrap `sig` in `{0 x : _}` binders for each unbound lowercase name"""
    names = free_lowercase(sig, known)
    if names:
        logger.debug(f"Auto-binding implicits: {names}")
    for name in reversed(names):
        sig = SPi(name, ZERO, Plicity.IMPLICIT, SWildcard(sig.span), sig, None, sig.span)
    return sig

