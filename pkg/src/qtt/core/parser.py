"""
📖 Parser - Source Text to Surface Syntax
A lark Earley grammar behind a layout post-lexer, with fixed-fixity operator resolution
"""

from __future__ import annotations

import ast
import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterator, List, Optional, Union

import lark as L

from .errors import ParseError, Span
from .multiplicity import Multiplicity
from .syntax import (
    OPERATORS, DClause, DData, DImport, DoBind, DoExpr, DoLet, DPrimitive, DSig, Plicity, SAlt,
    SApp, SCase, SCharLit, SDo, SHole, SIntLit, SLam, SLet, SList, SourceModule, SPi, SStrLit,
    STerm, STuple, SType, SUnit, SVar, SWildcard, SWorld, app_spine, binop, mk_app,
)

logger = logging.getLogger(__name__)

OPENERS = frozenset({"where", "of", "do", "let"})
LITERAL_TOKENS = frozenset({"STRING", "CHAR", "NAME", "HOLE", "INT"})
VIRTUAL_NAMES = {"_VSEMI": "new statement", "_VLBRACE": "start of block", "_VRBRACE": "end of block"}


# ------------------------------------------------------------------ layout


@dataclass
class _Block:
    column: int
    kind: str
    depth: int


def _is(tok: L.Token, text: str) -> bool:
    return tok.type not in LITERAL_TOKENS and tok.value == text


def _virtual(kind: str, tok: L.Token) -> L.Token:
    return L.Token.new_borrow_pos(kind, "", tok)


class Layout:
    """
    Indentation to virtual braces. `where`, `of`, `do` and `let` open a block
    at the column of the next token; a line starting at a block's column
    begins a new item and a line starting left of it closes the block.
    """

    always_accept = ("SEMI",)

    def process(self, stream: Iterator[L.Token]) -> Iterator[L.Token]:
        blocks: List[_Block] = []
        opening: Optional[str] = None
        depth = 0
        last_line = 0
        last: Optional[L.Token] = None

        for tok in stream:
            last = tok
            if not blocks:
                blocks.append(_Block(tok.column, "top", 0))
            fresh_line = last_line > 0 and tok.line > last_line

            if opening is not None:
                if not fresh_line or tok.column > blocks[-1].column:
                    yield _virtual("_VLBRACE", tok)
                    blocks.append(_Block(tok.column, opening, depth))
                    fresh_line = False
                else:
                    yield _virtual("_VLBRACE", tok)
                    yield _virtual("_VRBRACE", tok)
                opening = None

            closed_let = False
            if fresh_line:
                while len(blocks) > 1 and tok.column < blocks[-1].column:
                    closed_let |= blocks.pop().kind == "let"
                    yield _virtual("_VRBRACE", tok)
                if not _is(tok, "in") and tok.column == blocks[-1].column:
                    yield _virtual("_VSEMI", tok)

            if _is(tok, "in") and not closed_let:
                lets = [i for i, b in enumerate(blocks) if b.kind == "let" and b.depth == depth]
                if lets:
                    while len(blocks) > lets[-1]:
                        blocks.pop()
                        yield _virtual("_VRBRACE", tok)
            elif tok.value in (")", "]", "}") and tok.type not in LITERAL_TOKENS:
                while len(blocks) > 1 and depth > 0 and blocks[-1].depth >= depth:
                    blocks.pop()
                    yield _virtual("_VRBRACE", tok)
                depth = max(depth - 1, 0)
            elif _is(tok, ",") and depth > 0:
                while len(blocks) > 1 and blocks[-1].depth >= depth:
                    blocks.pop()
                    yield _virtual("_VRBRACE", tok)

            last_line = tok.end_line or tok.line
            if tok.type == "SEMI":
                yield _virtual("_VSEMI", tok)
                continue
            yield tok
            if tok.value in ("(", "[", "{") and tok.type not in LITERAL_TOKENS:
                depth += 1
            elif tok.type not in LITERAL_TOKENS and tok.value in OPENERS:
                opening = tok.value

        if last is None:
            return
        if opening is not None:
            yield _virtual("_VLBRACE", last)
            yield _virtual("_VRBRACE", last)
        while len(blocks) > 1:
            blocks.pop()
            yield _virtual("_VRBRACE", last)


# -------------------------------------------------------------- transformer


@dataclass
class _Chain:
    items: list


@dataclass
class _Named:
    name: str
    value: STerm


@dataclass
class _Header:
    name: str


def _span(meta) -> Span:
    if meta is None or getattr(meta, "empty", True):
        return Span()
    return Span(meta.line, meta.column, meta.end_line, meta.end_column)


def _tok_span(tok: L.Token) -> Span:
    return Span(tok.line or 0, tok.column or 0, tok.end_line or 0, tok.end_column or 0)


def resolve_operators(items: list, span: Span) -> STerm:
    """Fold `a op b op c ...` using the fixed operator table"""
    operands: List[STerm] = [items[0]]
    ops: List[str] = []

    def reduce() -> None:
        op = ops.pop()
        right = operands.pop()
        left = operands.pop()
        operands.append(binop(op, left, right, span))

    for i in range(1, len(items), 2):
        op, rhs = str(items[i]), items[i + 1]
        level, assoc = OPERATORS[op]
        while ops:
            top_level, top_assoc = OPERATORS[ops[-1]]
            if top_level > level or (top_level == level and assoc == "left"):
                reduce()
            elif top_level == level and assoc == "none":
                raise ParseError(f"{ops[-1]} and {op} cannot be chained without parentheses", span)
            else:
                break
        ops.append(op)
        operands.append(rhs)
    while ops:
        reduce()
    return operands[0]


def _mult(tok: Optional[L.Token]) -> Optional[Multiplicity]:
    if tok is None:
        return None
    if tok.value not in ("0", "1"):
        raise ParseError(f"multiplicity must be 0 or 1, not {tok.value}", _tok_span(tok))
    return Multiplicity.from_literal(tok.value)


@L.v_args(meta=True)
class ToSurface(L.Transformer):
    """Builds surface syntax from the parse tree"""

    # --------------------------------------------------------- declarations

    def module(self, meta, children):
        return list(children)

    def term(self, meta, children):
        return children[0]

    def module_header(self, meta, children):
        return _Header(str(children[0]))

    def import_decl(self, meta, children):
        return DImport(str(children[0]), _span(meta))

    def primitive(self, meta, children):
        names, ty = children
        return DPrimitive(names, ty, _span(meta))

    def sig(self, meta, children):
        names, ty = children
        return DSig(names, ty, _span(meta))

    def clause(self, meta, children):
        lhs, rhs = children
        return DClause(_resolve(lhs), rhs, _span(meta))

    def data_long(self, meta, children):
        name, ty, *cons = children
        return DData(name, ty, list(cons), span=_span(meta))

    def data_abstract(self, meta, children):
        name, ty = children
        return DData(name, ty, None, span=_span(meta))

    def data_short(self, meta, children):
        span = _span(meta)
        tokens = [c for c in children if isinstance(c, L.Token)]
        alts = [c for c in children if not isinstance(c, L.Token)]
        name, params = str(tokens[0]), [str(t) for t in tokens[1:]]
        family: STerm = SType(span)
        for _ in params:
            family = SPi(None, None, Plicity.EXPLICIT, SType(span), family, None, span)
        result = mk_app(SVar(name, span), *[SVar(p, span) for p in params], span=span)
        cons = []
        for alt in alts:
            head, args = app_spine(_resolve(alt))
            if not isinstance(head, SVar) or any(n is not None for n, _ in args):
                raise ParseError("a constructor alternative must be a name applied to types", span)
            ty = result
            for _, arg in reversed(args):
                ty = SPi(None, None, Plicity.EXPLICIT, arg, ty, None, span)
            cons.append(DSig([head.name], ty, head.span))
        return DData(name, family, cons, True, params, span)

    def names(self, meta, children):
        return list(children)

    def name(self, meta, children):
        return str(children[0])

    # ----------------------------------------------------------- binders

    def pi(self, meta, children):
        binders, codomain = children
        for b in reversed(binders):
            codomain = SPi(b.name, b.mult, b.plicity, b.domain, codomain, b.default, _span(meta))
        return codomain

    def arrow(self, meta, children):
        domain, codomain = children
        return SPi(None, None, Plicity.EXPLICIT, _resolve(domain), codomain, None, _span(meta))

    def _binder(self, meta, children, plicity: Plicity, default: Optional[STerm] = None):
        mult = None
        if isinstance(children[0], L.Token) and children[0].type == "INT":
            mult = _mult(children[0])
            children = children[1:]
        names, domain = children
        span = _span(meta)
        # placeholder codomains; `pi` rebuilds the chain
        return [SPi(n, mult, plicity, domain, SType(span), default, span) for n in names]

    def explicit_binder(self, meta, children):
        return self._binder(meta, children, Plicity.EXPLICIT)

    def implicit_binder(self, meta, children):
        return self._binder(meta, children, Plicity.IMPLICIT)

    def auto_binder(self, meta, children):
        return self._binder(meta, children, Plicity.AUTO)

    def default_binder(self, meta, children):
        default, *rest = children
        return self._binder(meta, rest, Plicity.DEFAULT, default)

    def bnames(self, meta, children):
        return list(children)

    def bname(self, meta, children):
        tok = children[0]
        return None if tok.type == "WILD" else str(tok)

    # -------------------------------------------------------- expressions

    def opexpr(self, meta, children):
        chain = children[0]
        items = chain.items if isinstance(chain, _Chain) else [chain]
        if len(children) == 3:
            items = items + [children[1], children[2]]
        return resolve_operators(items, _span(meta)) if len(items) > 1 else items[0]

    def chain(self, meta, children):
        return _Chain(list(children)) if len(children) > 1 else children[0]

    def lam(self, meta, children):
        *params, body = children
        span = _span(meta)
        for name, pattern in reversed(params):
            body = SLam(name, body, pattern, span)
        return body

    def lam_param(self, meta, children):
        item = children[0]
        if isinstance(item, L.Token):
            return ("_" if item.type == "WILD" else str(item)), None
        if isinstance(item, SVar):
            return item.name, None
        return "_pat", item

    def let_expr(self, meta, children):
        *binds, body = children
        for pattern, value in reversed(binds):
            body = SLet(pattern, value, body, _span(meta))
        return body

    def let_bind(self, meta, children):
        pattern, value = children
        return _resolve(pattern), value

    def case_expr(self, meta, children):
        scrutinee, *alts = children
        return SCase(scrutinee, alts, _span(meta))

    def alt(self, meta, children):
        pattern, rhs = children
        return SAlt(_resolve(pattern), rhs, _span(meta))

    def do_expr(self, meta, children):
        return SDo(list(children), _span(meta))

    def do_bind(self, meta, children):
        pattern, expr = children
        return DoBind(_resolve(pattern), expr, _span(meta))

    def do_let(self, meta, children):
        if len(children) > 1:
            raise ParseError("a do-block let binds one pattern per statement", _span(meta))
        pattern, value = children[0]
        return DoLet(pattern, value, _span(meta))

    def do_stmt(self, meta, children):
        return DoExpr(children[0], _span(meta))

    def app(self, meta, children):
        head, *args = children
        span = _span(meta)
        for a in args:
            if isinstance(a, _Named):
                head = SApp(head, a.value, a.name, span)
            else:
                head = SApp(head, a, None, span)
        return head

    def named_arg(self, meta, children):
        name, value = children
        return _Named(str(name), value)

    def named_pun(self, meta, children):
        return _Named(str(children[0]), SVar(str(children[0]), _span(meta)))

    # -------------------------------------------------------------- atoms

    def var(self, meta, children):
        return SVar(str(children[0]), _span(meta))

    def wildcard(self, meta, children):
        return SWildcard(_span(meta))

    def hole(self, meta, children):
        return SHole(str(children[0])[1:], _span(meta))

    def int_lit(self, meta, children):
        return SIntLit(int(children[0]), _span(meta))

    def str_lit(self, meta, children):
        return SStrLit(ast.literal_eval(str(children[0])), _span(meta))

    def char_lit(self, meta, children):
        return SCharLit(ast.literal_eval(str(children[0])), _span(meta))

    def type_u(self, meta, children):
        return SType(_span(meta))

    def world(self, meta, children):
        return SWorld(_span(meta))

    def unit(self, meta, children):
        return SUnit(_span(meta))

    def paren(self, meta, children):
        return children[0]

    def tuple(self, meta, children):
        return STuple(list(children), _span(meta))

    def op_var(self, meta, children):
        return SVar(str(children[0]), _span(meta))

    def list_lit(self, meta, children):
        return SList(list(children), _span(meta))


def _resolve(t: Union[STerm, _Chain]) -> STerm:
    if isinstance(t, _Chain):
        return resolve_operators(t.items, Span())
    return t


# ------------------------------------------------------------------ entry


@lru_cache(maxsize=1)
def _lark() -> L.Lark:
    return L.Lark.open(
        "grammar.lark",
        rel_to=__file__,
        parser="earley",
        lexer="basic",
        postlex=Layout(),
        propagate_positions=True,
        maybe_placeholders=False,
        start=["module", "term"],
    )


def _describe(names) -> List[str]:
    out = []
    for n in names or ():
        if n in VIRTUAL_NAMES:
            out.append(VIRTUAL_NAMES[n])
            continue
        try:
            pattern = _lark().get_terminal(n).pattern
            out.append(repr(pattern.value) if pattern.type == "str" else n)
        except KeyError:
            out.append(n)
    return out


def _parse(text: str, start: str):
    try:
        tree = _lark().parse(text, start=start)
        return ToSurface().transform(tree)
    except L.exceptions.UnexpectedToken as e:
        tok = e.token
        shown = "end of input" if tok.type == "$END" else VIRTUAL_NAMES.get(tok.type, repr(str(tok)))
        raise ParseError(f"unexpected {shown}", Span(e.line, e.column), _describe(e.expected)) from None
    except L.exceptions.UnexpectedCharacters as e:
        raise ParseError(f"unexpected character {e.char!r}", Span(e.line, e.column), _describe(e.allowed)) from None
    except L.exceptions.UnexpectedEOF as e:
        raise ParseError("unexpected end of input", Span(), _describe(e.expected)) from None
    except L.exceptions.VisitError as e:
        if isinstance(e.orig_exc, ParseError):
            raise e.orig_exc from None
        raise


def parse_module(text: str, name: Optional[str] = None, file: Optional[str] = None) -> SourceModule:
    try:
        items = _parse(text, "module")
    except ParseError as e:
        raise e.located(file=file)
    header = next((i.name for i in items if isinstance(i, _Header)), None)
    declarations = [i for i in items if not isinstance(i, _Header)]
    imports = [d.module for d in declarations if isinstance(d, DImport)]
    if header is None:
        header = name or (Path(file).stem if file else "Main")
    logger.debug(f"Parsed module {header}: {len(declarations)} declarations")
    return SourceModule(header, imports, declarations, file)


def parse_term(text: str) -> STerm:
    return _parse(text, "term")


# -------------------------------------------------------------------- REPL


@dataclass
class TypeOf:
    term: STerm
    text: str


@dataclass
class Eval:
    term: STerm
    text: str


@dataclass
class Load:
    path: str


@dataclass
class Exec:
    name: str


@dataclass
class Holes:
    pass


@dataclass
class Quit:
    pass


ReplCommand = Union[TypeOf, Eval, Load, Exec, Holes, Quit]


def parse_repl_input(text: str) -> ReplCommand:
    text = text.strip()
    if not text.startswith(":"):
        return Eval(parse_term(text), text)
    command, _, rest = text.partition(" ")
    rest = rest.strip()
    if command in (":q", ":quit"):
        return Quit()
    if command == ":holes":
        return Holes()
    if command in (":t", ":type"):
        return TypeOf(parse_term(rest), rest)
    if command in (":l", ":load"):
        if not rest:
            raise ParseError(":load needs a file name", Span(1, len(command) + 1))
        return Load(rest)
    if command in (":exec", ":x"):
        if not rest:
            raise ParseError(":exec needs a name", Span(1, len(command) + 1))
        return Exec(rest)
    raise ParseError(
        f"unknown command {command}", Span(1, 1), [":t", ":holes", ":load", ":exec", ":q"]
    )
