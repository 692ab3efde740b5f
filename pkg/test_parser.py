"""
🧪 QTT - Parser Tests
Layout, operators, desugaring and REPL commands
"""

import sys
import unittest
from pathlib import Path

# Add src to path for testing
sys.path.insert(0, str(Path(__file__).parent / "src"))

from qtt.core.desugar import autobind_implicits, desugar, desugar_do, free_lowercase  # noqa: E402
from qtt.core.errors import EmptyDoBlock, ParseError  # noqa: E402
from qtt.core.multiplicity import ONE, ZERO  # noqa: E402
from qtt.core.parser import (  # noqa: E402
    Eval, Exec, Holes, Load, Quit, TypeOf, parse_module, parse_repl_input, parse_term,
)
from qtt.core.syntax import (  # noqa: E402
    DClause, DData, DImport, DoBind, DoExpr, DPrimitive, DSig, Plicity, SApp, SDo, SFromInteger,
    SHole, SLam, SPi, SVar, binop, show_term,
)


def v(name):
    return SVar(name)


def app(f, *args):
    for a in args:
        f = SApp(f, a)
    return f


class TestModules(unittest.TestCase):

    def test_declaration_kinds(self):
        """Test declaration kinds"""
        module = parse_module(
            "module Demo\n"
            "import Prelude\n"
            "\n"
            "data Nat = Z | S Nat\n"
            "\n"
            "data Vect : Nat -> Type -> Type where\n"
            "     Nil  : Vect Z a\n"
            "     (::) : a -> Vect k a -> Vect (S k) a\n"
            "\n"
            "%primitive prim__addInt : Int -> Int -> Int\n"
            "\n"
            "plus : Nat -> Nat -> Nat\n"
            "plus Z m = m\n"
            "plus (S k) m = S (plus k m)\n"
        )
        self.assertEqual(module.name, "Demo")
        self.assertEqual(module.imports, ["Prelude"])
        kinds = [type(d) for d in module.declarations]
        self.assertEqual(kinds, [DImport, DData, DData, DPrimitive, DSig, DClause, DClause])
        short, long_form = module.declarations[1], module.declarations[2]
        self.assertTrue(short.short_form)
        self.assertEqual([c.names for c in long_form.constructors], [["Nil"], ["::"]])

    def test_abstract_data_has_no_constructors(self):
        """Test abstract data has no constructors"""
        (decl,) = parse_module("data Ref : Type -> Type").declarations
        self.assertIsInstance(decl, DData)
        self.assertIsNone(decl.constructors)

    def test_module_name_defaults_to_file_stem(self):
        """Test module name defaults to file stem"""
        self.assertEqual(parse_module("x : Int", file="dir/rle.qtt").name, "rle")

    def test_continuation_lines_join_the_declaration(self):
        """Test continuation lines join the declaration"""
        module = parse_module(
            "f : Int ->\n"
            "    Int\n"
            "f x\n"
            "    = x\n"
        )
        self.assertEqual([type(d) for d in module.declarations], [DSig, DClause])

    def test_comments_are_ignored(self):
        """Test comments are ignored"""
        module = parse_module("-- a comment\nx : Int -- trailing\n")
        self.assertEqual(len(module.declarations), 1)

    def test_syntax_error_has_location(self):
        """Test syntax error has location"""
        with self.assertRaises(ParseError) as cm:
            parse_module("f : Int ->\n", file="bad.qtt")
        self.assertEqual(cm.exception.kind, "SyntaxError")
        self.assertTrue(cm.exception.format().startswith("bad.qtt:"))


class TestOperators(unittest.TestCase):

    def test_cons_is_right_associative(self):
        """Test cons is right associative"""
        self.assertEqual(parse_term("x :: y :: zs"), binop("::", v("x"), binop("::", v("y"), v("zs"))))

    def test_plus_is_left_associative(self):
        """Test plus is left associative"""
        self.assertEqual(parse_term("a + b + c"), binop("+", binop("+", v("a"), v("b")), v("c")))

    def test_application_binds_tighter(self):
        """Test application binds tighter"""
        self.assertEqual(parse_term("f x + g y"), binop("+", app(v("f"), v("x")), app(v("g"), v("y"))))

    def test_res_pair_cannot_chain(self):
        """Test res pair cannot chain"""
        with self.assertRaises(ParseError):
            parse_term("a # b # c")

    def test_operator_section_is_a_name(self):
        """Test operator section is a name"""
        self.assertEqual(parse_term("(>>=)"), v(">>="))


class TestBinders(unittest.TestCase):

    def test_multiplicity_annotations(self):
        """Test multiplicity annotations"""
        t = parse_term("(1 x : a) -> (0 n : Nat) -> b")
        self.assertIsInstance(t, SPi)
        self.assertEqual((t.name, t.mult, t.plicity), ("x", ONE, Plicity.EXPLICIT))
        self.assertEqual((t.codomain.name, t.codomain.mult), ("n", ZERO))

    def test_unannotated_arrow(self):
        """Test unannotated arrow"""
        t = parse_term("a -> List a")
        self.assertEqual((t.name, t.mult, t.plicity), (None, None, Plicity.EXPLICIT))

    def test_implicit_kinds(self):
        """Test implicit kinds"""
        auto = parse_term("{auto _ : HasCard st} -> Int")
        self.assertIs(auto.plicity, Plicity.AUTO)
        default = parse_term("{default Unrestricted use : Usage} -> Type")
        self.assertIs(default.plicity, Plicity.DEFAULT)
        self.assertEqual(default.default, v("Unrestricted"))

    def test_named_arguments(self):
        """Test named arguments"""
        t = parse_term("L {use=1} a")
        self.assertEqual(t.fn.named, "use")

    def test_holes(self):
        """Test hole syntax"""
        self.assertEqual(parse_term("?rhs"), SHole("rhs"))

    def test_show_term_round_trips(self):
        """Test show term round trips"""
        text = 'printf (Num (Lit " " (Str End)))'
        self.assertEqual(show_term(parse_term(text)), text)


class TestDesugar(unittest.TestCase):

    def _rhs(self, source):
        clause = parse_module(source).declarations[-1]
        return clause.rhs

    def test_do_becomes_bind(self):
        """Test do becomes bind"""
        rhs = self._rhs("echo = do x <- getLine\n          putStrLn x\n")
        expected = binop(">>=", v("getLine"), SLam("x", app(v("putStrLn"), v("x"))))
        self.assertEqual(desugar_do(rhs), expected)

    def test_single_statement_do(self):
        """Test single statement do"""
        self.assertEqual(desugar_do(SDo([DoExpr(v("e"))])), v("e"))

    def test_expression_statement_binds_wildcard(self):
        """Test expression statement binds wildcard"""
        block = SDo([DoExpr(v("a")), DoExpr(v("b"))])
        self.assertEqual(desugar_do(block), binop(">>=", v("a"), SLam("_", v("b"))))

    def test_pattern_bind_uses_pattern_lambda(self):
        """Test pattern bind uses pattern lambda"""
        pattern = binop("#", v("ok"), v("m"))
        block = SDo([DoBind(pattern, app(v("checkPIN"), v("m"), v("pin"))), DoExpr(v("k"))])
        result = desugar_do(block)
        cont = result.arg
        self.assertIsInstance(cont, SLam)
        self.assertEqual(cont.pattern, pattern)
        self.assertEqual(cont.body, v("k"))

    def test_empty_do_block(self):
        """Test empty do block"""
        with self.assertRaises(EmptyDoBlock):
            desugar_do(SDo([]))
        with self.assertRaises(EmptyDoBlock):
            desugar_do(SDo([DoBind(v("x"), v("getLine"))]))

    def test_list_literal(self):
        """Test list literal"""
        expected = binop("::", SFromInteger(1), binop("::", SFromInteger(2), v("Nil")))
        self.assertEqual(desugar(parse_term("[1, 2]")), expected)

    def test_autobind_in_first_use_order(self):
        """Test autobind in first use order"""
        sig = parse_term("(1 x : a) -> Vect n b -> Pair a b")
        self.assertEqual(free_lowercase(sig, {"Vect", "Pair"}), ["a", "n", "b"])
        bound = autobind_implicits(sig, {"Vect", "Pair"})
        binders = []
        while isinstance(bound, SPi) and bound.plicity is Plicity.IMPLICIT:
            binders.append((bound.name, bound.mult))
            bound = bound.codomain
        self.assertEqual(binders, [("a", ZERO), ("n", ZERO), ("b", ZERO)])

    def test_explicit_binders_are_not_rebound(self):
        """Test explicit binders are not rebound"""
        sig = parse_term("(0 a : Type) -> a -> a")
        self.assertEqual(free_lowercase(sig), [])


class TestReplInput(unittest.TestCase):

    def test_commands(self):
        """Test REPL command parsing"""
        self.assertIsInstance(parse_repl_input(":t id"), TypeOf)
        self.assertIsInstance(parse_repl_input(":holes"), Holes)
        self.assertIsInstance(parse_repl_input(":q"), Quit)
        self.assertEqual(parse_repl_input(":load atm.qtt"), Load("atm.qtt"))
        self.assertEqual(parse_repl_input(":exec main"), Exec("main"))

    def test_plain_terms_evaluate(self):
        """Test plain terms evaluate"""
        command = parse_repl_input('reverse "abc"')
        self.assertIsInstance(command, Eval)
        self.assertEqual(command.term, app(v("reverse"), parse_term('"abc"')))

    def test_bad_commands(self):
        """Test bad commands"""
        with self.assertRaises(ParseError):
            parse_repl_input(":load")
        with self.assertRaises(ParseError):
            parse_repl_input(":frobnicate")


if __name__ == "__main__":
    unittest.main()
