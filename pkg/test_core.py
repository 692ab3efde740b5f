"""
🧪 QTT - Core Term Tests
Scoping, normalization and definitional equality
"""

import sys
import unittest
from pathlib import Path

from hypothesis import given, settings
from hypothesis import strategies as st

# Add src to path for testing
sys.path.insert(0, str(Path(__file__).parent / "src"))

from qtt.core.context import Context  # noqa: E402
from qtt.core.desugar import desugar  # noqa: E402
from qtt.core.multiplicity import ZERO  # noqa: E402
from qtt.core.parser import parse_term  # noqa: E402
from qtt.core.patterns import match_clauses  # noqa: E402
from qtt.core.syntax import DoBind, DoExpr, SDo, SVar  # noqa: E402
from qtt.core.terms import DefKind, Global, Var, well_scoped  # noqa: E402
from qtt.loader import Loader  # noqa: E402
from qtt.utils import STDLIB_PATH  # noqa: E402

CORPUS = ["printf", "rle", "utils", "atm", "basics"]


class TestScoping(unittest.TestCase):

    def test_variables_need_binders(self):
        """Test variables need binders"""
        self.assertTrue(well_scoped(Var(0), 1))
        self.assertFalse(well_scoped(Var(1), 1))

    def test_corpus_is_well_scoped(self):
        """Test corpus is well scoped"""
        for module in CORPUS:
            program = Loader().load_file(str(STDLIB_PATH / f"{module}.qtt"))
            for d in program.globals.defs.values():
                with self.subTest(module=module, definition=d.display):
                    self.assertTrue(well_scoped(d.type, 0))
                    if d.body is not None:
                        self.assertTrue(well_scoped(d.body, 0))


class TestNormalization(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.program = Loader().load_file(str(STDLIB_PATH / "printf.qtt"))
        cls.elab = cls.program.elaborator.elab

    def value_of(self, text):
        term = self.elab.check_type(Context(), desugar(parse_term(text)))
        return self.elab.ev.eval((), term)

    def test_type_level_computation(self):
        """Test type level computation"""
        a = self.value_of('PrintfType (Num (Lit " " (Str End)))')
        b = self.value_of("Int -> String -> String")
        self.assertTrue(self.elab.unifier.convertible(0, a, b))
        self.assertFalse(self.elab.unifier.convertible(0, a, self.value_of("String -> Int -> String")))

    def test_normal_forms_are_stable(self):
        """Test normal forms are stable"""
        ev = self.elab.ev
        for d in self.program.globals.defs.values():
            if d.kind is not DefKind.FUNCTION:
                continue
            with self.subTest(definition=d.display):
                once = ev.quote(0, ev.eval((), d.type))
                twice = ev.quote(0, ev.eval((), once))
                self.assertEqual(once, twice)


class TestCaseTrees(unittest.TestCase):
    """Compiled case trees agree with trying the clauses in order"""

    @classmethod
    def setUpClass(cls):
        cls.printf = Loader().load_file(str(STDLIB_PATH / "printf.qtt"))
        cls.rle = Loader().load_file(str(STDLIB_PATH / "rle.qtt"))

    def value_of(self, program, text, type_text):
        elab = program.elaborator.elab
        ty = elab.ev.eval((), elab.check_type(Context(), desugar(parse_term(type_text))))
        term, _ = elab.check(Context(), ZERO, desugar(parse_term(text)), ty)
        return elab.ev.eval((), elab.ev.zonk(0, term))

    def both_ways(self, program, name, args):
        elab = program.elaborator.elab
        d = program.globals.lookup(name)[0]
        clauses = program.elaborator.clauses[d.name]
        tree = elab.ev.eval((), Global(d.name))
        for position, arg in zip(clauses[0].positions, args):
            tree = elab.ev.apply(tree, arg, position.mult, position.plicity)
        oracle = match_clauses(elab, clauses, args)
        self.assertIsNotNone(oracle)
        return elab.ev.quote(0, tree), elab.ev.quote(0, oracle)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.sampled_from("%dsx"), max_size=3))
    def test_overlapping_literal_patterns(self, chars):
        """Test toFormat on character lists up to three deep"""
        text = "[" + ", ".join(f"'{c}'" for c in chars) + "]"
        arg = self.value_of(self.printf, text, "List Char")
        tree, oracle = self.both_ways(self.printf, "toFormat", [arg])
        self.assertEqual(tree, oracle)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 3), st.sampled_from("ab"))
    def test_implicit_and_constructor_positions(self, n, c):
        """Test rep with its erased element type and a Nat up to three deep"""
        nat = "Z"
        for _ in range(n):
            nat = f"S ({nat})"
        args = [
            self.value_of(self.rle, "Char", "Type"),
            self.value_of(self.rle, nat, "Nat"),
            self.value_of(self.rle, f"'{c}'", "Char"),
        ]
        tree, oracle = self.both_ways(self.rle, "rep", args)
        self.assertEqual(tree, oracle)


names = st.sampled_from(["a", "b", "getLine", "k"])
statements = st.one_of(
    names.map(lambda n: DoExpr(SVar(n))),
    st.tuples(st.sampled_from(["x", "y"]), names).map(lambda p: DoBind(SVar(p[0]), SVar(p[1]))),
)


class TestDesugarProperties(unittest.TestCase):

    @settings(max_examples=50)
    @given(st.lists(statements, max_size=5), names)
    def test_desugar_is_idempotent(self, stmts, last):
        """Test desugar is idempotent"""
        block = SDo(stmts + [DoExpr(SVar(last))])
        once = desugar(block)
        self.assertEqual(desugar(once), once)
        self.assertNotIsInstance(once, SDo)


if __name__ == "__main__":
    unittest.main()
