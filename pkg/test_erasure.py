"""
🧪 QTT - Erasure Tests
Run-time arities and scoping of erased definitions
"""

import sys
import unittest
from pathlib import Path

# Add src to path for testing
sys.path.insert(0, str(Path(__file__).parent / "src"))

from qtt.core.erasure import (  # noqa: E402
    Eraser, RLam, RVar, check_erased, count_uses, linear_violations, show_runtime,
)
from qtt.core.multiplicity import ONE, OMEGA  # noqa: E402
from qtt.core.terms import DefKind  # noqa: E402
from qtt.loader import Loader  # noqa: E402
from qtt.utils import STDLIB_PATH  # noqa: E402

CORPUS = ["printf", "rle", "utils", "atm", "basics"]


def erased(program, name):
    (original,) = [d for d in program.globals.lookup(name) if d.kind is DefKind.FUNCTION][-1:]
    rdef = Eraser(program.globals, program.hole_names).erase_def(original)
    return rdef, original


class TestArities(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.basics = Loader().load_file(str(STDLIB_PATH / "basics.qtt"))

    def test_type_arguments_vanish(self):
        """Test type arguments vanish"""
        rdef, original = erased(self.basics, "append")
        self.assertEqual(rdef.arity, 2)
        self.assertTrue(check_erased(rdef, original))

    def test_unrestricted_implicit_is_kept(self):
        """Test unrestricted implicit is kept"""
        rdef, original = erased(self.basics, "length")
        self.assertEqual(rdef.arity, 2)
        self.assertTrue(check_erased(rdef, original))
        self.assertIsInstance(rdef.body, RLam)
        self.assertIsInstance(rdef.body.body.body, RVar)

    def test_erased_index_is_recomputed(self):
        """Test erased index is recomputed"""
        rdef, _ = erased(self.basics, "vlength")
        self.assertEqual(rdef.arity, 1)

    def test_proof_argument_costs_nothing(self):
        """Test proof argument costs nothing"""
        rdef, _ = erased(self.basics, "insert")
        self.assertEqual(rdef.arity, 2)
        self.assertEqual(rdef.mults, (OMEGA, ONE))

    def test_sorted_insert_takes_the_list_once(self):
        """Test the helper behind insert keeps its list argument linear"""
        rdef, _ = erased(self.basics, "insertSorted")
        self.assertEqual(rdef.mults, (OMEGA, ONE))

    def test_explicit_type_argument(self):
        """Test explicit type argument"""
        rdef, _ = erased(self.basics, "id_explicit")
        self.assertEqual(rdef.arity, 1)
        self.assertTrue(show_runtime(rdef.body, self.basics.globals).startswith("\\"))


class TestWholePrograms(unittest.TestCase):
    """Erasure keeps every run-time variable bound and linear variables single-use"""

    def test_corpus_erases_cleanly(self):
        """Test corpus erases cleanly"""
        for module in CORPUS:
            program = Loader().load_file(str(STDLIB_PATH / f"{module}.qtt"))
            runtime = program.runtime()
            for name, original in program.globals.defs.items():
                if original.kind is not DefKind.FUNCTION or original.body is None:
                    continue
                with self.subTest(module=module, definition=original.display):
                    rdef = runtime[name]
                    self.assertTrue(check_erased(rdef, original))
                    self.assertEqual(linear_violations(rdef.body), [])

    def test_runtime_is_cached(self):
        """Test runtime is cached"""
        program = Loader().load_file(str(STDLIB_PATH / "rle.qtt"))
        self.assertIs(program.runtime(), program.runtime())

    def test_count_uses(self):
        """Test counting variable uses"""
        body = RLam("x", ONE, RVar(0))
        self.assertEqual(count_uses(body.body, 0), 1)
        self.assertEqual(count_uses(body.body, 1), 0)


if __name__ == "__main__":
    unittest.main()
