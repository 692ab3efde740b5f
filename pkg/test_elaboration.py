"""
🧪 QTT - Elaboration Tests
Bundled programs, rejected programs and hole reports
"""

import sys
import unittest
from pathlib import Path

# Add src to path for testing
sys.path.insert(0, str(Path(__file__).parent / "src"))

from qtt.core.errors import (  # noqa: E402
    AutoSearchFailure, ErasedUsage, LinearityError, QttError, TypeMismatch, UnknownHole, UnknownName,
)
from qtt.core.parser import parse_term  # noqa: E402
from qtt.loader import Loader  # noqa: E402
from qtt.repl import ReplState, cmd_holes, cmd_load, cmd_type_of  # noqa: E402
from qtt.utils import STDLIB_PATH, Settings  # noqa: E402

CORPUS = ["prelude", "printf", "rle", "sessions", "utils", "atm", "basics"]
RULE = "-" * 30


def load(path: Path):
    return Loader().load_file(str(path))


def load_text(text: str):
    return Loader().load_source(text, "<test>")


def report(fixture: str) -> str:
    program = load(STDLIB_PATH / "holes" / f"{fixture}.qtt")
    return program.elaborator.hole_report(fixture)


class TestCorpus(unittest.TestCase):
    """Every bundled program elaborates without errors or holes"""

    def test_bundled_programs(self):
        """Test bundled programs"""
        for name in CORPUS:
            with self.subTest(module=name):
                program = load(STDLIB_PATH / f"{name}.qtt")
                self.assertEqual(program.main.holes, [])
                self.assertGreater(program.main.declaration_count, 0)

    def test_prelude_on_its_own(self):
        """Test a module that only imports the prelude"""
        program = load_text("import Prelude\nx : Int\nx = 1\n")
        self.assertEqual(program.main.holes, [])
        self.assertTrue(program.globals.lookup("#"))

    def test_each_module_imported_alone(self):
        """Test importing every bundled module into an otherwise empty program"""
        for module in ["Prelude", "Printf", "Rle", "Sessions", "Utils", "Atm", "Basics"]:
            with self.subTest(module=module):
                program = load_text(f"import {module}\n")
                self.assertIn(module, [m.name for m in program.modules])

    def test_signature_implicits_are_generalized(self):
        """Test an index whose element type is never written down"""
        program = load_text(
            "import Rle\n\n"
            "decode : RunLength xs -> Singleton xs\n"
            "decode Empty = Val []\n"
            "decode (Run n x y) = let Val ys = decode y in\n"
            "                        Val (x :: (rep n x ++ ys))\n"
        )
        self.assertEqual(program.main.holes, [])
        shown = program.elaborator.elab.printer.term(program.globals.lookup("decode")[0].type)
        self.assertIn("RunLength xs", shown)

    def test_unknown_function_type_becomes_a_pi(self):
        """Test applying a variable whose type is only known from its use"""
        program = load_text(
            "import Prelude\n\n"
            "data Wrap : (a : Type) -> (a -> Type) -> Type where\n"
            "     MkWrap : (val : a) -> t val -> Wrap a t\n"
        )
        self.assertTrue(program.globals.lookup("MkWrap"))

    def test_printf_summary(self):
        """Test printf summary"""
        program = load(STDLIB_PATH / "printf.qtt")
        self.assertEqual(program.main.summary(), "6 declarations, 0 holes")

    def test_imports_load_once(self):
        """Test imports load once"""
        program = load(STDLIB_PATH / "utils.qtt")
        self.assertEqual([m.name for m in program.modules], ["Prelude", "Sessions", "Utils"])

    def test_stats(self):
        """Test stats"""
        stats = load(STDLIB_PATH / "rle.qtt").get_stats()
        self.assertEqual(stats["main"], "Rle")
        self.assertEqual(stats["holes"], 0)
        self.assertIn("function", stats["definitions"])


class TestRejected(unittest.TestCase):
    """Each program under reject/ fails with the kind named beside it"""

    def test_reject_fixtures(self):
        """Test reject fixtures"""
        fixtures = sorted((STDLIB_PATH / "reject").glob("*.qtt"))
        self.assertGreaterEqual(len(fixtures), 6)
        for source in fixtures:
            with self.subTest(fixture=source.stem):
                expected = source.with_suffix(".expected").read_text(encoding="utf-8").splitlines()
                with self.assertRaises(QttError) as cm:
                    load(source)
                self.assertEqual(cm.exception.kind, expected[0])
                if len(expected) > 1:
                    self.assertIn(expected[1], cm.exception.detail)
                self.assertTrue(cm.exception.span.known)

    def test_linear_argument_used_twice(self):
        """Test linear argument used twice"""
        with self.assertRaises(LinearityError) as cm:
            load_text("import Prelude\n\ndup : (1 x : a) -> (a, a)\ndup x = (x, x)\n")
        self.assertEqual(str(cm.exception.detail), "There are 2 uses of linear name x")
        self.assertEqual(cm.exception.span.line, 4)

    def test_linear_argument_dropped(self):
        """Test linear argument dropped"""
        with self.assertRaises(LinearityError) as cm:
            load_text("import Prelude\n\ndrop : (1 x : Int) -> Int\ndrop x = 0\n")
        self.assertEqual(cm.exception.uses, 0)

    def test_linear_argument_passed_to_unrestricted_position(self):
        """Test linear argument passed to unrestricted position"""
        with self.assertRaises(LinearityError):
            load_text("import Prelude\n\ntwice : (1 x : Int) -> Int\ntwice x = x + 0\n")

    def test_erased_argument_at_run_time(self):
        """Test erased argument at run time"""
        with self.assertRaises(ErasedUsage) as cm:
            load_text("import Prelude\n\nleak : (0 n : Nat) -> Nat\nleak n = n\n")
        self.assertEqual(cm.exception.detail, "n is not available at run time")

    def test_erased_argument_in_types(self):
        """Test erased argument in types"""
        program = load_text(
            "import Prelude\n\n"
            "replicate : (n : Nat) -> a -> Vect n a\n"
            "replicate Z x = []\n"
            "replicate (S k) x = x :: replicate k x\n"
        )
        self.assertEqual(program.main.holes, [])

    def test_type_mismatch(self):
        """Test type mismatch"""
        with self.assertRaises(TypeMismatch) as cm:
            load_text('import Prelude\n\nn : Int\nn = "five"\n')
        self.assertIn("does not match", cm.exception.detail)

    def test_unknown_name(self):
        """Test unknown name"""
        with self.assertRaises(UnknownName):
            load_text("import Prelude\n\nn : Int\nn = missing\n")

    def test_missing_auto_implicit(self):
        """Test missing auto implicit"""
        with self.assertRaises(AutoSearchFailure):
            load_text("import Atm\n\nbad : (1 _ : ATM Ready) -> L {use=1} (ATM Ready)\nbad m = ejectCard m\n")

    def test_signature_without_clauses_warns(self):
        """Test signature without clauses warns"""
        program = load_text("import Prelude\n\nlater : Int\n")
        self.assertEqual([d.kind for d in program.main.diagnostics], ["MissingCases"])


class TestHoles(unittest.TestCase):
    """Hole reports list remaining multiplicities, a rule and the goal"""

    def test_explicit_type_argument(self):
        """Test explicit type argument"""
        self.assertEqual(
            report("id_explicit_rhs"),
            "\n".join([" 0 a : Type", "   x : a", RULE, "id_explicit_rhs : a"]),
        )

    def test_unused_linear_argument(self):
        """Test unused linear argument"""
        self.assertEqual(
            report("dup_rhs"),
            "\n".join([" 0 a : Type", " 1 x : a", RULE, "dup_rhs : (a, a)"]),
        )

    def test_consumed_linear_argument(self):
        """Test consumed linear argument"""
        lines = report("second_x").splitlines()
        self.assertIn(" 0 x : a", lines)
        self.assertEqual(lines[-1], "second_x : a")

    def test_holes_defer_linearity_errors(self):
        """Test a body with a hole is reported instead of rejected"""
        program = load_text("import Prelude\n\ntwice : (1 x : a) -> (a, a)\ntwice x = (x, ?other)\n")
        self.assertEqual([h.name for h in program.main.holes], ["other"])
        self.assertIn(" 0 x : a", program.elaborator.hole_report("other").splitlines())

    def test_world_threading(self):
        """Test world threading"""
        lines = report("io_bind_rhs").splitlines()
        self.assertIn(" 0 fn : (1 x : %World) -> IORes a", lines)
        self.assertIn(" 1 k : a -> IO b", lines)
        self.assertIn(" 0 w : %World", lines)
        self.assertIn("   x' : a", lines)
        self.assertIn(" 1 w' : %World", lines)
        self.assertEqual(lines[-1], "io_bind_rhs : IORes b")

    def test_state_depends_on_result(self):
        """Test state depends on result"""
        lines = report("whatnow").splitlines()
        self.assertEqual(
            lines,
            [
                "   ok : PINCheck",
                " 1 m : ATM (case ok of { CorrectPIN => Session; IncorrectPIN => CardInserted })",
                RULE,
                "whatnow : L ()",
            ],
        )

    def test_printf_goal_unfolds(self):
        """Test printf goal unfolds"""
        self.assertEqual(
            report("printfFmt_rhs_1"),
            "\n".join(["   f : Format", "   acc : String", RULE, "printfFmt_rhs_1 : Int -> PrintfType f"]),
        )

    def test_server_channel(self):
        """Test server channel"""
        self.assertIn(" 1 chan : Channel (Recv Command", report("utilServer_rhs"))

    def test_case_refines_channel(self):
        """Test case refines channel"""
        text = report("process_add")
        self.assertIn("   cmd : Command", text)
        self.assertIn("Recv (Int, Int) (\\res => Send Int (\\res => Close))", text)

    def test_erased_index(self):
        """Test erased index"""
        lines = report("uncompress_rhs").splitlines()
        self.assertIn(" 0 xs : List ty", lines)
        self.assertIn("   rle : RunLength xs", lines)
        self.assertEqual(lines[-1], "uncompress_rhs : List ty")

    def test_holes_are_counted(self):
        """Test holes are counted"""
        program = load(STDLIB_PATH / "holes" / "printfFmt_rhs_1.qtt")
        self.assertEqual(program.main.summary(), "1 declarations, 4 holes")
        self.assertEqual(
            [h.name for h in program.main.holes],
            ["printfFmt_rhs_1", "printfFmt_rhs_2", "printfFmt_rhs_3", "printfFmt_rhs_4"],
        )


class TestReplQueries(unittest.TestCase):

    def setUp(self):
        self.state = ReplState(Settings())

    def test_type_of_printf(self):
        """Test type of printf"""
        cmd_load(self.state, str(STDLIB_PATH / "printf.qtt"))
        term = parse_term('printf (Num (Lit " " (Str End)))')
        self.assertEqual(
            cmd_type_of(self.state, term),
            'printf (Num (Lit " " (Str End))) : Int -> String -> String',
        )

    def test_type_of_hole(self):
        """Test type of hole"""
        cmd_load(self.state, str(STDLIB_PATH / "holes" / "dup_rhs.qtt"))
        self.assertTrue(cmd_type_of(self.state, parse_term("?dup_rhs")).endswith("dup_rhs : (a, a)"))
        self.assertTrue(cmd_type_of(self.state, parse_term("dup_rhs")).endswith("dup_rhs : (a, a)"))
        with self.assertRaises(UnknownHole):
            cmd_type_of(self.state, parse_term("?nothing"))

    def test_holes_listing(self):
        """Test holes listing"""
        self.assertEqual(cmd_holes(self.state), "no holes")
        cmd_load(self.state, str(STDLIB_PATH / "holes" / "process_add.qtt"))
        listing = cmd_holes(self.state)
        self.assertIn("process_add : ", listing)
        self.assertIn("process_reverse : ", listing)

    def test_failed_load_keeps_program(self):
        """Test failed load keeps program"""
        cmd_load(self.state, str(STDLIB_PATH / "printf.qtt"))
        before = self.state.program
        with self.assertRaises(QttError):
            cmd_load(self.state, str(STDLIB_PATH / "reject" / "dup.qtt"))
        self.assertIs(self.state.program, before)


if __name__ == "__main__":
    unittest.main()
