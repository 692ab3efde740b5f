"""
🧪 QTT - Command-Line Tests
check, run, dump-erased and the interactive loop
"""

import sys
import tempfile
import unittest
from pathlib import Path

from click.testing import CliRunner

# Add src to path for testing
sys.path.insert(0, str(Path(__file__).parent / "src"))

from qtt.main import cli  # noqa: E402
from qtt.repl import ReplState, get_stats, handle  # noqa: E402
from qtt.utils import STDLIB_PATH, Settings, config_utils  # noqa: E402


def stdlib(*parts):
    return str(STDLIB_PATH.joinpath(*parts))


class TestCommands(unittest.TestCase):

    def setUp(self):
        self.runner = CliRunner()

    def invoke(self, *args, **kwargs):
        return self.runner.invoke(cli, ["--log-level", "ERROR", *args], **kwargs)

    def test_check_reports_declarations(self):
        """Test check reports declarations"""
        result = self.invoke("check", stdlib("printf.qtt"))
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("✅ PrintfType", result.output)
        self.assertIn("6 declarations, 0 holes", result.output)

    def test_check_counts_holes(self):
        """Test check counts holes"""
        result = self.invoke("check", stdlib("holes", "process_add.qtt"))
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("1 declarations, 2 holes", result.output)

    def test_check_rejects(self):
        """Test check rejects"""
        result = self.invoke("check", stdlib("reject", "dup.qtt"))
        self.assertEqual(result.exit_code, 1)
        self.assertIn("LinearityError", result.output)

    def test_check_missing_file(self):
        """Test check missing file"""
        result = self.invoke("check", "no_such_file.qtt")
        self.assertEqual(result.exit_code, 1)
        self.assertIn("LoadError", result.output)

    def test_run(self):
        """Test running the utils program prints its output"""
        result = self.invoke("run", stdlib("utils.qtt"))
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertTrue(result.output.startswith("5\ncba\n"))

    def test_run_with_stdin_file(self):
        """Test run with stdin file"""
        with tempfile.TemporaryDirectory() as tmp:
            keys = Path(tmp) / "keys.txt"
            keys.write_text("1234\n", encoding="utf-8")
            result = self.invoke("run", stdlib("atm.qtt"), "--entry", "runATMInteractive", "--stdin-file", str(keys))
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("PIN accepted\nDispensing cash\nCard ejected\n", result.output)

    def test_run_transcript(self):
        """Test run transcript"""
        result = self.invoke("run", stdlib("utils.qtt"), "--transcript")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("spawn p0", result.output)

    def test_run_unknown_entry(self):
        """Test run unknown entry"""
        result = self.invoke("run", stdlib("utils.qtt"), "--entry", "nothing")
        self.assertEqual(result.exit_code, 1)
        self.assertIn("UnknownName", result.output)

    def test_dump_erased(self):
        """Test dump erased"""
        result = self.invoke("dump-erased", stdlib("basics.qtt"), "append")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("append : 2 run-time parameters", result.output)
        self.assertIn("checkErased: true", result.output)

    def test_repl_session(self):
        """Test repl session"""
        script = ':t printf (Num (Lit " " (Str End)))\n:holes\n:q\n'
        result = self.invoke("repl", stdlib("printf.qtt"), input=script)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("6 declarations, 0 holes", result.output)
        self.assertIn('printf (Num (Lit " " (Str End))) : Int -> String -> String', result.output)
        self.assertIn("no holes", result.output)

    def test_version(self):
        """Test version option"""
        result = self.invoke("--version")
        self.assertIn("0.3.0", result.output)


class TestReplHandle(unittest.TestCase):

    def setUp(self):
        self.state = ReplState(Settings())
        self.lines = []

    def send(self, line):
        return handle(self.state, line, self.lines.append)

    def test_load_and_exec(self):
        """Test load and exec"""
        self.assertTrue(self.send(f":load {stdlib('utils.qtt')}"))
        self.assertTrue(self.send(":exec main"))
        self.assertEqual(self.lines[-2:], ["5", "cba"])

    def test_errors_are_reported_not_raised(self):
        """Test errors are reported not raised"""
        self.assertTrue(self.send(":t missing"))
        self.assertIn("UnknownName", self.lines[-1])
        self.assertTrue(self.send("(("))
        self.assertIn("SyntaxError", self.lines[-1])

    def test_quit_and_blank_lines(self):
        """Test quit and blank lines"""
        self.assertTrue(self.send("   "))
        self.assertFalse(self.send(":q"))
        self.assertEqual(self.lines, [])

    def test_stats(self):
        """Test stats"""
        self.send(f":load {stdlib('rle.qtt')}")
        stats = get_stats(self.state)
        self.assertEqual(stats["history"], 1)
        self.assertEqual(stats["main"], "Rle")


class TestConfiguration(unittest.TestCase):

    def test_defaults(self):
        """Test default settings"""
        settings = Settings()
        self.assertEqual(settings.hole_separator_width, 30)
        self.assertEqual(settings.stdlib_path, STDLIB_PATH)

    def test_toml_table(self):
        """Test toml table"""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "qtt.toml"
            path.write_text("[qtt]\nhole_separator_width = 12\nsearch_depth = 4\n", encoding="utf-8")
            settings = config_utils.load_settings(str(path))
        self.assertEqual(settings.hole_separator_width, 12)
        self.assertEqual(settings.search_depth, 4)

    def test_unreadable_toml_falls_back(self):
        """Test unreadable toml falls back"""
        self.assertEqual(config_utils.load_toml("/nonexistent/qtt.toml"), {})


if __name__ == "__main__":
    unittest.main()
