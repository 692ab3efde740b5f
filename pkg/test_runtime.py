"""
🧪 QTT - Runtime Tests
IO, linear references, session channels and the scheduler
"""

import re
import sys
import unittest
from pathlib import Path

from hypothesis import given, settings
from hypothesis import strategies as st

# Add src to path for testing
sys.path.insert(0, str(Path(__file__).parent / "src"))

from qtt.core.errors import Deadlock, PrimitiveError, RecvOnClosed, SendOnClosed, StaleWorld, UnknownName  # noqa: E402
from qtt.core.parser import parse_term  # noqa: E402
from qtt.core.primitives import PURE_PRIMITIVES  # noqa: E402
from qtt.core.runtime import ChannelState, Endpoint, Interpreter, LPrim, World, run_main  # noqa: E402
from qtt.loader import Loader  # noqa: E402
from qtt.repl import ReplState, cmd_eval, cmd_exec, cmd_load  # noqa: E402
from qtt.utils import STDLIB_PATH, Settings  # noqa: E402

_programs = {}


def program_for(module):
    if module not in _programs:
        _programs[module] = Loader().load_file(str(STDLIB_PATH / f"{module}.qtt"))
    return _programs[module]


def run(module, entry="main", stdin=(), echo=None):
    program = program_for(module)
    return run_main(program.globals, entry, list(stdin), echo, program.runtime())


class TestSessions(unittest.TestCase):
    """Client and server processes talking over forked channels"""

    def test_utils_main(self):
        """Test utils main"""
        result = run("utils")
        self.assertTrue(result.exit_ok, result.error)
        self.assertEqual(result.stdout, "5\ncba\n")
        self.assertEqual(result.live_channels, 0)
        self.assertEqual(result.blocked, [])
        self.assertEqual(result.stats["processes"], 3)
        self.assertEqual(result.stats["finished"], 3)

    def test_transcript_is_deterministic(self):
        """Test a hundred runs produce the same transcript"""
        first = run("utils")
        for _ in range(99):
            self.assertEqual(run("utils").transcript, first.transcript)
        self.assertIn("spawn p0", first.transcript)
        self.assertIn("spawn p1", first.transcript)
        self.assertIn("print '5'", first.transcript)

    def test_print_events(self):
        """Test print events"""
        result = run("utils", "main")
        prints = [e for e in result.transcript if e.startswith("print")]
        self.assertEqual(prints, ["print '5'", "print 'cba'"])

    def test_echo_callback_sees_output(self):
        """Test echo callback sees output"""
        seen = []
        run("utils", echo=seen.append)
        self.assertEqual(seen, ["5", "cba"])



class TestScheduler(unittest.TestCase):
    """Channel failures driven directly through the interpreter"""

    def interpreter(self, closed=()):
        program = program_for("utils")
        interp = Interpreter(program.globals, program.runtime())
        interp.channels[0] = ChannelState(0, closed=set(closed))
        interp.next_channel = 1
        return interp

    def test_lone_receiver_deadlocks(self):
        """Test lone receiver deadlocks"""
        result = self.interpreter().run_main(LPrim("recv", (Endpoint(0, "A"),)))
        self.assertIsInstance(result.error, Deadlock)
        self.assertFalse(result.exit_ok)
        self.assertEqual(result.blocked, [0])

    def test_send_after_peer_closed(self):
        """Test send after peer closed"""
        result = self.interpreter({"B"}).run_main(LPrim("send", (Endpoint(0, "A"), 1)))
        self.assertIsInstance(result.error, SendOnClosed)

    def test_recv_after_peer_closed(self):
        """Test recv after peer closed"""
        result = self.interpreter({"B"}).run_main(LPrim("recv", (Endpoint(0, "A"),)))
        self.assertIsInstance(result.error, RecvOnClosed)

    def test_close_with_unread_messages(self):
        """Test close with unread messages"""
        interp = self.interpreter()
        interp.channels[0].queues["A"].append(7)
        result = interp.run_main(LPrim("close", (Endpoint(0, "A"),)))
        self.assertIsInstance(result.error, PrimitiveError)

    def test_both_ends_closed_frees_channel(self):
        """Test both ends closed frees channel"""
        interp = self.interpreter({"B"})
        result = interp.run_main(LPrim("close", (Endpoint(0, "A"),)))
        self.assertTrue(result.exit_ok)
        self.assertEqual(result.live_channels, 0)

class TestATM(unittest.TestCase):

    def test_scripted_session(self):
        """Test scripted session"""
        result = run("atm", "runATM")
        self.assertTrue(result.exit_ok, result.error)
        self.assertEqual(result.stdout, "Checking PIN\nDispensing cash\nCard ejected\n")
        self.assertEqual(result.stats["live_refs"], 0)

    def test_correct_pin(self):
        """Test correct pin"""
        result = run("atm", "runATMInteractive", ["1234"])
        self.assertEqual(result.stdout, "Enter PIN\nPIN accepted\nDispensing cash\nCard ejected\n")

    def test_incorrect_pin(self):
        """Test incorrect pin"""
        result = run("atm", "runATMInteractive", ["9999"])
        self.assertEqual(result.stdout, "Enter PIN\nIncorrect PIN\nCard ejected\n")


class TestIO(unittest.TestCase):

    def test_echo(self):
        """Test echo program"""
        self.assertEqual(run("basics", "echo", ["hello"]).stdout, "hello\n")

    def test_greet(self):
        """Test greet reads a name"""
        result = run("basics", "greet", ["Ada"])
        self.assertEqual(result.stdout, "What is your name?\nHello, Ada\n")

    def test_missing_input_reads_empty_line(self):
        """Test missing input reads empty line"""
        self.assertEqual(run("basics", "echo").stdout, "\n")

    def test_unknown_entry(self):
        """Test unknown entry"""
        with self.assertRaises(UnknownName):
            run("basics", "nowhere")

    def io_interpreter(self, stdin=()):
        program = program_for("basics")
        interp = Interpreter(program.globals, program.runtime(), stdin)

        def value(name):
            return interp.global_value(program.globals.lookup(name)[-1].name)

        return interp, value

    def test_bind_threads_the_world(self):
        """Test bind threads the world"""
        interp, value = self.io_interpreter(["hi"])
        res = interp.io_bind(value("getLine"), value("putStrLn"), World(0))
        self.assertEqual(res.display, "MkIORes")
        self.assertEqual(res.fields[1], World(2))
        self.assertEqual(interp.generation, 2)
        self.assertEqual("".join(interp.stdout), "hi\n")

    def test_reused_world_is_stale(self):
        """Test reused world is stale"""
        interp, value = self.io_interpreter(["a", "b"])
        interp.io_bind(value("getLine"), value("putStrLn"), World(0))
        with self.assertRaises(StaleWorld):
            interp.io_bind(value("getLine"), value("putStrLn"), World(0))


class TestEvaluation(unittest.TestCase):
    """Terms evaluated through the REPL path"""

    @classmethod
    def setUpClass(cls):
        cls.state = ReplState(Settings())
        cmd_load(cls.state, str(STDLIB_PATH / "rle.qtt"))
        cls.printf = ReplState(Settings())
        cmd_load(cls.printf, str(STDLIB_PATH / "printf.qtt"))

    def evaluate(self, state, text):
        return cmd_eval(state, parse_term(text))

    def test_printf(self):
        """Test printf with a literal format"""
        self.assertEqual(self.evaluate(self.printf, 'printf (Num (Lit " " (Str End))) 3 "x"'), '"3 x"')

    def test_format_string(self):
        """Test format string"""
        self.assertEqual(self.evaluate(self.printf, 'cprintf "%d items" 3'), '"3 items"')

    def test_prelude_by_default(self):
        """Test prelude by default"""
        state = ReplState(Settings())
        self.assertEqual(self.evaluate(state, 'reverse "abc"'), '"cba"')

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 3), st.sampled_from("abc")), max_size=4))
    def test_run_length_decoding(self, runs):
        """Test uncompress against repeating and appending each run on the host"""
        term = "Empty {ty=Char}"
        for n, c in reversed(runs):
            term = f"Run {n} '{c}' ({term})"
        shown = self.evaluate(self.state, f"uncompress ({term})")
        expected = [c for n, c in runs for _ in range(n + 1)]
        self.assertEqual(re.findall(r"'(.)'", shown), expected)

    def test_sorted_insertion(self):
        """Test insertSorted places the new element in order"""
        state = ReplState(Settings())
        cmd_load(state, str(STDLIB_PATH / "basics.qtt"))
        shown = self.evaluate(state, "insertSorted 3 [1, 2, 4]")
        self.assertEqual(re.findall(r"\d+", shown), ["1", "2", "3", "4"])

    def test_exec_from_repl(self):
        """Test exec from repl"""
        state = ReplState(Settings())
        cmd_load(state, str(STDLIB_PATH / "utils.qtt"))
        self.assertEqual(cmd_exec(state, "main").stdout, "5\ncba\n")


class TestPrimitives(unittest.TestCase):

    @given(st.text())
    def test_reverse_twice(self, s):
        """Test reverse twice"""
        reverse = PURE_PRIMITIVES["prim__reverseString"].fn
        self.assertEqual(reverse(reverse(s)), s)

    @given(st.integers())
    def test_show_then_parse(self, n):
        """Test show then parse"""
        show, parse = PURE_PRIMITIVES["prim__showInt"].fn, PURE_PRIMITIVES["prim__stringToInt"].fn
        self.assertEqual(parse(show(n)), n)

    def test_bad_number_parses_as_zero(self):
        """Test bad number parses as zero"""
        self.assertEqual(PURE_PRIMITIVES["prim__stringToInt"].fn("abc"), 0)

    def test_arities(self):
        """Test pure primitive arities"""
        for name, prim in PURE_PRIMITIVES.items():
            with self.subTest(primitive=name):
                self.assertIn(prim.arity, (1, 2))


if __name__ == "__main__":
    unittest.main()
