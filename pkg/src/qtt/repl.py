"""
💬 REPL - Interactive Loop
Load, inspect types and holes, evaluate terms and run entry points
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

from .core.context import Context
from .core.desugar import desugar
from .core.erasure import Eraser
from .core.errors import QttError, UnknownHole, UnsolvedMeta
from .core.multiplicity import ONE, ZERO
from .core.parser import Eval, Exec, Holes, Load, Quit, TypeOf, parse_repl_input
from .core.runtime import Interpreter, RunResult, run_main
from .core.syntax import SHole, SVar, show_term
from .loader import Loader, Program
from .utils import Settings

logger = logging.getLogger(__name__)


@dataclass
class ReplState:
    settings: Settings
    program: Optional[Program] = None
    path: Optional[str] = None
    history: List[str] = field(default_factory=list)
    dump_erased: bool = False
    stdin_lines: List[str] = field(default_factory=list)

    def loader(self) -> Loader:
        return Loader(search_depth=self.settings.search_depth, stdlib_path=self.settings.stdlib_path)

    def require(self) -> Program:
        if self.program is None:
            self.program = self.loader().load_source("import Prelude", "<repl>")
        return self.program


# ------------------------------------------------------------------ commands


def cmd_load(state: ReplState, path: str) -> str:
    """Replace the loaded program; a failed load keeps the previous one"""
    program = state.loader().load_file(path)
    state.program = program
    state.path = path
    assert program.main is not None
    lines = [f"OK {program.globals.get(name).display}" for name in program.main.declarations]
    lines += [d.format() for d in program.main.diagnostics]
    lines.append(program.main.summary())
    return "\n".join(lines)


def cmd_type_of(state: ReplState, term) -> str:
    program = state.require()
    elaborator = program.elaborator
    holes = {h.name for h in elaborator.holes}
    if isinstance(term, SVar) and term.name in holes and not program.globals.lookup(term.name):
        term = SHole(term.name, term.span)
    if isinstance(term, SHole):
        if term.name not in holes:
            raise UnknownHole(f"there is no hole named {term.name}")
        return elaborator.hole_report(term.name, state.settings.hole_separator_width)
    elab = elaborator.elab
    saved = elab.save()
    try:
        start = elab.metas.next_id
        core, ty, _ = elab.infer(Context(), ZERO, desugar(term))
        _check_solved(elab, start)
        shown = elab.printer.term(elab.ev.quote(0, ty))
    finally:
        elab.restore(saved)
    return f"{show_term(term)} : {shown}"


def cmd_eval(state: ReplState, term) -> str:
    program = state.require()
    elab = program.elaborator.elab
    saved = elab.save()
    try:
        start = elab.metas.next_id
        core, _, _ = elab.infer(Context(), ONE, desugar(term))
        _check_solved(elab, start)
        core = elab.ev.zonk(0, core)
    finally:
        elab.restore(saved)
    erased = Eraser(program.globals, program.hole_names).erase(core, [])
    interp = Interpreter(program.globals, program.runtime())
    return interp.show(interp.eval((), erased))


def cmd_holes(state: ReplState) -> str:
    program = state.require()
    holes = program.elaborator.holes
    if not holes:
        return "no holes"
    width = state.settings.hole_separator_width
    return "\n\n".join(program.elaborator.hole_report(h.name, width) for h in holes)


def cmd_exec(state: ReplState, name: str, echo: Optional[Callable[[str], None]] = None) -> RunResult:
    program = state.require()
    result = run_main(program.globals, name, state.stdin_lines, echo, program.runtime())
    logger.debug(f"Ran {name}: ok={result.exit_ok} transcript={len(result.transcript)} events")
    return result


def _check_solved(elab, start: int) -> None:
    unsolved = elab.metas.unsolved(start)
    if unsolved:
        m = unsolved[0]
        raise UnsolvedMeta(f"cannot infer {elab.printer.term(elab.ev.quote(m.ctx.depth, m.type), m.ctx.names)}", m.span)


# ---------------------------------------------------------------------- loop


def handle(state: ReplState, line: str, echo: Callable[[str], None]) -> bool:
    """Run one REPL line; returns False when the session should end"""
    line = line.strip()
    if not line:
        return True
    state.history.append(line)
    try:
        command = parse_repl_input(line)
        if isinstance(command, Quit):
            return False
        if isinstance(command, Load):
            echo(cmd_load(state, command.path))
        elif isinstance(command, TypeOf):
            echo(cmd_type_of(state, command.term))
        elif isinstance(command, Holes):
            echo(cmd_holes(state))
        elif isinstance(command, Exec):
            result = cmd_exec(state, command.name, echo)
            if result.error is not None:
                echo(result.error.format())
        elif isinstance(command, Eval):
            echo(cmd_eval(state, command.term))
    except QttError as e:
        echo(e.format())
    return True


def run_repl(state: ReplState, read: Callable[[str], str], echo: Callable[[str], None]) -> None:
    while True:
        try:
            line = read("qtt> ")
        except EOFError:
            break
        if not handle(state, line, echo):
            break


def get_stats(state: ReplState) -> Dict[str, Any]:
    stats: Dict[str, Any] = {"history": len(state.history), "path": state.path}
    if state.program is not None:
        stats.update(state.program.get_stats())
    return stats
