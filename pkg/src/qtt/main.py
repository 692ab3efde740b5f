#!/usr/bin/env python3
"""
🔥 QTT - Command-Line Entry Point
check, run, repl and dump-erased over .qtt source files
"""

import sys
from pathlib import Path
from typing import Optional

import click
import structlog
from rich.console import Console

from .core.erasure import Eraser, check_erased, show_runtime
from .core.errors import QttError, UnknownName
from .core.runtime import run_main
from .core.terms import DefKind
from .loader import Loader, Program
from .repl import ReplState, cmd_load, run_repl
from .utils import Settings, config_utils, setup_logging

__version__ = "0.3.0"


def _consoles(settings: Settings):
    color = config_utils.color_enabled(settings)
    return Console(no_color=not color, highlight=False), Console(stderr=True, no_color=not color, highlight=False)


def _load(settings: Settings, file: str) -> Program:
    loader = Loader(search_depth=settings.search_depth, stdlib_path=settings.stdlib_path)
    return loader.load_file(file)


def _fail(err: Console, e: QttError) -> None:
    err.print(f"❌ {e.format()}", markup=False)
    sys.exit(1)


@click.group()
@click.version_option(__version__, prog_name="qtt")
@click.option("--log-level", default=None, help="Set logging level")
@click.option("--config", default=None, type=click.Path(dir_okay=False), help="TOML configuration file ([qtt] table)")
@click.pass_context
def cli(ctx: click.Context, log_level: Optional[str], config: Optional[str]):
    """QTT - a small dependently typed language with quantities"""
    settings = config_utils.load_settings(config)
    if log_level:
        settings.log_level = log_level
    setup_logging(settings.log_level, no_color=settings.no_color)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), settings.recursion_limit))
    ctx.obj = settings


@cli.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.pass_obj
def check(settings: Settings, file: str):
    """Parse and elaborate FILE; exit status 1 on the first error"""
    logger = structlog.get_logger()
    out, err = _consoles(settings)
    try:
        program = _load(settings, file)
    except QttError as e:
        logger.debug("check failed", file=file, kind=e.kind)
        _fail(err, e)
        return
    main = program.main
    assert main is not None
    for name in main.declarations:
        out.print(f"✅ {program.globals.get(name).display}", markup=False)
    for d in main.diagnostics:
        err.print(f"⚠️ {d.format()}", markup=False)
    out.print(main.summary(), markup=False)
    logger.info("checked", file=file, **program.get_stats())


@cli.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--entry", default="main", help="Definition to run")
@click.option("--stdin-file", default=None, type=click.Path(exists=True, dir_okay=False), help="Lines fed to getLine")
@click.option("--transcript", is_flag=True, help="Print the scheduler transcript to stderr")
@click.pass_obj
def run(settings: Settings, file: str, entry: str, stdin_file: Optional[str], transcript: bool):
    """Elaborate FILE, erase it and run ENTRY"""
    logger = structlog.get_logger()
    _, err = _consoles(settings)
    lines = Path(stdin_file).read_text(encoding="utf-8").splitlines() if stdin_file else []
    try:
        program = _load(settings, file)
        result = run_main(program.globals, entry, lines, click.echo, program.runtime())
    except QttError as e:
        _fail(err, e)
        return
    if transcript:
        for event in result.transcript:
            err.print(event, markup=False)
    logger.info("ran", entry=entry, ok=result.exit_ok, **result.stats)
    if result.error is not None:
        _fail(err, result.error)


@cli.command()
@click.argument("file", required=False, type=click.Path(dir_okay=False))
@click.option("--stdin-file", default=None, type=click.Path(exists=True, dir_okay=False), help="Lines fed to :exec")
@click.pass_obj
def repl(settings: Settings, file: Optional[str], stdin_file: Optional[str]):
    """Interactive loop: :t, :holes, :load, :exec, :q"""
    out, _ = _consoles(settings)
    state = ReplState(settings)
    if stdin_file:
        state.stdin_lines = Path(stdin_file).read_text(encoding="utf-8").splitlines()

    def echo(text: str) -> None:
        out.print(text, markup=False)

    if file:
        try:
            echo(cmd_load(state, file))
        except QttError as e:
            echo(e.format())
    run_repl(state, out.input, echo)


@cli.command("dump-erased")
@click.argument("file", type=click.Path(dir_okay=False))
@click.argument("name")
@click.pass_obj
def dump_erased(settings: Settings, file: str, name: str):
    """Show the run-time form of NAME after erasure"""
    out, err = _consoles(settings)
    try:
        program = _load(settings, file)
        defs = [d for d in program.globals.lookup(name) if d.kind is DefKind.FUNCTION]
        if not defs:
            raise UnknownName(f"{name} is not defined")
        original = defs[-1]
        rdef = Eraser(program.globals, program.hole_names).erase_def(original)
    except QttError as e:
        _fail(err, e)
        return
    out.print(f"{rdef.display} : {rdef.arity} run-time parameters", markup=False)
    if rdef.body is not None:
        out.print(show_runtime(rdef.body, program.globals), markup=False)
    out.print(f"checkErased: {str(check_erased(rdef, original)).lower()}", markup=False)


def main():
    cli()


if __name__ == "__main__":
    main()
