"""
🧩 QTT Core - Language Implementation
Parser, elaborator, erasure and runtime
"""

from .declarations import ModuleElaborator, ModuleResult
from .errors import QttError
from .multiplicity import OMEGA, ONE, ZERO, Multiplicity
from .parser import parse_module, parse_repl_input, parse_term
from .runtime import RunResult, run_main

__all__ = [
    "ModuleElaborator",
    "ModuleResult",
    "QttError",
    "Multiplicity",
    "ZERO",
    "ONE",
    "OMEGA",
    "parse_module",
    "parse_repl_input",
    "parse_term",
    "RunResult",
    "run_main",
]
