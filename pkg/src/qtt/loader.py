"""
📦 Loader - Source Files to an Elaborated Program
Flat imports resolved against the importing file's directory and the bundled library
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .core.declarations import ModuleElaborator, ModuleResult
from .core.erasure import Eraser, RuntimeDef
from .core.errors import LoadError
from .core.parser import parse_module
from .core.terms import Globals
from .utils import STDLIB_PATH

logger = logging.getLogger(__name__)

EXTENSION = ".qtt"


@dataclass
class Program:
    """Everything one load produced"""

    elaborator: ModuleElaborator
    modules: List[ModuleResult] = field(default_factory=list)
    main: Optional[ModuleResult] = None
    _runtime: Optional[Dict[str, RuntimeDef]] = None

    @property
    def globals(self) -> Globals:
        return self.elaborator.globals

    @property
    def hole_names(self) -> Dict[int, str]:
        return {h.meta: h.name for h in self.elaborator.holes}

    def runtime(self) -> Dict[str, RuntimeDef]:
        """Erased definitions, computed once per load"""
        if self._runtime is None:
            self._runtime = Eraser(self.globals, self.hole_names).erase_program()
        return self._runtime

    def get_stats(self) -> Dict[str, Any]:
        stats = self.elaborator.get_stats()
        stats["main"] = self.main.name if self.main else None
        return stats


class Loader:
    """Parses and elaborates a file together with everything it imports"""

    def __init__(self, search_path: Sequence[Path] = (), search_depth: int = 8, stdlib_path: Path = STDLIB_PATH):
        self.search_path = list(search_path)
        self.stdlib_path = Path(stdlib_path)
        self.search_depth = search_depth

    def load_file(self, path: str) -> Program:
        file = Path(path)
        if not file.is_file():
            raise LoadError(f"cannot read {path}")
        return self.load_source(file.read_text(encoding="utf-8"), str(file), file.parent)

    def load_source(self, text: str, file: Optional[str] = None, base: Optional[Path] = None) -> Program:
        program = Program(ModuleElaborator(search_depth=self.search_depth))
        roots = ([base] if base is not None else []) + self.search_path + [self.stdlib_path]
        module = parse_module(text, file=file)
        loaded: Dict[str, ModuleResult] = {}
        for name in module.imports:
            self._import(program, name, roots, loaded, [module.name])
        result = program.elaborator.elaborate_module(module)
        program.modules.append(result)
        program.main = result
        logger.info(f"Loaded {module.name}: {result.summary()}")
        return program

    def _import(
        self, program: Program, name: str, roots: List[Path], loaded: Dict[str, ModuleResult], stack: List[str]
    ) -> None:
        if name in loaded:
            return
        if name in stack:
            raise LoadError(f"import cycle: {' -> '.join(stack + [name])}")
        file = self.find(name, roots)
        module = parse_module(file.read_text(encoding="utf-8"), name=name, file=str(file))
        for dep in module.imports:
            self._import(program, dep, roots, loaded, stack + [name])
        result = program.elaborator.elaborate_module(module)
        loaded[name] = result
        program.modules.append(result)

    def find(self, name: str, roots: Sequence[Path]) -> Path:
        for root in roots:
            for candidate in (name + EXTENSION, name.lower() + EXTENSION):
                path = Path(root) / candidate
                if path.is_file():
                    return path
        raise LoadError(f"cannot find module {name} (searched {', '.join(str(r) for r in roots)})")
