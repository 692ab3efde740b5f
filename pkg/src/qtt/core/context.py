"""
📒 Typing Context - Entries, Refinement and Metavariables
Ordered context entries with declared multiplicities, plus the snapshot-able meta store
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import NO_SPAN, Span
from .multiplicity import Multiplicity
from .values import Value, vvar

logger = logging.getLogger(__name__)


class MetaKind(Enum):
    IMPLICIT = "implicit"
    AUTO = "auto"
    HOLE = "hole"
    HOLE_TYPE = "hole type"


@dataclass
class MetaEntry:
    id: int
    kind: MetaKind
    ctx: "Context"
    type: Value
    span: Span = NO_SPAN
    default: Optional[Value] = None
    hole: Optional[str] = None


class MetaStore:
    """Metavariables with solutions; snapshots let overload resolution roll back"""

    def __init__(self) -> None:
        self.entries: Dict[int, MetaEntry] = {}
        self.solutions: Dict[int, Value] = {}
        self.next_id = 0

    def fresh(
        self,
        kind: MetaKind,
        ctx: "Context",
        type: Value,
        span: Span = NO_SPAN,
        default: Optional[Value] = None,
        hole: Optional[str] = None,
    ) -> int:
        id = self.next_id
        self.next_id += 1
        self.entries[id] = MetaEntry(id, kind, ctx, type, span, default, hole)
        return id

    def solution(self, id: int) -> Optional[Value]:
        return self.solutions.get(id)

    def solve(self, id: int, value: Value) -> None:
        assert id not in self.solutions, f"meta ?{id} solved twice"
        logger.debug(f"Solved meta ?{id}")
        self.solutions[id] = value

    def kind(self, id: int) -> MetaKind:
        return self.entries[id].kind

    def snapshot(self) -> Tuple[int, Dict[int, Value]]:
        return self.next_id, dict(self.solutions)

    def restore(self, snap: Tuple[int, Dict[int, Value]]) -> None:
        next_id, solutions = snap
        for id in [i for i in self.entries if i >= next_id]:
            del self.entries[id]
        self.next_id = next_id
        self.solutions = solutions

    def unsolved(self, since: int = 0) -> List[MetaEntry]:
        return [
            e for i, e in sorted(self.entries.items())
            if i >= since and i not in self.solutions
        ]


@dataclass(frozen=True)
class Entry:
    name: str
    mult: Multiplicity
    type: Value
    value: Value
    # bound entries are abstracted over by metas; defined ones (lets, refinements) are not
    bound: bool = True
    visible: bool = True
    span: Span = field(default=NO_SPAN, compare=False)
    # where the entry is listed in hole reports; defaults to its level
    order: Optional[Tuple[int, ...]] = field(default=None, compare=False)


@dataclass(frozen=True)
class Context:
    entries: Tuple[Entry, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.entries)

    @property
    def env(self) -> Tuple[Value, ...]:
        return tuple(e.value for e in self.entries)

    @property
    def names(self) -> List[str]:
        return [e.name for e in self.entries]

    def mask(self) -> Tuple[bool, ...]:
        return tuple(e.bound for e in self.entries)

    def bind(
        self, name: str, mult: Multiplicity, type: Value, visible: bool = True, span: Span = NO_SPAN
    ) -> "Context":
        entry = Entry(name, mult, type, vvar(self.depth), True, visible, span)
        return Context(self.entries + (entry,))

    def define(
        self, name: str, mult: Multiplicity, type: Value, value: Value, visible: bool = True
    ) -> "Context":
        return Context(self.entries + (Entry(name, mult, type, value, False, visible),))

    def lookup(self, name: str) -> Optional[Tuple[int, Entry]]:
        for level in range(self.depth - 1, -1, -1):
            e = self.entries[level]
            if e.visible and e.name == name:
                return level, e
        return None

    def entry(self, level: int) -> Entry:
        return self.entries[level]

    def with_entry(self, level: int, entry: Entry) -> "Context":
        entries = list(self.entries)
        entries[level] = entry
        return Context(tuple(entries))

    def hide(self, level: int) -> "Context":
        return self.with_entry(level, replace(self.entries[level], visible=False))

    def place(self, level: int, order: Tuple[int, ...]) -> "Context":
        return self.with_entry(level, replace(self.entries[level], order=order))

    def display_order(self, level: int) -> Tuple[int, ...]:
        order = self.entries[level].order
        return order if order is not None else (level,)

    def bound_levels(self) -> List[int]:
        return [i for i, e in enumerate(self.entries) if e.bound]

    def refine(self, ev, level: int, value: Value, extra: Sequence[Value] = ()) -> Tuple["Context", List[Value]]:
        """
        Substitute `value` for the bound variable at `level` everywhere in the
        context and in `extra`, turning that entry into a definition.
        """
        depth = self.depth
        sub_env = list(vvar(i) for i in range(depth))
        sub_env[level] = value
        env = tuple(sub_env)

        def subst(v: Value) -> Value:
            return ev.eval(env, ev.quote(depth, v))

        entries = []
        for i, e in enumerate(self.entries):
            if i == level:
                entries.append(replace(e, type=subst(e.type), value=value, bound=False))
            elif e.bound:
                entries.append(replace(e, type=subst(e.type)))
            else:
                entries.append(replace(e, type=subst(e.type), value=subst(e.value)))
        logger.debug(f"Refined {self.entries[level].name} at level {level}")
        return Context(tuple(entries)), [subst(x) for x in extra]

    def is_refinable(self, level: int) -> bool:
        return 0 <= level < self.depth and self.entries[level].bound
