"""
🏃 Runtime - Interpreter and Cooperative Scheduler
Strict evaluation of erased code, the linear world token, references and duplex session channels
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Deque, Dict, List, Optional, Sequence, Tuple

from .erasure import (
    Eraser, RApp, RCase, RGlobal, RHole, RLam, RLet, RLit, RTerm, RType, RuntimeDef, RVar,
)
from .errors import (
    Deadlock, PrimitiveError, QttError, RecvOnClosed, SendOnClosed, StaleWorld, UnknownName,
)
from .pretty import show_literal
from .primitives import EFFECT_PRIMITIVES, PURE_PRIMITIVES
from .terms import Char, DefKind, Globals

logger = logging.getLogger(__name__)

YIELD_POINTS = frozenset({"send", "recv", "fork", "close"})


# ------------------------------------------------------------------ values


@dataclass(frozen=True)
class Con:
    name: str
    display: str
    fields: Tuple[Any, ...] = ()


@dataclass(frozen=True)
class Closure:
    env: Tuple[Any, ...]
    body: RTerm
    name: str = "_"


@dataclass(frozen=True)
class Partial:
    """A constructor or primitive waiting for the rest of its run-time arguments"""

    name: str
    display: str
    kind: DefKind
    arity: int
    args: Tuple[Any, ...] = ()


@dataclass(frozen=True)
class World:
    generation: int


@dataclass(frozen=True)
class Endpoint:
    channel: int
    end: str


@dataclass(frozen=True)
class RefCell:
    id: int


@dataclass(frozen=True)
class TypeValue:
    name: str


class _Erased:
    def __repr__(self) -> str:
        return "<erased>"


ERASED = _Erased()


# -------------------------------------------------------------- L actions


@dataclass(frozen=True)
class LPure:
    value: Any


@dataclass(frozen=True)
class LBind:
    usage: Any
    act: Any
    k: Any


@dataclass(frozen=True)
class LAction:
    io: Any


@dataclass(frozen=True)
class LPrim:
    op: str
    args: Tuple[Any, ...]


# ------------------------------------------------------------- processes

RUNNABLE = "runnable"
BLOCKED = "blocked"
FINISHED = "finished"


@dataclass
class Process:
    id: int
    current: Any
    stack: List[Tuple[Any, Any]] = field(default_factory=list)
    status: str = RUNNABLE
    waiting: Optional[Endpoint] = None
    result: Any = None


@dataclass
class ChannelState:
    id: int
    # incoming messages, keyed by the receiving end
    queues: Dict[str, Deque[Any]] = field(default_factory=lambda: {"A": deque(), "B": deque()})
    closed: set = field(default_factory=set)


@dataclass
class RunResult:
    stdout: str
    exit_ok: bool
    transcript: List[str] = field(default_factory=list)
    error: Optional[QttError] = None
    live_channels: int = 0
    blocked: List[int] = field(default_factory=list)
    value: Any = None
    stats: Dict[str, Any] = field(default_factory=dict)


def _other(end: str) -> str:
    return "B" if end == "A" else "A"


class Interpreter:
    """Runs erased definitions; IO and L actions are executed by `run_main`"""

    def __init__(
        self,
        globals: Globals,
        defs: Dict[str, RuntimeDef],
        stdin: Sequence[str] = (),
        echo: Optional[Callable[[str], None]] = None,
    ):
        self.globals = globals
        self.defs = defs
        self.stdin: Deque[str] = deque(stdin)
        self.echo = echo
        self.stdout: List[str] = []
        self.transcript: List[str] = []
        self.cache: Dict[str, Any] = {}
        self.con_names: Dict[Tuple[str, str], str] = {}
        self.generation = 0
        self.refs: Dict[int, Any] = {}
        self.next_ref = 0
        self.channels: Dict[int, ChannelState] = {}
        self.next_channel = 0
        self.processes: List[Process] = []

    # -------------------------------------------------------------- eval

    def eval(self, env: Tuple[Any, ...], t: RTerm) -> Any:
        if isinstance(t, RVar):
            return env[len(env) - 1 - t.index]
        if isinstance(t, RApp):
            return self.apply(self.eval(env, t.fn), self.eval(env, t.arg))
        if isinstance(t, RGlobal):
            return self.global_value(t.name)
        if isinstance(t, RLam):
            return Closure(env, t.body, t.name)
        if isinstance(t, RLet):
            return self.eval(env + (self.eval(env, t.value),), t.body)
        if isinstance(t, RCase):
            return self.eval_case(env, t)
        if isinstance(t, RLit):
            return t.value
        if isinstance(t, RType):
            return TypeValue("Type")
        if isinstance(t, RHole):
            raise PrimitiveError(f"reached the hole ?{t.name} at run time")
        raise TypeError(f"cannot run {t!r}")

    def eval_case(self, env: Tuple[Any, ...], t: RCase) -> Any:
        s = self.eval(env, t.scrutinee)
        for alt in t.alts:
            if alt.con is not None:
                if isinstance(s, Con) and s.name == alt.con:
                    return self.eval(env + s.fields, alt.body)
            elif not isinstance(s, (Con, Closure)) and type(s) is type(alt.lit) and s == alt.lit:
                return self.eval(env, alt.body)
        if t.default is not None:
            return self.eval(env, t.default)
        raise PrimitiveError(f"no case alternative matches {self.show(s)}")

    def global_value(self, name: str) -> Any:
        if name in self.cache:
            return self.cache[name]
        d = self.defs.get(name)
        if d is None:
            raise PrimitiveError(f"{name} has no run-time definition")
        if d.kind is DefKind.FUNCTION:
            if d.body is None:
                raise PrimitiveError(f"{d.display} has no clauses")
            v = self.eval((), d.body)
        elif d.kind is DefKind.TYPE_CONSTRUCTOR:
            v = TypeValue(d.display)
        else:
            v = Partial(d.name, d.display, d.kind, d.arity)
            if d.arity == 0:
                v = self.fire(v)
        self.cache[name] = v
        return v

    def apply(self, f: Any, a: Any) -> Any:
        if isinstance(f, Closure):
            return self.eval(f.env + (a,), f.body)
        if isinstance(f, Partial):
            p = Partial(f.name, f.display, f.kind, f.arity, f.args + (a,))
            return self.fire(p) if len(p.args) == p.arity else p
        if isinstance(f, TypeValue):
            return f
        raise PrimitiveError(f"cannot apply {self.show(f)}")

    def fire(self, p: Partial) -> Any:
        if p.kind is DefKind.CONSTRUCTOR:
            return Con(p.name, p.display, p.args)
        return self.primitive(p.display, p.args)

    # --------------------------------------------------------- primitives

    def con(self, family: str, display: str, *fields: Any) -> Con:
        key = (family, display)
        if key not in self.con_names:
            for fam in self.globals.lookup(family):
                for name in fam.constructors:
                    if self.globals.get(name).display == display:
                        self.con_names[key] = name
            if key not in self.con_names:
                raise PrimitiveError(f"the program does not define {family}.{display}")
        return Con(self.con_names[key], display, fields)

    def unit(self) -> Con:
        return self.con("Unit", "MkUnit")

    def reify(self, x: Any) -> Any:
        if isinstance(x, bool):
            return self.con("Bool", "True" if x else "False")
        if isinstance(x, list):
            acc: Any = self.con("List", "Nil")
            for item in reversed(x):
                acc = self.con("List", "::", self.reify(item), acc)
            return acc
        return x

    def primitive(self, name: str, args: Tuple[Any, ...]) -> Any:
        prim = PURE_PRIMITIVES.get(name)
        if prim is not None:
            return self.reify(prim.fn(*args))
        if name == "prim__putStrLn":
            text, world = args
            self._advance(world)
            self.write(text)
            return self.con("IORes", "MkIORes", self.unit(), World(self.generation))
        if name == "prim__getLine":
            (world,) = args
            self._advance(world)
            line = self.stdin.popleft() if self.stdin else ""
            return self.con("IORes", "MkIORes", line, World(self.generation))
        if name == "pure0":
            return LPure(ERASED)
        if name in ("pure", "pure1"):
            return LPure(args[0])
        if name == ">>=":
            return LBind(*args)
        if name == "action":
            return LAction(args[0])
        if name in EFFECT_PRIMITIVES:
            return LPrim(name, args)
        raise PrimitiveError(f"unknown primitive {name}")

    def _advance(self, world: Any) -> None:
        if not isinstance(world, World) or world.generation != self.generation:
            raise StaleWorld(f"world token {self.show(world)} is not the current one ({self.generation})")
        self.generation += 1

    def write(self, text: str) -> None:
        self.stdout.append(text + "\n")
        self.transcript.append(f"print {text!r}")
        if self.echo is not None:
            self.echo(text)

    # ----------------------------------------------------------------- IO

    def run_io(self, io: Any) -> Any:
        if not (isinstance(io, Con) and io.display == "MkIO"):
            raise PrimitiveError(f"expected an IO action, got {self.show(io)}")
        (fn,) = io.fields
        res = self.apply(fn, World(self.generation))
        return self._result(res)

    def _result(self, res: Any) -> Any:
        if not (isinstance(res, Con) and res.display == "MkIORes"):
            raise PrimitiveError(f"an IO action returned {self.show(res)}")
        value, world = res.fields
        if not isinstance(world, World) or world.generation != self.generation:
            raise StaleWorld("an IO action returned a stale world token")
        return value

    def io_bind(self, act: Any, k: Any, world: Any) -> Any:
        """Run `act` with `world`, then the action `k` builds from its result; returns the final IORes"""
        if not isinstance(world, World) or world.generation != self.generation:
            raise StaleWorld(f"world token {self.show(world)} is not the current one ({self.generation})")
        if not (isinstance(act, Con) and act.display == "MkIO"):
            raise PrimitiveError(f"expected an IO action, got {self.show(act)}")
        res = self.apply(act.fields[0], world)
        value = self._result(res)
        after = self.apply(k, value)
        if not (isinstance(after, Con) and after.display == "MkIO"):
            raise PrimitiveError(f"a continuation returned {self.show(after)}")
        return self.apply(after.fields[0], res.fields[1])

    # ----------------------------------------------------------- scheduler

    def spawn(self, action: Any) -> Process:
        p = Process(len(self.processes), action)
        self.processes.append(p)
        self.transcript.append(f"spawn p{p.id}")
        logger.debug(f"Spawned process {p.id}")
        return p

    def run(self, action: Any) -> Any:
        main = self.spawn(action)
        last = -1
        while True:
            runnable = [p for p in self.processes if p.status == RUNNABLE]
            if not runnable:
                blocked = [p.id for p in self.processes if p.status == BLOCKED]
                if blocked:
                    self.transcript.append(f"deadlock {blocked}")
                    raise Deadlock(blocked)
                return main.result
            # round robin in id order, starting after the last process to run
            p = next((q for q in runnable if q.id > last), runnable[0])
            last = p.id
            self.step(p)

    def step(self, p: Process) -> None:
        """Run `p` until it finishes, blocks or passes a yield point"""
        while True:
            v = p.current
            if isinstance(v, LPure):
                if not p.stack:
                    p.status = FINISHED
                    p.result = v.value
                    self.transcript.append(f"finish p{p.id}")
                    return
                usage, k = p.stack.pop()
                if isinstance(usage, Con) and usage.display == "None":
                    p.current = k
                else:
                    p.current = self.apply(k, v.value)
            elif isinstance(v, LBind):
                p.stack.append((v.usage, v.k))
                p.current = v.act
            elif isinstance(v, LAction):
                p.current = LPure(self.run_io(v.io))
            elif isinstance(v, LPrim):
                done, result = self.perform(p, v)
                if not done:
                    p.status = BLOCKED
                    self.transcript.append(f"block p{p.id}")
                    return
                p.current = LPure(result)
                if v.op in YIELD_POINTS:
                    return
            else:
                raise PrimitiveError(f"process {p.id} is not running an action: {self.show(v)}")

    def perform(self, p: Process, prim: LPrim) -> Tuple[bool, Any]:
        op, args = prim.op, prim.args
        if op == "newRef":
            ref = RefCell(self.next_ref)
            self.next_ref += 1
            self.refs[ref.id] = args[0]
            return True, ref
        if op == "readRef":
            (ref,) = args
            return True, self.con("Res", "#", self.refs[ref.id], ref)
        if op == "writeRef":
            ref, value = args
            self.refs[ref.id] = value
            return True, ref
        if op == "freeRef":
            del self.refs[args[0].id]
            return True, self.unit()
        if op == "fork":
            return True, self.fork(p, args[0])
        if op == "send":
            end, value = args
            return True, self.send(p, end, value)
        if op == "recv":
            return self.recv(p, args[0])
        if op == "close":
            return True, self.close(p, args[0])
        raise PrimitiveError(f"unknown action {op}")

    # ------------------------------------------------------------ channels

    def fork(self, p: Process, fn: Any) -> Endpoint:
        ch = ChannelState(self.next_channel)
        self.next_channel += 1
        self.channels[ch.id] = ch
        child = self.spawn(self.apply(fn, Endpoint(ch.id, "B")))
        self.transcript.append(f"fork p{p.id} -> p{child.id} c{ch.id}")
        return Endpoint(ch.id, "A")

    def _channel(self, end: Endpoint) -> ChannelState:
        ch = self.channels.get(end.channel)
        if ch is None:
            raise SendOnClosed(f"channel c{end.channel} no longer exists")
        return ch

    def send(self, p: Process, end: Endpoint, value: Any) -> Endpoint:
        ch = self._channel(end)
        peer = _other(end.end)
        if peer in ch.closed:
            raise SendOnClosed(f"c{ch.id}: the other end has closed")
        ch.queues[peer].append(value)
        self.transcript.append(f"send p{p.id} c{ch.id}{end.end} {self.show(value)}")
        self._wake(Endpoint(ch.id, peer))
        return end

    def recv(self, p: Process, end: Endpoint) -> Tuple[bool, Any]:
        ch = self._channel(end)
        queue = ch.queues[end.end]
        if queue:
            value = queue.popleft()
            self.transcript.append(f"recv p{p.id} c{ch.id}{end.end} {self.show(value)}")
            p.waiting = None
            return True, self.con("Res", "#", value, end)
        if _other(end.end) in ch.closed:
            raise RecvOnClosed(f"c{ch.id}: nothing left to receive and the other end has closed")
        p.waiting = end
        return False, None

    def close(self, p: Process, end: Endpoint) -> Any:
        ch = self._channel(end)
        if ch.queues[end.end]:
            raise PrimitiveError(f"c{ch.id}{end.end} closed with unread messages")
        ch.closed.add(end.end)
        self.transcript.append(f"close p{p.id} c{ch.id}{end.end}")
        if len(ch.closed) == 2:
            del self.channels[ch.id]
        self._wake(Endpoint(ch.id, _other(end.end)))
        return self.unit()

    def _wake(self, end: Endpoint) -> None:
        for q in self.processes:
            if q.status == BLOCKED and q.waiting == end:
                q.status = RUNNABLE
                self.transcript.append(f"wake p{q.id}")

    # ------------------------------------------------------------- display

    def show(self, v: Any) -> str:
        if isinstance(v, Con):
            if not v.fields:
                return v.display
            return "(" + " ".join([v.display] + [self.show(f) for f in v.fields]) + ")"
        if isinstance(v, (int, str, Char)):
            return show_literal(v)
        if isinstance(v, Closure):
            return "<function>"
        if isinstance(v, Partial):
            return f"<{v.display}/{len(v.args)}>"
        if isinstance(v, World):
            return f"%World#{v.generation}"
        if isinstance(v, Endpoint):
            return f"<channel c{v.channel}{v.end}>"
        if isinstance(v, RefCell):
            return f"<ref {v.id}>"
        if isinstance(v, TypeValue):
            return v.name
        return repr(v)

    def get_stats(self) -> Dict[str, Any]:
        return {
            "processes": len(self.processes),
            "finished": sum(1 for p in self.processes if p.status == FINISHED),
            "channels_opened": self.next_channel,
            "live_channels": len(self.channels),
            "live_refs": len(self.refs),
            "world_generation": self.generation,
        }

    def run_main(self, entry_value: Any) -> RunResult:
        """Run an IO or L value as the main process"""
        action = entry_value
        if isinstance(entry_value, Con) and entry_value.display == "MkIO":
            action = LAction(entry_value)
        error: Optional[QttError] = None
        value = None
        try:
            value = self.run(action)
        except QttError as e:
            error = e
            logger.debug(f"Run failed: {e.format()}")
        blocked = [p.id for p in self.processes if p.status == BLOCKED]
        return RunResult(
            "".join(self.stdout), error is None, list(self.transcript), error,
            len(self.channels), blocked, value, self.get_stats(),
        )


def run_main(
    globals: Globals,
    entry: str,
    stdin: Sequence[str] = (),
    echo: Optional[Callable[[str], None]] = None,
    defs: Optional[Dict[str, RuntimeDef]] = None,
) -> RunResult:
    """Erase the program if needed and run `entry` as the main process"""
    candidates = [d for d in globals.lookup(entry) if d.kind is DefKind.FUNCTION]
    if not candidates:
        raise UnknownName(f"{entry} is not defined")
    if defs is None:
        defs = Eraser(globals).erase_program()
    interp = Interpreter(globals, defs, stdin, echo)
    try:
        main = interp.global_value(candidates[-1].name)
    except QttError as e:
        return RunResult("".join(interp.stdout), False, interp.transcript, e)
    return interp.run_main(main)
