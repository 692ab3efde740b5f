"""
🔩 Pure Primitives - Int, String and Char Operations
Host implementations shared by compile-time evaluation and the interpreter
"""

from __future__ import annotations

from typing import Any, Callable, Dict, List, NamedTuple

from .terms import Char


class PurePrimitive(NamedTuple):
    arity: int
    fn: Callable[..., Any]


def _string_to_int(s: str) -> int:
    try:
        return int(s.strip())
    except ValueError:
        return 0


def _unpack(s: str) -> List[Char]:
    return [Char(c) for c in s]


PURE_PRIMITIVES: Dict[str, PurePrimitive] = {
    "prim__addInt": PurePrimitive(2, lambda a, b: a + b),
    "prim__subInt": PurePrimitive(2, lambda a, b: a - b),
    "prim__mulInt": PurePrimitive(2, lambda a, b: a * b),
    "prim__eqInt": PurePrimitive(2, lambda a, b: a == b),
    "prim__ltInt": PurePrimitive(2, lambda a, b: a < b),
    "prim__showInt": PurePrimitive(1, lambda a: str(a)),
    "prim__appendString": PurePrimitive(2, lambda a, b: a + b),
    "prim__reverseString": PurePrimitive(1, lambda a: a[::-1]),
    "prim__eqString": PurePrimitive(2, lambda a, b: a == b),
    "prim__stringToInt": PurePrimitive(1, _string_to_int),
    "prim__unpack": PurePrimitive(1, _unpack),
    "prim__charToString": PurePrimitive(1, lambda c: c.value),
    "prim__eqChar": PurePrimitive(2, lambda a, b: a == b),
}


def is_pure_primitive(name: str) -> bool:
    return name in PURE_PRIMITIVES


# operations the interpreter supplies; declared in source with %primitive
EFFECT_PRIMITIVES = frozenset({
    "prim__putStrLn", "prim__getLine",
    "pure", "pure0", "pure1", ">>=", "action",
    "newRef", "readRef", "writeRef", "freeRef",
    "send", "recv", "close", "fork",
})


def is_known_primitive(name: str) -> bool:
    return name in PURE_PRIMITIVES or name in EFFECT_PRIMITIVES
