"""DataLang abstract syntax.

All nodes are frozen dataclasses, so structural equality and hashing come
for free.  Source positions are carried on calls for diagnostics only and
never take part in comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

PAIR = "PAIR"
CONS = "CONS"
RESERVED_TAGS = (PAIR, CONS)

Pos = Optional[tuple]  # (line, column)


class Expr:
    """Base class of every expression node."""

    __slots__ = ()


class Val(Expr):
    """Base class of values.  Values are irreducible expressions."""

    __slots__ = ()


@dataclass(frozen=True)
class Unit(Val):
    pass


@dataclass(frozen=True)
class Idx(Val):
    value: int

    def __post_init__(self):
        if self.value not in (0, 1, 2):
            raise ValueError(f"block index must be 0, 1 or 2, got {self.value}")


@dataclass(frozen=True)
class Tag(Val):
    name: str


@dataclass(frozen=True)
class Bool(Val):
    value: bool


@dataclass(frozen=True)
class Loc(Val):
    id: int


@dataclass(frozen=True)
class Fnptr(Val):
    name: str


@dataclass(frozen=True)
class Int(Val):
    value: int


UNIT = Unit()
TRUE = Bool(True)
FALSE = Bool(False)
NIL = UNIT
HOLE = UNIT


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Let(Expr):
    name: str
    bound: Expr
    body: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: Expr
    arg: Expr
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Eq(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class If(Expr):
    cond: Expr
    then: Expr
    orelse: Expr


@dataclass(frozen=True)
class Block(Expr):
    tag: str
    first: Expr
    second: Expr


@dataclass(frozen=True)
class BlockDet(Expr):
    tag: str
    first: Expr
    second: Expr


@dataclass(frozen=True)
class Load(Expr):
    block: Expr
    index: Expr


@dataclass(frozen=True)
class Store(Expr):
    block: Expr
    index: Expr
    value: Expr


ADD = "+"
MUL = "*"


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Annotated(Expr):
    """A call carrying a ``[@tailcall]`` or ``[@tailcall false]`` attribute."""

    expr: Expr
    tailcall: bool


@dataclass(frozen=True)
class Def:
    param: str
    body: Expr
    annotated_tmc: bool = False


@dataclass(frozen=True)
class Program:
    defs: dict  # name -> Def, insertion ordered
    ints: bool = False

    def __hash__(self):
        return hash((tuple(self.defs.items()), self.ints))

    def __getitem__(self, name: str) -> Def:
        return self.defs[name]

    def __contains__(self, name: str) -> bool:
        return name in self.defs

    def names(self) -> list:
        return list(self.defs)

    def with_defs(self, defs: dict) -> "Program":
        return Program(dict(defs), self.ints)


Node = Union[Expr, Def]


def pair(a: Expr, b: Expr) -> Block:
    return Block(PAIR, a, b)


def cons(a: Expr, b: Expr) -> Block:
    return Block(CONS, a, b)


def seq(a: Expr, b: Expr) -> Let:
    # ``_`` is a wildcard binder: it can never be referenced.
    return Let("_", a, b)


def is_value(e: Expr) -> bool:
    return isinstance(e, Val)


def children(e: Expr) -> tuple:
    """Direct subexpressions in source (left-to-right) order."""
    if isinstance(e, Let):
        return (e.bound, e.body)
    if isinstance(e, Call):
        return (e.fn, e.arg)
    if isinstance(e, Eq):
        return (e.left, e.right)
    if isinstance(e, If):
        return (e.cond, e.then, e.orelse)
    if isinstance(e, (Block, BlockDet)):
        return (e.first, e.second)
    if isinstance(e, Load):
        return (e.block, e.index)
    if isinstance(e, Store):
        return (e.block, e.index, e.value)
    if isinstance(e, BinOp):
        return (e.left, e.right)
    if isinstance(e, Annotated):
        return (e.expr,)
    return ()


def rebuild(e: Expr, kids) -> Expr:
    """Return ``e`` with its children replaced by ``kids`` (same order as
    :func:`children`)."""
    kids = tuple(kids)
    if isinstance(e, Let):
        return Let(e.name, *kids)
    if isinstance(e, Call):
        return Call(kids[0], kids[1], e.pos)
    if isinstance(e, Eq):
        return Eq(*kids)
    if isinstance(e, If):
        return If(*kids)
    if isinstance(e, Block):
        return Block(e.tag, *kids)
    if isinstance(e, BlockDet):
        return BlockDet(e.tag, *kids)
    if isinstance(e, Load):
        return Load(*kids)
    if isinstance(e, Store):
        return Store(*kids)
    if isinstance(e, BinOp):
        return BinOp(e.op, *kids)
    if isinstance(e, Annotated):
        return Annotated(kids[0], e.tailcall)
    return e


def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal of every node in ``e``."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def size(e: Expr) -> int:
    return sum(1 for _ in walk(e))


def program_size(p: Program) -> int:
    return sum(size(d.body) + 1 for d in p.defs.values())


def free_vars(e: Expr) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Let):
        return free_vars(e.bound) | (free_vars(e.body) - {e.name})
    out = set()
    for k in children(e):
        out |= free_vars(k)
    return out


def erase_annotations(e: Expr) -> Expr:
    if isinstance(e, Annotated):
        return erase_annotations(e.expr)
    kids = children(e)
    if not kids:
        return e
    return rebuild(e, [erase_annotations(k) for k in kids])


def at_path(e: Expr, path) -> Expr:
    for i in path:
        e = children(e)[i]
    return e


def replace_at(e: Expr, path, new: Expr) -> Expr:
    if not path:
        return new
    kids = list(children(e))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return rebuild(e, kids)
