"""Small-step semantics as an instrumented abstract machine.

The machine keeps the evaluation context decomposed as an explicit stack of
frames, so the frame count is a direct measure of stack usage.  Moving the
focus in and out of frames is administrative; only head reductions count as
steps.

Evaluation order follows the evaluation-context grammar: the right operand
of calls, equality, loads and stores is evaluated first.  Arithmetic (an
extension) uses the same right-to-left order.  Block construction is
nondeterministic and consults a scheduler.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Optional

from .lang.ast import (
    ADD, CONS, PAIR, Annotated, children, BinOp, Block, BlockDet, Bool, Call, Eq, Expr,
    Fnptr, Idx, If, Int, Let, Load, Loc, Program, Store, Tag, Unit, Val, Var,
)
from .lang.names import subst

_INT_MOD = 1 << 64
_INT_HALF = 1 << 63


def wrap_int(n: int) -> int:
    return (n + _INT_HALF) % _INT_MOD - _INT_HALF


# ---------------------------------------------------------------- heap


class Heap:
    """Blocks of three cells: tag at index 0, fields at 1 and 2.

    Blocks are allocated atomically, so a location is either fully present
    or absent.
    """

    __slots__ = ("blocks", "next_loc")

    def __init__(self, blocks: Optional[dict] = None, next_loc: int = 0):
        self.blocks = blocks if blocks is not None else {}
        self.next_loc = next_loc

    def alloc(self, tag: Val, v1: Val, v2: Val) -> Loc:
        loc = self.next_loc
        assert loc not in self.blocks
        self.next_loc += 1
        self.blocks[loc] = [tag, v1, v2]
        return Loc(loc)

    def load(self, loc: Loc, idx: Idx):
        block = self.blocks.get(loc.id)
        return None if block is None else block[idx.value]

    def store(self, loc: Loc, idx: Idx, v: Val) -> bool:
        block = self.blocks.get(loc.id)
        if block is None:
            return False
        block[idx.value] = v
        return True

    def copy(self) -> "Heap":
        return Heap({k: list(v) for k, v in self.blocks.items()}, self.next_loc)

    def cells(self) -> dict:
        return {(loc, i): v for loc, b in self.blocks.items() for i, v in enumerate(b)}

    def __len__(self):
        return len(self.blocks)


def eq_val(v1: Val, v2: Val) -> bool:
    """Physical equality on locations, primitive equality otherwise.

    Values of distinct kinds are always different.
    """
    return type(v1) is type(v2) and v1 == v2


def build_value(heap: Heap, e: Expr) -> Val:
    """Allocate a data literal (values and blocks) directly into ``heap``.

    Iterative, so arbitrarily long lists are fine.  Fields are allocated
    before their enclosing block.
    """
    out: list = []
    todo: list = [(e, False)]
    while todo:
        node, done = todo.pop()
        if isinstance(node, Val):
            out.append(node)
        elif isinstance(node, Block):
            if done:
                second = out.pop()
                first = out.pop()
                out.append(heap.alloc(Tag(node.tag), first, second))
            else:
                todo.append((node, True))
                todo.append((node.second, False))
                todo.append((node.first, False))
        else:
            raise ValueError(f"not a data literal: {node!r}")
    return out[0]


def alloc_list(heap: Heap, items) -> Val:
    v: Val = Unit()
    for it in reversed(list(items)):
        v = heap.alloc(Tag(CONS), it, v)
    return v


def read_list(heap: Heap, v: Val) -> Optional[list]:
    """Read a CONS-list into a Python list of values; None if malformed."""
    out, seen = [], set()
    while isinstance(v, Loc):
        if v.id in seen or v.id not in heap.blocks:
            return None
        seen.add(v.id)
        tag, head, tail = heap.blocks[v.id]
        if tag != Tag(CONS):
            return None
        out.append(head)
        v = tail
    return out if isinstance(v, Unit) else None


def shape(heap: Heap, v: Val) -> tuple:
    """Canonical flat encoding of the heap graph reachable from ``v``.

    Locations are renumbered in discovery order of a fixed pre-order walk,
    so two rooted graphs have equal shapes exactly when they are related by
    a location bijection preserving all cells.
    """
    if not isinstance(v, Loc):
        return (v,)
    out: list = []
    number: dict = {}
    todo = [v]
    while todo:
        x = todo.pop()
        if not isinstance(x, Loc):
            out.append(x)
        elif x.id in number:
            out.append(("ref", number[x.id]))
        elif x.id not in heap.blocks:
            out.append(("dangling",))
        else:
            number[x.id] = len(number)
            out.append(("blk",))
            todo.extend(reversed(heap.blocks[x.id]))
    return tuple(out)


def show(heap: Optional[Heap], v: Val, ints: bool = False, limit: int = 64) -> str:
    """Human-readable rendering of a value and the structure below it."""
    from .lang.syntax import print_value

    if not isinstance(v, Loc) or heap is None:
        return print_value(v, ints)
    items = read_list(heap, v)
    if items is not None and len(items) <= limit:
        return "[" + ", ".join(show(heap, x, ints, limit) for x in items) + "]"
    if items is not None:
        return f"<list of {len(items)}>"
    seen: set = set()

    def go(x, depth):
        if not isinstance(x, Loc):
            return print_value(x, ints)
        if x.id in seen or depth > 16 or x.id not in heap.blocks:
            return f"<loc {x.id}>"
        seen.add(x.id)
        tag, a, b = heap.blocks[x.id]
        inner = f"{go(a, depth + 1)}, {go(b, depth + 1)}"
        if tag == Tag(PAIR):
            return f"({inner})"
        if tag == Tag(CONS):
            return f"{go(a, depth + 1)} :: {go(b, depth + 1)}"
        name = f"#{tag.name}" if isinstance(tag, Tag) else print_value(tag, ints)
        return f"block {name} ({inner})"

    return go(v, 0)


# ---------------------------------------------------------------- frames


class Frame:
    __slots__ = ()

    def plug(self, e: Expr) -> Expr:
        raise NotImplementedError


@dataclass(frozen=True)
class LetFrame(Frame):
    name: str
    body: Expr

    def plug(self, e):
        return Let(self.name, e, self.body)


@dataclass(frozen=True)
class CallArgFrame(Frame):
    fn: Expr

    def plug(self, e):
        return Call(self.fn, e)


@dataclass(frozen=True)
class CallFnFrame(Frame):
    arg: Val

    def plug(self, e):
        return Call(e, self.arg)


@dataclass(frozen=True)
class EqRightFrame(Frame):
    left: Expr

    def plug(self, e):
        return Eq(self.left, e)


@dataclass(frozen=True)
class EqLeftFrame(Frame):
    right: Val

    def plug(self, e):
        return Eq(e, self.right)


@dataclass(frozen=True)
class IfFrame(Frame):
    then: Expr
    orelse: Expr

    def plug(self, e):
        return If(e, self.then, self.orelse)


@dataclass(frozen=True)
class LoadIndexFrame(Frame):
    block: Expr

    def plug(self, e):
        return Load(self.block, e)


@dataclass(frozen=True)
class LoadBlockFrame(Frame):
    index: Val

    def plug(self, e):
        return Load(e, self.index)


@dataclass(frozen=True)
class StoreValueFrame(Frame):
    block: Expr
    index: Expr

    def plug(self, e):
        return Store(self.block, self.index, e)


@dataclass(frozen=True)
class StoreIndexFrame(Frame):
    block: Expr
    value: Val

    def plug(self, e):
        return Store(self.block, e, self.value)


@dataclass(frozen=True)
class StoreBlockFrame(Frame):
    index: Val
    value: Val

    def plug(self, e):
        return Store(e, self.index, self.value)


@dataclass(frozen=True)
class BinRightFrame(Frame):
    op: str
    left: Expr

    def plug(self, e):
        return BinOp(self.op, self.left, e)


@dataclass(frozen=True)
class BinLeftFrame(Frame):
    op: str
    right: Val

    def plug(self, e):
        return BinOp(self.op, e, self.right)


def _is_literal(e: Expr) -> bool:
    """True when evaluating ``e`` surely terminates without effects.

    Such a field only allocates fresh blocks, so evaluating it before or
    after its sibling yields the same behaviors up to location renaming.
    Variables here are bound by enclosing lets inside ``e``.
    """
    todo = [e]
    while todo:
        node = todo.pop()
        if isinstance(node, (Block, BlockDet, Eq)):
            todo.append(node.first if not isinstance(node, Eq) else node.left)
            todo.append(node.second if not isinstance(node, Eq) else node.right)
        elif isinstance(node, Let):
            todo.append(node.bound)
            todo.append(node.body)
        elif not isinstance(node, (Val, Var)):
            return False
    return True


def plug_all(focus: Expr, stack) -> Expr:
    e = focus
    for frame in reversed(stack):
        e = frame.plug(e)
    return e


# ---------------------------------------------------------------- scheduling


@dataclass(frozen=True)
class Scheduler:
    """How Block redexes pick an evaluation order.

    Bit 0 selects StepBlock1 (first field first), bit 1 StepBlock2.  Only
    genuine choices consume bits: when at least one field is a data literal
    (a value or a block of literals) its evaluation only allocates, and both
    orders agree up to a renaming of locations.
    """

    mode: str = "left"  # left | right | seeded | enumerate
    seed: int = 0
    prefix: tuple = ()

    @classmethod
    def left_first(cls):
        return cls("left")

    @classmethod
    def right_first(cls):
        return cls("right")

    @classmethod
    def seeded(cls, seed: int):
        return cls("seeded", seed=seed)

    @classmethod
    def enumerate(cls, prefix):
        return cls("enumerate", prefix=tuple(int(b) for b in prefix))

    def chooser(self) -> "Chooser":
        return Chooser(self)


class Chooser:
    def __init__(self, sched: Scheduler):
        self.sched = sched
        self.rng = random.Random(sched.seed) if sched.mode == "seeded" else None
        self.pos = 0

    @property
    def default(self) -> int:
        return 1 if self.sched.mode == "right" else 0

    def choose(self) -> Optional[int]:
        mode = self.sched.mode
        if mode == "seeded":
            return self.rng.getrandbits(1)
        if mode == "enumerate" and self.pos < len(self.sched.prefix):
            bit = self.sched.prefix[self.pos]
            self.pos += 1
            return bit
        return self.default


class _Explorer:
    """Chooser used by behavior enumeration: a pending forced bit, else ask."""

    default = 0

    def __init__(self):
        self.pending: Optional[int] = None

    def choose(self) -> Optional[int]:
        bit, self.pending = self.pending, None
        return bit


# ---------------------------------------------------------------- machine


@dataclass
class RunStats:
    steps: int = 0
    max_frames: int = 0
    allocations: int = 0
    max_frames_at_call: int = 0
    allocations_by_tag: Counter = field(default_factory=Counter)
    calls: Counter = field(default_factory=Counter)  # by callee name

    def copy(self) -> "RunStats":
        return RunStats(self.steps, self.max_frames, self.allocations,
                        self.max_frames_at_call, Counter(self.allocations_by_tag),
                        Counter(self.calls))

    def merge(self, other: "RunStats") -> "RunStats":
        """Pointwise maximum, used to summarize many schedules."""
        return RunStats(max(self.steps, other.steps), max(self.max_frames, other.max_frames),
                        max(self.allocations, other.allocations),
                        max(self.max_frames_at_call, other.max_frames_at_call),
                        self.allocations_by_tag | other.allocations_by_tag,
                        self.calls | other.calls)

    def as_dict(self) -> dict:
        return {
            "steps": self.steps,
            "max_frames": self.max_frames,
            "allocations": self.allocations,
            "max_frames_at_call": self.max_frames_at_call,
            "allocations_by_tag": dict(sorted(self.allocations_by_tag.items())),
            "calls": dict(sorted(self.calls.items())),
        }


NEED_CHOICE = "need-choice"


@dataclass(frozen=True)
class Config:
    focus: Expr
    stack: tuple
    heap: Heap = field(compare=False)


@dataclass(frozen=True)
class StepResult:
    next: Config
    rule: str
    choice_taken: Optional[int] = None


class Machine:
    def __init__(self, program: Program, expr: Expr, heap: Optional[Heap] = None,
                 trace: Optional[Callable] = None):
        self.program = program
        self.focus = expr
        self.stack: list = []
        self.heap = heap if heap is not None else Heap()
        self.stats = RunStats()
        self.bits: list = []
        self.trace = trace

    def clone(self) -> "Machine":
        m = Machine.__new__(Machine)
        m.program = self.program
        m.focus = self.focus
        m.stack = list(self.stack)
        m.heap = self.heap.copy()
        m.stats = self.stats.copy()
        m.bits = list(self.bits)
        m.trace = self.trace
        return m

    @property
    def config(self) -> Config:
        return Config(self.focus, tuple(self.stack), self.heap)

    def final_value(self) -> Optional[Val]:
        if isinstance(self.focus, Val) and not self.stack:
            return self.focus
        return None

    def stuck_expr(self) -> Expr:
        return plug_all(self.focus, self.stack)

    def _push(self, frame: Frame, e: Expr):
        self.stack.append(frame)
        self.focus = e
        if len(self.stack) > self.stats.max_frames:
            self.stats.max_frames = len(self.stack)

    def step(self, chooser) -> Optional[str]:
        """Perform one head step; return the rule name.

        Returns None when the configuration is irreducible (a final value or
        stuck) and ``NEED_CHOICE`` when an exploring chooser has no bit
        ready; in that case the machine state is unchanged.
        """
        while True:
            e = self.focus
            if isinstance(e, Val):
                if not self.stack:
                    return None
                self.focus = self.stack.pop().plug(e)
                continue
            if isinstance(e, Annotated):
                self.focus = e.expr
                continue
            rule = self._reduce(e, chooser)
            if rule is None:
                return None
            if rule == "":
                continue
            if rule == NEED_CHOICE:
                return rule
            self.stats.steps += 1
            if self.trace is not None:
                self.trace(self.stats.steps, rule, self)
            return rule

    def _reduce(self, e: Expr, chooser) -> Optional[str]:
        # "" means the focus moved into a subterm; None means stuck.
        if isinstance(e, Let):
            if isinstance(e.bound, Val):
                self.focus = subst(e.body, e.name, e.bound)
                return "StepLet"
            self._push(LetFrame(e.name, e.body), e.bound)
            return ""
        if isinstance(e, Call):
            if not isinstance(e.arg, Val):
                self._push(CallArgFrame(e.fn), e.arg)
                return ""
            if not isinstance(e.fn, Val):
                self._push(CallFnFrame(e.arg), e.fn)
                return ""
            if isinstance(e.fn, Fnptr) and e.fn.name in self.program.defs:
                d = self.program.defs[e.fn.name]
                depth = len(self.stack)
                if depth > self.stats.max_frames_at_call:
                    self.stats.max_frames_at_call = depth
                self.stats.calls[e.fn.name] += 1
                self.focus = subst(d.body, d.param, e.arg)
                return "StepCall"
            return None
        if isinstance(e, Eq):
            if not isinstance(e.right, Val):
                self._push(EqRightFrame(e.left), e.right)
                return ""
            if not isinstance(e.left, Val):
                self._push(EqLeftFrame(e.right), e.left)
                return ""
            self.focus = Bool(eq_val(e.left, e.right))
            return "StepEq"
        if isinstance(e, If):
            c = e.cond
            if not isinstance(c, Val):
                self._push(IfFrame(e.then, e.orelse), c)
                return ""
            if isinstance(c, Bool):
                self.focus = e.then if c.value else e.orelse
                return "StepIfTrue" if c.value else "StepIfFalse"
            return None
        if isinstance(e, Block):
            genuine = not _is_literal(e.first) and not _is_literal(e.second)
            if genuine:
                bit = chooser.choose()
                if bit is None:
                    return NEED_CHOICE
                self.bits.append(bit)
            else:
                bit = chooser.default
            det = BlockDet(e.tag, Var("v1"), Var("v2"))
            if bit == 0:
                self.focus = Let("v1", e.first, Let("v2", e.second, det))
                return "StepBlock1"
            self.focus = Let("v2", e.second, Let("v1", e.first, det))
            return "StepBlock2"
        if isinstance(e, BlockDet):
            if isinstance(e.first, Val) and isinstance(e.second, Val):
                self.focus = self.heap.alloc(Tag(e.tag), e.first, e.second)
                self.stats.allocations += 1
                self.stats.allocations_by_tag[e.tag] += 1
                return "StepBlockDet"
            return None
        if isinstance(e, Load):
            if not isinstance(e.index, Val):
                self._push(LoadIndexFrame(e.block), e.index)
                return ""
            if not isinstance(e.block, Val):
                self._push(LoadBlockFrame(e.index), e.block)
                return ""
            if isinstance(e.block, Loc) and isinstance(e.index, Idx):
                v = self.heap.load(e.block, e.index)
                if v is not None:
                    self.focus = v
                    return "StepLoad"
            return None
        if isinstance(e, Store):
            if not isinstance(e.value, Val):
                self._push(StoreValueFrame(e.block, e.index), e.value)
                return ""
            if not isinstance(e.index, Val):
                self._push(StoreIndexFrame(e.block, e.value), e.index)
                return ""
            if not isinstance(e.block, Val):
                self._push(StoreBlockFrame(e.index, e.value), e.block)
                return ""
            if isinstance(e.block, Loc) and isinstance(e.index, Idx):
                if self.heap.store(e.block, e.index, e.value):
                    self.focus = Unit()
                    return "StepStore"
            return None
        if isinstance(e, BinOp):
            if not isinstance(e.right, Val):
                self._push(BinRightFrame(e.op, e.left), e.right)
                return ""
            if not isinstance(e.left, Val):
                self._push(BinLeftFrame(e.op, e.right), e.left)
                return ""
            if isinstance(e.left, Int) and isinstance(e.right, Int):
                a, b = e.left.value, e.right.value
                self.focus = Int(wrap_int(a + b if e.op == ADD else a * b))
                return "StepAdd" if e.op == ADD else "StepMul"
            return None
        return None  # free variable or unknown node


def step(p: Program, c: Config, sched: Scheduler = Scheduler()) -> Optional[StepResult]:
    """Functional single step: returns None when ``c`` is irreducible."""
    m = Machine(p, c.focus, c.heap.copy())
    m.stack = list(c.stack)
    before = len(m.bits)
    rule = m.step(sched.chooser())
    if rule is None:
        return None
    taken = m.bits[before] if len(m.bits) > before else None
    return StepResult(m.config, rule, taken)


# ---------------------------------------------------------------- behaviors


class Behavior:
    __slots__ = ()


class Conv(Behavior):
    """Convergence to a value; equality is deep (up to location renaming)."""

    __slots__ = ("value", "heap", "_shape")

    def __init__(self, value: Val, heap: Optional[Heap] = None):
        self.value = value
        self.heap = heap
        self._shape = shape(heap, value) if heap is not None else (value,)

    @property
    def shape(self):
        return self._shape

    def __eq__(self, other):
        return isinstance(other, Conv) and self._shape == other._shape

    def __hash__(self):
        return hash(("conv", self._shape))

    def __repr__(self):
        return f"Conv({show(self.heap, self.value)})"


@dataclass(frozen=True)
class Stuck(Behavior):
    expr: Expr

    def __repr__(self):
        from .lang.syntax import Printer
        try:
            text = Printer(holes=False).expr(self.expr).replace("\n", " ")
        except (TypeError, ValueError, RecursionError):
            text = type(self.expr).__name__
        if len(text) > 120:
            text = text[:117] + "..."
        return f"Stuck({text})"


@dataclass(frozen=True)
class Timeout(Behavior):
    def __repr__(self):
        return "Timeout"


def observable(b: Behavior) -> tuple:
    """What refinement can tell apart: converged shapes, and stuck or cut-off runs."""
    if isinstance(b, Conv):
        return ("conv", b.shape)
    return ("stuck",) if isinstance(b, Stuck) else ("timeout",)


def _finish(m: Machine) -> Behavior:
    v = m.final_value()
    if v is not None:
        return Conv(v, m.heap)
    return Stuck(m.stuck_expr())


def run(p: Program, e: Expr, sched: Scheduler = Scheduler(), budget: int = 10_000,
        heap: Optional[Heap] = None, trace: Optional[Callable] = None):
    """Run ``e`` for at most ``budget`` steps; returns ``(behavior, stats)``.

    ``heap`` pre-seeds the store, e.g. with a long input list.
    """
    m = Machine(p, e, heap, trace)
    chooser = sched.chooser()
    while m.stats.steps < budget:
        if m.step(chooser) is None:
            return _finish(m), m.stats
    if m.step(_Explorer()) is None:  # irreducible exactly at the budget
        return _finish(m), m.stats
    return Timeout(), m.stats


def run_machine(p: Program, e: Expr, sched: Scheduler = Scheduler(), budget: int = 10_000,
                heap: Optional[Heap] = None) -> Machine:
    """Like :func:`run` but returns the machine for inspection."""
    m = Machine(p, e, heap)
    chooser = sched.chooser()
    while m.stats.steps < budget and m.step(chooser) is not None:
        pass
    return m


@dataclass
class Outcome:
    behavior: Behavior
    bits: tuple
    stats: RunStats
    truncated: bool = False  # finished left-first after hitting the choice cap


class _LeftFirst(_Explorer):
    def choose(self) -> int:
        return 0


def _run_out(m: Machine, budget: int) -> Behavior:
    chooser = _LeftFirst()
    while m.stats.steps < budget:
        if m.step(chooser) is None:
            return _finish(m)
    return _finish(m) if m.step(_Explorer()) is None else Timeout()


def _scalar(node):
    if isinstance(node, (Let, Var)):
        return node.name
    if isinstance(node, (Block, BlockDet)):
        return node.tag
    if isinstance(node, BinOp):
        return node.op
    if isinstance(node, Annotated):
        return node.tailcall
    if isinstance(node, Val) and not isinstance(node, Loc):
        return node
    return None


def state_key(m: Machine) -> tuple:
    """Canonical description of a machine state up to location renaming.

    Covers the focus, the frame stack, the reachable part of the heap, the
    steps used and the choices consumed: two states with equal keys have the
    same future behaviors up to renaming.
    """
    names: dict = {}
    queue: list = []
    out: list = [m.stats.steps, len(m.bits)]

    def loc(node: Loc):
        if node.id not in names:
            names[node.id] = len(names)
            queue.append(node.id)
        out.append(("loc", names[node.id]))

    def expr(root):
        todo = [root]
        while todo:
            node = todo.pop()
            if isinstance(node, Loc):
                loc(node)
                continue
            out.append(type(node).__name__)
            sc = _scalar(node)
            if sc is not None:
                out.append(sc)
            todo.extend(reversed(children(node)))

    expr(m.focus)
    for frame in m.stack:
        out.append(type(frame).__name__)
        for name in frame.__dataclass_fields__:
            value = getattr(frame, name)
            if isinstance(value, Expr):
                expr(value)
            else:
                out.append(value)
    i = 0
    while i < len(queue):
        block = m.heap.blocks.get(queue[i])
        i += 1
        if block is None:
            out.append("dangling")
            continue
        out.append("blk")
        for v in block:
            if isinstance(v, Loc):
                loc(v)
            else:
                out.append(v)
    return tuple(out)


def iter_outcomes(p: Program, e: Expr, budget: int = 10_000, choice_cap: int = 16,
                  heap: Optional[Heap] = None, max_paths: Optional[int] = None,
                  merge_states: bool = True, finish_over_cap: bool = False):
    """Depth-first enumeration of every schedule, yielding one Outcome each.

    Each genuine Block choice forks the machine, bit 0 first.  Paths needing
    more than ``choice_cap`` choices, or beyond ``max_paths``, end as Timeout.
    With ``merge_states``, a choice point whose state (up to location
    renaming) was already explored is skipped: the behaviors reachable from
    it have been reported.  With ``finish_over_cap``, a path reaching the
    choice cap is run to the end left-first instead of being cut off; such
    outcomes are flagged ``truncated`` since their siblings are unexplored.
    """
    todo = [(Machine(p, e, heap), None)]
    explorer = _Explorer()
    produced = 0
    seen: set = set()
    while todo:
        m, forced = todo.pop()
        if max_paths is not None and produced >= max_paths:
            produced += 1
            yield Outcome(Timeout(), tuple(m.bits), m.stats)
            continue
        explorer.pending = forced
        while True:
            if m.stats.steps >= budget:
                produced += 1
                if m.step(_Explorer()) is None:
                    yield Outcome(_finish(m), tuple(m.bits), m.stats)
                else:
                    yield Outcome(Timeout(), tuple(m.bits), m.stats)
                break
            rule = m.step(explorer)
            if rule is None:
                produced += 1
                yield Outcome(_finish(m), tuple(m.bits), m.stats)
                break
            if rule == NEED_CHOICE:
                if len(m.bits) >= choice_cap:
                    produced += 1
                    if finish_over_cap:
                        b = _run_out(m, budget)
                        yield Outcome(b, tuple(m.bits), m.stats, truncated=True)
                    else:
                        yield Outcome(Timeout(), tuple(m.bits), m.stats)
                elif merge_states and _seen_before(seen, m):
                    pass
                else:
                    todo.append((m.clone(), 1))
                    todo.append((m, 0))
                break


def _seen_before(seen: set, m: Machine) -> bool:
    key = state_key(m)
    if key in seen:
        return True
    seen.add(key)
    return False


def explore(p: Program, e: Expr, budget: int = 10_000, choice_cap: int = 16,
            heap: Optional[Heap] = None, max_paths: Optional[int] = None) -> list:
    """All outcomes of :func:`iter_outcomes` as a list."""
    return list(iter_outcomes(p, e, budget, choice_cap, heap, max_paths))


def behaviors(p: Program, e: Expr, budget: int = 10_000, choice_cap: int = 16,
              heap: Optional[Heap] = None, max_paths: Optional[int] = None) -> set:
    """The deduplicated set of behaviors of ``e`` over all schedules."""
    return {o.behavior for o in explore(p, e, budget, choice_cap, heap, max_paths)}
