"""One positive and one stuck case per reduction rule, shared by several tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from tmc_forge.lang import (
    CONS, BlockDet, Bool, Loc, Tag, Unit, Var, parse_expr, parse_program,
)
from tmc_forge.semantics import Config, Heap, Scheduler, Stuck, run, step

PROGRAM = parse_program("""
@ints
fun id x = x
fun two x = (x, x)
""")


def seeded_heap() -> Heap:
    """Location 0 holds ``true :: ()``."""
    heap = Heap()
    heap.alloc(Tag(CONS), Bool(True), Unit())
    return heap


def _expr(text):
    return parse_expr(text, ints=True, placeholders={"$l": Loc(0)})


@dataclass
class RuleCase:
    rule: str
    positive: object  # expression text or Expr
    check: Callable  # (next Config) -> bool
    negative: object
    sched: Scheduler = Scheduler()

    def expr(self, which) -> object:
        e = self.positive if which == "positive" else self.negative
        return _expr(e) if isinstance(e, str) else e

    def fire(self) -> Optional[str]:
        """Step the positive case once; return the rule name when ``check`` holds."""
        r = step(PROGRAM, Config(self.expr("positive"), (), seeded_heap()), self.sched)
        if r is None or not self.check(r.next):
            return None
        return r.rule

    def stuck(self) -> bool:
        """The negative case ends Stuck.

        Block rules still fire on it (a field is stuck); every other rule
        must not apply at all.
        """
        e = self.expr("negative")
        behavior, _ = run(PROGRAM, e, self.sched, 1_000, seeded_heap())
        if not isinstance(behavior, Stuck):
            return False
        if self.rule.startswith("StepBlock") and self.rule != "StepBlockDet":
            return True
        return step(PROGRAM, Config(e, (), seeded_heap()), self.sched) is None


def _focus_is(v):
    return lambda c: c.focus == v and not c.stack


CASES = [
    RuleCase("StepLet", "let x = true in (x, x)",
             _focus_is(parse_expr("(true, true)")), "let x = y in x"),
    RuleCase("StepCall", "id(#A)", _focus_is(Tag("A")), "true(())"),
    RuleCase("StepEq", "#A == #A", _focus_is(Bool(True)), "y == #A"),
    RuleCase("StepIfTrue", "if true then #T else #F", _focus_is(Tag("T")),
             "if () then #T else #F"),
    RuleCase("StepIfFalse", "if false then #T else #F", _focus_is(Tag("F")),
             "if #A then #T else #F"),
    RuleCase("StepBlock1", "block #A (id(()), id(()))",
             lambda c: c.focus.name == "v1", "block #A (true.[1], id(()))",
             Scheduler.left_first()),
    RuleCase("StepBlock2", "block #A (id(()), id(()))",
             lambda c: c.focus.name == "v2", "block #A (id(()), true.[1])",
             Scheduler.right_first()),
    RuleCase("StepBlockDet", BlockDet("A", Bool(True), Unit()),
             lambda c: c.heap.blocks.get(c.focus.id) == [Tag("A"), Bool(True), Unit()],
             BlockDet("A", Var("y"), Unit())),
    RuleCase("StepLoad", "$l.[1]", _focus_is(Bool(True)), "true.[1]"),
    RuleCase("StepStore", "$l.[1] <- false",
             lambda c: c.focus == Unit() and c.heap.blocks[0][1] == Bool(False),
             "().[1] <- false"),
    RuleCase("StepAdd", "2 + 3", _focus_is(parse_expr("5", ints=True)), "true + 1"),
    RuleCase("StepMul", "2 * 3", _focus_is(parse_expr("6", ints=True)), "2 * #A"),
]

RULES = [c.rule for c in CASES]
