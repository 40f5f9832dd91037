"""Bounded behavioral-refinement checking.

Every behavior of the target call must be matched by a behavior of the
source call: converged values by similar values, stuck runs by any stuck
run.  Runs cut off by the step budget or the choice cap give no evidence
either way and make the verdict inconclusive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from ..lang.ast import Call, Expr, Fnptr, Program
from ..lang.syntax import print_expr
from ..lang.wf import check_wf_value, is_literal
from ..semantics import Conv, RunStats, Stuck, Timeout, explore, iter_outcomes
from .similarity import Observation, similar


class Verdict(str, Enum):
    REFINES = "Refines"
    VIOLATION = "Violation"
    INCONCLUSIVE = "Inconclusive"


class IllFormedInput(ValueError):
    pass


@dataclass
class RefinementReport:
    verdict: Verdict
    call: str
    schedules_explored: int = 0
    source_schedules: int = 0
    target_schedules: int = 0
    timeouts: int = 0
    target_behavior: object = None  # first unmatched target behavior
    unmatched: list = field(default_factory=list)
    replay_bits: Optional[tuple] = None
    stats_source: RunStats = field(default_factory=RunStats)
    stats_target: RunStats = field(default_factory=RunStats)
    fn: str = ""
    arg: Optional[Expr] = None

    @property
    def ok(self) -> bool:
        return self.verdict is Verdict.REFINES

    def summary(self) -> str:
        line = (f"{self.verdict.value}: {self.call} "
                f"({self.target_schedules} target / {self.source_schedules} source schedules")
        if self.timeouts:
            line += f", {self.timeouts} cut off"
        line += ")"
        if self.verdict is Verdict.VIOLATION:
            bits = "".join(map(str, self.replay_bits or ()))
            line += f"\n  unmatched target behavior: {self.target_behavior!r}\n  replay bits: {bits or '(none)'}"
        return line

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "call": self.call,
            "schedules": {"source": self.source_schedules, "target": self.target_schedules},
            "timeouts": self.timeouts,
            "stats_source": self.stats_source.as_dict(),
            "stats_target": self.stats_target.as_dict(),
            "replay": None if self.replay_bits is None else "".join(map(str, self.replay_bits)),
            "unmatched": [repr(b) for b in self.unmatched],
        }


def _merged(outcomes) -> RunStats:
    stats = RunStats()
    for o in outcomes:
        stats = stats.merge(o.stats)
    return stats


def validate_input(p_s: Program, fn: str, arg: Expr) -> None:
    if fn not in p_s.defs:
        raise IllFormedInput(f"unknown function {fn}")
    errors = check_wf_value(arg, p_s)
    if errors or not is_literal(arg):
        detail = "; ".join(map(str, errors)) or "not a data literal"
        raise IllFormedInput(f"ill-formed input for {fn}: {detail}")


def check_refinement(p_s: Program, p_t: Program, fn: str, arg: Expr, budget: int = 50_000,
                     choice_cap: int = 16, obs=Observation.DEEP,
                     max_paths: Optional[int] = None) -> RefinementReport:
    """Check that ``@fn(arg)`` under ``p_t`` refines ``@fn(arg)`` under ``p_s``.

    ``arg`` is a location-free data literal; both runs start from the empty
    heap and allocate it themselves.
    """
    validate_input(p_s, fn, arg)
    if fn not in p_t.defs:
        raise IllFormedInput(f"target program does not define {fn}")
    call = Call(Fnptr(fn), arg)
    text = print_expr(call, ints=p_s.ints).replace("\n", " ")
    target = explore(p_t, call, budget, choice_cap, max_paths=max_paths)
    # Source schedules are explored lazily: matching is existential, so the
    # search stops once every target behavior has a witness.
    # Runs past the choice cap are still finished left-first: a converged
    # one is a genuine source behavior and may witness a match, but the
    # unexplored alternatives count as missing evidence.
    source_iter = iter_outcomes(p_s, call, budget, choice_cap, max_paths=max_paths,
                                finish_over_cap=True)
    source: list = []
    source_conv: list = []
    shapes: set = set()
    state = {"stuck": False}

    def pull() -> bool:
        o = next(source_iter, None)
        if o is None:
            return False
        source.append(o)
        b = o.behavior
        if isinstance(b, Conv) and b.shape not in shapes:
            shapes.add(b.shape)
            source_conv.append(b)
        elif isinstance(b, Stuck):
            state["stuck"] = True
        return True

    def matched(b) -> bool:
        if isinstance(b, Stuck):
            return state["stuck"]
        return any(similar(obs, s.heap, s.value, b.heap, b.value) for s in source_conv)

    unmatched, first_bits = [], None
    for o in target:
        b = o.behavior
        if isinstance(b, Timeout):
            continue
        while not matched(b) and pull():
            pass
        if not matched(b):
            if first_bits is None:
                first_bits = o.bits
            unmatched.append(b)
    timeouts = sum(isinstance(o.behavior, Timeout) or o.truncated for o in source + target)
    target_timeouts = sum(isinstance(o.behavior, Timeout) for o in target)

    if unmatched and timeouts == 0:
        verdict = Verdict.VIOLATION
    elif unmatched or target_timeouts:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.REFINES
    return RefinementReport(
        verdict=verdict,
        call=text,
        schedules_explored=len(source) + len(target),
        source_schedules=len(source),
        target_schedules=len(target),
        timeouts=timeouts,
        target_behavior=unmatched[0] if unmatched else None,
        unmatched=unmatched,
        replay_bits=first_bits if unmatched else None,
        stats_source=_merged(source),
        stats_target=_merged(target),
        fn=fn,
        arg=arg,
    )


@dataclass
class ProgramReport:
    verdict: Verdict
    reports: list = field(default_factory=list)
    note: str = "inputs are sampled; refinement over all values is approximated"

    @property
    def ok(self) -> bool:
        return self.verdict is Verdict.REFINES

    @property
    def first_violation(self) -> Optional[RefinementReport]:
        return next((r for r in self.reports if r.verdict is Verdict.VIOLATION), None)

    def summary(self) -> str:
        counts = {v: sum(r.verdict is v for r in self.reports) for v in Verdict}
        head = (f"verdict: {self.verdict.value} ({len(self.reports)} calls: "
                + ", ".join(f"{counts[v]} {v.value}" for v in Verdict) + ")")
        return head + f"\nnote: {self.note}"


def check_program_refinement(p_s: Program, p_t: Program, suite, budget: int = 50_000,
                             choice_cap: int = 16, obs=Observation.DEEP,
                             max_paths: Optional[int] = None) -> ProgramReport:
    """Check every ``(fn, arg)`` of ``suite``; stop at the first Violation."""
    suite = list(suite)
    for fn, arg in suite:
        validate_input(p_s, fn, arg)
    reports = []
    for fn, arg in suite:
        r = check_refinement(p_s, p_t, fn, arg, budget, choice_cap, obs, max_paths)
        reports.append(r)
        if r.verdict is Verdict.VIOLATION:
            return ProgramReport(Verdict.VIOLATION, reports)
    if any(r.verdict is Verdict.INCONCLUSIVE for r in reports):
        return ProgramReport(Verdict.INCONCLUSIVE, reports)
    return ProgramReport(Verdict.REFINES, reports)
