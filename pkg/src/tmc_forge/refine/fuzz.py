"""Random programs inside the TMC fragment, differential checking and shrinking."""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from ..lang.ast import (
    CONS, PAIR, Annotated, Block, Bool, Call, Def, Eq, Expr, Fnptr, Idx, If, Let, Load,
    Program, Tag, Unit, Val, Var, at_path, children, free_vars, program_size, rebuild,
    replace_at, size, walk,
)
from ..lang.names import subst
from ..lang.wf import WfFailure, check_wf_source
from ..tmc.contexts import Position, classify_contexts
from ..tmc.transform import AmbiguityError, transform_program
from .check import IllFormedInput, Verdict, check_program_refinement, check_refinement
from .inputs import CallTemplate, build_suite
from .similarity import Observation


@dataclass(frozen=True)
class GenConfig:
    max_fns: int = 3
    max_depth: int = 3
    tags: tuple = ("A", "B")
    max_calls: int = 2  # calls per execution path of one body
    p_tmc: float = 0.75  # chance that a helper function is @tmc


class _Gen:
    def __init__(self, rng: random.Random, cfg: GenConfig, names: list, tmc: set):
        self.rng = rng
        self.cfg = cfg
        self.names = names
        self.tmc = tmc
        self.counter = 0

    def value(self) -> Val:
        return self.rng.choice([Bool(True), Bool(False), Unit()] + [Tag(t) for t in self.cfg.tags])

    def leaf(self, env) -> Expr:
        if env and self.rng.random() < 0.6:
            return Var(self.rng.choice(env))
        return self.value()

    def var(self) -> str:
        self.counter += 1
        return f"v{self.counter}"

    def call(self) -> Expr:
        return Call(Fnptr(self.rng.choice(self.names)), Var("xs"))

    def simple(self, env, calls: int):
        """A subterm outside tail position; returns ``(expr, calls used)``."""
        r = self.rng.random()
        if r < 0.25 and calls > 0 and "xs" in env:
            return self.call(), 1
        if r < 0.45:
            return Eq(self.leaf(env), self.leaf(env)), 0
        if r < 0.6:
            return Block(self.rng.choice(self.tags()), self.leaf(env), self.leaf(env)), 0
        return self.leaf(env), 0

    def tags(self):
        return (CONS, PAIR) + tuple(self.cfg.tags)

    def cond(self, env) -> Expr:
        return Eq(self.leaf(env), self.leaf(env))

    def ctx(self, depth: int, env, calls: int):
        """A term built from tail and constructor frames around calls."""
        rng = self.rng
        r = rng.random()
        if depth <= 0 or r < 0.15:
            if calls > 0 and "xs" in env and rng.random() < 0.5:
                return self.call(), 1
            return self.leaf(env), 0
        if r < 0.45:
            first, used1 = self.ctx(depth - 1, env, calls)
            second, used2 = self.ctx(depth - 1, env, calls - used1)
            if rng.random() < 0.5:  # also build the fields in the other order
                second, used2 = self.ctx(depth - 1, env, calls)
                first, used1 = self.ctx(depth - 1, env, calls - used2)
            return self.fix_block(Block(rng.choice(self.tags()), first, second)), used1 + used2
        if r < 0.65:
            bound, used = self.simple(env, calls)
            name = self.var()
            body, used2 = self.ctx(depth - 1, env + [name], calls - used)
            return Let(name, bound, body), used + used2
        if r < 0.85:
            t, u1 = self.ctx(depth - 1, env, calls)
            f, u2 = self.ctx(depth - 1, env, calls)
            return If(self.cond(env), t, f), max(u1, u2)
        if calls > 0 and "xs" in env:
            call = self.call()
            if rng.random() < 0.1:
                call = Annotated(call, False)
            return call, 1
        return self.leaf(env), 0

    # Disambiguation: every block with two beneficial fields gets annotated.

    def sites(self, e: Expr) -> list:
        out = []
        for path, pos in classify_contexts(e).items():
            if pos is Position.NEITHER:
                continue
            call = at_path(e, path)
            if not (isinstance(call.fn, Fnptr) and call.fn.name in self.tmc):
                continue
            parent = at_path(e, path[:-1]) if path else None
            ann = parent.tailcall if isinstance(parent, Annotated) else None
            if ann is not False:
                out.append((path, ann))
        return out

    def fix_block(self, b: Block) -> Block:
        s1, s2 = self.sites(b.first), self.sites(b.second)
        if not s1 or not s2:
            return b
        x1 = any(a is True for _, a in s1)
        x2 = any(a is True for _, a in s2)
        if x1 != x2:
            return b
        side = self.rng.choice((1, 2))
        keep, other = (s1, s2) if side == 1 else (s2, s1)
        fields = [b.first, b.second]
        if not x1 and self.rng.random() < 0.75:
            path, _ = self.rng.choice(keep)
            k = side - 1
            fields[k] = replace_at(fields[k], path, Annotated(at_path(fields[k], path), True))
        else:
            k = 2 - side  # neutralize the other field
            for path, ann in other:
                if ann is True:
                    path = path[:-1]
                call = at_path(fields[k], path)
                call = call.expr if isinstance(call, Annotated) else call
                fields[k] = replace_at(fields[k], path, Annotated(call, False))
        return Block(b.tag, fields[0], fields[1])

    def body(self) -> Expr:
        base, _ = self.ctx(self.cfg.max_depth - 1, [], 0)
        step, _ = self.ctx(self.cfg.max_depth, ["x", "xs"], self.cfg.max_calls)
        y = self.var()
        return Let(y, Var("xs"), If(Eq(Var(y), Unit()), base,
                                    Let("x", Load(Var(y), Idx(1)),
                                        Let("xs", Load(Var(y), Idx(2)), step))))


def gen_program(seed: int, cfg: GenConfig = GenConfig()) -> Program:
    """A random well-formed program whose entry point is ``main``.

    Every function takes a list ``xs`` and recurses only on its tail, so all
    runs terminate.  ``main`` is always ``@tmc``.
    """
    rng = random.Random(seed)
    count = rng.randint(1, max(1, cfg.max_fns))
    names = ["main"] + [f"g{i}" for i in range(1, count)]
    tmc = {n for n in names if n == "main" or rng.random() < cfg.p_tmc}
    gen = _Gen(rng, cfg, names, tmc)
    defs = {n: Def("xs", gen.body(), n in tmc) for n in names}
    p = Program(defs)
    assert not check_wf_source(p), check_wf_source(p)
    return p


MAIN_CALL = CallTemplate("main($xs)")


def fuzz_suite(sizes=range(5), samples: int = 2, seed: int = 0) -> list:
    return build_suite(MAIN_CALL, sizes, "mixed", samples, seed)


# ---------------------------------------------------------------- shrinking


@dataclass
class Counterexample:
    program: Program
    fn: str
    arg: Expr
    bits: tuple = ()
    obs: Observation = Observation.DEEP
    target: Optional[Program] = None

    @property
    def size(self) -> int:
        """AST nodes of the source program."""
        return program_size(self.program)


def _measure(p: Program, arg: Expr) -> tuple:
    nodes = [n for d in p.defs.values() for n in walk(d.body)]
    return (program_size(p) + size(arg), sum(isinstance(n, Var) for n in nodes),
            sum(isinstance(n, Val) and not isinstance(n, Unit) for n in nodes))


def _violates(p: Program, fn: str, arg: Expr, make_target, budget, cap, obs):
    if check_wf_source(p):
        return None
    try:
        with warnings.catch_warnings():  # shrinking candidates are throwaway programs
            warnings.simplefilter("ignore")
            t = make_target(p)
        r = check_refinement(p, t, fn, arg, budget, cap, obs)
    except (AmbiguityError, WfFailure, IllFormedInput, RecursionError):
        return None
    return (t, r) if r.verdict is Verdict.VIOLATION else None


def _arg_candidates(arg: Expr):
    seen = set()
    paths = []
    todo = [((), arg)]
    while todo:
        path, node = todo.pop()
        paths.append((path, node))
        for i, k in enumerate(children(node)):
            todo.append((path + (i,), k))
    for path, node in paths:
        if isinstance(node, Block):
            for new in (node.second, node.first, Unit()):
                cand = replace_at(arg, path, new)
                if cand not in seen:
                    seen.add(cand)
                    yield cand
        elif not isinstance(node, Unit) and node != Bool(False):
            cand = replace_at(arg, path, Bool(False))
            if cand not in seen:
                seen.add(cand)
                yield cand


def _inline_let(node: Expr) -> Optional[Expr]:
    """``let x = b in e`` to ``e[b/x]`` when ``b`` is a variable or a value,
    or ``x`` occurs at most once; no binder of ``e`` may capture ``b``."""
    if not isinstance(node, Let):
        return None
    uses = sum(isinstance(n, Var) and n.name == node.name for n in walk(node.body))
    if (uses > 1 and not isinstance(node.bound, (Var, Val))) or free_vars(node.bound) & {n.name for n in walk(node.body) if isinstance(n, Let)}:
        return None
    return subst(node.body, node.name, node.bound)


def _retarget(e: Expr, old: str, new: str) -> Expr:
    if isinstance(e, Fnptr) and e.name == old:
        return Fnptr(new)
    kids = children(e)
    if not kids:
        return e
    return rebuild(e, [_retarget(k, old, new) for k in kids])


def _program_candidates(p: Program, fn: str):
    for name in p.defs:
        if name != fn:
            rest = {k: d for k, d in p.defs.items() if k != name}
            yield Program(rest, p.ints)
    # merge a helper into another function: `f` takes the helper's definition
    for helper, hd in p.defs.items():
        if helper == fn:
            continue
        for name in p.defs:
            if name == helper:
                continue
            merged = {k: Def(d.param, _retarget(d.body, helper, name), d.annotated_tmc)
                      for k, d in p.defs.items() if k != helper}
            merged[name] = Def(hd.param, _retarget(hd.body, helper, name), hd.annotated_tmc)
            yield Program(merged, p.ints)
    for name, d in p.defs.items():
        todo = [((), d.body)]
        while todo:
            path, node = todo.pop()
            kids = children(node)
            for i, k in enumerate(kids):
                todo.append((path + (i,), k))
            replacements = list(kids) if not isinstance(node, Annotated) else [node.expr]
            inlined = _inline_let(node)
            if inlined is not None:
                replacements.insert(0, inlined)
            if not isinstance(node, Val):
                replacements += [Unit(), Bool(False), Bool(True)]
            elif not isinstance(node, Unit):
                replacements.append(Unit())
            for new in replacements:
                body = replace_at(d.body, path, new)
                yield p.with_defs({**p.defs, name: Def(d.param, body, d.annotated_tmc)})


def shrink(cex: Counterexample, make_target: Callable[[Program], Program],
           budget: int = 50_000, choice_cap: int = 16, max_rounds: int = 500) -> Counterexample:
    """Greedy structural shrinking preserving the Violation.

    Steps: drop a definition, shrink the input literal, replace a subterm by
    one of its children or by a value.  Stops at a fixpoint.
    """
    p, arg = cex.program, cex.arg
    found = _violates(p, cex.fn, arg, make_target, budget, choice_cap, cex.obs)
    if found is None:
        return cex
    target, report = found
    for _ in range(max_rounds):
        current = _measure(p, arg)
        progress = False
        for cand in _arg_candidates(arg):
            if _measure(p, cand) < current:
                hit = _violates(p, cex.fn, cand, make_target, budget, choice_cap, cex.obs)
                if hit:
                    arg, (target, report), progress = cand, hit, True
                    break
        if progress:
            continue
        for cand in _program_candidates(p, cex.fn):
            if _measure(cand, arg) < current:
                hit = _violates(cand, cex.fn, arg, make_target, budget, choice_cap, cex.obs)
                if hit:
                    p, (target, report), progress = cand, hit, True
                    break
        if not progress:
            break
    return Counterexample(p, cex.fn, arg, tuple(report.replay_bits or ()), cex.obs, target)


# ---------------------------------------------------------------- driver


@dataclass
class FuzzResult:
    seeds: int = 0
    violations: list = field(default_factory=list)  # (seed, Counterexample, replay path)
    inconclusive: int = 0
    ambiguous: int = 0
    converged_calls: int = 0
    total_calls: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def convergence(self) -> float:
        return self.converged_calls / self.total_calls if self.total_calls else 1.0

    def merge(self, other: "FuzzResult") -> "FuzzResult":
        return FuzzResult(self.seeds + other.seeds, self.violations + other.violations,
                          self.inconclusive + other.inconclusive, self.ambiguous + other.ambiguous,
                          self.converged_calls + other.converged_calls,
                          self.total_calls + other.total_calls)

    def summary(self) -> str:
        return (f"{self.seeds} programs, {self.total_calls} calls, "
                f"{len(self.violations)} violations, {self.inconclusive} inconclusive, "
                f"{self.ambiguous} ambiguous")


def fuzz(seeds, cfg: GenConfig = GenConfig(), sizes=range(5), samples: int = 2,
         make_target: Optional[Callable] = None, budget: int = 50_000, choice_cap: int = 16,
         replay_dir: Optional[Path] = None, obs=Observation.DEEP) -> FuzzResult:
    """Generate, transform and check one program per seed."""
    from .replay import write_replay

    make_target = make_target or transform_program
    result = FuzzResult()
    suite = fuzz_suite(sizes, samples)
    for seed in seeds:
        result.seeds += 1
        p = gen_program(seed, cfg)
        try:
            t = make_target(p)
        except AmbiguityError:
            result.ambiguous += 1
            continue
        report = check_program_refinement(p, t, suite, budget, choice_cap, obs)
        result.total_calls += len(report.reports)
        result.converged_calls += sum(r.timeouts == 0 for r in report.reports)
        if report.verdict is Verdict.INCONCLUSIVE:
            result.inconclusive += 1
        bad = report.first_violation
        if bad is not None:
            cex = shrink(Counterexample(p, bad.fn, bad.arg, tuple(bad.replay_bits or ()), obs),
                         make_target, budget, choice_cap)
            path = None
            if replay_dir is not None:
                path = Path(replay_dir) / f"violation-{seed}.replay"
                write_replay(path, cex, make_target(cex.program) if cex.target is None else cex.target)
            result.violations.append((seed, cex, path))
    return result
