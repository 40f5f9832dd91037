"""The TMC transformation.

Each subterm is summarized bottom-up by a :class:`Choice`: whether it
contains a call that would benefit from destination-passing style, which
call sites those are, and two lazily built translations, one returning the
value directly and one writing it to a destination.  Constructor blocks
combine the choices of their two fields and pick which field to evaluate in
destination-passing style.

With constructor compression, nested constructors on the path to a DPS call
are not allocated one by one: they are kept on a stack of delayed frames and
materialized together when a call or a branch is reached.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..lang.ast import (
    HOLE, PAIR, Annotated, Block, Call, Def, Expr, Fnptr, Idx, If, Let, Load, Program,
    Store, Val, Var, children, free_vars, rebuild, seq,
)
from ..lang.names import Fresh, rename_var

AMBIGUITY_MESSAGE = (
    "this constructor application may be TMC-transformed in several different "
    "ways. Please disambiguate by adding an explicit \"[@tailcall]\" attribute "
    "to the call that should be made tail-recursive, or a \"[@tailcall false]\" "
    "attribute on calls that should not be transformed."
)


class TmcWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CallSite:
    function: str  # enclosing definition
    callee: str
    path: tuple  # child indices from the definition body
    pos: Optional[tuple] = None  # (line, column) when parsed from text

    def describe(self) -> str:
        where = f"line {self.pos[0]}, column {self.pos[1]}" if self.pos else f"path {list(self.path)}"
        return f"call to {self.callee} at {where}"


class AmbiguityError(Exception):
    def __init__(self, function: str, tag: str, sites):
        self.function = function
        self.tag = tag
        self.sites = list(sites)
        lines = [f"Error: in function {function}, block #{tag}: {AMBIGUITY_MESSAGE}"]
        lines += [f"  {s.describe()}" for s in self.sites]
        super().__init__("\n".join(lines))


@dataclass
class Renaming:
    map: dict = field(default_factory=dict)

    def __contains__(self, f):
        return f in self.map

    def __getitem__(self, f):
        return self.map[f]

    def __len__(self):
        return len(self.map)


def plan_renaming(p: Program, suffix: str = "dps") -> Renaming:
    """Give every ``@tmc`` definition a fresh DPS name ``f.dps``."""
    taken = set(p.defs)
    out = {}
    for name, d in p.defs.items():
        if not d.annotated_tmc:
            continue
        candidate, k = f"{name}.{suffix}", 2
        while candidate in taken:
            candidate = f"{name}.{suffix}{k}"
            k += 1
        taken.add(candidate)
        out[name] = candidate
    return Renaming(out)


@dataclass(frozen=True)
class Dest:
    dst: Expr
    idx: Expr


ROOT = None  # destination of a direct-style block: the block is returned


@dataclass(frozen=True)
class Delayed:
    """A constructor whose hole field is still to be computed."""

    tag: str
    hole: int  # 1 or 2
    other: Expr  # a variable or a value

    def fill(self, v: Expr) -> Block:
        if self.hole == 1:
            return Block(self.tag, v, self.other)
        return Block(self.tag, self.other, v)


def _plug(stack, e: Expr) -> Expr:
    for frame in reversed(stack):
        e = frame.fill(e)
    return e


class Choice:
    """Summary of a subterm: does DPS help, and how to emit either style."""

    def __init__(self, benefits: bool, explicit: bool, calls: list,
                 direct: Callable[[], Expr], dps: Optional[Callable] = None):
        self.benefits_from_dps = benefits
        self.explicit_tailcall_request = explicit
        self.tmc_calls = calls
        self._direct = direct
        self._direct_cache: Optional[Expr] = None
        self._dps = dps

    def direct(self) -> Expr:
        if self._direct_cache is None:
            self._direct_cache = self._direct()
        return self._direct_cache

    def dps(self, dest, stack=()) -> Expr:
        if not self.benefits_from_dps or self._dps is None:
            return _base(dest, stack, self.direct())
        return self._dps(dest, tuple(stack))


def _base(dest, stack, e: Expr) -> Expr:
    v = _plug(stack, e)
    if dest is ROOT:
        return v
    return Store(dest.dst, dest.idx, v)


class Transformer:
    def __init__(self, p: Program, xi: Renaming, compression: bool = True,
                 allow_both_sides: bool = False, fresh: Optional[Fresh] = None):
        self.program = p
        self.xi = xi
        self.compression = compression
        self.allow_both_sides = allow_both_sides
        self.fresh = fresh or Fresh.for_program(p)
        self.function = "<expr>"

    def _warn(self, message: str):
        warnings.warn(f"in function {self.function}: {message}", TmcWarning, stacklevel=4)

    # -------------------------------------------------------- choices

    def analyze(self, e: Expr, path: tuple = ()) -> Choice:
        if isinstance(e, Annotated) and isinstance(e.expr, Call):
            return self._call(e.expr, path + (0,), e.tailcall)
        if isinstance(e, Call):
            return self._call(e, path, None)
        if isinstance(e, Let):
            return self._let(e, path)
        if isinstance(e, If):
            return self._if(e, path)
        if isinstance(e, Block):
            return self._block(e, path)
        return Choice(False, False, [], lambda: self.cong(e, path))

    def cong(self, e: Expr, path: tuple = ()) -> Expr:
        """Direct translation of a subterm outside tail or constructor position."""
        if isinstance(e, Annotated) and e.tailcall:
            self._warn("a call annotated [@tailcall] is not in tail or constructor position")
        if isinstance(e, (Annotated, Call, Let, If, Block)):
            return self.analyze(e, path).direct()
        kids = children(e)
        if not kids:
            return e
        return rebuild(e, [self.cong(k, path + (i,)) for i, k in enumerate(kids)])

    def _call(self, e: Call, path, annotation) -> Choice:
        fn = e.fn
        direct = lambda: Call(self.cong(e.fn, path + (0,)), self.cong(e.arg, path + (1,)), e.pos)
        explicit = annotation is True
        if not (isinstance(fn, Fnptr) and fn.name in self.xi) or annotation is False:
            if explicit:
                name = fn.name if isinstance(fn, Fnptr) else "an unknown function"
                self._warn(f"the call to {name} is annotated [@tailcall] "
                           "but is not a candidate for the TMC transformation")
            return Choice(False, explicit, [], direct)
        site = CallSite(self.function, fn.name, path, e.pos)
        target = self.xi[fn.name]

        def dps(dest, stack):
            arg = self.cong(e.arg, path + (1,))
            return self._reify(dest, stack, lambda d: Call(
                Fnptr(target), Block(PAIR, Block(PAIR, d.dst, d.idx), arg), e.pos))

        return Choice(True, explicit, [site], direct, dps)

    def _let(self, e: Let, path) -> Choice:
        body = self.analyze(e.body, path + (1,))
        bound = lambda: self.cong(e.bound, path + (0,))

        def dps(dest, stack):
            captured = set()
            for frame in stack:
                captured |= free_vars(frame.other)
            if e.name in captured:
                # The binder would capture a delayed field: rename it.
                name = self.fresh(e.name)
                inner = self.analyze(rename_var(e.body, e.name, name), path + (1,))
                return Let(name, bound(), inner.dps(dest, stack))
            return Let(e.name, bound(), body.dps(dest, stack))

        return Choice(body.benefits_from_dps, body.explicit_tailcall_request, body.tmc_calls,
                      lambda: Let(e.name, bound(), body.direct()), dps)

    def _if(self, e: If, path) -> Choice:
        then = self.analyze(e.then, path + (1,))
        orelse = self.analyze(e.orelse, path + (2,))
        cond = lambda: self.cong(e.cond, path + (0,))

        def dps(dest, stack):
            return self._reify(dest, stack, lambda d: If(cond(), then.dps(d), orelse.dps(d)))

        return Choice(
            then.benefits_from_dps or orelse.benefits_from_dps,
            then.explicit_tailcall_request or orelse.explicit_tailcall_request,
            then.tmc_calls + orelse.tmc_calls,
            lambda: If(cond(), then.direct(), orelse.direct()),
            dps,
        )

    def _block(self, e: Block, path) -> Choice:
        c1 = self.analyze(e.first, path + (0,))
        c2 = self.analyze(e.second, path + (1,))
        function = self.function
        resolved: list = []

        def side():
            if not resolved:
                saved, self.function = self.function, function
                try:
                    resolved.append(self.resolve(e.tag, c1, c2))
                finally:
                    self.function = saved
            return resolved[0]

        def direct():
            s = side()
            if s is None:
                return Block(e.tag, c1.direct(), c2.direct())
            if self.compression:
                return dps(ROOT, ())
            x = Var(self.fresh("dst"))
            if s == "both":
                return Let(x.name, Block(e.tag, HOLE, HOLE),
                           seq(c1.dps(Dest(x, Idx(1))), seq(c2.dps(Dest(x, Idx(2))), x)))
            if s == 2:
                return Let(x.name, Block(e.tag, c1.direct(), HOLE), seq(c2.dps(Dest(x, Idx(2))), x))
            return Let(x.name, Block(e.tag, HOLE, c2.direct()), seq(c1.dps(Dest(x, Idx(1))), x))

        def dps(dest, stack):
            s = side()
            if s is None:
                return _base(dest, stack, Block(e.tag, c1.direct(), c2.direct()))
            if s == "both":
                def both(d):
                    x = Var(self.fresh("dst"))
                    fill = seq(c1.dps(Dest(x, Idx(1))), c2.dps(Dest(x, Idx(2))))
                    if d is ROOT:
                        return Let(x.name, Block(e.tag, HOLE, HOLE), seq(fill, x))
                    return Let(x.name, Block(e.tag, HOLE, HOLE), seq(Store(d.dst, d.idx, x), fill))
                return self._reify(dest, stack, both)
            chosen, other = (c2, c1) if s == 2 else (c1, c2)
            if not self.compression:
                x = Var(self.fresh("dst"))
                block = Block(e.tag, other.direct(), HOLE) if s == 2 else Block(e.tag, HOLE, other.direct())
                return Let(x.name, block, seq(Store(dest.dst, dest.idx, x), chosen.dps(Dest(x, Idx(s)))))
            filled = other.direct()
            if isinstance(filled, (Var, Val)):
                return chosen.dps(dest, stack + (Delayed(e.tag, s, filled),))
            # Keep the sibling's effects at their original position.
            tmp = self.fresh("tmp")
            return Let(tmp, filled, chosen.dps(dest, stack + (Delayed(e.tag, s, Var(tmp)),)))

        return Choice(
            c1.benefits_from_dps or c2.benefits_from_dps,
            c1.explicit_tailcall_request or c2.explicit_tailcall_request,
            c1.tmc_calls + c2.tmc_calls,
            direct,
            dps,
        )

    def resolve(self, tag: str, c1: Choice, c2: Choice):
        """Pick the field evaluated in DPS: 1, 2, ``"both"`` or None."""
        b1, b2 = c1.benefits_from_dps, c2.benefits_from_dps
        x1, x2 = c1.explicit_tailcall_request, c2.explicit_tailcall_request
        for b, x, i in ((b1, x1, 1), (b2, x2, 2)):
            if x and not b:
                self._warn(f"field {i} of block #{tag} carries [@tailcall] "
                           "but has no call that benefits from TMC; ignoring it")
        if b1 and b2:
            if x1 and not x2:
                return 1
            if x2 and not x1:
                return 2
            if self.allow_both_sides:
                return "both"
            raise AmbiguityError(self.function, tag, c1.tmc_calls + c2.tmc_calls)
        if b1:
            return 1
        if b2:
            return 2
        return None

    # -------------------------------------------------------- emission

    def _reify(self, dest, stack, k: Callable[[Dest], Expr]) -> Expr:
        """Materialize the delayed constructors and continue with ``k``.

        The innermost delayed frame becomes the new destination; the outer
        frames are built around it in a single expression.
        """
        if not stack:
            return k(dest)
        inner = stack[-1]
        d = Var(self.fresh("dst"))
        hole_block = inner.fill(HOLE)
        value = _plug(stack[:-1], d)
        rest = k(Dest(d, Idx(inner.hole)))
        if dest is ROOT:
            if len(stack) == 1:
                return Let(d.name, hole_block, seq(rest, d))
            r = Var(self.fresh("dst"))
            return Let(d.name, hole_block, Let(r.name, value, seq(rest, r)))
        return Let(d.name, hole_block, seq(Store(dest.dst, dest.idx, value), rest))

    # -------------------------------------------------------- definitions

    def direct_def(self, name: str, d: Def) -> Def:
        self.function = name
        return Def(d.param, self.analyze(d.body).direct())

    def dps_def(self, name: str, d: Def) -> Def:
        self.function = name
        param = self.fresh("p")
        pair_var = self.fresh("d")
        dst = self.fresh("dst")
        idx = self.fresh("idx")
        body = self.analyze(d.body).dps(Dest(Var(dst), Var(idx)))
        body = Let(pair_var, Load(Var(param), Idx(1)),
                   Let(dst, Load(Var(pair_var), Idx(1)),
                       Let(idx, Load(Var(pair_var), Idx(2)),
                           Let(d.param, Load(Var(param), Idx(2)), body))))
        return Def(param, body)


def transform_program(p: Program, compression: bool = True,
                      allow_both_sides: bool = False) -> Program:
    """Return the TMC-transformed program.

    Every source definition keeps its name; each ``@tmc`` definition ``f``
    additionally gets a destination-passing variant ``f.dps``.
    """
    xi = plan_renaming(p)
    tr = Transformer(p, xi, compression, allow_both_sides)
    defs = {}
    for name, d in p.defs.items():
        defs[name] = tr.direct_def(name, d)
    for name, d in p.defs.items():
        if name in xi:
            defs[xi[name]] = tr.dps_def(name, d)
    return Program(defs, p.ints)


def transform_dps_def(p: Program, name: str, compression: bool = True,
                      allow_both_sides: bool = False) -> Def:
    """The DPS variant of one annotated definition of ``p``."""
    xi = plan_renaming(p)
    tr = Transformer(p, xi, compression, allow_both_sides)
    return tr.dps_def(name, p.defs[name])


def analyze(e: Expr, xi: Renaming, p: Optional[Program] = None,
            compression: bool = False) -> Choice:
    """Choice summary of a single expression (mainly for inspection)."""
    p = p or Program({})
    tr = Transformer(p, xi, compression)
    tr.fresh.avoid(free_vars(e))
    return tr.analyze(e)
