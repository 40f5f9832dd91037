"""Two further program rewrites checked with the same refinement machinery.

* Inlining replaces ``@f(a)`` by ``let x = a in body_f``, recursively up to a
  depth bound.
* Accumulator-passing style (APS) makes calls in arithmetic contexts
  ``e + []`` (and, behind a flag, ``e * []``) tail calls of a variant
  ``f.aps`` satisfying ``f.aps(acc, v) = acc + f(v)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

from .lang.ast import (
    ADD, MUL, Annotated, BinOp, Block, Call, Def, Expr, Fnptr, Idx, If, Int, Let,
    Load, Program, Val, Var, children, free_vars, rebuild,
)
from .lang.names import Fresh, freshen, rename_var
from .tmc.transform import AmbiguityError, CallSite, Renaming, TmcWarning

# ---------------------------------------------------------------- inlining


@dataclass(frozen=True)
class InlinePolicy:
    max_depth: int = 1
    target_fns: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")
        object.__setattr__(self, "target_fns", frozenset(self.target_fns))


def inline_transform(p: Program, policy: InlinePolicy) -> Program:
    """Inline calls to ``policy.target_fns`` up to ``policy.max_depth`` levels.

    Only direct calls ``@f(a)`` are inlined; function pointers flowing
    through variables are left alone.  Inlined bodies are alpha-renamed so
    the output stays well scoped with globally unique binders.
    """
    if policy.max_depth == 0 or not policy.target_fns:
        return p
    fresh = Fresh.for_program(p)

    def go(e: Expr, depth: int) -> Expr:
        if isinstance(e, Annotated) and isinstance(e.expr, Call):
            inner = go(e.expr, depth)
            return inner if not isinstance(inner, Call) else Annotated(inner, e.tailcall)
        if isinstance(e, Call) and isinstance(e.fn, Fnptr) and e.fn.name in policy.target_fns \
                and e.fn.name in p.defs and depth > 0:
            d = p.defs[e.fn.name]
            x = fresh(d.param)
            body = freshen(d.body, fresh, {d.param: x})
            return Let(x, go(e.arg, depth), go(body, depth - 1))
        kids = children(e)
        if not kids:
            return e
        return rebuild(e, [go(k, depth) for k in kids])

    return Program({name: Def(d.param, go(d.body, policy.max_depth), d.annotated_tmc)
                    for name, d in p.defs.items()}, p.ints)


# ---------------------------------------------------------------- APS


def plan_aps_renaming(p: Program) -> Renaming:
    """Every ``@tmc``-annotated definition gets a fresh ``f.aps`` variant."""
    from .tmc.transform import plan_renaming

    return plan_renaming(p, suffix="aps")


def _simple(e: Expr) -> bool:
    return isinstance(e, (Var, Val))


@dataclass(frozen=True)
class Acc:
    """Accumulated context ``add + mul * []``; ``mul`` None stands for 1."""

    add: Expr
    mul: Optional[Expr] = None

    def apply(self, e: Expr) -> Expr:
        return BinOp(ADD, self.add, e if self.mul is None else BinOp(MUL, self.mul, e))

    def plus(self, e: Expr) -> "Acc":
        return Acc(self.apply(e), self.mul)

    def times(self, e: Expr) -> "Acc":
        return Acc(self.add, e if self.mul is None else BinOp(MUL, self.mul, e))

    def free(self) -> set:
        out = free_vars(self.add)
        if self.mul is not None:
            out |= free_vars(self.mul)
        return out


class _ApsChoice:
    def __init__(self, benefits, explicit, calls, direct: Callable, aps: Optional[Callable] = None):
        self.benefits_from_dps = benefits
        self.explicit_tailcall_request = explicit
        self.tmc_calls = calls
        self._direct = direct
        self._aps = aps

    def direct(self) -> Expr:
        return self._direct()

    def aps(self, acc: Acc) -> Expr:
        if not self.benefits_from_dps or self._aps is None:
            return acc.apply(self.direct())
        return self._aps(acc)


class _ApsTransformer:
    def __init__(self, p: Program, xi: Renaming, affine: bool):
        self.p = p
        self.xi = xi
        self.affine = affine
        self.fresh = Fresh.for_program(p)
        self.function = "<expr>"

    def cong(self, e: Expr, path=()) -> Expr:
        if isinstance(e, (Annotated, Call, Let, If, BinOp)):
            return self.analyze(e, path).direct()
        kids = children(e)
        if not kids:
            return e
        return rebuild(e, [self.cong(k, path + (i,)) for i, k in enumerate(kids)])

    def leaf(self, e: Expr, path) -> _ApsChoice:
        return _ApsChoice(False, False, [], lambda: self.cong_kids(e, path))

    def cong_kids(self, e: Expr, path) -> Expr:
        kids = children(e)
        if not kids:
            return e
        return rebuild(e, [self.cong(k, path + (i,)) for i, k in enumerate(kids)])

    def analyze(self, e: Expr, path=()) -> _ApsChoice:
        if isinstance(e, Annotated) and isinstance(e.expr, Call):
            return self._call(e.expr, path + (0,), e.tailcall)
        if isinstance(e, Call):
            return self._call(e, path, None)
        if isinstance(e, Let):
            body = self.analyze(e.body, path + (1,))

            def aps(acc: Acc):
                bound = self.cong(e.bound, path + (0,))
                if e.name in acc.free():
                    name = self.fresh(e.name)
                    inner = self.analyze(rename_var(e.body, e.name, name), path + (1,))
                    return Let(name, bound, inner.aps(acc))
                return Let(e.name, bound, body.aps(acc))

            return _ApsChoice(body.benefits_from_dps, body.explicit_tailcall_request, body.tmc_calls,
                              lambda: Let(e.name, self.cong(e.bound, path + (0,)), body.direct()), aps)
        if isinstance(e, If):
            t = self.analyze(e.then, path + (1,))
            f = self.analyze(e.orelse, path + (2,))
            cond = lambda: self.cong(e.cond, path + (0,))
            return _ApsChoice(
                t.benefits_from_dps or f.benefits_from_dps,
                t.explicit_tailcall_request or f.explicit_tailcall_request,
                t.tmc_calls + f.tmc_calls,
                lambda: If(cond(), t.direct(), f.direct()),
                lambda acc: If(cond(), t.aps(acc), f.aps(acc)),
            )
        if isinstance(e, BinOp) and (e.op == ADD or self.affine):
            return self._binop(e, path)
        return self.leaf(e, path)

    def _call(self, e: Call, path, annotation) -> _ApsChoice:
        direct = lambda: Call(self.cong(e.fn, path + (0,)), self.cong(e.arg, path + (1,)), e.pos)
        fn = e.fn
        explicit = annotation is True
        if not (isinstance(fn, Fnptr) and fn.name in self.xi) or annotation is False:
            return _ApsChoice(False, explicit, [], direct)
        target = self.xi[fn.name]

        def aps(acc: Acc):
            packed = acc.add if not self.affine else Block("PAIR", acc.add, acc.mul or Int(1))
            return Call(Fnptr(target), Block("PAIR", packed, self.cong(e.arg, path + (1,))), e.pos)

        return _ApsChoice(True, explicit, [CallSite(self.function, fn.name, path, e.pos)], direct, aps)

    def _binop(self, e: BinOp, path) -> _ApsChoice:
        cl = self.analyze(e.left, path + (0,))
        cr = self.analyze(e.right, path + (1,))
        function = self.function
        # The right operand is evaluated first.  A call on the right may only
        # be accumulated when the left operand is simple, since accumulating
        # evaluates that operand before the call.  A call on the left comes
        # after its sibling, which is let-bound in place when needed.
        usable_r = cr.benefits_from_dps and _simple(e.left)
        usable_l = cl.benefits_from_dps
        resolved: list = []

        def side():
            if not resolved:
                resolved.append(self._resolve(function, e.op, cl, cr, usable_l, usable_r))
            return resolved[0]

        def fold(acc: Optional[Acc], s) -> Expr:
            chosen = cr if s == 2 else cl
            other = self.cong(e.left, path + (0,)) if s == 2 else self.cong(e.right, path + (1,))
            binder = None
            if not _simple(other):
                binder = self.fresh("tmp")
                bound, other = other, Var(binder)
            one = Int(1) if self.affine else None
            if acc is None:  # direct style: start a fresh accumulator
                new = Acc(other, one) if e.op == ADD else Acc(Int(0), other)
            else:
                new = acc.plus(other) if e.op == ADD else acc.times(other)
            body = chosen.aps(new)
            return body if binder is None else Let(binder, bound, body)

        def direct():
            s = side()
            if s is None:
                return BinOp(e.op, cl.direct(), cr.direct())
            return fold(None, s)

        def aps(acc: Acc):
            s = side()
            if s is None:
                return acc.apply(BinOp(e.op, cl.direct(), cr.direct()))
            return fold(acc, s)

        calls = (cl.tmc_calls if usable_l else []) + (cr.tmc_calls if usable_r else [])
        return _ApsChoice(usable_l or usable_r,
                          cl.explicit_tailcall_request or cr.explicit_tailcall_request,
                          calls, direct, aps)

    def _resolve(self, function, op, cl, cr, usable_l, usable_r):
        xl, xr = cl.explicit_tailcall_request, cr.explicit_tailcall_request
        if usable_l and usable_r:
            if xl and not xr:
                return 1
            if xr and not xl:
                return 2
            raise AmbiguityError(function, f"({op})", cl.tmc_calls + cr.tmc_calls)
        if usable_l:
            return 1
        if usable_r:
            return 2
        if cr.benefits_from_dps and not usable_r:
            warnings.warn(f"in function {function}: the left operand of {op} is not a variable "
                          "or a literal, so the call on its right is not accumulated", TmcWarning)
        return None

    def aps_def(self, name: str, d: Def) -> Def:
        self.function = name
        param = self.fresh("p")
        acc = self.fresh("acc")
        body: Expr
        if self.affine:
            pair_var, mul = self.fresh("a"), self.fresh("mul")
            body = self.analyze(d.body).aps(Acc(Var(acc), Var(mul)))
            body = Let(d.param, Load(Var(param), Idx(2)), body)
            body = Let(pair_var, Load(Var(param), Idx(1)),
                       Let(acc, Load(Var(pair_var), Idx(1)),
                           Let(mul, Load(Var(pair_var), Idx(2)), body)))
        else:
            body = self.analyze(d.body).aps(Acc(Var(acc)))
            body = Let(acc, Load(Var(param), Idx(1)), Let(d.param, Load(Var(param), Idx(2)), body))
        return Def(param, body)

    def direct_def(self, name: str, d: Def) -> Def:
        self.function = name
        return Def(d.param, self.analyze(d.body).direct())


def aps_transform(p: Program, affine: bool = False) -> Program:
    """Accumulator-passing-style transformation of the ``@tmc`` functions.

    Each annotated ``f`` gets a variant ``f.aps`` taking ``(acc, x)``;
    with ``affine`` it takes ``((acc, k), x)`` and returns ``acc + k * f(x)``.
    """
    if not p.ints:
        raise ValueError("the APS transformation needs the integer extension (@ints)")
    xi = plan_aps_renaming(p)
    tr = _ApsTransformer(p, xi, affine)
    defs = {name: tr.direct_def(name, d) for name, d in p.defs.items()}
    for name, d in p.defs.items():
        if name in xi:
            defs[xi[name]] = tr.aps_def(name, d)
    return Program(defs, p.ints)
