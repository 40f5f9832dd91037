"""Fresh names and capture-avoiding substitution."""

from __future__ import annotations

import re

from .ast import (
    Expr, Let, Program, Val, Var, children, rebuild, walk,
)

_SUFFIX = re.compile(r"%(\d+)$")


class Fresh:
    """Global counter producing ``base%N`` names.

    Names already carrying a ``%N`` suffix are stripped back to their base so
    that fresh names never stack suffixes.
    """

    def __init__(self, start: int = 0):
        self.counter = start

    def __call__(self, base: str) -> str:
        self.counter += 1
        return f"{_SUFFIX.sub('', base) or 'v'}%{self.counter}"

    def avoid(self, names) -> None:
        for n in names:
            m = _SUFFIX.search(n)
            if m:
                self.counter = max(self.counter, int(m.group(1)))

    @classmethod
    def for_program(cls, p: Program) -> "Fresh":
        fresh = cls()
        fresh.avoid(p.defs)
        for d in p.defs.values():
            fresh.avoid([d.param])
            fresh.avoid(binders(d.body))
        return fresh


def binders(e: Expr):
    for node in walk(e):
        if isinstance(node, Let):
            yield node.name
        elif isinstance(node, Var):
            yield node.name


def subst(e: Expr, x: str, v: Val) -> Expr:
    """Replace free occurrences of ``x`` in ``e`` by the closed value ``v``.

    Values are closed, so no capture can happen; binders of ``x`` shadow it.
    """
    if isinstance(e, Var):
        return v if e.name == x else e
    if isinstance(e, Val):
        return e
    if isinstance(e, Let):
        bound = subst(e.bound, x, v)
        body = e.body if e.name == x else subst(e.body, x, v)
        if bound is e.bound and body is e.body:
            return e
        return Let(e.name, bound, body)
    kids = children(e)
    new = [subst(k, x, v) for k in kids]
    if all(a is b for a, b in zip(kids, new)):
        return e
    return rebuild(e, new)


def rename_var(e: Expr, x: str, y: str) -> Expr:
    """Rename free occurrences of variable ``x`` to ``y``."""
    if isinstance(e, Var):
        return Var(y) if e.name == x else e
    if isinstance(e, Let):
        bound = rename_var(e.bound, x, y)
        body = e.body if e.name == x else rename_var(e.body, x, y)
        return Let(e.name, bound, body)
    kids = children(e)
    if not kids:
        return e
    return rebuild(e, [rename_var(k, x, y) for k in kids])


def freshen(e: Expr, fresh: Fresh, env: dict | None = None) -> Expr:
    """Alpha-rename every binder of ``e`` to a fresh name.

    ``env`` maps free variables to their replacement names.
    """
    env = env or {}
    if isinstance(e, Var):
        return Var(env.get(e.name, e.name))
    if isinstance(e, Let):
        bound = freshen(e.bound, fresh, env)
        if e.name == "_":
            return Let("_", bound, freshen(e.body, fresh, env))
        new = fresh(e.name)
        return Let(new, bound, freshen(e.body, fresh, {**env, e.name: new}))
    kids = children(e)
    if not kids:
        return e
    return rebuild(e, [freshen(k, fresh, env) for k in kids])
