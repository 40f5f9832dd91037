"""Input suites: location-free list values substituted into call templates.

Corpus files carry directives such as ``(*! check map(&not_fn, $xs) *)``;
each ``$name`` placeholder is replaced by sampled lists of the requested
sizes.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass

from ..lang.ast import CONS, Block, Bool, Call, Expr, Fnptr, Int, Tag, Unit
from ..lang.syntax import parse_expr

ELEMENTS = {
    "bool": (Bool(True), Bool(False)),
    "tag": (Tag("A"), Tag("B")),
    "mixed": (Bool(True), Bool(False), Tag("A"), Tag("B")),
    "int": tuple(Int(n) for n in range(-3, 4)),
}

_PLACEHOLDER = re.compile(r"\$[A-Za-z_][A-Za-z0-9_]*")


def list_literal(items) -> Expr:
    e: Expr = Unit()
    for it in reversed(list(items)):
        e = Block(CONS, it, e)
    return e


def tree_literal(items) -> Expr:
    """A balanced binary tree whose leaves hold ``items`` (at least one leaf).

    ``Leaf x`` is ``block #LEAF (x, ())`` and ``Node(l, r)`` is
    ``block #NODE (l, r)``.
    """
    items = list(items) or [Bool(False)]
    if len(items) == 1:
        return Block("LEAF", items[0], Unit())
    mid = len(items) // 2
    return Block("NODE", tree_literal(items[:mid]), tree_literal(items[mid:]))


SHAPES = {"list": list_literal, "tree": tree_literal}


def sample_lists(n: int, elems: str = "bool", samples: int = 2, seed: int = 0) -> list:
    """Up to ``samples`` distinct lists of length ``n``, deterministic in ``seed``."""
    pool = ELEMENTS[elems]
    if n == 0:
        return [[]]
    rng = random.Random(f"{seed}:{elems}:{n}")
    out: list = [[pool[i % len(pool)] for i in range(n)]]
    tries = 0
    while len(out) < samples and tries < 50:
        tries += 1
        cand = [rng.choice(pool) for _ in range(n)]
        if cand not in out:
            out.append(cand)
    return out


@dataclass(frozen=True)
class CallTemplate:
    text: str
    ints: bool = False

    @property
    def placeholders(self) -> list:
        return sorted(set(_PLACEHOLDER.findall(self.text)))

    def instantiate(self, values: dict) -> tuple:
        e = parse_expr(self.text, ints=self.ints, placeholders=values)
        if not (isinstance(e, Call) and isinstance(e.fn, Fnptr)):
            raise ValueError(f"call template must be a direct call: {self.text}")
        return e.fn.name, e.arg


def build_suite(template: CallTemplate, sizes, elems: str = "bool", samples: int = 2,
                seed: int = 0, shape: str = "list") -> list:
    """``(fn, arg)`` pairs: every placeholder gets a value of each size in turn.

    The size of a tree is its number of leaves.
    """
    make = SHAPES[shape]
    suite = []
    names = template.placeholders
    for n in sizes:
        variants = sample_lists(n, elems, samples, seed)
        for k, items in enumerate(variants):
            values = {}
            for j, name in enumerate(names):
                # distinct placeholders get distinct samples of the same size
                values[name] = make(variants[(k + j) % len(variants)])
            suite.append(template.instantiate(values))
    return suite


def parse_sizes(text: str) -> range:
    """``"0..6"`` or ``"3"`` to an inclusive range."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return range(int(lo), int(hi) + 1)
    n = int(text)
    return range(n, n + 1)


@dataclass
class Directives:
    checks: list
    benches: list
    elems: str = "bool"
    shape: str = "list"

    @classmethod
    def parse(cls, lines, ints: bool = False) -> "Directives":
        checks, benches, elems, shape = [], [], "bool", "list"
        for line in lines:
            word, _, rest = line.partition(" ")
            rest = rest.strip()
            if word == "check":
                checks.append(CallTemplate(rest, ints))
            elif word == "bench":
                benches.append(CallTemplate(rest, ints))
            elif word == "elems":
                if rest not in ELEMENTS:
                    raise ValueError(f"unknown element kind {rest!r}")
                elems = rest
            elif word == "shape":
                if rest not in SHAPES:
                    raise ValueError(f"unknown input shape {rest!r}")
                shape = rest
            else:
                raise ValueError(f"unknown directive {word!r}")
        return cls(checks, benches, elems, shape)

    def suite(self, sizes, samples: int = 2, seed: int = 0) -> list:
        out = []
        for t in self.checks:
            out.extend(build_suite(t, sizes, self.elems, samples, seed, self.shape))
        return out
