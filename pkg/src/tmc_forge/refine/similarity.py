"""Value similarity between a source and a target heap."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..lang.ast import Loc, Val
from ..semantics import Heap, eq_val


class Observation(str, Enum):
    SHALLOW = "shallow"
    DEEP = "deep"


@dataclass
class Bijection:
    """Injective partial map from source to target locations; grows only."""

    pairs: dict = field(default_factory=dict)
    _inverse: dict = field(default_factory=dict, repr=False)

    def relate(self, s: int, t: int) -> bool:
        """Record ``s ~ t``; False when that would break injectivity."""
        if s in self.pairs:
            return self.pairs[s] == t
        if t in self._inverse:
            return False
        self.pairs[s] = t
        self._inverse[t] = s
        return True

    def is_injective(self) -> bool:
        return len(set(self.pairs.values())) == len(self.pairs)

    def __len__(self):
        return len(self.pairs)


@dataclass
class Similarity:
    ok: bool
    bijection: Bijection

    def __bool__(self):
        return self.ok


def similar(obs, heap_s: Heap, v_s: Val, heap_t: Heap, v_t: Val,
            bijection: Bijection = None) -> Similarity:
    """Decide whether ``v_s`` (in ``heap_s``) and ``v_t`` (in ``heap_t``) are similar.

    Shallow observation relates any two locations.  Deep observation walks
    both heaps in lockstep: two locations are related when their tags and
    both fields are related, with the bijection closing cycles.
    """
    bij = bijection if bijection is not None else Bijection()
    if Observation(obs) is Observation.SHALLOW:
        ok = (isinstance(v_s, Loc) and isinstance(v_t, Loc)) or eq_val(v_s, v_t)
        return Similarity(ok, bij)
    todo = [(v_s, v_t)]
    while todo:
        a, b = todo.pop()
        if isinstance(a, Loc) and isinstance(b, Loc):
            known = a.id in bij.pairs
            if not bij.relate(a.id, b.id):
                return Similarity(False, bij)
            if known:
                continue
            block_s = heap_s.blocks.get(a.id)
            block_t = heap_t.blocks.get(b.id)
            if block_s is None or block_t is None:
                if block_s is not block_t:
                    return Similarity(False, bij)
                continue
            todo.extend(zip(block_s, block_t))
        elif not eq_val(a, b):
            return Similarity(False, bij)
    return Similarity(True, bij)
