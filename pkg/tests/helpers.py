"""Small utilities shared by the test modules."""

from __future__ import annotations

from tmc_forge.lang import Let, Var, children
from tmc_forge.lang.ast import Annotated, BinOp, Block, BlockDet


def alpha_eq(a, b, env=None, inv=None) -> bool:
    """Structural equality up to a consistent renaming of variables.

    Free variables are matched through the same injective map, so a
    golden shape may use its own names for them.
    """
    env = {} if env is None else env
    inv = {} if inv is None else inv
    if isinstance(a, Var) and isinstance(b, Var):
        if a.name in env or b.name in inv:
            return env.get(a.name) == b.name and inv.get(b.name) == a.name
        env[a.name], inv[b.name] = b.name, a.name
        return True
    if type(a) is not type(b):
        return False
    if isinstance(a, Let):
        if not alpha_eq(a.bound, b.bound, env, inv):
            return False
        old_b, old_a = env.get(a.name), inv.get(b.name)
        env[a.name], inv[b.name] = b.name, a.name
        ok = alpha_eq(a.body, b.body, env, inv)
        _restore(env, a.name, old_b)
        _restore(inv, b.name, old_a)
        return ok
    if isinstance(a, (Block, BlockDet)) and a.tag != b.tag:
        return False
    if isinstance(a, BinOp) and a.op != b.op:
        return False
    if isinstance(a, Annotated) and a.tailcall != b.tailcall:
        return False
    ka, kb = children(a), children(b)
    if not ka and not kb:
        return a == b
    return len(ka) == len(kb) and all(alpha_eq(x, y, env, inv) for x, y in zip(ka, kb))


def _restore(d, key, old):
    if old is None:
        d.pop(key, None)
    else:
        d[key] = old
