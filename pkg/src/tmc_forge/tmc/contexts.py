"""Classification of call sites by the frames separating them from the root.

Tail frames are ``let x = e in []`` and the branches of ``if``; constructor
frames are the two fields of ``block``.  Annotations are transparent.
"""

from __future__ import annotations

from enum import Enum

from ..lang.ast import Annotated, Block, Call, Expr, If, Let, children


class Position(str, Enum):
    TAIL = "Tail"
    TMC_ONLY = "TmcOnly"
    NEITHER = "Neither"


def _frame_kind(e: Expr, i: int) -> str:
    if isinstance(e, Let):
        return "tail" if i == 1 else "other"
    if isinstance(e, If):
        return "tail" if i > 0 else "other"
    if isinstance(e, Block):
        return "cons"
    if isinstance(e, Annotated):
        return "transparent"
    return "other"


def classify_contexts(e: Expr) -> dict:
    """Map the path of every Call in ``e`` to its :class:`Position`.

    Paths are tuples of child indices as used by ``at_path``.
    """
    out = {}
    # (node, path, crossed a constructor frame, crossed another frame)
    todo = [(e, (), False, False)]
    while todo:
        node, path, cons, other = todo.pop()
        if isinstance(node, Call):
            if other:
                out[path] = Position.NEITHER
            elif cons:
                out[path] = Position.TMC_ONLY
            else:
                out[path] = Position.TAIL
        for i, kid in enumerate(children(node)):
            kind = _frame_kind(node, i)
            todo.append((kid, path + (i,), cons or kind == "cons", other or kind == "other"))
    return out


def calls_to(e: Expr, names) -> dict:
    """Like :func:`classify_contexts` restricted to direct calls of ``names``."""
    from ..lang.ast import Fnptr, at_path

    names = set(names)
    return {
        path: pos
        for path, pos in classify_contexts(e).items()
        if isinstance(at_path(e, path).fn, Fnptr) and at_path(e, path).fn.name in names
    }
