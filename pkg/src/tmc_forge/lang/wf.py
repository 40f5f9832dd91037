"""Well-formedness of source programs."""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    Annotated, BinOp, Block, BlockDet, Call, Expr, Fnptr, Int, Let, Loc,
    Program, Var, children,
)


@dataclass(frozen=True)
class WfError:
    kind: str  # LocInSource | DetBlockInSource | UndefinedFunction | UnboundVariable | IntWithoutExtension | BadAnnotation
    function: str
    detail: str = ""

    def __str__(self):
        extra = f"({self.detail})" if self.detail else ""
        return f"{self.kind}{extra} in function {self.function}"


class WfFailure(Exception):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(map(str, self.errors)))


def _check_expr(e: Expr, fn: str, p: Program, bound: frozenset, out: list, allow_det: bool):
    stack = [(e, bound)]
    while stack:
        node, env = stack.pop()
        if isinstance(node, Loc):
            out.append(WfError("LocInSource", fn, f"loc {node.id}"))
        elif isinstance(node, BlockDet) and not allow_det:
            out.append(WfError("DetBlockInSource", fn, node.tag))
        elif isinstance(node, Fnptr) and node.name not in p.defs:
            out.append(WfError("UndefinedFunction", fn, node.name))
        elif isinstance(node, Var) and node.name not in env:
            out.append(WfError("UnboundVariable", fn, node.name))
        elif isinstance(node, (Int, BinOp)) and not p.ints:
            out.append(WfError("IntWithoutExtension", fn))
        elif isinstance(node, Annotated) and not isinstance(node.expr, Call):
            out.append(WfError("BadAnnotation", fn))
        if isinstance(node, Let):
            stack.append((node.bound, env))
            stack.append((node.body, env | {node.name}))
        else:
            stack.extend((k, env) for k in children(node))


def check_wf_source(p: Program) -> list:
    """Return the list of well-formedness errors of ``p`` (empty when ok)."""
    out: list = []
    for name, d in p.defs.items():
        _check_expr(d.body, name, p, frozenset({d.param}), out, allow_det=False)
    return _dedup(out)


def check_wf_value(v: Expr, p: Program) -> list:
    """Check an input literal: closed, location free, functions defined."""
    out: list = []
    _check_expr(v, "<input>", p, frozenset(), out, allow_det=False)
    return _dedup(out)


def _dedup(errors):
    seen, out = set(), []
    for e in errors:
        if e not in seen:
            seen.add(e)
            out.append(e)
    return out


def require_wf(p: Program) -> Program:
    errors = check_wf_source(p)
    if errors:
        raise WfFailure(errors)
    return p


def is_literal(e: Expr) -> bool:
    """True for data literals: values and blocks of literals."""
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Block):
            stack.extend((node.first, node.second))
        elif not isinstance(node, (Var, Let, Call)) and not children(node):
            continue
        else:
            return False
    return True
