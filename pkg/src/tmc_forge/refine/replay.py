"""Replay files: a self-contained textual record of a refinement violation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..lang.ast import Call, Expr, Fnptr, Program
from ..lang.syntax import parse_expr, parse_program, print_expr, print_program
from ..semantics import Scheduler, run
from .similarity import Observation

HEADER = "# tmc-forge replay"


@dataclass
class Replay:
    source: Program
    target: Program
    fn: str
    arg: Expr
    bits: tuple
    obs: Observation

    def run_target(self, budget: int = 50_000):
        """Re-run the recorded target schedule."""
        return run(self.target, Call(Fnptr(self.fn), self.arg), Scheduler.enumerate(self.bits), budget)


def format_replay(cex, target: Program) -> str:
    call = print_expr(Call(Fnptr(cex.fn), cex.arg), ints=cex.program.ints).replace("\n", " ")
    lines = [
        HEADER,
        f"observation: {Observation(cex.obs).value}",
        f"call: {call}",
        f"bits: {''.join(map(str, cex.bits))}",
        f"source-nodes: {cex.size}",
        "--- source",
        print_program(cex.program).rstrip(),
        "--- target",
        print_program(target).rstrip(),
        "",
    ]
    return "\n".join(lines)


def write_replay(path, cex, target: Program) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_replay(cex, target), encoding="utf-8")
    return path


def parse_replay(text: str) -> Replay:
    head, sep, rest = text.partition("\n--- source\n")
    if not sep or not head.startswith(HEADER):
        raise ValueError("not a replay file")
    source_text, sep, target_text = rest.partition("\n--- target\n")
    if not sep:
        raise ValueError("replay file has no target section")
    fields = {}
    for line in head.splitlines()[1:]:
        key, _, value = line.partition(":")
        fields[key.strip()] = value.strip()
    source = parse_program(source_text)
    target = parse_program(target_text)
    call = parse_expr(fields["call"], ints=source.ints)
    if not (isinstance(call, Call) and isinstance(call.fn, Fnptr)):
        raise ValueError("replay call must be a direct call")
    bits = tuple(int(c) for c in fields.get("bits", ""))
    return Replay(source, target, call.fn.name, call.arg, bits,
                  Observation(fields.get("observation", "deep")))


def read_replay(path) -> Replay:
    return parse_replay(Path(path).read_text(encoding="utf-8"))
