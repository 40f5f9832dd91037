"""Example programs shipped with the package."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from ..lang.ast import Program
from ..lang.syntax import parse_file
from ..refine.inputs import Directives

# Programs whose TMC transformation is checked end to end.
REFINEMENT_CORPUS = ("map", "filter", "merge", "dup", "tree_of_list")


@dataclass
class CorpusEntry:
    name: str
    text: str
    program: Program
    directives: Directives


def names() -> list:
    return sorted(p.name[:-3] for p in resources.files(__package__).iterdir() if p.name.endswith(".dl"))


def read_text(name: str) -> str:
    return resources.files(__package__).joinpath(f"{name}.dl").read_text(encoding="utf-8")


def load_text(text: str, name: str = "<input>") -> CorpusEntry:
    program, lines = parse_file(text)
    return CorpusEntry(name, text, program, Directives.parse(lines, program.ints))


def load(name: str) -> CorpusEntry:
    return load_text(read_text(name), name)
