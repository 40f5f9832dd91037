"""Similarity, bounded refinement checking, fuzzing and shrinking."""

from .check import (  # noqa: F401
    IllFormedInput, ProgramReport, RefinementReport, Verdict, check_program_refinement,
    check_refinement,
)
from .inputs import (  # noqa: F401
    CallTemplate, Directives, build_suite, list_literal, parse_sizes, sample_lists, tree_literal,
)
from .similarity import Bijection, Observation, Similarity, similar  # noqa: F401
from .fuzz import (  # noqa: F401
    Counterexample, FuzzResult, GenConfig, fuzz, fuzz_suite, gen_program, shrink,
)
from .replay import Replay, format_replay, parse_replay, read_replay, write_replay  # noqa: F401
