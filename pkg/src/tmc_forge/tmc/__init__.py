"""Tail modulo constructor transformation."""

from .contexts import Position, calls_to, classify_contexts  # noqa: F401
from .transform import (  # noqa: F401
    AMBIGUITY_MESSAGE, AmbiguityError, CallSite, Choice, Delayed, Dest, Renaming,
    TmcWarning, Transformer, analyze, plan_renaming, transform_dps_def,
    transform_program,
)
