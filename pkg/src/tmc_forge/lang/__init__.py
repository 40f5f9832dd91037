"""DataLang: syntax, values, programs and source well-formedness."""

from .ast import *  # noqa: F401,F403
from .names import Fresh, freshen, rename_var, subst  # noqa: F401
from .syntax import (  # noqa: F401
    ParseError, UnknownAnnotation, parse_expr, parse_file, parse_program,
    print_expr, print_program, print_value,
)
from .wf import (  # noqa: F401
    WfError, WfFailure, check_wf_source, check_wf_value, is_literal, require_wf,
)
