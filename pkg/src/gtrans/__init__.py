"""gtrans: a rule-driven two-phase translator.

Source text is interpreted twice.  The first pass executes `#` control
directives and expands user-defined pattern classes, producing a flat
intermediate stream of tokens.  The second pass executes `@` directives
over that stream, resolves labels in two sweeps, and emits a byte image.
"""

from .errors import (
    EmitError,
    EvalError,
    InternalError,
    LexError,
    LimitError,
    Position,
    StructureError,
    TranslationError,
    UnresolvedNameError,
    UsageError,
    UserAbort,
)

__version__ = "0.1.0"

__all__ = [
    "EmitError",
    "EvalError",
    "InternalError",
    "LexError",
    "LimitError",
    "Position",
    "StructureError",
    "TranslationError",
    "UnresolvedNameError",
    "UsageError",
    "UserAbort",
    "__version__",
]
