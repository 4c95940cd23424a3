"""Tokenizer and line taxonomy.

The scanner kernel exists twice: gtrans.lexer._pylex (pure Python) and
gtrans.lexer._speedups (optional Cython build of the same loop).  The
compiled one is picked at import when present; set GTRANS_PURE=1 in the
environment to force the fallback.  Everything above the kernel lives
here and is shared by both.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field

from ..errors import LexError, NO_POS, Position
from . import _pylex
from ._pylex import ScanError

if os.environ.get("GTRANS_PURE"):
    _scan = _pylex.scan
    USING_COMPILED = False
else:
    try:
        from . import _speedups  # type: ignore[attr-defined]
    except ImportError:
        _scan = _pylex.scan
        USING_COMPILED = False
    else:
        _scan = _speedups.scan
        USING_COMPILED = True


class TokenKind(enum.IntEnum):
    IDENTIFIER = 0
    INTEGER = 1
    STRING = 2
    OPERATOR = 3
    PUNCTUATION = 4
    # first token of a line when it starts with '#' or '@'
    DIRECTIVE_KEY = 5


class LineKind(enum.Enum):
    BLANK = "blank"
    SOURCE_DIRECTIVE = "source-directive"
    DEST_DIRECTIVE = "dest-directive"
    CLASS_DEFINITION = "class-definition"
    CLASS_BODY_DELIMITER = "class-body-delimiter"
    LABEL = "label"
    SYMBOL_SUBSTITUTION = "symbol-substitution"
    ASSIGNMENT = "assignment"
    DATA_EMISSION = "data-emission"
    PLAIN = "plain"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    value: int = 0
    pos: Position = field(default=NO_POS, compare=False)

    def is_op(self, text: str) -> bool:
        return self.kind is TokenKind.OPERATOR and self.text == text

    def is_punct(self, text: str) -> bool:
        return self.kind is TokenKind.PUNCTUATION and self.text == text

    @property
    def string_text(self) -> str:
        """Contents of a string literal, quotes stripped."""
        return self.text[1:-1]

    def __repr__(self) -> str:  # keeps test failures readable
        return f"Token({self.kind.name}, {self.text!r})"


@dataclass(frozen=True)
class Line:
    tokens: tuple[Token, ...]
    kind: LineKind
    pos: Position

    def render(self) -> str:
        return render(self.tokens)


DATA_KEYWORDS = frozenset(
    {"db", "dw", "dd", "dp", "dq", "rb", "rw", "rd", "rp", "rq"}
)


def tokenize(text: str, file: str = "<input>", line: int = 1) -> list[Token]:
    """Tokenize one line of text.

    The first token of the line is the only place a '#' or '@' name is a
    directive key; the same spelling later in a line is a plain
    identifier, which is what lets a class be named '#define'.
    """
    try:
        raw = _scan(text)
    except ScanError as exc:
        raise LexError(exc.message, Position(file, line, exc.column)) from None
    tokens: list[Token] = []
    for kind, tok_text, value, col in raw:
        tk = TokenKind(kind)
        if not tokens and tk is TokenKind.IDENTIFIER and tok_text[0] in "#@":
            tk = TokenKind.DIRECTIVE_KEY
        tokens.append(Token(tk, tok_text, value, Position(file, line, col)))
    return tokens


def render(tokens) -> str:
    """Canonical text of a token sequence: single spaces between tokens."""
    return " ".join(t.text for t in tokens)


def _dotted_name_end(tokens) -> int:
    """Index just past a leading ident ('.' ident)* chain."""
    j = 1
    while (
        j + 1 < len(tokens)
        and tokens[j].is_punct(".")
        and tokens[j + 1].kind is TokenKind.IDENTIFIER
    ):
        j += 2
    return j


def classify(tokens) -> LineKind:
    """Decide what shape a token line has.  Pure and total.

    Shapes are recognized in a fixed order; in particular a leading data
    keyword followed by '=' is an assignment to that name, not an
    emission, and only a whole line of the form 'name:' is a label.
    """
    if not tokens:
        return LineKind.BLANK
    t0 = tokens[0]
    starts_directive = t0.kind is TokenKind.DIRECTIVE_KEY or (
        t0.kind is TokenKind.IDENTIFIER and t0.text[0] in "#@"
    )
    if starts_directive:
        if t0.text[0] == "#":
            return LineKind.SOURCE_DIRECTIVE
        return LineKind.DEST_DIRECTIVE
    if t0.kind is TokenKind.PUNCTUATION and t0.text in ("{", "}"):
        return LineKind.CLASS_BODY_DELIMITER
    if t0.kind is not TokenKind.IDENTIFIER:
        return LineKind.PLAIN
    if t0.text == "class":
        return LineKind.CLASS_DEFINITION
    j = _dotted_name_end(tokens)
    if j < len(tokens):
        t = tokens[j]
        if t.is_punct(":") and j == len(tokens) - 1:
            return LineKind.LABEL
        if t.is_op(":=") and j == 1:
            return LineKind.SYMBOL_SUBSTITUTION
        if t.is_op("="):
            return LineKind.ASSIGNMENT
    if t0.text in DATA_KEYWORDS:
        return LineKind.DATA_EMISSION
    return LineKind.PLAIN


def make_line(tokens, pos: Position) -> Line:
    return Line(tuple(tokens), classify(tokens), pos)


def tokenize_lines(text: str, file: str = "<input>") -> list[Line]:
    """Tokenize a whole text, one Line per physical line, numbered from 1."""
    lines: list[Line] = []
    for num, raw in enumerate(text.split("\n"), start=1):
        tokens = tokenize(raw, file, num)
        lines.append(Line(tuple(tokens), classify(tokens), Position(file, num, 1)))
    return lines


__all__ = [
    "DATA_KEYWORDS",
    "Line",
    "LineKind",
    "Token",
    "TokenKind",
    "USING_COMPILED",
    "classify",
    "make_line",
    "render",
    "tokenize",
    "tokenize_lines",
]
