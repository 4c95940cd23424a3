"""Second pass: '@' directives, labels, and byte emission.

The intermediate stream is executed twice with identical control flow.
The sizing run assigns every label its offset, treating any name it has
not seen yet as zero inside data values; the final run re-executes with
the complete label table and writes the image.  Conditions, assignment
right sides and reserve counts always resolve strictly against names
defined so far, in both runs, so control flow and sizes cannot differ
between them.  Only data values and reserve fills may look forward.

Before either run, '@if [name]' blocks are treated as guarded regions:
a region stays only while its name is referenced from somewhere outside
every region of that name.  Starting from all regions included, regions
whose names lose their references are dropped until nothing changes,
which removes procedures that are only used by other removed procedures.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .engine import ControlEngine, Limits, build_structure
from .errors import (
    EmitError,
    EvalError,
    InternalError,
    LimitError,
    Position,
    StructureError,
    TranslationError,
    UserAbort,
)
from .expr import SymbolTable, Value, _Evaluator, eval_values, evaluate, truthy
from .lexer import (
    DATA_KEYWORDS,
    Line,
    LineKind,
    Token,
    TokenKind,
    _dotted_name_end,
)

_SIZES = {"b": 1, "w": 2, "d": 4, "p": 6, "q": 8}


@dataclass
class Span:
    """Byte range produced by one stream line."""

    line: Line
    start: int
    end: int


@dataclass
class EmitImage:
    endian: str = "little"
    strict: bool = False
    data: bytearray = field(default_factory=bytearray)
    labels: dict[str, int] = field(default_factory=dict)
    spans: list[Span] = field(default_factory=list)


def _guard_name(args) -> Optional[str]:
    """The name in an exactly '[ name ]' argument list, else None."""
    if (
        len(args) == 3
        and args[0].is_punct("[")
        and args[1].kind is TokenKind.IDENTIFIER
        and args[2].is_punct("]")
    ):
        return args[1].text
    return None


def _collect_guards(lines, blocks_by_open):
    """All guarded regions as (name, open_idx, close_idx)."""
    regions = []
    for idx, line in enumerate(lines):
        if line.kind is not LineKind.DEST_DIRECTIVE:
            continue
        base = line.tokens[0].text[1:]
        name = _guard_name(line.tokens[1:])
        if name is None:
            continue
        if base == "if":
            block = blocks_by_open[idx]
            if block.arms or block.else_idx is not None:
                raise StructureError(
                    "a guarded block cannot take elif or else", line.pos
                )
            regions.append((name, idx, block.close_idx))
        elif base in ("elif", "while", "until"):
            raise StructureError(
                "a guard can only open its own block", line.pos
            )
    return regions


def resolve_guarded_regions(lines) -> tuple[list[int], set[str]]:
    """Decide which lines survive guard elimination.

    Returns (visible line indices, included guard names).  Starts with
    every region included and repeatedly drops regions whose names are
    no longer referenced outside same-named regions, until stable.
    """
    blocks_by_open, _ = build_structure(
        lines, LineKind.DEST_DIRECTIVE, track_braces=False
    )
    regions = _collect_guards(lines, blocks_by_open)
    cover: list[set[str]] = [set() for _ in lines]
    for name, lo, hi in regions:
        for k in range(lo, hi + 1):
            cover[k].add(name)
    guard_names = {name for name, _, _ in regions}
    included = set(guard_names)
    for _ in range(len(guard_names) + 1):
        refs: set[str] = set()
        for k, line in enumerate(lines):
            if cover[k] - included:
                continue  # inside a dropped region
            for t in line.tokens:
                if (
                    t.kind is TokenKind.IDENTIFIER
                    and t.text in guard_names
                    and t.text not in cover[k]
                ):
                    refs.add(t.text)
        if refs == included:
            break
        included = refs
    else:
        raise InternalError("guard resolution did not converge")
    visible = [k for k in range(len(lines)) if not (cover[k] - included)]
    return visible, included


class _DestHandler:
    def __init__(self, env, labels, defined, image, final, diagnostics, limits):
        self.env: SymbolTable = env
        self.labels: dict[str, int] = labels
        self.defined: dict[str, int] = defined
        self.image: EmitImage = image
        self.final: bool = final
        self.diagnostics = diagnostics
        self.limits: Limits = limits

    # conditions, counts, assignments: names defined so far, strictly
    def cond_lookup(self, name: str) -> Optional[Value]:
        value = self.env.get(name)
        if value is not None:
            return value
        return self.defined.get(name)

    # data values: the full label table once it exists
    def value_lookup(self, name: str) -> Optional[Value]:
        value = self.env.get(name)
        if value is not None:
            return value
        if self.final:
            return self.labels.get(name)
        return self.defined.get(name)

    def condition(self, args, pos: Position, keyword: str) -> bool:
        if _guard_name(args) is not None:
            # a guard line that survived elimination is included
            return True
        if not args:
            raise EvalError("missing condition", pos)
        return truthy(evaluate(args, self.cond_lookup))

    def count(self, args, pos: Position, what: str) -> int:
        value = evaluate(args, self.cond_lookup)
        if not isinstance(value, int):
            raise EvalError(f"{what} must be an integer", pos)
        return value

    def values(self, args, pos: Position) -> list[Value]:
        return eval_values(args, self.cond_lookup)

    def report(self, message: str) -> None:
        if self.final:
            self.diagnostics.append(message)

    def unknown(self, line: Line, engine) -> Optional[int]:
        raise StructureError(
            f"unknown directive '{line.tokens[0].text}'", line.tokens[0].pos
        )

    def content(self, line: Line, engine) -> Optional[int]:
        kind = line.kind
        if kind is LineKind.ASSIGNMENT:
            self._assignment(line)
        elif kind is LineKind.LABEL:
            name = ".".join(
                t.text
                for t in line.tokens[:-1]
                if t.kind is TokenKind.IDENTIFIER
            )
            self._define_label(name, line.pos)
        elif kind is LineKind.DATA_EMISSION:
            self._data_line(line, list(line.tokens))
        elif kind is LineKind.PLAIN:
            self._labeled_data(line)
        else:
            raise StructureError(
                f"a {kind.value} line has no meaning in the intermediate "
                "stream",
                line.pos,
            )
        return None

    # -- pieces --

    def _assignment(self, line: Line) -> None:
        tokens = line.tokens
        eq = next(i for i, t in enumerate(tokens) if t.is_op("="))
        name = ".".join(
            t.text for t in tokens[:eq] if t.kind is TokenKind.IDENTIFIER
        )
        self.env.assign(name, evaluate(tokens[eq + 1 :], self.cond_lookup))

    def _define_label(self, name: str, pos: Position) -> None:
        offset = len(self.image.data)
        if not self.final:
            if name in self.labels:
                raise TranslationError(f"duplicate label '{name}'", pos)
            self.labels[name] = offset
        elif self.labels.get(name) != offset:
            raise InternalError(
                f"label '{name}' moved between passes "
                f"({self.labels.get(name)} -> {offset})"
            )
        self.defined[name] = offset

    def _labeled_data(self, line: Line) -> None:
        tokens = list(line.tokens)
        j = _dotted_name_end(tokens)
        k = j + 1 if j < len(tokens) and tokens[j].is_punct(":") else j
        if (
            k < len(tokens)
            and tokens[k].kind is TokenKind.IDENTIFIER
            and tokens[k].text in DATA_KEYWORDS
        ):
            name = ".".join(
                t.text for t in tokens[:j] if t.kind is TokenKind.IDENTIFIER
            )
            self._define_label(name, line.pos)
            self._data_line(line, tokens[k:])
            return
        raise TranslationError("unrecognized statement", line.pos)

    def _data_line(self, line: Line, tokens: list[Token]) -> None:
        keyword = tokens[0].text
        size = _SIZES[keyword[1]]
        args = tokens[1:]
        start = len(self.image.data)
        if keyword[0] == "d":
            if not args:
                raise EmitError(f"'{keyword}' needs at least one value", line.pos)
            values = eval_values(
                args,
                self.value_lookup,
                placeholders=True,
                tolerant=not self.final,
            )
            for v in values:
                if v is None:
                    self._emit_int(0, size, line.pos)
                elif isinstance(v, str):
                    self._emit_string(v, keyword, line.pos)
                else:
                    self._emit_int(v, size, line.pos)
        else:
            count, fill = self._reserve_args(args, line.pos)
            unit = self._unit_bytes(fill, size, line.pos)
            self.image.data += unit * count
        end = len(self.image.data)
        if end > start:
            self.image.spans.append(Span(line, start, end))

    def _reserve_args(self, args, pos: Position) -> tuple[int, int]:
        """count [,] [value].  The count never looks forward; the value
        may, like any data value."""
        if not args:
            raise EmitError("reserve needs a count", pos)
        ev = _Evaluator(args, self.cond_lookup, tolerant=False)
        count = ev.expression()
        if not isinstance(count, int):
            raise EmitError("reserve count must be an integer", pos)
        if count < 0:
            raise EmitError("negative reserve count", pos)
        if count > self.limits.max_loop:
            raise LimitError(
                f"reserve count exceeds {self.limits.max_loop}", pos
            )
        fill: Value = 0
        if not ev.at_end():
            if ev.peek().is_punct(","):
                ev.i += 1
            if ev.at_end():
                raise EvalError("expected a value after ','", pos)
            if ev.peek().is_punct("?"):
                ev.i += 1
            else:
                ev.lookup = self.value_lookup
                ev.tolerant = not self.final
                fill = ev.expression()
            if not ev.at_end():
                raise EmitError(
                    "reserve takes a count and at most one value", pos
                )
        if not isinstance(fill, int):
            raise EmitError("reserve value must be an integer", pos)
        return count, fill

    def _unit_bytes(self, v: int, size: int, pos: Position) -> bytes:
        self._range_check(v, size, pos)
        return (v & ((1 << (8 * size)) - 1)).to_bytes(size, self.image.endian)

    def _emit_int(self, v: int, size: int, pos: Position) -> None:
        self.image.data += self._unit_bytes(v, size, pos)

    def _range_check(self, v: int, size: int, pos: Position) -> None:
        if not self.image.strict:
            return
        lo = -(1 << (8 * size - 1))
        hi = 1 << (8 * size)
        if not lo <= v < hi:
            raise EmitError(
                f"value {v} does not fit in {size} byte(s)", pos
            )

    def _emit_string(self, s: str, keyword: str, pos: Position) -> None:
        if keyword != "db":
            raise EmitError("strings can only be emitted with 'db'", pos)
        try:
            self.image.data += s.encode("latin-1")
        except UnicodeEncodeError:
            raise EmitError(
                "string has characters above 0xFF", pos
            ) from None


def _run_pass(
    visible_lines,
    defines: dict,
    labels: dict,
    image: EmitImage,
    final: bool,
    diagnostics,
    limits: Limits,
) -> None:
    env = SymbolTable(dict(defines))
    handler = _DestHandler(
        env, labels, {}, image, final, diagnostics, limits
    )
    engine = ControlEngine("@", handler, limits, track_braces=False)
    try:
        engine.run(visible_lines)
    except UserAbort:
        if final:
            raise
        # the sizing run stops exactly where the final run will abort


def run_dest_phase(
    stream,
    defines: Optional[dict] = None,
    *,
    endian: str = "little",
    strict: bool = False,
    diagnostics: Optional[list] = None,
    limits: Optional[Limits] = None,
) -> EmitImage:
    lines = list(stream.lines if hasattr(stream, "lines") else stream)
    defines = defines or {}
    diagnostics = diagnostics if diagnostics is not None else []
    limits = limits or Limits()
    visible_idx, _ = resolve_guarded_regions(lines)
    visible = [lines[k] for k in visible_idx]
    labels: dict[str, int] = {}
    sizing = EmitImage(endian=endian, strict=strict)
    _run_pass(visible, defines, labels, sizing, False, diagnostics, limits)
    image = EmitImage(endian=endian, strict=strict, labels=labels)
    _run_pass(visible, defines, labels, image, True, diagnostics, limits)
    if len(image.data) != len(sizing.data):
        raise InternalError(
            "image size changed between passes "
            f"({len(sizing.data)} -> {len(image.data)})"
        )
    return image


__all__ = [
    "EmitImage",
    "Span",
    "resolve_guarded_regions",
    "run_dest_phase",
]
