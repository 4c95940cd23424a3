"""User-defined pattern classes.

A class is a named rewrite rule: a pattern of parameters and separator
tokens, and a body of token lines.  Invocations are matched against the
pattern; parameters capture token runs, the body is emitted with those
runs spliced in.  Definitions are resolved newest first, so a later
class with the same name shadows an earlier one wherever both match,
and chains of operator-like classes get their precedence from
definition order alone.

Matching rules, in full:

* Separators must occur at top level in the arguments: a separator
  token inside any (), [] or {} nesting does not count.
* Without a variadic tail the pattern is matched right to left.  The
  last separator anchors at the end (the first at the start), interior
  separators take the rightmost top-level occurrence inside the part
  not yet consumed, and there is no backtracking.  Rightmost splitting
  is what makes a chain like 'x + y' associate to the left.
* Each parameter captures at least one token.  When several parameters
  sit between two separators, all but the last take exactly one token
  and the last takes the rest of the segment.
* A '..' in the pattern introduces one trailing variadic parameter.
  The fixed part before it is then matched left to right, each
  separator taking its leftmost top-level occurrence, and the tail
  captures whatever remains, possibly nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .errors import LimitError, Position, StructureError
from .lexer import Token, TokenKind

_OPEN = ("(", "[", "{")
_CLOSE = (")", "]", "}")


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Sep:
    texts: tuple[str, ...]


Element = Union[Param, Sep]
Binding = dict[str, tuple[Token, ...]]


@dataclass(frozen=True)
class ClassDef:
    name: str
    fixed: tuple[Element, ...]
    variadic: Optional[str]
    body: tuple[tuple[Token, ...], ...]
    aliases: tuple[str, ...]
    seq: int
    pos: Position

    def pattern_text(self) -> str:
        parts = [self.name]
        for e in self.fixed:
            if isinstance(e, Param):
                parts.append(e.name)
            else:
                parts.extend(e.texts)
        if self.variadic is not None:
            parts.extend(["..", self.variadic])
        return " ".join(parts)


def parse_pattern(tokens: Sequence[Token], pos: Position):
    """Header tokens after the class name -> (fixed elements, variadic).

    Identifiers are parameters, everything else joins the current
    separator run.  Literals make no sense in a pattern and '{'/'}' are
    reserved for the body, so those are rejected here.
    """
    fixed: list[Element] = []
    params: set[str] = set()
    sep_run: list[str] = []
    variadic: Optional[str] = None
    seen_marker = False

    def flush():
        if sep_run:
            fixed.append(Sep(tuple(sep_run)))
            sep_run.clear()

    for i, tok in enumerate(tokens):
        if seen_marker:
            if variadic is not None:
                raise StructureError(
                    "nothing may follow the variadic parameter", tok.pos
                )
            if tok.kind is not TokenKind.IDENTIFIER:
                raise StructureError(
                    "expected a parameter name after '..'", tok.pos
                )
            if tok.text in params:
                raise StructureError(
                    f"duplicate parameter '{tok.text}'", tok.pos
                )
            variadic = tok.text
            params.add(tok.text)
            continue
        if tok.is_op(".."):
            flush()
            seen_marker = True
            continue
        if tok.kind is TokenKind.IDENTIFIER:
            flush()
            if tok.text in params:
                raise StructureError(
                    f"duplicate parameter '{tok.text}'", tok.pos
                )
            params.add(tok.text)
            fixed.append(Param(tok.text))
            continue
        if tok.kind in (TokenKind.INTEGER, TokenKind.STRING):
            raise StructureError(
                f"literal '{tok.text}' is not allowed in a pattern", tok.pos
            )
        if tok.text in ("{", "}"):
            raise StructureError("braces cannot be pattern separators", tok.pos)
        sep_run.append(tok.text)
    flush()
    if seen_marker and variadic is None:
        raise StructureError("expected a parameter name after '..'", pos)
    return tuple(fixed), variadic


def _own_depths(args: Sequence[Token]) -> list[int]:
    """Nesting depth per token; a bracket sits at the depth of its pair."""
    depths = []
    depth = 0
    for tok in args:
        if tok.text in _OPEN:
            depths.append(depth)
            depth += 1
        elif tok.text in _CLOSE:
            depth -= 1
            depths.append(depth)
        else:
            depths.append(depth)
    return depths


def _run_at(args, depths, s: int, texts) -> bool:
    return all(
        args[s + j].text == texts[j] and depths[s + j] == 0
        for j in range(len(texts))
    )


def _rightmost_run(args, depths, texts, hi: int) -> Optional[int]:
    for s in range(hi - len(texts), -1, -1):
        if _run_at(args, depths, s, texts):
            return s
    return None


def _leftmost_run(args, depths, texts, lo: int) -> Optional[int]:
    for s in range(lo, len(args) - len(texts) + 1):
        if _run_at(args, depths, s, texts):
            return s
    return None


def _bind_run(binding: Binding, run: list[str], seg: Sequence[Token]) -> bool:
    """Distribute a segment over a parameter run, one token each except
    the last, which takes the remainder.  Every parameter needs one."""
    if len(seg) < len(run):
        return False
    for k, name in enumerate(run[:-1]):
        binding[name] = (seg[k],)
    binding[run[-1]] = tuple(seg[len(run) - 1 :])
    return True


def _match_full(elements, args) -> Optional[Binding]:
    n = len(args)
    depths = _own_depths(args)
    placements: dict[int, tuple[int, int]] = {}
    window_hi = n
    for k in range(len(elements) - 1, -1, -1):
        e = elements[k]
        if not isinstance(e, Sep):
            continue
        width = len(e.texts)
        if k == len(elements) - 1:
            s = window_hi - width
            if s < 0 or not _run_at(args, depths, s, e.texts):
                return None
        elif k == 0:
            if width > window_hi or not _run_at(args, depths, 0, e.texts):
                return None
            s = 0
        else:
            s = _rightmost_run(args, depths, e.texts, hi=window_hi)
            if s is None:
                return None
        placements[k] = (s, s + width)
        window_hi = s
    binding: Binding = {}
    cursor = 0
    i = 0
    while i < len(elements):
        e = elements[i]
        if isinstance(e, Sep):
            start, end = placements[i]
            if start != cursor:
                return None
            cursor = end
            i += 1
            continue
        run = []
        while i < len(elements) and isinstance(elements[i], Param):
            run.append(elements[i].name)
            i += 1
        seg_end = placements[i][0] if i < len(elements) else n
        if not _bind_run(binding, run, args[cursor:seg_end]):
            return None
        cursor = seg_end
    if cursor != n:
        return None
    return binding


def _match_variadic(fixed, tail: str, args) -> Optional[Binding]:
    n = len(args)
    depths = _own_depths(args)
    binding: Binding = {}
    pos = 0
    i = 0
    while i < len(fixed):
        e = fixed[i]
        if isinstance(e, Sep):
            width = len(e.texts)
            if pos + width > n or not _run_at(args, depths, pos, e.texts):
                return None
            pos += width
            i += 1
            continue
        run = []
        while i < len(fixed) and isinstance(fixed[i], Param):
            run.append(fixed[i].name)
            i += 1
        if i < len(fixed):
            sep = fixed[i]
            s = _leftmost_run(args, depths, sep.texts, lo=pos + len(run))
            if s is None:
                return None
            if not _bind_run(binding, run, args[pos:s]):
                return None
            pos = s + len(sep.texts)
            i += 1
        else:
            # fixed part ends with parameters: one token each, the
            # variadic tail takes everything after them
            if pos + len(run) > n:
                return None
            for name in run:
                binding[name] = (args[pos],)
                pos += 1
    binding[tail] = tuple(args[pos:])
    return binding


def match(cls: ClassDef, args: Sequence[Token]) -> Optional[Binding]:
    args = list(args)
    if cls.variadic is None:
        return _match_full(cls.fixed, args)
    return _match_variadic(cls.fixed, cls.variadic, args)


def expand_body(cls: ClassDef, binding: Binding) -> list[list[Token]]:
    """Body lines with parameter identifiers replaced by captured runs."""
    out = []
    for body_line in cls.body:
        toks: list[Token] = []
        for t in body_line:
            if t.kind is TokenKind.IDENTIFIER and t.text in binding:
                toks.extend(binding[t.text])
            else:
                toks.append(t)
        out.append(toks)
    return out


class ClassTable:
    """All class definitions plus the symbol substitutions."""

    def __init__(self) -> None:
        self.defs: list[ClassDef] = []
        self._by_name: dict[str, list[int]] = {}
        self.substitutions: dict[str, tuple[Token, ...]] = {}

    def define(
        self,
        name: str,
        pattern_tokens: Sequence[Token],
        body: Sequence[Sequence[Token]],
        aliases: Sequence[str],
        pos: Position,
    ) -> ClassDef:
        fixed, variadic = parse_pattern(pattern_tokens, pos)
        cls = ClassDef(
            name=name,
            fixed=fixed,
            variadic=variadic,
            body=tuple(tuple(line) for line in body),
            aliases=tuple(aliases),
            seq=len(self.defs),
            pos=pos,
        )
        self.defs.append(cls)
        for key in (name, *aliases):
            self._by_name.setdefault(key, []).append(cls.seq)
        return cls

    def has_name(self, name: str) -> bool:
        return name in self._by_name

    def resolve(self, name: str, args: Sequence[Token]):
        """Newest matching definition under this name, or None.

        Definitions are tried last to first; the first whose pattern
        matches the arguments wins.
        """
        for seq in reversed(self._by_name.get(name, ())):
            cls = self.defs[seq]
            binding = match(cls, args)
            if binding is not None:
                return cls, binding
        return None

    def set_substitution(self, name: str, replacement: Sequence[Token]) -> None:
        self.substitutions[name] = tuple(replacement)

    def substitute(self, tokens: Sequence[Token]) -> Optional[list[Token]]:
        """One substitution step over a token line.  None if unchanged.

        Replacement tokens are spliced in as they are and not looked at
        again, so mutually referring substitutions advance one step per
        scan instead of looping.
        """
        if not self.substitutions:
            return None
        out: list[Token] = []
        changed = False
        for t in tokens:
            if t.kind is TokenKind.IDENTIFIER and t.text in self.substitutions:
                out.extend(self.substitutions[t.text])
                changed = True
            else:
                out.append(t)
        return out if changed else None


def _matching_paren(tokens, open_idx: int) -> Optional[int]:
    depth = 0
    for i in range(open_idx, len(tokens)):
        if tokens[i].is_punct("("):
            depth += 1
        elif tokens[i].is_punct(")"):
            depth -= 1
            if depth == 0:
                return i
    return None


def expand_calls(tokens: Sequence[Token], table: ClassTable, budget: int) -> list[Token]:
    """Replace embedded 'name ( ... )' groups with single-line bodies.

    Scans left to right; a successful splice is rescanned from the same
    spot so nested calls resolve inside out.  Only classes whose body is
    one line can sit inside another line.
    """
    toks = list(tokens)
    spliced = 0
    i = 0
    while i < len(toks):
        t = toks[i]
        if (
            t.kind is TokenKind.IDENTIFIER
            and i + 1 < len(toks)
            and toks[i + 1].is_punct("(")
            and table.has_name(t.text)
        ):
            close = _matching_paren(toks, i + 1)
            if close is not None:
                m = table.resolve(t.text, toks[i + 1 : close + 1])
                if m is not None:
                    cls, binding = m
                    if len(cls.body) != 1:
                        raise StructureError(
                            f"class '{t.text}' cannot expand inside a line: "
                            "its body is not a single line",
                            t.pos,
                        )
                    spliced += 1
                    if spliced > budget:
                        raise LimitError(
                            "too many expansions on one line "
                            f"(limit {budget})",
                            t.pos,
                        )
                    toks[i : close + 1] = expand_body(cls, binding)[0]
                    continue
        i += 1
    return toks


__all__ = [
    "Binding",
    "ClassDef",
    "ClassTable",
    "Element",
    "Param",
    "Sep",
    "expand_body",
    "expand_calls",
    "match",
    "parse_pattern",
]
