# cython: boundscheck=False, wraparound=False
"""Compiled scanner kernel.

A direct port of gtrans/lexer/_pylex.py.  Same tuples out, same
ScanError (imported from there, so callers catch one type), same
messages and columns.  Any behavioural change must land in both files;
tests/test_lexer.py cross-checks them on random input.
"""

from gtrans.lexer._pylex import ScanError

cdef int K_IDENT = 0
cdef int K_INT = 1
cdef int K_STRING = 2
cdef int K_OP = 3
cdef int K_PUNCT = 4

cdef frozenset _OPS2 = frozenset(
    ("<=", ">=", "!=", "<>", "&&", "||", "<<", ">>", ":=", "..")
)


cdef inline bint _is_ident_start(Py_UCS4 c):
    return (u"a" <= c <= u"z") or (u"A" <= c <= u"Z") or c == u"_"


cdef inline bint _is_ident_cont(Py_UCS4 c):
    return _is_ident_start(c) or (u"0" <= c <= u"9")


cdef inline bint _is_digit(Py_UCS4 c):
    return u"0" <= c <= u"9"


cdef inline bint _is_hex(Py_UCS4 c):
    return _is_digit(c) or (u"a" <= c <= u"f") or (u"A" <= c <= u"F")


def scan(str text):
    """Scan one line.  Returns a list of (kind, text, value, column)."""
    cdef list out = []
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t j, col
    cdef Py_UCS4 c, ch
    cdef str pair
    while i < n:
        c = text[i]
        if c in u" \t\r\n\f\v":
            i += 1
            continue
        if c == u"/" and i + 1 < n and text[i + 1] == u"/":
            break
        col = i + 1
        if _is_ident_start(c) or c == u"#" or c == u"@":
            j = i + 1
            if c == u"#" or c == u"@":
                if j >= n or not _is_ident_start(text[j]):
                    raise ScanError("illegal character %r" % chr(c), col)
                j += 1
            while j < n and _is_ident_cont(text[j]):
                j += 1
            out.append((K_IDENT, text[i:j], 0, col))
            i = j
            continue
        if _is_digit(c):
            if c == u"0" and i + 1 < n and (text[i + 1] == u"x" or text[i + 1] == u"X"):
                j = i + 2
                while j < n and _is_hex(text[j]):
                    j += 1
                if j == i + 2:
                    raise ScanError("invalid numeric literal", col)
                value = int(text[i + 2 : j], 16)
            else:
                j = i + 1
                while j < n and _is_digit(text[j]):
                    j += 1
                value = int(text[i:j])
            if j < n and _is_ident_cont(text[j]):
                raise ScanError("invalid numeric literal", col)
            out.append((K_INT, text[i:j], value, col))
            i = j
            continue
        if c == u"'":
            if i + 1 >= n:
                raise ScanError("unterminated character literal", col)
            ch = text[i + 1]
            if ch == u"'":
                raise ScanError("empty character literal", col)
            if i + 2 >= n or text[i + 2] != u"'":
                raise ScanError("unterminated character literal", col)
            out.append((K_INT, text[i : i + 3], ord(ch), col))
            i += 3
            continue
        if c == u'"':
            j = i + 1
            while j < n and text[j] != u'"':
                j += 1
            if j >= n:
                raise ScanError("unterminated string literal", col)
            out.append((K_STRING, text[i : j + 1], 0, col))
            i = j + 1
            continue
        if i + 1 < n:
            pair = text[i : i + 2]
            if pair in _OPS2:
                out.append((K_OP, "!=" if pair == "<>" else pair, 0, col))
                i += 2
                continue
        if c in u"+-*/%<>=!&|^~":
            out.append((K_OP, chr(c), 0, col))
            i += 1
            continue
        if c in u"()[]{},:;.?":
            out.append((K_PUNCT, chr(c), 0, col))
            i += 1
            continue
        raise ScanError("illegal character %r" % chr(c), col)
    return out
