"""Textual syntax for operator polynomials and 2x2 operator matrices.

Entries look like ``-i*sx*Dx - i*se*De`` or ``x + 1/2*e``; matrices are
written ``[[.., ..], [.., ..]]``.  Reserved names: ``x``, ``e`` (positions),
``Dx``, ``De`` (derivatives) and ``i`` (imaginary unit); any other
identifier is a commuting scalar symbol.  Numeric literals may be integers,
decimals, or integer ratios like ``3/4``.

The parser is strict about operator ordering: a term whose accumulated
product already contains a derivative may not be multiplied by a position
symbol (the input would not be normal ordered).  Errors carry line:column
positions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .algebra import CI, CONE, ExactComplex, Generator, NCPoly, OpMatrix

__all__ = ["ParseError", "parse_poly", "parse_matrix", "format_poly", "format_matrix"]

_GENERATORS = {
    "x": Generator.POS_X,
    "e": Generator.POS_EPS,
    "Dx": Generator.DER_X,
    "De": Generator.DER_EPS,
}

_TOKEN_RE = re.compile(
    r"(?P<number>\d+/\d+|\d+\.\d+|\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[\[\](),+\-*^])"
    r"|(?P<ws>\s+)"
    r"|(?P<bad>.)"
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "ident" | one-character operator | "end"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    for match in _TOKEN_RE.finditer(text):
        kind = match.lastgroup
        chunk = match.group()
        if kind == "ws":
            newlines = chunk.count("\n")
            if newlines:
                line += newlines
                col = len(chunk) - chunk.rfind("\n")
            else:
                col += len(chunk)
            continue
        if kind == "bad":
            raise ParseError(f"unexpected character {chunk!r}", line, col)
        if kind == "op":
            tokens.append(_Token(chunk, chunk, line, col))
        else:
            tokens.append(_Token(kind, chunk, line, col))
        col += len(chunk)
    tokens.append(_Token("end", "", line, col))
    return tokens


def _has_positions(poly: NCPoly) -> bool:
    return any(word[1] or word[2] for word in poly.terms)


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            shown = tok.text or "end of input"
            raise ParseError(f"expected {kind!r}, found {shown!r}", tok.line, tok.col)
        return self.advance()

    def fail(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)

    # expr := ['+'|'-'] term (('+'|'-') term)*
    def parse_expr(self) -> NCPoly:
        sign = 1
        if self.peek().kind in ("+", "-"):
            sign = -1 if self.advance().kind == "-" else 1
        acc = self.parse_term()
        if sign < 0:
            acc = -acc
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            term = self.parse_term()
            acc = acc - term if op == "-" else acc + term
        return acc

    # term := factor ('*' factor)*
    def parse_term(self) -> NCPoly:
        acc = self.parse_factor()
        while self.peek().kind == "*":
            self.advance()
            tok = self.peek()
            factor = self.parse_factor()
            if acc.has_derivatives() and _has_positions(factor):
                raise ParseError(
                    "non-canonical operator word: position symbols must "
                    "precede derivatives",
                    tok.line, tok.col,
                )
            acc = acc * factor
        return acc

    # factor := primary ('^' integer)?
    def parse_factor(self) -> NCPoly:
        base = self.parse_primary()
        if self.peek().kind == "^":
            self.advance()
            tok = self.expect("number")
            if not tok.text.isdigit():
                raise ParseError("exponent must be a nonnegative integer",
                                 tok.line, tok.col)
            power = int(tok.text)
            out = NCPoly.constant(1)
            for _ in range(power):
                out = out * base
            return out
        return base

    def parse_primary(self) -> NCPoly:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return NCPoly.constant(Fraction(tok.text))
        if tok.kind == "ident":
            self.advance()
            if tok.text == "i":
                return NCPoly.constant(CI)
            gen = _GENERATORS.get(tok.text)
            if gen is not None:
                return NCPoly.generator(gen)
            return NCPoly.scalar(tok.text)
        if tok.kind == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        self.fail(f"expected a number, symbol, or '(', found {tok.text or 'end of input'!r}")

    def parse_matrix(self) -> OpMatrix:
        self.expect("[")
        rows = [self._parse_row()]
        self.expect(",")
        rows.append(self._parse_row())
        self.expect("]")
        return OpMatrix(rows)

    def _parse_row(self) -> tuple:
        self.expect("[")
        first = self.parse_expr()
        self.expect(",")
        second = self.parse_expr()
        self.expect("]")
        return (first, second)

    def finish(self):
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing input {tok.text!r}",
                             tok.line, tok.col)


def parse_poly(text: str) -> NCPoly:
    parser = _Parser(text)
    poly = parser.parse_expr()
    parser.finish()
    return poly


def parse_matrix(text: str) -> OpMatrix:
    parser = _Parser(text)
    matrix = parser.parse_matrix()
    parser.finish()
    return matrix


# -- printing ---------------------------------------------------------------


def _fmt_fraction(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    if value.denominator <= 10**6:
        return f"{value.numerator}/{value.denominator}"
    # substituted floats carry huge dyadic denominators; show them as floats
    return repr(float(value))


def _fmt_coeff(coeff: ExactComplex) -> str:
    if coeff.im == 0:
        return _fmt_fraction(coeff.re)
    if coeff.re == 0:
        if coeff.im == 1:
            return "i"
        if coeff.im == -1:
            return "-i"
        return f"{_fmt_fraction(coeff.im)}*i"
    im = coeff.im
    joiner = " - " if im < 0 else " + "
    im_part = "i" if abs(im) == 1 else f"{_fmt_fraction(abs(im))}*i"
    return f"({_fmt_fraction(coeff.re)}{joiner}{im_part})"


def _term_str(word, coeff: ExactComplex) -> str:
    scalars, nx, ne, ndx, nde = word
    parts = [name if p == 1 else f"{name}^{p}" for name, p in scalars]
    for sym, power in (("x", nx), ("e", ne), ("Dx", ndx), ("De", nde)):
        if power:
            parts.append(sym if power == 1 else f"{sym}^{power}")
    if not parts:
        return _fmt_coeff(coeff)
    if coeff == CONE:
        prefix = ""
    elif coeff == -CONE:
        prefix = "-"
    elif coeff == CI:
        prefix = "i*"
    elif coeff == -CI:
        prefix = "-i*"
    else:
        prefix = _fmt_coeff(coeff) + "*"
    return prefix + "*".join(parts)


def _word_sort_key(word):
    scalars, nx, ne, ndx, nde = word
    return (-(nx + ne + ndx + nde), -nx, -ne, -ndx, -nde, scalars)


def format_poly(poly: NCPoly) -> str:
    if not poly.terms:
        return "0"
    pieces = []
    for word in sorted(poly.terms, key=_word_sort_key):
        term = _term_str(word, poly.terms[word])
        if not pieces:
            pieces.append(term)
        elif term.startswith("-"):
            pieces.append(" - " + term[1:])
        else:
            pieces.append(" + " + term)
    return "".join(pieces)


def format_matrix(matrix: OpMatrix) -> str:
    rows = []
    for row in matrix.rows:
        rows.append("[" + ", ".join(format_poly(entry) for entry in row) + "]")
    return "[" + ", ".join(rows) + "]"
