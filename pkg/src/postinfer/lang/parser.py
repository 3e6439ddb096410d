"""Recursive-descent parser for the assertion language.

Binding strength, loosest first: quantifiers, ``=>`` (right associative),
``||``, ``&&``, prefix ``!``, comparisons and membership (non-associative),
``+``/``-``, ``&``, postfix navigation.  A quantifier body extends as far
right as possible.

``+`` and ``-`` denote set union/difference or integer arithmetic depending
on operand sorts.  With a schema the sorts are resolved exactly; without one
an operand that is an integer literal, a cardinality or an arithmetic node
selects arithmetic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    Arith, BoolLit, Card, Closure, Compare, Expr, IntLit, Logic, Member, Nav, Not, NullLit,
    Quant, Root, SetOp, ValLit, Var,
)


class DslSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int, expected: tuple = ()):
        detail = f"{line}:{column}: {message}"
        if expected:
            detail += f" (expected one of: {', '.join(expected)})"
        super().__init__(detail)
        self.line = line
        self.column = column
        self.expected = expected


KEYWORDS = {"this", "old_this", "result", "null", "true", "false", "all", "some", "in"}
RESERVED_ROOTS = ("this", "old_this", "result")

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<int>\d+)
  | (?P<str>'[^'\n]*')
  | (?P<notin>!in(?![A-Za-z0-9_]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\.\*|\.\^|==|!=|<=|>=|&&|\|\||=>|[.#():<>!+\-&])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            if kind == "ident" and chunk in KEYWORDS:
                kind = chunk
            elif kind in ("op", "notin"):
                kind = chunk
            tokens.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


_CMP = ("==", "!=", "<", ">", "<=", ">=")
_PRIMARY_START = ("this", "old_this", "result", "null", "true", "false", "int", "str",
                  "ident", "#", "(", "-")


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.bound: list[str] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def fail(self, expected: tuple):
        t = self.tok
        what = "end of input" if t.kind == "eof" else repr(t.text)
        raise DslSyntaxError(f"unexpected {what}", t.line, t.column, tuple(sorted(set(expected))))

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            self.fail((kind,))
        return self.advance()

    def parse(self) -> Expr:
        e = self.formula()
        if self.tok.kind != "eof":
            self.fail(("end of input", "&&", "||", "=>"))
        return e

    def formula(self) -> Expr:
        if self.tok.kind in ("all", "some"):
            return self.quant()
        return self.implication()

    def quant(self) -> Expr:
        kind = self.advance().kind
        var = self.expect("ident").text
        self.expect(":")
        domain = self.sum()
        self.expect(":")
        self.bound.append(var)
        try:
            body = self.formula()
        finally:
            self.bound.pop()
        return Quant(kind, var, domain, body)

    def implication(self) -> Expr:
        left = self.disjunction()
        if self.tok.kind == "=>":
            self.advance()
            return Logic("=>", left, self.formula())
        return left

    def disjunction(self) -> Expr:
        e = self.conjunction()
        while self.tok.kind == "||":
            self.advance()
            e = Logic("||", e, self.conjunction())
        return e

    def conjunction(self) -> Expr:
        e = self.unary()
        while self.tok.kind == "&&":
            self.advance()
            e = Logic("&&", e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.tok.kind == "!":
            self.advance()
            return Not(self.unary())
        if self.tok.kind in ("all", "some"):
            return self.quant()
        return self.comparison()

    def comparison(self) -> Expr:
        left = self.sum()
        kind = self.tok.kind
        if kind in _CMP:
            self.advance()
            return Compare(kind, left, self.sum())
        if kind in ("in", "!in"):
            self.advance()
            return Member(kind, left, self.sum())
        return left

    def sum(self) -> Expr:
        e = self.intersection()
        while self.tok.kind in ("+", "-"):
            op = self.advance().kind
            e = _additive(op, e, self.intersection())
        return e

    def intersection(self) -> Expr:
        e = self.postfix()
        while self.tok.kind == "&":
            self.advance()
            e = SetOp("&", e, self.postfix())
        return e

    def postfix(self) -> Expr:
        e = self.primary()
        while True:
            kind = self.tok.kind
            if kind == ".":
                self.advance()
                e = Nav(e, self.expect("ident").text)
            elif kind in (".*", ".^"):
                self.advance()
                e = self.closure(e, kind == ".*")
            else:
                return e

    def closure(self, base: Expr, reflexive: bool) -> Expr:
        if self.tok.kind == "ident":
            return Closure(base, (self.advance().text,), reflexive)
        self.expect("(")
        fields = [self.expect("ident").text]
        while self.tok.kind == "+" and self.tokens[self.i + 1].kind == "ident":
            self.advance()
            fields.append(self.advance().text)
        e: Expr = Closure(base, tuple(fields), reflexive)
        # trailing terms apply to the closure's result, as in *(left+right - null)
        while self.tok.kind in ("+", "-", "&"):
            op = self.advance().kind
            e = SetOp(op, e, self.postfix())
        self.expect(")")
        return e

    def primary(self) -> Expr:
        t = self.tok
        kind = t.kind
        if kind in RESERVED_ROOTS:
            self.advance()
            return Root(kind)
        if kind == "null":
            self.advance()
            return NullLit()
        if kind in ("true", "false"):
            self.advance()
            return BoolLit(kind == "true")
        if kind == "int":
            self.advance()
            return IntLit(int(t.text))
        if kind == "-" and self.tokens[self.i + 1].kind == "int":
            self.advance()
            return IntLit(-int(self.advance().text))
        if kind == "str":
            self.advance()
            return ValLit(t.text[1:-1])
        if kind == "ident":
            self.advance()
            return Var(t.text) if t.text in self.bound else Root(t.text)
        if kind == "#":
            self.advance()
            self.expect("(")
            e = self.sum()
            self.expect(")")
            return Card(e)
        if kind == "(":
            self.advance()
            e = self.formula()
            self.expect(")")
            return e
        self.fail(_PRIMARY_START + ("!", "all", "some"))


def _is_intish(e: Expr) -> bool:
    return isinstance(e, (IntLit, Card, Arith))


def _additive(op: str, left: Expr, right: Expr) -> Expr:
    if _is_intish(left) or _is_intish(right):
        return Arith(op, left, right)
    return SetOp(op, left, right)


def parse(text: str, schema=None) -> Expr:
    """Parse ``text``; with ``schema``, ``+``/``-`` are resolved by operand sort."""
    e = _Parser(text).parse()
    if schema is not None:
        from .sorts import resolve

        e = resolve(e, schema)
    return e
