"""Concrete syntax for :mod:`postinfer.lang.ast` trees, with minimal parentheses."""

from __future__ import annotations

from .ast import (
    Arith, BoolLit, Card, Closure, Compare, Expr, IntLit, Logic, Member, Nav, Not, NullLit,
    Quant, Root, SetOp, ValLit, Var,
)

QUANT, IMPL, OR, AND, NOT, CMP, ADD, INTER, POSTFIX, ATOM = range(1, 11)
_LOGIC_LEVEL = {"=>": IMPL, "||": OR, "&&": AND}


def pretty(e: Expr) -> str:
    d = e.__dict__
    text = d.get("_text")
    if text is None:
        text = _pp(e)[0]
        d["_text"] = text
    return text


def _wrap(e: Expr, min_level: int) -> str:
    text, level = _pp(e)
    return text if level >= min_level else f"({text})"


def _fields(fs: tuple) -> str:
    return fs[0] if len(fs) == 1 else "(" + "+".join(fs) + ")"


def _pp(e: Expr) -> tuple[str, int]:
    d = e.__dict__
    cached = d.get("_pp")
    if cached is not None:
        return cached
    out = _render(e)
    d["_pp"] = out
    return out


def _render(e: Expr) -> tuple[str, int]:
    if isinstance(e, (Root, Var)):
        return e.name, ATOM
    if isinstance(e, NullLit):
        return "null", ATOM
    if isinstance(e, IntLit):
        return str(e.value), (ATOM if e.value >= 0 else ADD)
    if isinstance(e, BoolLit):
        return ("true" if e.value else "false"), ATOM
    if isinstance(e, ValLit):
        return f"'{e.name}'", ATOM
    if isinstance(e, Nav):
        return f"{_wrap(e.base, POSTFIX)}.{e.field}", POSTFIX
    if isinstance(e, Closure):
        op = ".*" if e.reflexive else ".^"
        return f"{_wrap(e.base, POSTFIX)}{op}{_fields(e.fields)}", POSTFIX
    if isinstance(e, Card):
        return f"#({_pp(e.arg)[0]})", ATOM
    if isinstance(e, SetOp) and e.op == "&":
        return f"{_wrap(e.left, INTER)} & {_wrap(e.right, POSTFIX)}", INTER
    if isinstance(e, (SetOp, Arith)):
        return f"{_wrap(e.left, ADD)} {e.op} {_wrap(e.right, INTER)}", ADD
    if isinstance(e, Compare):
        return f"{_wrap(e.left, ADD)} {e.op} {_wrap(e.right, ADD)}", CMP
    if isinstance(e, Member):
        return f"{_wrap(e.elem, ADD)} {e.op} {_wrap(e.set, ADD)}", CMP
    if isinstance(e, Not):
        return f"!{_wrap(e.arg, POSTFIX)}", NOT
    if isinstance(e, Logic):
        level = _LOGIC_LEVEL[e.op]
        if e.op == "=>":
            return f"{_wrap(e.left, level + 1)} => {_wrap(e.right, level)}", level
        return f"{_wrap(e.left, level)} {e.op} {_wrap(e.right, level + 1)}", level
    if isinstance(e, Quant):
        return f"{e.kind} {e.var} : {_wrap(e.domain, ADD)} : {_pp(e.body)[0]}", QUANT
    raise TypeError(f"cannot print {type(e).__name__}")
