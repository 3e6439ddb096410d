"""Static sorts of expressions against a :class:`~postinfer.state_model.Schema`.

A value sort is the name of a reference or generic type, ``"int"``,
``"bool"`` or ``"null"``; formulas have sort ``"formula"``.
"""

from __future__ import annotations

from dataclasses import fields as dc_fields

from ..state_model import BOOLEAN, GENERIC, INTEGER, REFERENCE, Schema
from .ast import (
    ORDER_OPS, Arith, BoolLit, Card, Closure, Compare, Expr, IntLit, Logic, Member, Nav, Not,
    NullLit, Quant, Root, SetOp, ValLit, Var,
)

INT = "int"
BOOL = "bool"
NULL_SORT = "null"
FORMULA = "formula"


class SortError(TypeError):
    """An expression is ill-sorted for the schema it is checked against."""


def type_sort(schema: Schema, type_name: str) -> str:
    kind = schema.kind(type_name)
    if kind == INTEGER:
        return INT
    if kind == BOOLEAN:
        return BOOL
    return type_name


def is_reference_sort(schema: Schema, sort: str) -> bool:
    return sort not in (INT, BOOL, NULL_SORT, FORMULA) and schema.kind(sort) == REFERENCE


def is_value_sort(schema: Schema, sort: str) -> bool:
    return sort not in (INT, BOOL, NULL_SORT, FORMULA) and schema.kind(sort) == GENERIC


def _compatible(a: str, b: str) -> bool:
    return a == b or a == NULL_SORT or b == NULL_SORT


def _join(a: str, b: str) -> str:
    return b if a == NULL_SORT else a


class _Checker:
    def __init__(self, schema: Schema):
        self.schema = schema
        self.memo: dict = {}

    def root_sort(self, name: str) -> str:
        s = self.schema
        if name in ("this", "old_this"):
            return s.receiver.type if s.roots else _fail(f"schema declares no receiver for {name}")
        decl = s.root(name)
        if decl is None:
            raise SortError(f"unknown root {name!r}")
        return type_sort(s, decl.type)

    def sort(self, e: Expr, env: dict) -> str:
        closed = not e.free_vars
        if closed:
            hit = self.memo.get(e)
            if hit is not None:
                return hit
        out = self._sort(e, env)
        if closed:
            self.memo[e] = out
        return out

    def _sort(self, e: Expr, env: dict) -> str:
        s = self.schema
        if isinstance(e, Root):
            return self.root_sort(e.name)
        if isinstance(e, Var):
            if e.name not in env:
                raise SortError(f"unbound variable {e.name!r}")
            return env[e.name]
        if isinstance(e, NullLit):
            return NULL_SORT
        if isinstance(e, IntLit):
            return INT
        if isinstance(e, BoolLit):
            return BOOL
        if isinstance(e, ValLit):
            for t in s.types:
                if t.kind == GENERIC and e.name.startswith(t.name.lower()) and e.name[len(t.name):].isdigit():
                    return t.name
            raise SortError(f"value literal {e.name!r} matches no generic type")
        if isinstance(e, Nav):
            base = self.sort(e.base, env)
            if not is_reference_sort(s, base):
                raise SortError(f"cannot navigate .{e.field} from sort {base}")
            decl = s.field(base, e.field)
            if decl is None:
                raise SortError(f"type {base} has no field {e.field!r}")
            return type_sort(s, decl.target)
        if isinstance(e, Closure):
            base = self.sort(e.base, env)
            if not is_reference_sort(s, base):
                raise SortError(f"closure base has sort {base}")
            for f in e.fields:
                decl = s.field(base, f)
                if decl is None or decl.target != base:
                    raise SortError(f"closure field {f!r} is not a {base}->{base} field")
            return base
        if isinstance(e, SetOp):
            a, b = self.sort(e.left, env), self.sort(e.right, env)
            if FORMULA in (a, b) or not _compatible(a, b):
                raise SortError(f"set operator {e.op} on sorts {a} and {b}")
            return _join(a, b)
        if isinstance(e, Card):
            a = self.sort(e.arg, env)
            if a == FORMULA:
                raise SortError("cardinality of a formula")
            return INT
        if isinstance(e, Arith):
            a, b = self.sort(e.left, env), self.sort(e.right, env)
            if a != INT or b != INT:
                raise SortError(f"arithmetic {e.op} on sorts {a} and {b}")
            return INT
        if isinstance(e, Compare):
            a, b = self.sort(e.left, env), self.sort(e.right, env)
            if FORMULA in (a, b):
                raise SortError("comparison of formulas")
            if e.op in ORDER_OPS:
                if a != INT or b != INT:
                    raise SortError(f"{e.op} needs integer operands, got {a} and {b}")
            elif not _compatible(a, b) or (NULL_SORT in (a, b) and INT in (a, b)):
                raise SortError(f"{e.op} on sorts {a} and {b}")
            return FORMULA
        if isinstance(e, Member):
            a, b = self.sort(e.elem, env), self.sort(e.set, env)
            if FORMULA in (a, b) or not _compatible(a, b):
                raise SortError(f"{e.op} on sorts {a} and {b}")
            return FORMULA
        if isinstance(e, Logic):
            for side in (e.left, e.right):
                if self.sort(side, env) not in (FORMULA, BOOL):
                    raise SortError(f"operand of {e.op} is not a formula")
            return FORMULA
        if isinstance(e, Not):
            if self.sort(e.arg, env) not in (FORMULA, BOOL):
                raise SortError("operand of ! is not a formula")
            return FORMULA
        if isinstance(e, Quant):
            d = self.sort(e.domain, env)
            if d in (INT, BOOL, FORMULA, NULL_SORT):
                raise SortError(f"quantifier domain has sort {d}")
            if self.sort(e.body, {**env, e.var: d}) not in (FORMULA, BOOL):
                raise SortError("quantifier body is not a formula")
            return FORMULA
        raise SortError(f"unknown node {type(e).__name__}")


def _fail(msg: str):
    raise SortError(msg)


_checkers: dict = {}


def _checker(schema: Schema) -> _Checker:
    c = _checkers.get(id(schema))
    if c is None or c.schema is not schema:
        if len(_checkers) > 64:
            _checkers.clear()
        c = _Checker(schema)
        _checkers[id(schema)] = c
    if len(c.memo) > 200_000:
        c.memo.clear()
    return c


def infer_sort(e: Expr, schema: Schema, env: dict | None = None) -> str:
    return _checker(schema).sort(e, env or {})


def typecheck(e: Expr, schema: Schema) -> None:
    """Raise :class:`SortError` unless ``e`` is a closed, well-sorted formula."""
    if e.free_vars:
        raise SortError(f"free variables {sorted(e.free_vars)}")
    if infer_sort(e, schema) not in (FORMULA, BOOL):
        raise SortError("not a formula")


def well_sorted(e: Expr, schema: Schema) -> bool:
    try:
        typecheck(e, schema)
    except SortError:
        return False
    return True


def resolve(e: Expr, schema: Schema, env: dict | None = None) -> Expr:
    """Rewrite ``SetOp``/``Arith`` on ``+``/``-`` to match operand sorts."""
    env = env or {}
    if isinstance(e, Quant):
        domain = resolve(e.domain, schema, env)
        try:
            d = infer_sort(domain, schema, env)
        except SortError:
            d = NULL_SORT
        return Quant(e.kind, e.var, domain, resolve(e.body, schema, {**env, e.var: d}))
    if not e._children:
        return e
    values = {f.name: getattr(e, f.name) for f in dc_fields(e)}
    for name in e._children:
        values[name] = resolve(values[name], schema, env)
    if isinstance(e, (SetOp, Arith)) and e.op in ("+", "-"):
        sorts = [_sort_or_none(values[k], schema, env) for k in ("left", "right")]
        intish = INT in sorts if sorts != [None, None] else isinstance(e, Arith)
        cls = Arith if intish else SetOp
        return cls(e.op, values["left"], values["right"])
    return type(e)(**values)


def _sort_or_none(e: Expr, schema: Schema, env: dict):
    try:
        return infer_sort(e, schema, env)
    except SortError:
        return None
