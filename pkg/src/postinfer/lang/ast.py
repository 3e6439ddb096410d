"""AST of the relational assertion language.

Nodes are frozen dataclasses with a memoised hash, so they can key caches
cheaply even when deep.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

CMP_OPS = ("==", "!=", "<", ">", "<=", ">=")
ORDER_OPS = ("<", ">", "<=", ">=")
MEMBER_OPS = ("in", "!in")
LOGIC_OPS = ("&&", "||", "=>")
SET_OPS = ("+", "&", "-")
ARITH_OPS = ("+", "-")
QUANTIFIERS = ("all", "some")


def node(cls):
    cls = dataclass(frozen=True)(cls)
    generated = cls.__hash__

    def __hash__(self):
        d = self.__dict__
        h = d.get("_hash")
        if h is None:
            h = generated(self)
            d["_hash"] = h
        return h

    cls.__hash__ = __hash__
    cls._children = tuple(f.name for f in fields(cls) if f.type == "Expr")
    return cls


class Expr:
    _children: tuple = ()

    def children(self) -> tuple["Expr", ...]:
        return tuple(getattr(self, name) for name in self._children)

    @property
    def free_vars(self) -> frozenset:
        d = self.__dict__
        fv = d.get("_fv")
        if fv is None:
            fv = _free_vars(self)
            d["_fv"] = fv
        return fv

    @property
    def closed(self) -> bool:
        return not self.free_vars

    # memoised hashes depend on the per-process string hash seed
    def __getstate__(self):
        return {k: v for k, v in self.__dict__.items() if not k.startswith("_")}

    def __setstate__(self, state):
        self.__dict__.update(state)

    def __str__(self) -> str:
        from .printer import pretty

        return pretty(self)


def _free_vars(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Quant):
        return e.domain.free_vars | (e.body.free_vars - {e.var})
    out: frozenset = frozenset()
    for c in e.children():
        out |= c.free_vars
    return out


@node
class Root(Expr):
    """``this``, ``old_this``, ``result`` or a named argument."""

    name: str


@node
class Var(Expr):
    name: str


@node
class NullLit(Expr):
    pass


@node
class IntLit(Expr):
    value: int


@node
class BoolLit(Expr):
    value: bool


@node
class ValLit(Expr):
    """Literal element of a generic value domain, written ``'e0'``."""

    name: str


@node
class Nav(Expr):
    base: Expr
    field: str


@node
class Closure(Expr):
    """``base.*(f+g)`` (reflexive) or ``base.^(f+g)``; fields are kept sorted."""

    base: Expr
    fields: tuple
    reflexive: bool = True

    def __post_init__(self):
        fs = tuple(sorted(set(self.fields)))
        if not fs:
            raise ValueError("closure needs at least one field")
        object.__setattr__(self, "fields", fs)


@node
class SetOp(Expr):
    op: str
    left: Expr
    right: Expr


@node
class Card(Expr):
    arg: Expr


@node
class Arith(Expr):
    op: str
    left: Expr
    right: Expr


@node
class Compare(Expr):
    op: str
    left: Expr
    right: Expr


@node
class Member(Expr):
    op: str
    elem: Expr
    set: Expr


@node
class Logic(Expr):
    op: str
    left: Expr
    right: Expr


@node
class Not(Expr):
    arg: Expr


@node
class Quant(Expr):
    kind: str
    var: str
    domain: Expr
    body: Expr


FORMULA_NODES = (Compare, Member, Logic, Not, Quant, BoolLit)
THIS = Root("this")
OLD_THIS = Root("old_this")
RESULT = Root("result")
NULL_LIT = NullLit()


def is_formula(e: Expr) -> bool:
    return isinstance(e, (Compare, Member, Logic, Not, Quant))


def subterms(e: Expr, path: tuple = ()):
    """Yield ``(path, node)`` for every node, pre-order; a path is a tuple of child names."""
    yield path, e
    for name in e._children:
        yield from subterms(getattr(e, name), path + (name,))


def get_at(e: Expr, path: tuple) -> Expr:
    for name in path:
        e = getattr(e, name)
    return e


def replace_at(e: Expr, path: tuple, new: Expr) -> Expr:
    if not path:
        return new
    head, rest = path[0], path[1:]
    child = replace_at(getattr(e, head), rest, new)
    values = {f.name: getattr(e, f.name) for f in fields(e)}
    values[head] = child
    return type(e)(**values)


def bound_vars_at(e: Expr, path: tuple) -> list[tuple[str, Expr]]:
    """Quantifier variables in scope at ``path`` with their domains, outermost first."""
    out = []
    for name in path:
        if isinstance(e, Quant) and name == "body":
            out.append((e.var, e.domain))
        e = getattr(e, name)
    return out


def mentions_root(e: Expr, name: str) -> bool:
    return any(isinstance(n, Root) and n.name == name for _, n in subterms(e))
