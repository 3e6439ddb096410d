"""Relational evaluator.

Set-valued expressions evaluate to frozensets of atoms; a scalar field is
the singleton set of its value.  Cardinality and arithmetic yield ``int``,
formulas yield ``bool``.  An undefined arithmetic result (an operand that
is not a single integer) is the empty set.

Expressions rooted at ``old_this`` navigate the pre-state store, all others
the post-state store.  A quantified variable lives in the state of its
domain.

Any comparison with an empty operand is false, for ``!=`` as well as
``==``.  This keeps null-guarded conjuncts such as
``n.left != null => n.height > n.left.height`` true on leaves.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..state_model import NULL, Obj, StatePair, Val, atom_sort_key
from .ast import (
    Arith, BoolLit, Card, Closure, Compare, Expr, IntLit, Logic, Member, Nav, Not, NullLit,
    Quant, Root, SetOp, ValLit, Var,
)

EMPTY: frozenset = frozenset()
_NULL_SET = frozenset((NULL,))


class EvalTypeError(TypeError):
    """A run-time sort violation, e.g. ordering on references."""


@dataclass
class EvalEnv:
    pair: StatePair
    bindings: dict = field(default_factory=dict)
    pre_vars: frozenset = frozenset()

    def bind(self, name: str, atom, pre: bool) -> "EvalEnv":
        bindings = dict(self.bindings)
        bindings[name] = atom
        pre_vars = self.pre_vars | {name} if pre else self.pre_vars - {name}
        return EvalEnv(self.pair, bindings, pre_vars)


def is_pre(e: Expr, pre_vars: frozenset = frozenset()) -> bool:
    """Whether ``e`` denotes pre-state atoms (navigation follows the pre store)."""
    while isinstance(e, (Nav, Closure)):
        e = e.base
    if isinstance(e, Root):
        return e.name == "old_this"
    if isinstance(e, Var):
        return e.name in pre_vars
    if isinstance(e, SetOp):
        return is_pre(e.left, pre_vars) and is_pre(e.right, pre_vars)
    return False


def _as_set(v) -> frozenset:
    if isinstance(v, frozenset):
        return v
    return frozenset((v,))


def _store(e: Expr, env: EvalEnv):
    return env.pair.pre.store if is_pre(e, env.pre_vars) else env.pair.post.store


def _step(atoms, name: str, store) -> set:
    out = set()
    for a in atoms:
        if a is NULL:
            continue
        values = store.get(a)
        if values is None:
            if not isinstance(a, Obj):
                raise EvalTypeError(f"cannot navigate .{name} from {a!r}")
            continue
        try:
            out.add(values[name])
        except KeyError:
            raise EvalTypeError(f"{a.type} has no field {name!r}") from None
    return out


def _closure(base: frozenset, fields: tuple, store, reflexive: bool) -> frozenset:
    seen = set(base) if reflexive else set()
    visited = set()
    queue = deque(base)
    while queue:
        a = queue.popleft()
        if a is NULL or a in visited:
            continue
        visited.add(a)
        values = store.get(a)
        if values is None:
            if not isinstance(a, Obj):
                raise EvalTypeError(f"cannot take closure from {a!r}")
            continue
        for f in fields:
            try:
                v = values[f]
            except KeyError:
                raise EvalTypeError(f"{a.type} has no field {f!r}") from None
            if v not in seen:
                seen.add(v)
            if v not in visited:
                queue.append(v)
    return frozenset(seen)


def _single_int(s: frozenset):
    if len(s) != 1:
        return None
    (x,) = s
    if isinstance(x, bool) or not isinstance(x, int):
        raise EvalTypeError(f"expected an integer, got {x!r}")
    return x


def _has_int(s: frozenset) -> bool:
    return any(isinstance(x, int) and not isinstance(x, bool) for x in s)


def compare(op: str, a, b) -> bool:
    a, b = _as_set(a), _as_set(b)
    if not a or not b:
        return False
    if op in ("==", "!="):
        if (len(a) != 1 or len(b) != 1) and (_has_int(a) or _has_int(b)):
            return False
        return (a == b) if op == "==" else (a != b)
    x, y = _single_int(a), _single_int(b)
    if x is None or y is None:
        return False
    if op == "<":
        return x < y
    if op == ">":
        return x > y
    if op == "<=":
        return x <= y
    return x >= y


def member(op: str, elem, s) -> bool:
    elem, s = _as_set(elem), _as_set(s)
    if not elem:
        return False
    inside = elem <= s
    return inside if op == "in" else not inside


def _formula(v) -> bool:
    if not isinstance(v, bool):
        raise EvalTypeError(f"expected a formula, got {v!r}")
    return v


def evaluate(e: Expr, env: EvalEnv):
    """Evaluate ``e`` on ``env.pair``; raises :class:`EvalTypeError` on sort violations."""
    return _EVAL[e.__class__](e, env)


def _root(e: Root, env: EvalEnv):
    name = e.name
    if name == "this":
        return frozenset((env.pair.post.roots["this"],))
    if name == "old_this":
        return frozenset((env.pair.pre.roots["this"],))
    roots = env.pair.post.roots
    if name not in roots:
        raise EvalTypeError(f"no root named {name!r}")
    return frozenset((roots[name],))


def _var(e: Var, env: EvalEnv):
    try:
        return frozenset((env.bindings[e.name],))
    except KeyError:
        raise EvalTypeError(f"unbound variable {e.name!r}") from None


def _nav(e: Nav, env: EvalEnv):
    base = _as_set(evaluate(e.base, env))
    return frozenset(_step(base, e.field, _store(e.base, env)))


def _clos(e: Closure, env: EvalEnv):
    base = _as_set(evaluate(e.base, env))
    return _closure(base, e.fields, _store(e.base, env), e.reflexive)


def _setop(e: SetOp, env: EvalEnv):
    a = _as_set(evaluate(e.left, env))
    b = _as_set(evaluate(e.right, env))
    if e.op == "+":
        return a | b
    if e.op == "&":
        return a & b
    return a - b


def _card(e: Card, env: EvalEnv):
    v = evaluate(e.arg, env)
    if not isinstance(v, frozenset):
        raise EvalTypeError("cardinality of a non-set value")
    return len(v)


def _arith(e: Arith, env: EvalEnv):
    x = _single_int(_as_set(evaluate(e.left, env)))
    y = _single_int(_as_set(evaluate(e.right, env)))
    if x is None or y is None:
        return EMPTY
    return x + y if e.op == "+" else x - y


def _compare(e: Compare, env: EvalEnv):
    return compare(e.op, evaluate(e.left, env), evaluate(e.right, env))


def _member(e: Member, env: EvalEnv):
    return member(e.op, evaluate(e.elem, env), evaluate(e.set, env))


def _logic(e: Logic, env: EvalEnv):
    a = _formula(evaluate(e.left, env))
    if e.op == "&&":
        return a and _formula(evaluate(e.right, env))
    if e.op == "||":
        return a or _formula(evaluate(e.right, env))
    return (not a) or _formula(evaluate(e.right, env))


def _not(e: Not, env: EvalEnv):
    return not _formula(evaluate(e.arg, env))


def _quant(e: Quant, env: EvalEnv):
    domain = evaluate(e.domain, env)
    if not isinstance(domain, frozenset):
        raise EvalTypeError("quantifier over a non-set value")
    pre = is_pre(e.domain, env.pre_vars)
    want = e.kind == "some"
    for atom in sorted(domain, key=atom_sort_key):
        if _formula(evaluate(e.body, env.bind(e.var, atom, pre))) == want:
            return want
    return not want


_EVAL = {
    Root: _root,
    Var: _var,
    NullLit: lambda e, env: _NULL_SET,
    IntLit: lambda e, env: e.value,
    BoolLit: lambda e, env: e.value,
    ValLit: lambda e, env: frozenset((Val(e.name),)),
    Nav: _nav,
    Closure: _clos,
    SetOp: _setop,
    Card: _card,
    Arith: _arith,
    Compare: _compare,
    Member: _member,
    Logic: _logic,
    Not: _not,
    Quant: _quant,
}


def eval_formula(e: Expr, pair: StatePair) -> bool:
    """Truth of ``e`` on ``pair``; a type error counts as false."""
    try:
        return evaluate(e, EvalEnv(pair)) is True
    except EvalTypeError:
        return False


def eval_chromosome(genes, pair: StatePair) -> bool:
    """Conjunction of ``genes`` on ``pair``, short-circuiting; errors propagate."""
    env = EvalEnv(pair)
    for g in genes:
        if _formula(evaluate(getattr(g, "expr", g), env)) is False:
            return False
    return True
