"""Shared strategies and a brute-force reference semantics for the assertion language.

The oracle below is written from the language rules directly: set values are
Python sets, closures are computed by iterating one-step images to a fixpoint,
and quantifiers enumerate their domain.  It shares no code with the package
evaluators.
"""

from __future__ import annotations

from hypothesis import strategies as st

from postinfer.lang.ast import (
    Arith, BoolLit, Card, Closure, Compare, IntLit, Logic, Member, Nav, Not, NullLit, Quant, Root,
    SetOp, ValLit, Var,
)
from postinfer.state_model import (
    ARGUMENT, BOOLEAN, GENERIC, INTEGER, NULL, RECEIVER, REFERENCE, FieldDecl, ObjectGraph, Obj,
    RootDecl, Schema, StatePair, TypeName, Val,
)

SCHEMA = Schema(
    types=(TypeName("Node", REFERENCE), TypeName("int", INTEGER), TypeName("K", GENERIC),
           TypeName("boolean", BOOLEAN)),
    fields=(FieldDecl("Node", "next", "Node"), FieldDecl("Node", "prev", "Node"),
            FieldDecl("Node", "val", "int"), FieldDecl("Node", "key", "K"),
            FieldDecl("Node", "mark", "boolean")),
    roots=(RootDecl("this", RECEIVER, "Node"), RootDecl("x", ARGUMENT, "int", 0)),
)
KEYS = (Val("k0"), Val("k1"))


# ── graphs ──────────────────────────────────────────────────────────────────

@st.composite
def graphs(draw, max_nodes: int = 4, ids=None):
    n = draw(st.integers(1, max_nodes))
    ids = ids or list(range(1, n + 1))
    nodes = [Obj("Node", i) for i in ids[:n]]
    refs = st.sampled_from(nodes + [NULL])
    store = {
        o: {"next": draw(refs), "prev": draw(refs), "val": draw(st.integers(0, 3)),
            "key": draw(st.sampled_from(KEYS + (NULL,))), "mark": draw(st.booleans())}
        for o in nodes
    }
    roots = {"this": draw(st.sampled_from(nodes + [NULL] if draw(st.booleans()) else nodes)),
             "x": draw(st.integers(0, 3))}
    return ObjectGraph(SCHEMA, roots, store)


@st.composite
def pairs(draw, max_nodes: int = 4):
    pre = draw(graphs(max_nodes))
    post = draw(graphs(max_nodes))
    return StatePair(pre, post, "m", "valid")


# ── expressions ─────────────────────────────────────────────────────────────

_FIELDS = ("next", "prev")


def _leaf_refs(bound):
    opts = [st.just(Root("this")), st.just(Root("old_this")), st.just(NullLit())]
    opts += [st.just(Var(v)) for v in bound]
    return st.one_of(*opts)


def refs(depth: int, bound=()):
    leaf = _leaf_refs(bound)
    if depth <= 0:
        return leaf
    sub = refs(depth - 1, bound)
    return st.one_of(
        leaf,
        st.builds(Nav, sub, st.sampled_from(_FIELDS)),
        st.builds(Closure, sub, st.sampled_from([("next",), ("prev",), ("next", "prev")]), st.booleans()),
        st.builds(SetOp, st.sampled_from(("+", "&", "-")), sub, sub),
    )


def ints(depth: int, bound=()):
    leaf = st.one_of(st.builds(IntLit, st.integers(-1, 3)), st.just(Root("x")))
    if depth <= 0:
        return leaf
    r = refs(depth - 1, bound)
    sub = ints(depth - 1, bound)
    return st.one_of(
        leaf,
        st.builds(Nav, r, st.just("val")),
        st.builds(Card, r),
        st.builds(Arith, st.sampled_from(("+", "-")), sub, sub),
    )


def keys(depth: int, bound=()):
    return st.one_of(st.builds(ValLit, st.sampled_from(("k0", "k1"))),
                     st.builds(Nav, refs(depth, bound), st.just("key")))


def formulas(depth: int = 2, bound=(), ill_sorted: bool = False):
    """Formulas over SCHEMA; with ``ill_sorted`` some comparisons mix sorts on purpose."""
    d = max(depth - 1, 0)
    atoms = [
        st.builds(Compare, st.sampled_from(("==", "!=", "<", ">", "<=", ">=")), ints(d, bound), ints(d, bound)),
        st.builds(Compare, st.sampled_from(("==", "!=")), refs(d, bound), refs(d, bound)),
        st.builds(Compare, st.sampled_from(("==", "!=")), keys(d, bound), keys(d, bound)),
        st.builds(Member, st.sampled_from(("in", "!in")), refs(d, bound), refs(d, bound)),
        st.builds(Member, st.sampled_from(("in", "!in")), keys(0, bound),
                  st.builds(Nav, refs(d, bound), st.just("key"))),
        st.builds(Compare, st.sampled_from(("==", "!=")), st.builds(Nav, refs(d, bound), st.just("mark")),
                  st.builds(BoolLit, st.booleans())),
        st.builds(BoolLit, st.booleans()),
    ]
    if ill_sorted:
        atoms.append(st.builds(Compare, st.sampled_from(("<", "==")), refs(d, bound), ints(d, bound)))
        atoms.append(st.builds(Nav, ints(0, bound), st.just("next")).map(
            lambda e: Compare("==", e, NullLit())))
    base = st.one_of(*atoms)
    if depth <= 0:
        return base
    var = f"n{len(bound)}"
    return st.one_of(
        base,
        st.builds(Logic, st.sampled_from(("&&", "||", "=>")), formulas(d, bound, ill_sorted),
                  formulas(d, bound, ill_sorted)),
        st.builds(Not, formulas(d, bound, ill_sorted)),
        st.builds(Quant, st.sampled_from(("all", "some")), st.just(var), refs(1, bound),
                  formulas(d, bound + (var,), ill_sorted)),
    )


# ── oracle ──────────────────────────────────────────────────────────────────

class OracleError(Exception):
    pass


def _order(a):
    if a is NULL:
        return (0, 0, "")
    if isinstance(a, bool):
        return (1, int(a), "")
    if isinstance(a, int):
        return (2, a, "")
    if isinstance(a, Val):
        return (3, 0, a.name)
    return (4, a.id, a.type)


def _norm(v):
    return v if isinstance(v, set) else {v}


def _uses_pre(e, pre_vars) -> bool:
    if isinstance(e, Root):
        return e.name == "old_this"
    if isinstance(e, (Nav, Closure)):
        return _uses_pre(e.base, pre_vars)
    if isinstance(e, Var):
        return e.name in pre_vars
    if isinstance(e, SetOp):
        return _uses_pre(e.left, pre_vars) and _uses_pre(e.right, pre_vars)
    return False


def _image(atoms, fields, store):
    out = set()
    for a in atoms:
        if a is NULL:
            continue
        if a not in store:
            if not isinstance(a, Obj):
                raise OracleError("navigation from a primitive")
            continue
        for f in fields:
            if f not in store[a]:
                raise OracleError("missing field")
            out.add(store[a][f])
    return out


def oracle(e, pair: StatePair, env=None, pre_vars=frozenset()):
    env = env or {}
    pre, post = pair.pre.store, pair.post.store

    def store_of(base):
        return pre if _uses_pre(base, pre_vars) else post

    if isinstance(e, Root):
        if e.name == "old_this":
            return {pair.pre.roots["this"]}
        if e.name not in pair.post.roots:
            raise OracleError("unknown root")
        return {pair.post.roots[e.name]}
    if isinstance(e, Var):
        return {env[e.name]}
    if isinstance(e, NullLit):
        return {NULL}
    if isinstance(e, (IntLit, BoolLit)):
        return e.value
    if isinstance(e, ValLit):
        return {Val(e.name)}
    if isinstance(e, Nav):
        return _image(_norm(oracle(e.base, pair, env, pre_vars)), (e.field,), store_of(e.base))
    if isinstance(e, Closure):
        base = _norm(oracle(e.base, pair, env, pre_vars))
        s = store_of(e.base)
        reach = _image(base, e.fields, s)
        while True:
            bigger = reach | _image(reach, e.fields, s)
            if bigger == reach:
                break
            reach = bigger
        return reach | base if e.reflexive else reach
    if isinstance(e, SetOp):
        a, b = _norm(oracle(e.left, pair, env, pre_vars)), _norm(oracle(e.right, pair, env, pre_vars))
        return a | b if e.op == "+" else a & b if e.op == "&" else a - b
    if isinstance(e, Card):
        v = oracle(e.arg, pair, env, pre_vars)
        if not isinstance(v, set):
            raise OracleError("card of a number")
        return len(v)
    if isinstance(e, Arith):
        a, b = _int(oracle(e.left, pair, env, pre_vars)), _int(oracle(e.right, pair, env, pre_vars))
        if a is None or b is None:
            return set()
        return a + b if e.op == "+" else a - b
    if isinstance(e, Compare):
        return _compare(e.op, _norm(oracle(e.left, pair, env, pre_vars)), _norm(oracle(e.right, pair, env, pre_vars)))
    if isinstance(e, Member):
        el, s = _norm(oracle(e.elem, pair, env, pre_vars)), _norm(oracle(e.set, pair, env, pre_vars))
        if not el:
            return False
        return el.issubset(s) if e.op == "in" else not el.issubset(s)
    if isinstance(e, Not):
        return not _bool(oracle(e.arg, pair, env, pre_vars))
    if isinstance(e, Logic):
        a = _bool(oracle(e.left, pair, env, pre_vars))
        if e.op == "&&" and not a:
            return False
        if e.op == "||" and a:
            return True
        if e.op == "=>" and not a:
            return True
        return _bool(oracle(e.right, pair, env, pre_vars))
    if isinstance(e, Quant):
        dom = oracle(e.domain, pair, env, pre_vars)
        if not isinstance(dom, set):
            raise OracleError("quantifier over a number")
        inner = pre_vars | {e.var} if _uses_pre(e.domain, pre_vars) else pre_vars - {e.var}
        for a in sorted(dom, key=_order):
            v = _bool(oracle(e.body, pair, {**env, e.var: a}, inner))
            if e.kind == "all" and not v:
                return False
            if e.kind == "some" and v:
                return True
        return e.kind == "all"
    raise AssertionError(f"unexpected node {e!r}")


def _bool(v):
    if not isinstance(v, bool):
        raise OracleError("not a formula")
    return v


def _int(s):
    s = _norm(s)
    if len(s) != 1:
        return None
    (x,) = s
    if isinstance(x, bool) or not isinstance(x, int):
        raise OracleError("not an integer")
    return x


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def _compare(op, a, b):
    if not a or not b:
        return False
    if op in ("==", "!="):
        if (len(a) > 1 or len(b) > 1) and any(_is_int(x) for x in a | b):
            return False
        return (a == b) == (op == "==")
    x, y = _int(a), _int(b)
    if x is None or y is None:
        return False
    return {"<": x < y, ">": x > y, "<=": x <= y, ">=": x >= y}[op]


def oracle_outcome(e, pair):
    """The oracle's value with errors folded into the string ``"error"``; sets become frozensets."""
    try:
        v = oracle(e, pair)
    except OracleError:
        return "error"
    return frozenset(v) if isinstance(v, set) else v
