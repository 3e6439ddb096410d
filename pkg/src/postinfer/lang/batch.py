"""Column-wise evaluation of formulas over a fixed list of pairs.

Every expression evaluates to a column with one entry per row.  The root
frame has one row per pair; a quantifier opens a child frame with one row
per (parent row, domain element).  Closed subexpressions are computed once
on the root frame, memoised, and broadcast into child frames.  Results agree
with :func:`postinfer.lang.evaluator.evaluate` entry by entry, with ``ERR``
standing for a raised :class:`EvalTypeError`.
"""

from __future__ import annotations

import operator

from ..state_model import NULL, Val, atom_sort_key
from .ast import (
    Arith, BoolLit, Card, Closure, Compare, Expr, IntLit, Logic, Member, Nav, Not, NullLit,
    Quant, Root, SetOp, ValLit, Var,
)
from .evaluator import (
    EMPTY, EvalTypeError, _NULL_SET, _as_set, _closure, _single_int, _step, compare, is_pre, member,
)


class _Error:
    __slots__ = ()

    def __repr__(self) -> str:
        return "ERR"


ERR = _Error()
_MISSING = object()
_ORDER = {"<": operator.lt, ">": operator.gt, "<=": operator.le, ">=": operator.ge}


def _int_of(v):
    """The integer held by ``v`` when it is a plain int or an int singleton, else None."""
    if v.__class__ is int:
        return v
    if v.__class__ is frozenset and len(v) == 1:
        for x in v:
            if x.__class__ is int:
                return x
    return None


class _Frame:
    __slots__ = ("n", "pidx", "bindings", "pre_vars", "memo", "_stores")

    def __init__(self, n, pidx, bindings, pre_vars):
        self.n = n
        self.pidx = pidx  # row -> pair index; None on the root frame
        self.bindings = bindings
        self.pre_vars = pre_vars
        self.memo: dict = {}
        self._stores: dict = {}


class CorpusEvaluator:
    """Truth masks and value columns over ``pairs``.

    A mask is an ``int`` whose bit ``i`` is set when the formula holds on
    ``pairs[i]``; an evaluation error counts as not holding.
    """

    def __init__(self, pairs, memo_cells: int = 20_000_000, mask_limit: int = 400_000):
        self.pairs = list(pairs)
        n = len(self.pairs)
        self.n = n
        self.all_bits = (1 << n) - 1
        self.root = _Frame(n, None, {}, frozenset())
        self._pre_stores = [p.pre.store for p in self.pairs]
        self._post_stores = [p.post.store for p in self.pairs]
        self._root_cols: dict = {}
        self.memo: dict = {}
        self.memo_limit = max(1000, memo_cells // max(n, 1))
        self.masks: dict = {}
        self.mask_limit = mask_limit

    def __len__(self) -> int:
        return self.n

    # ── public API ──────────────────────────────────────────────────────────

    def mask(self, e: Expr) -> int:
        m = self.masks.get(e)
        if m is None:
            if len(self.masks) > self.mask_limit:
                self.masks.clear()
            m = self._to_mask(self.column(e))
            self.masks[e] = m
        return m

    def column(self, e: Expr) -> list:
        if len(self.memo) > self.memo_limit:
            self.memo.clear()
        return self._col(e, self.root)

    def values(self, e: Expr) -> list:
        """Per-pair values, ``None`` where evaluation fails."""
        return [None if v is ERR else v for v in self.column(e)]

    def conjunction(self, exprs) -> int:
        m = self.all_bits
        for e in exprs:
            m &= self.mask(e)
            if not m:
                break
        return m

    @staticmethod
    def _to_mask(col: list) -> int:
        if not col:
            return 0
        return int("".join(["1" if v is True else "0" for v in reversed(col)]), 2)

    # ── frames ──────────────────────────────────────────────────────────────

    def _stores(self, frame: _Frame, pre: bool) -> list:
        s = frame._stores.get(pre)
        if s is None:
            base = self._pre_stores if pre else self._post_stores
            s = base if frame.pidx is None else [base[i] for i in frame.pidx]
            frame._stores[pre] = s
        return s

    def _col(self, e: Expr, frame: _Frame) -> list:
        closed = not e.free_vars
        if closed:
            col = self.memo.get(e)
            if col is None:
                col = _DISPATCH[e.__class__](self, e, self.root)
                self.memo[e] = col
            if frame.pidx is None:
                return col
            hit = frame.memo.get(e)
            if hit is None:
                hit = [col[i] for i in frame.pidx]
                frame.memo[e] = hit
            return hit
        hit = frame.memo.get(e)
        if hit is None:
            hit = _DISPATCH[e.__class__](self, e, frame)
            frame.memo[e] = hit
        return hit

    def _root_col(self, name: str) -> list:
        col = self._root_cols.get(name)
        if col is None:
            if name == "old_this":
                col = [frozenset((p.pre.roots["this"],)) for p in self.pairs]
            else:
                col = [frozenset((p.post.roots[name],)) if name in p.post.roots else ERR for p in self.pairs]
            self._root_cols[name] = col
        return col

    # ── node kinds ──────────────────────────────────────────────────────────

    def _root(self, e: Root, frame: _Frame) -> list:
        col = self._root_col(e.name)
        return col if frame.pidx is None else [col[i] for i in frame.pidx]

    def _var(self, e: Var, frame: _Frame) -> list:
        atoms = frame.bindings.get(e.name)
        if atoms is None:
            return [ERR] * frame.n
        return [frozenset((a,)) for a in atoms]

    def _nav(self, e: Nav, frame: _Frame) -> list:
        base = self._col(e.base, frame)
        stores = self._stores(frame, is_pre(e.base, frame.pre_vars))
        name = e.field
        out = []
        append = out.append
        for b, st in zip(base, stores):
            if b is ERR:
                append(ERR)
                continue
            if b.__class__ is frozenset and len(b) == 1:
                # single object: read the field directly
                for a in b:
                    pass
                values = st.get(a)
                if values is not None:
                    v = values.get(name, _MISSING)
                    if v is not _MISSING:
                        append(frozenset((v,)))
                        continue
                elif a is NULL:
                    append(EMPTY)
                    continue
            try:
                append(frozenset(_step(_as_set(b), name, st)))
            except EvalTypeError:
                append(ERR)
        return out

    def _closure(self, e: Closure, frame: _Frame) -> list:
        base = self._col(e.base, frame)
        stores = self._stores(frame, is_pre(e.base, frame.pre_vars))
        fields, reflexive = e.fields, e.reflexive
        out = []
        for b, st in zip(base, stores):
            if b is ERR:
                out.append(ERR)
                continue
            try:
                out.append(_closure(_as_set(b), fields, st, reflexive))
            except EvalTypeError:
                out.append(ERR)
        return out

    def _setop(self, e: SetOp, frame: _Frame) -> list:
        left, right = self._col(e.left, frame), self._col(e.right, frame)
        op = e.op
        out = []
        for a, b in zip(left, right):
            if a is ERR or b is ERR:
                out.append(ERR)
                continue
            a, b = _as_set(a), _as_set(b)
            out.append(a | b if op == "+" else a & b if op == "&" else a - b)
        return out

    def _card(self, e: Card, frame: _Frame) -> list:
        return [len(v) if v.__class__ is frozenset else ERR for v in self._col(e.arg, frame)]

    def _arith(self, e: Arith, frame: _Frame) -> list:
        left, right = self._col(e.left, frame), self._col(e.right, frame)
        plus = e.op == "+"
        out = []
        for a, b in zip(left, right):
            if a.__class__ is int and b.__class__ is int:
                out.append(a + b if plus else a - b)
                continue
            if a is ERR or b is ERR:
                out.append(ERR)
                continue
            try:
                x, y = _single_int(_as_set(a)), _single_int(_as_set(b))
            except EvalTypeError:
                out.append(ERR)
                continue
            if x is None or y is None:
                out.append(EMPTY)
            else:
                out.append(x + y if plus else x - y)
        return out

    def _binary(self, fn, op, left, right) -> list:
        out = []
        for a, b in zip(left, right):
            if a is ERR or b is ERR:
                out.append(ERR)
                continue
            try:
                out.append(fn(op, a, b))
            except EvalTypeError:
                out.append(ERR)
        return out

    def _compare(self, e: Compare, frame: _Frame) -> list:
        left, right = self._col(e.left, frame), self._col(e.right, frame)
        op = e.op
        out = []
        append = out.append
        if op in ("==", "!="):
            eq = op == "=="
            # fast path for two singletons; everything else defers to compare()
            for a, b in zip(left, right):
                if a is ERR or b is ERR:
                    append(ERR)
                elif a.__class__ is frozenset and b.__class__ is frozenset and len(a) == 1 and len(b) == 1:
                    append((a == b) is eq)
                else:
                    append(compare(op, a, b))
            return out
        fn = _ORDER[op]
        for a, b in zip(left, right):
            x, y = _int_of(a), _int_of(b)
            if x is not None and y is not None:
                append(fn(x, y))
            elif a is ERR or b is ERR:
                append(ERR)
            else:
                try:
                    append(compare(op, a, b))
                except EvalTypeError:
                    append(ERR)
        return out

    def _member(self, e: Member, frame: _Frame) -> list:
        return self._binary(member, e.op, self._col(e.elem, frame), self._col(e.set, frame))

    def _logic(self, e: Logic, frame: _Frame) -> list:
        left, right = self._col(e.left, frame), self._col(e.right, frame)
        op = e.op
        out = []
        for a, b in zip(left, right):
            if a.__class__ is not bool:
                out.append(ERR)
            elif op == "&&":
                out.append(False if not a else (b if b.__class__ is bool else ERR))
            elif op == "||":
                out.append(True if a else (b if b.__class__ is bool else ERR))
            else:
                out.append(True if not a else (b if b.__class__ is bool else ERR))
        return out

    def _not(self, e: Not, frame: _Frame) -> list:
        return [(not v) if v.__class__ is bool else ERR for v in self._col(e.arg, frame)]

    def _quant(self, e: Quant, frame: _Frame) -> list:
        domain = self._col(e.domain, frame)
        want = e.kind == "some"
        out = [not want] * frame.n
        decided = bytearray(frame.n)
        parent, atoms = [], []
        for r, d in enumerate(domain):
            if d.__class__ is not frozenset:
                out[r] = ERR
                decided[r] = 1
                continue
            for a in sorted(d, key=atom_sort_key):
                parent.append(r)
                atoms.append(a)
        if not parent:
            return out
        pidx = parent if frame.pidx is None else [frame.pidx[r] for r in parent]
        bindings = {name: [col[r] for r in parent] for name, col in frame.bindings.items()}
        bindings[e.var] = atoms
        pre = is_pre(e.domain, frame.pre_vars)
        pre_vars = frame.pre_vars | {e.var} if pre else frame.pre_vars - {e.var}
        child = _Frame(len(parent), pidx, bindings, pre_vars)
        body = self._col(e.body, child)
        for r, b in zip(parent, body):
            if decided[r]:
                continue
            if b.__class__ is not bool:
                out[r] = ERR
                decided[r] = 1
            elif b is want:
                out[r] = want
                decided[r] = 1
        return out


def _const(value):
    def f(self, e, frame):
        return [value(e)] * frame.n

    return f


_DISPATCH = {
    Root: CorpusEvaluator._root,
    Var: CorpusEvaluator._var,
    NullLit: _const(lambda e: _NULL_SET),
    IntLit: _const(lambda e: e.value),
    BoolLit: _const(lambda e: e.value),
    ValLit: _const(lambda e: frozenset((Val(e.name),))),
    Nav: CorpusEvaluator._nav,
    Closure: CorpusEvaluator._closure,
    SetOp: CorpusEvaluator._setop,
    Card: CorpusEvaluator._card,
    Arith: CorpusEvaluator._arith,
    Compare: CorpusEvaluator._compare,
    Member: CorpusEvaluator._member,
    Logic: CorpusEvaluator._logic,
    Not: CorpusEvaluator._not,
    Quant: CorpusEvaluator._quant,
}
