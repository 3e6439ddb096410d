"""Typed expression pools enumerated from the type graph."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..lang.ast import Card, Closure, Expr, Nav, NullLit, Root, SetOp
from ..lang.sorts import INT, infer_sort, is_reference_sort
from ..state_model import Schema, TypeGraph, build_type_graph


@dataclass
class ExpressionPools:
    schema: Schema
    scalars: list = field(default_factory=list)    # field navigations from roots
    sets: list = field(default_factory=list)       # closure-based set expressions
    ints: list = field(default_factory=list)       # integer-sorted expressions
    params: list = field(default_factory=list)     # navigations rooted at arguments or result
    sort_of: dict = field(default_factory=dict)
    depth: dict = field(default_factory=dict)
    closure_fields: dict = field(default_factory=dict)  # type -> fields usable in closures

    def by_sort(self, sort: str, exprs=None) -> list:
        return [e for e in (self.scalars + self.sets if exprs is None else exprs) if self.sort_of.get(e) == sort]

    def all(self) -> list:
        return self.scalars + self.sets


def _roots(schema: Schema) -> list[Root]:
    out = [Root("this"), Root("old_this")]
    out += [Root(r.role) for r in schema.arguments]
    if schema.result is not None:
        out.append(Root("result"))
    return out


def build_pools(schema: Schema, method=None, depth_bound: int = 3, tg: TypeGraph | None = None) -> ExpressionPools:
    """Navigations up to ``depth_bound`` fields from every root, closures over self-loop fields.

    Closures get bases of depth at most one, optionally followed by one
    non-closure field, with ``- null`` variants for counting and quantifying.
    """
    if depth_bound < 1:
        raise ValueError("depth_bound must be at least 1")
    tg = tg or build_type_graph(schema)
    pools = ExpressionPools(schema)
    for t in tg.nodes:
        loops = tuple(sorted(set(tg.self_loops(t))))
        if loops:
            pools.closure_fields[t] = loops

    def add(e: Expr, depth: int, bucket: list):
        if e in pools.sort_of:
            return
        pools.sort_of[e] = infer_sort(e, schema)
        pools.depth[e] = depth
        bucket.append(e)

    frontier = []
    for r in _roots(schema):
        add(r, 0, pools.scalars)
        frontier.append(r)
    for depth in range(1, depth_bound + 1):
        nxt = []
        for e in frontier:
            sort = pools.sort_of[e]
            if not is_reference_sort(schema, sort):
                continue
            for f in schema.fields_of(sort):
                n = Nav(e, f.name)
                add(n, depth, pools.scalars)
                nxt.append(n)
        frontier = nxt

    for base in [e for e in pools.scalars if pools.depth[e] <= 1]:
        sort = pools.sort_of[base]
        loops = pools.closure_fields.get(sort) if is_reference_sort(schema, sort) else None
        if not loops:
            continue
        subsets = [c for k in range(1, len(loops) + 1) for c in itertools.combinations(loops, k)]
        for fs in subsets:
            for reflexive in (True, False):
                c = Closure(base, fs, reflexive)
                add(c, pools.depth[base] + 1, pools.sets)
                add(SetOp("-", c, NullLit()), pools.depth[base] + 1, pools.sets)
                for f in schema.fields_of(sort):
                    if f.name not in fs:
                        add(Nav(c, f.name), pools.depth[base] + 2, pools.sets)

    for e in pools.scalars:
        if pools.sort_of[e] == INT:
            pools.ints.append(e)
    for e in pools.sets:
        card = Card(e)
        pools.sort_of[card] = INT
        pools.depth[card] = pools.depth[e]
        pools.ints.append(card)
    pools.params = [e for e in pools.scalars + pools.sets if _param_rooted(e)]
    return pools


def _param_rooted(e: Expr) -> bool:
    while not isinstance(e, Root):
        e = e.base if hasattr(e, "base") else e.left
    return e.name not in ("this", "old_this")

