"""Complexity scores and method-component classification for genes."""

from __future__ import annotations

from .ast import Arith, Card, Closure, Compare, Expr, Member, Quant, Root, subterms

# per-node weights; a quantifier's domain is part of its fixed cost
_WEIGHTS = {Compare: 1, Member: 1, Card: 1, Closure: 1, Arith: 1}
QUANT_WEIGHT = 3


def complexity(e: Expr) -> int:
    d = e.__dict__
    c = d.get("_complexity")
    if c is None:
        c = _complexity(e)
        d["_complexity"] = c
    return c


def _complexity(e: Expr) -> int:
    if isinstance(e, Quant):
        return QUANT_WEIGHT + complexity(e.body)
    return _WEIGHTS.get(type(e), 0) + sum(complexity(c) for c in e.children())


def roots_of(e: Expr) -> set[str]:
    return {n.name for _, n in subterms(e) if isinstance(n, Root)}


def is_mca(e: Expr, method=None) -> bool:
    """True when ``e`` mentions an argument, the result, or relates pre and post receiver.

    ``method`` may supply ``parameters`` (names) to restrict which roots count
    as arguments; by default every root other than the receiver roots does.
    """
    names = roots_of(e)
    if "old_this" in names and "this" in names:
        return True
    if "result" in names:
        return True
    params = None
    if method is not None:
        params = {p if isinstance(p, str) else p[0] for p in getattr(method, "parameters", ())}
    for n in names - {"this", "old_this", "result"}:
        if params is None or n in params:
            return True
    return False
