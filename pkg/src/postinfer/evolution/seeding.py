"""Initial population: unary chromosomes drawn round-robin from five gene families.

(a) ``expr == v`` / ``expr != v`` with ``v`` observed on a sampled pair;
(b) same-sort comparisons between pooled expressions;
(c) quantified formulas over pooled set expressions;
(d) integer expressions against a cardinality;
(e) argument- or result-rooted expressions against same-sort expressions.
"""

from __future__ import annotations

import dataclasses
import random

from ..lang.ast import (
    BoolLit, Card, Closure, Compare, Expr, IntLit, Logic, Member, Nav, NullLit, Quant, Root,
    SetOp, ValLit, Var,
)
from ..lang.batch import CorpusEvaluator
from ..lang.sorts import INT, is_reference_sort, type_sort, well_sorted
from ..state_model import NULL, Val
from .fitness import Chromosome, GaConfig, Gene
from .pools import ExpressionPools

EQ_OPS = ("==", "!=")
INT_OPS = ("==", "!=", "<", ">", "<=", ">=")


def pick(rng: random.Random, exprs: list, pools: ExpressionPools):
    """Uniform over navigation depth first, then over expressions of that depth."""
    if not exprs:
        return None
    by_depth: dict = {}
    for e in exprs:
        by_depth.setdefault(pools.depth.get(e, 0), []).append(e)
    depths = sorted(by_depth)
    bucket = by_depth[depths[rng.randrange(len(depths))]]
    return bucket[rng.randrange(len(bucket))]


def literal(atom) -> Expr | None:
    if atom is NULL:
        return NullLit()
    if isinstance(atom, bool):
        return BoolLit(atom)
    if isinstance(atom, int):
        return IntLit(atom)
    if isinstance(atom, Val):
        return ValLit(atom.name)
    return None


def counterpart(e: Expr) -> Expr | None:
    """``e`` with ``this`` and ``old_this`` swapped, or None when it mentions neither."""
    if isinstance(e, Root):
        return {"this": Root("old_this"), "old_this": Root("this")}.get(e.name)
    changed = False
    kids = {}
    for name in e._children:
        child = getattr(e, name)
        twin = counterpart(child)
        kids[name] = child if twin is None else twin
        changed |= twin is not None
    return dataclasses.replace(e, **kids) if changed else None


def _rooted_at(e: Expr, name: str) -> bool:
    while isinstance(e, Nav):
        e = e.base
    return isinstance(e, Root) and e.name == name


def ops_for(pools: ExpressionPools, sort: str) -> tuple:
    return INT_OPS if sort == INT else EQ_OPS


class Seeder:
    def __init__(self, pools: ExpressionPools, valid, invalid, cfg: GaConfig, rng: random.Random, method=None):
        self.pools = pools
        self.schema = pools.schema
        self.rng = rng
        self.cfg = cfg
        self.method = method
        k = cfg.seed_sample
        vs = rng.sample(range(len(valid)), min(len(valid), k))
        is_ = rng.sample(range(len(invalid)), min(len(invalid), k))
        self.sample = [valid[i] for i in vs] + [invalid[i] for i in is_]
        self.sample_ev = CorpusEvaluator(self.sample)
        # operator choices are checked against the whole corpus, observed values use the sample
        self.valid_ev = CorpusEvaluator(list(valid))
        self.invalid_ev = CorpusEvaluator(list(invalid))
        self.scalars = [e for e in pools.scalars if pools.depth[e] > 0]
        self._params = None
        self._twins = [e for e in self.scalars if _rooted_at(e, "this") and counterpart(e) in pools.sort_of]
        rng.shuffle(self._twins)
        self._twins.sort(key=lambda e: pools.depth[e])  # shallow first, random within a depth
        self._twin_turn = 0
        self._turn = 0
        self.categories = (self.observed, self.same_sort, self.quantified, self.cardinality, self.param)

    def _consistent(self, ops, make) -> Expr:
        """``make(op)`` for an operator holding on every sampled valid pair, if any.

        Among those, the ones accepting the fewest sampled invalid pairs are preferred.
        """
        ok = [o for o in ops if self.valid_ev.mask(make(o)) == self.valid_ev.all_bits]
        if not ok:
            return make(self.rng.choice(list(ops)))
        accepted = {o: self.invalid_ev.mask(make(o)).bit_count() for o in ok}
        least = min(accepted.values())
        return make(self.rng.choice([o for o in ok if accepted[o] == least]))

    # (a)
    def observed(self) -> Expr | None:
        e = pick(self.rng, self.scalars, self.pools)
        if e is None or not self.sample:
            return None
        values = self.sample_ev.values(e)
        v = values[self.rng.randrange(len(values))]
        if not isinstance(v, frozenset) or len(v) != 1:
            return None
        lit = literal(next(iter(v)))
        if lit is None:
            return None
        if isinstance(lit, NullLit) and self.pools.sort_of[e] == INT:
            return None
        return Compare(self.rng.choice(EQ_OPS), e, lit)

    # (b)
    def same_sort(self) -> Expr | None:
        a = pick(self.rng, self.scalars, self.pools)
        if a is None:
            return None
        if self._twins and self.rng.random() < 0.5:
            # relate a post-state navigation to its pre-state twin, cycling through all of them
            a = self._twins[self._twin_turn % len(self._twins)]
            self._twin_turn += 1
            twin = counterpart(a)
            return self._consistent(ops_for(self.pools, self.pools.sort_of[a]), lambda o: Compare(o, twin, a))
        sort = self.pools.sort_of[a]
        b = self._partner(a, sort)
        if b is None:
            return None
        return self._consistent(ops_for(self.pools, sort), lambda o: Compare(o, a, b))

    def _partner(self, a: Expr, sort: str) -> Expr | None:
        """A same-sort pooled expression; for integers, scalars and cardinalities are equally likely."""
        groups = [[e for e in self.pools.by_sort(sort, self.pools.scalars) if e != a]]
        if sort == INT:
            groups.append([e for e in self.pools.ints if e != a and e not in groups[0]])
        groups = [g for g in groups if g]
        if not groups:
            return None
        return pick(self.rng, groups[self.rng.randrange(len(groups))], self.pools)

    # (c)
    def quantified(self) -> Expr | None:
        domains = [e for e in self.pools.sets if isinstance(e, (Closure, SetOp))
                   and is_reference_sort(self.schema, self.pools.sort_of[e])]
        if not domains:
            return None
        d = pick(self.rng, domains, self.pools)
        sort = self.pools.sort_of[d]
        var = Var("n")
        loops = self.pools.closure_fields.get(sort, ())
        int_fields = [f.name for f in self.schema.fields_of(sort) if self._field_sort(sort, f.name) == INT]
        choice = self.rng.randrange(4)
        if choice == 0 and loops:
            fs = tuple(sorted(self.rng.sample(loops, self.rng.randint(1, len(loops)))))
            body: Expr = Member("!in", var, Closure(var, fs, False))
        elif choice == 1 and loops and int_fields:
            f, g = self.rng.choice(loops), self.rng.choice(int_fields)
            guard = Compare("!=", Nav(var, f), NullLit())
            body = Logic("=>", guard, Compare(self.rng.choice(INT_OPS), Nav(var, g), Nav(Nav(var, f), g)))
        else:
            fields = self.schema.fields_of(sort)
            if not fields:
                return None
            f = self.rng.choice(fields)
            left = Nav(var, f.name)
            fsort = self._field_sort(sort, f.name)
            args = [e for e in self.pools.params if self.pools.sort_of[e] == fsort and e in self.pools.scalars]
            if args and self.rng.random() < 0.5:
                # relate every element to an argument or the result
                right = args[self.rng.randrange(len(args))]
                return self._consistent(ops_for(self.pools, fsort),
                                        lambda o: Quant("all", "n", d, Compare(o, left, right)))
            candidates = [Nav(var, g.name) for g in fields if g.name != f.name and self._field_sort(sort, g.name) == fsort]
            candidates += self.pools.by_sort(fsort, self.pools.scalars)
            if fsort == INT:
                candidates += self.pools.ints
            else:
                candidates.append(NullLit())
            if fsort == sort:
                candidates.append(var)
            right = candidates[self.rng.randrange(len(candidates))] if candidates else NullLit()
            body = Compare(self.rng.choice(ops_for(self.pools, fsort)), left, right)
        return Quant(self.rng.choice(("all", "all", "some")), "n", d, body)

    def _field_sort(self, owner: str, name: str) -> str:
        return type_sort(self.schema, self.schema.field(owner, name).target)

    # (d)
    def cardinality(self) -> Expr | None:
        cards = [e for e in self.pools.ints if isinstance(e, Card)]
        ints = [e for e in self.pools.ints if not isinstance(e, Card)]
        if not cards:
            return None
        c = pick(self.rng, cards, self.pools)
        other = pick(self.rng, ints, self.pools) if ints else IntLit(self.rng.randrange(max(1, len(self.sample))))
        return self._consistent(INT_OPS, lambda o: Compare(o, other, c))

    # (e)
    def param(self) -> Expr | None:
        """Arguments and result against same-sort partners, drawn without replacement per argument."""
        if self._params is None:
            self._params = []
            for a in self.pools.params:
                sort = self.pools.sort_of[a]
                partners = [e for e in self.pools.by_sort(sort, self.pools.scalars) if e != a]
                if sort == INT:
                    partners += [e for e in self.pools.ints if e != a and e not in partners]
                if a in self.pools.scalars:
                    partners += [e for e in self.pools.by_sort(sort, self.pools.sets) if e != a]
                self.rng.shuffle(partners)
                # partners related to the argument on every sampled valid pair come first, shallowest first
                partners.sort(key=lambda b: (not self._holds_for_some_op(a, b, sort), self.pools.depth[b]))
                if partners:
                    self._params.append((a, partners))
        if not self._params:
            return self.same_sort()
        t = self._turn
        self._turn += 1
        a, partners = self._params[t % len(self._params)]
        b = partners[(t // len(self._params)) % len(partners)]
        sort = self.pools.sort_of[a]
        if b in self.pools.sets:
            return self._consistent(("in", "!in"), lambda o: Member(o, a, b))
        return self._consistent(ops_for(self.pools, sort), lambda o: Compare(o, a, b))

    def _holds_for_some_op(self, a: Expr, b: Expr, sort: str) -> bool:
        if b in self.pools.sets:
            made = [Member(o, a, b) for o in ("in", "!in")]
        else:
            made = [Compare(o, a, b) for o in ops_for(self.pools, sort)]
        return any(self.valid_ev.mask(e) == self.valid_ev.all_bits for e in made)

    def gene(self, category: int) -> Expr | None:
        return self.categories[category % len(self.categories)]()


def seed_population(pools: ExpressionPools, valid, invalid, cfg: GaConfig, rng: random.Random,
                    method=None, attempts: int = 50) -> list[Chromosome]:
    """``cfg.population_size`` distinct unary chromosomes (fewer if the families run dry)."""
    if not valid:
        raise ValueError("seeding needs a nonempty valid set")
    seeder = Seeder(pools, valid, invalid, cfg, rng, method=method)
    population: list[Chromosome] = []
    seen: set = set()
    slot = 0
    misses = 0
    while len(population) < cfg.population_size and misses < attempts * 5:
        made = None
        for offset in range(len(seeder.categories)):
            for _ in range(attempts // len(seeder.categories) + 1):
                e = seeder.gene(slot + offset)
                if e is not None and well_sorted(e, pools.schema):
                    g = Gene.of(e, method)
                    if g.text not in seen:
                        made = g
                        break
            if made is not None:
                break
        slot += 1
        if made is None:
            misses += 1
            continue
        seen.add(made.text)
        population.append(Chromosome((made,)))
    return population

