"""Mutation, crossover and selection."""

from __future__ import annotations

import itertools
import random

from ..lang.ast import (
    Arith, Closure, Compare, Expr, IntLit, Logic, Member, Nav, Not, NullLit, Quant, Root, SetOp, Var,
    bound_vars_at, get_at, replace_at, subterms,
)
from ..lang.metrics import complexity
from ..lang.sorts import FORMULA, INT, SortError, infer_sort, is_reference_sort, type_sort, well_sorted
from .fitness import Chromosome, GaConfig, Gene, Scored
from .pools import ExpressionPools
from .seeding import EQ_OPS, INT_OPS, counterpart, pick

MUTATIONS = ("delete", "negate", "numeric", "replace", "extend", "operator")
_RETRIES = 4


def _nav_depth(e: Expr) -> int:
    d = 0
    while isinstance(e, Nav):
        d += 1
        e = e.base
    return d


def _field_sets(loops) -> list[tuple]:
    loops = sorted(loops)
    return [tuple(c) for k in range(1, len(loops) + 1) for c in itertools.combinations(loops, k)]


class Mutator:
    def __init__(self, pools: ExpressionPools, cfg: GaConfig, method=None):
        self.pools = pools
        self.schema = pools.schema
        self.cfg = cfg
        self.method = method
        self.max_nav = cfg.pool_depth + 1

    def _env(self, e: Expr, path: tuple) -> dict:
        env: dict = {}
        for var, domain in bound_vars_at(e, path):
            env[var] = infer_sort(domain, self.schema, env)
        return env

    def _sort(self, e: Expr, path: tuple) -> str | None:
        try:
            return infer_sort(get_at(e, path), self.schema, self._env(e, path))
        except SortError:
            return None

    def _ok(self, e: Expr, old: Expr) -> bool:
        if e == old or complexity(e) > self.cfg.max_gene_complexity or not well_sorted(e, self.schema):
            return False
        return all(_nav_depth(n) <= self.max_nav for _, n in subterms(e))

    # individual operators; each returns a new expression or None

    def negate(self, e: Expr, rng: random.Random) -> Expr | None:
        if isinstance(e, Quant):
            return None
        return e.arg if isinstance(e, Not) else Not(e)

    def numeric(self, e: Expr, rng: random.Random) -> Expr | None:
        sites = [p for p, n in subterms(e) if isinstance(n, Compare)
                 and self._sort(e, p + ("left",)) == INT and self._sort(e, p + ("right",)) == INT]
        if not sites:
            return None
        p = rng.choice(sites)
        cmp = get_at(e, p)
        amount = IntLit(1) if rng.random() < 0.5 or not self.pools.ints else rng.choice(self.pools.ints)
        return replace_at(e, p + ("right",), Arith(rng.choice(("+", "-")), cmp.right, amount))

    def _replacements(self, e: Expr, path: tuple, sort: str) -> list[list]:
        """Candidate groups for the node at ``path``; callers pick a group, then a member."""
        node = get_at(e, path)
        setlike = isinstance(node, (Closure, SetOp)) or any(isinstance(n, Closure) for _, n in subterms(node))
        groups = [self.pools.by_sort(sort, self.pools.sets if setlike else self.pools.scalars)]
        if sort == INT:
            groups.append([x for x in self.pools.ints if x not in groups[0]])
            groups.append([IntLit(i) for i in (0, 1, 2)])
        elif is_reference_sort(self.schema, sort) and not setlike:
            groups.append([NullLit()])
        local = []
        for var, vsort in self._env(e, path).items():
            if vsort == sort:
                local.append(Var(var))
            if is_reference_sort(self.schema, vsort):
                for f in self.schema.fields_of(vsort):
                    if type_sort(self.schema, f.target) == sort:
                        local.append(Nav(Var(var), f.name))
        groups.append(local)
        groups = [[x for x in g if x != node] for g in groups]
        return [g for g in groups if g]

    def replace(self, e: Expr, rng: random.Random) -> Expr | None:
        sites = []
        for p, n in subterms(e):
            if isinstance(n, (Compare, Member, Quant, Not, Logic)):
                continue
            sort = self._sort(e, p)
            if sort is None or sort == FORMULA:
                continue
            sites.append((p, sort))
        rng.shuffle(sites)
        for p, sort in sites[:_RETRIES]:
            twin = counterpart(get_at(e, p))
            if twin is not None and rng.random() < 0.5:
                return replace_at(e, p, twin)
            groups = self._replacements(e, p, sort)
            if groups:
                group = groups[rng.randrange(len(groups))]
                return replace_at(e, p, pick(rng, group, self.pools))
        return None

    def extend(self, e: Expr, rng: random.Random) -> Expr | None:
        sites = []
        for p, n in subterms(e):
            if isinstance(n, (Root, Var, Nav)):
                sort = self._sort(e, p)
                if sort is not None and is_reference_sort(self.schema, sort) and self.schema.fields_of(sort):
                    sites.append((p, sort))
        if not sites:
            return None
        p, sort = rng.choice(sites)
        f = rng.choice(self.schema.fields_of(sort))
        return replace_at(e, p, Nav(get_at(e, p), f.name))

    def operator(self, e: Expr, rng: random.Random) -> Expr | None:
        sites = [(p, n) for p, n in subterms(e) if isinstance(n, (Compare, Member, Quant, Closure, SetOp))]
        if not sites:
            return None
        p, n = rng.choice(sites)
        if isinstance(n, Closure):
            loops = self.pools.closure_fields.get(self._sort(e, p + ("base",)), ())
            alts = [(fs, r) for fs in _field_sets(loops) for r in (True, False) if (fs, r) != (n.fields, n.reflexive)]
            if not alts:
                return None
            fs, r = alts[rng.randrange(len(alts))]
            return replace_at(e, p, Closure(n.base, fs, r))
        if isinstance(n, SetOp):
            return replace_at(e, p, SetOp(rng.choice([o for o in ("+", "&", "-") if o != n.op]), n.left, n.right))
        if isinstance(n, Quant):
            return replace_at(e, p, Quant("some" if n.kind == "all" else "all", n.var, n.domain, n.body))
        if isinstance(n, Member):
            return replace_at(e, p, Member("!in" if n.op == "in" else "in", n.elem, n.set))
        family = INT_OPS if self._sort(e, p + ("left",)) == INT else EQ_OPS
        ops = [o for o in family if o != n.op]
        if not ops:
            return None
        return replace_at(e, p, Compare(rng.choice(ops), n.left, n.right))

    def mutate_gene(self, g: Gene, rng: random.Random, can_delete: bool):
        """A mutated Gene, ``None`` for deletion, or ``g`` itself when nothing applies."""
        kinds = [k for k in MUTATIONS if k != "delete" or can_delete]
        rng.shuffle(kinds)
        for kind in kinds:
            if kind == "delete":
                return None
            op = getattr(self, kind)
            for _ in range(_RETRIES):
                out = op(g.expr, rng)
                if out is None:
                    break
                if self._ok(out, g.expr):
                    return Gene.of(out, self.method)
        return g

    def mutate(self, c: Chromosome, rng: random.Random) -> Chromosome:
        genes = list(c.genes)
        out = []
        remaining = len(genes)
        for g in genes:
            if rng.random() >= self.cfg.mutation_prob:
                out.append(g)
                continue
            # keep at least one gene overall
            can_delete = remaining > 1
            m = self.mutate_gene(g, rng, can_delete)
            if m is None:
                remaining -= 1
            else:
                out.append(m)
        return Chromosome(tuple(out))


def mutate_chromosome(c: Chromosome, pools: ExpressionPools, rng: random.Random,
                      cfg: GaConfig | None = None, method=None) -> Chromosome:
    return Mutator(pools, cfg or GaConfig(), method).mutate(c, rng)


def truncate(genes, max_len: int) -> tuple:
    if len(genes) <= max_len:
        return tuple(genes)
    return tuple(sorted(genes, key=lambda g: (g.complexity, g.text))[:max_len])


def crossover(population: list[Scored], rng: random.Random, cfg: GaConfig) -> list[Chromosome]:
    """Union offspring of random pairs of candidates without positive counterexamples."""
    eligible = [s.chromosome for s in population if s.P == 0]
    if len(eligible) < 2:
        return []
    out = []
    # the rate applies to the current population, which grows past n with retained unary candidates
    for _ in range(round(cfg.crossover_rate * max(len(population), cfg.population_size))):
        a, b = rng.sample(range(len(eligible)), 2)
        merged = Chromosome(eligible[a].genes + eligible[b].genes)
        out.append(Chromosome(truncate(merged.genes, cfg.max_len)))
    return out


def rank_key(s: Scored, index: int) -> tuple:
    return (-s.fitness, len(s.chromosome), s.chromosome.complexity, index)


def select(population: list[Scored], cfg: GaConfig) -> list[Scored]:
    n = cfg.population_size
    half = n // 2
    order = [population[i] for i in sorted(range(len(population)), key=lambda i: rank_key(population[i], i))]
    chosen = order[:half]
    rest = order[half:]
    unary_invalid = [s for s in rest if len(s.chromosome) == 1 and s.P > 0][: n - half]
    chosen += unary_invalid
    if len(chosen) < n:
        taken = {id(s) for s in chosen}
        chosen += [s for s in rest if id(s) not in taken][: n - len(chosen)]
    chosen += [s for s in order if len(s.chromosome) == 1 and s.P == 0]
    seen, out = set(), []
    for s in chosen:
        if s.chromosome.key not in seen:
            seen.add(s.chromosome.key)
            out.append(s)
    return out
