import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from helpers import SCHEMA, formulas, oracle_outcome, pairs
from postinfer.evolution import (
    Chromosome, FitnessEvaluator, GaConfig, Gene, Mutator, Scored, build_pools, counterexamples, crossover,
    evolve, fitness, fitness_value, seed_population, select,
)
from postinfer.evolution.seeding import Seeder
from postinfer.generation import GenerationConfig, Scope, enumerate_states, generate_corpus
from postinfer.lang import CorpusEvaluator, complexity, is_mca, parse, pretty, well_sorted
from postinfer.lang.ast import Closure, Nav, Root
from postinfer.state_model import NULL, ObjectGraph, Obj, StatePair
from postinfer.subjects import get_subject

_SLOW = [HealthCheck.too_slow, HealthCheck.data_too_large]


def chromosome(*texts, schema=SCHEMA, method=None):
    return Chromosome(tuple(Gene.of(parse(t, schema), method) for t in texts))


@pytest.fixture(scope="module")
def forty_forty():
    n = Obj("Node", 1)
    vals = {"next": NULL, "prev": NULL, "val": 0, "key": NULL, "mark": False}
    batch = [ObjectGraph(SCHEMA, {"this": n, "x": i}, {n: dict(vals, val=i)}) for i in range(80)]
    ps = [StatePair(g, g, "m", "valid") for g in batch]
    return ps[:40], ps[40:]


def test_fitness_examples(forty_forty):
    v, i = forty_forty
    taut = chromosome("this == this")
    contra = chromosome("this != this")
    assert fitness(taut, v, i) == 120.25
    assert fitness(contra, v, i) == 80.25
    assert fitness_value(0, 40, 40, 160, 0.25) == 120.25
    assert fitness_value(40, 40, 40, 160, 0.25) == 80.25
    cx = counterexamples(contra, v, i)
    assert cx.P == tuple(range(40)) and cx.N == ()
    assert counterexamples(taut, v, i).N == tuple(range(40))


def _independent_fitness(c, valid, invalid, cfg):
    holds = lambda p: all(oracle_outcome(g.expr, p) is True for g in c.genes)  # noqa: E731
    p = sum(not holds(x) for x in valid)
    n = sum(holds(x) for x in invalid)
    l = len(c)
    comp = sum(complexity(g.expr) for g in c.genes)
    aux = cfg.w1 / (l + comp) + cfg.w2 * sum(is_mca(g.expr) for g in c.genes) / l
    big = 2 * (len(valid) + len(invalid))
    return (big - p - len(invalid) + aux if p else big - n + aux), p, n


corpora = st.tuples(st.lists(pairs(3), min_size=1, max_size=5), st.lists(pairs(3), max_size=5))
chromosomes = st.lists(formulas(2), min_size=1, max_size=3).map(
    lambda es: Chromosome(tuple(Gene.of(e) for e in es)))


@settings(max_examples=1000, deadline=None, suppress_health_check=_SLOW)
@given(corpus=corpora, cands=st.lists(chromosomes, min_size=2, max_size=4))
def test_no_positive_counterexample_always_outranks_one(corpus, cands):
    valid, invalid = corpus
    cfg = GaConfig()
    ev = FitnessEvaluator(valid, invalid, cfg)
    scored = [ev.score(c) for c in cands]
    for s in scored:
        f, p, n = _independent_fitness(s.chromosome, valid, invalid, cfg)
        assert (s.P, s.N if p == 0 else len(invalid)) == (p, n if p == 0 else len(invalid))
        assert s.fitness == pytest.approx(f)
    for a in scored:
        for b in scored:
            if a.P == 0 and b.P > 0:
                assert a.fitness > b.fitness


@settings(max_examples=200, deadline=None, suppress_health_check=_SLOW)
@given(corpus=corpora, es=st.lists(formulas(2), min_size=1, max_size=4), data=st.data())
def test_fitness_ignores_gene_order(corpus, es, data):
    valid, invalid = corpus
    genes = [Gene.of(e) for e in es]
    shuffled = data.draw(st.permutations(genes))
    a, b = Chromosome(tuple(genes)), Chromosome(tuple(shuffled))
    assert a.key == b.key
    assert fitness(a, valid, invalid) == fitness(b, valid, invalid)


@pytest.fixture(scope="module")
def avl():
    s = get_subject("AvlTreeList")
    corpus = generate_corpus(s, "add", GenerationConfig(Scope(2), 1.0, seed=0))
    schema = s.schema_for("add")
    return s, s.method("add"), schema, corpus.valid, corpus.invalid.pairs, build_pools(schema, s.method("add"))


@settings(max_examples=100, deadline=None, suppress_health_check=_SLOW + [HealthCheck.function_scoped_fixture])
@given(seed=st.integers(0, 2**32), data=st.data())
def test_mutation_stays_well_sorted_and_bounded(avl, seed, data):
    s, m, schema, valid, invalid, pools = avl
    cfg = GaConfig(mutation_prob=1.0, max_len=4)
    rng = random.Random(seed)
    seeds = seed_population(pools, valid, invalid, GaConfig(population_size=20), random.Random(seed), method=m)
    genes = data.draw(st.lists(st.sampled_from(seeds), min_size=1, max_size=4))
    c = Chromosome(tuple(g for x in genes for g in x.genes))
    out = Mutator(pools, cfg, m).mutate(c, rng)
    assert 1 <= len(out) <= len(c) <= cfg.max_len
    for g in out.genes:
        assert well_sorted(g.expr, schema)
        assert g.complexity <= cfg.max_gene_complexity
        assert parse(g.text, schema) == g.expr


def test_operator_mutations(avl):
    s, m, schema, *_, pools = avl
    mut = Mutator(pools, GaConfig(), m)
    rng = random.Random(0)
    e = parse("this.root == null", schema)
    assert pretty(mut.operator(e, rng)) == "this.root != null"
    assert pretty(mut.negate(e, rng)) == "!(this.root == null)"
    assert mut.negate(mut.negate(e, rng), rng) == e
    outs = {pretty(mut.operator(parse("this.root.size < index", schema), random.Random(i))) for i in range(40)}
    assert outs == {f"this.root.size {op} index" for op in ("==", "!=", ">", "<=", ">=")}
    q = parse("all n : this.root.*(left+right) : n.size >= 0", schema)
    kinds = {type(mut.operator(q, random.Random(i))).__name__ for i in range(40)}
    assert "Quant" in kinds


def test_extension_appends_a_field_of_the_right_type(avl):
    s, m, schema, *_, pools = avl
    mut = Mutator(pools, GaConfig(), m)
    e = parse("this.root == null", schema)
    seen = set()
    for i in range(60):
        out = mut.extend(e, random.Random(i))
        if not well_sorted(out, schema):
            continue
        left = out.left
        if isinstance(left, Nav) and left.base == parse("this.root", schema):
            seen.add(left.field)
    assert seen and seen <= {f.name for f in schema.fields_of("Node")}


def test_closure_mutation_switches_fields(avl):
    s, m, schema, *_, pools = avl
    mut = Mutator(pools, GaConfig(), m)
    e = parse("#(this.root.*left) > 0", schema)
    outs = set()
    for i in range(60):
        out = mut.operator(e, random.Random(i))
        if out.left != e.left:  # the closure site was picked rather than the comparison
            node = out.left.arg
            assert isinstance(node, Closure) and node.base == e.left.arg.base
            outs.add((node.fields, node.reflexive))
    # every other combination of the self-loop fields, reflexive or not
    assert outs == {(f, r) for f in (("left",), ("right",), ("left", "right")) for r in (True, False)} - {(("left",), True)}


def test_deletion_keeps_one_gene(avl):
    s, m, schema, *_, pools = avl
    cfg = GaConfig(mutation_prob=1.0)
    mut = Mutator(pools, cfg, m)
    one = chromosome("this.root != null", schema=schema)
    for i in range(50):
        assert len(mut.mutate(one, random.Random(i))) == 1


@settings(max_examples=150, deadline=None, suppress_health_check=_SLOW)
@given(corpus=corpora, cands=st.lists(chromosomes, min_size=2, max_size=6), seed=st.integers(0, 999),
       max_len=st.integers(1, 6))
def test_crossover_offspring_follow_from_both_parents(corpus, cands, seed, max_len):
    valid, invalid = corpus
    batch = valid + invalid
    ev = CorpusEvaluator(batch)
    cfg = GaConfig(population_size=4, crossover_rate=1.0, max_len=max_len)
    population = [Scored(c, 0.0, 0, 0) for c in cands]
    kids = crossover(population, random.Random(seed), cfg)
    assert len(kids) == len(cands) if len(cands) >= 4 else len(kids) == 4
    parents = [c for c in cands]
    for k in kids:
        assert 1 <= len(k) <= max_len
        # each offspring gene comes from some parent
        pool = {g.text for c in parents for g in c.genes}
        assert {g.text for g in k.genes} <= pool
    # untruncated offspring are exactly the conjunction of two parents
    for a in cands:
        for b in cands:
            merged = Chromosome(a.genes + b.genes)
            if len(merged) <= max_len:
                assert ev.conjunction(merged.exprs) == ev.conjunction(a.exprs) & ev.conjunction(b.exprs)


def test_crossover_skips_candidates_with_positive_counterexamples():
    c1, c2 = chromosome("this == this"), chromosome("x >= 0")
    pop = [Scored(c1, 0.0, 0, 1), Scored(c2, 0.0, 3, 1)]
    assert crossover(pop, random.Random(0), GaConfig(population_size=2)) == []
    pop.append(Scored(chromosome("x <= 3"), 0.0, 0, 1))
    kids = crossover(pop, random.Random(0), GaConfig(population_size=2, crossover_rate=1.0))
    assert kids and all("x >= 0" not in k.key for k in kids)


@settings(max_examples=200, deadline=None, suppress_health_check=_SLOW)
@given(corpus=corpora, cands=st.lists(chromosomes, min_size=1, max_size=12), n=st.integers(2, 6))
def test_selection(corpus, cands, n):
    valid, invalid = corpus
    ev = FitnessEvaluator(valid, invalid)
    scored = [ev.score(c) for c in cands]
    out = select(scored, GaConfig(population_size=n))
    keys = [s.chromosome.key for s in out]
    assert len(keys) == len(set(keys))
    assert max(s.fitness for s in out) == max(s.fitness for s in scored)
    unary_valid = {s.chromosome.key for s in scored if len(s.chromosome) == 1 and s.P == 0}
    assert unary_valid <= set(keys)
    assert len(out) <= max(n, len(set(keys)))


def test_seeding_gives_distinct_unary_candidates(avl):
    s, m, schema, valid, invalid, pools = avl
    cfg = GaConfig(population_size=60)
    a = seed_population(pools, valid, invalid, cfg, random.Random(1), method=m)
    b = seed_population(pools, valid, invalid, cfg, random.Random(1), method=m)
    assert [c.key for c in a] == [c.key for c in b]
    assert len(a) == 60 and all(len(c) == 1 for c in a)
    assert len({c.key for c in a}) == 60
    assert all(well_sorted(c.genes[0].expr, schema) for c in a)


def test_observed_values_seed_an_empty_tree_gene(avl):
    s, m, schema, valid, invalid, pools = avl
    empty = next(g for g in enumerate_states(s, Scope(0)))
    pair = StatePair(empty.with_roots({**empty.roots, "index": 0, "val": valid[0].post.roots["val"]}),
                     empty.with_roots({**empty.roots, "index": 0, "val": valid[0].post.roots["val"]}), "add")
    seeder = Seeder(pools, [pair], [], GaConfig(), random.Random(0), method=m)
    texts = {pretty(e) for e in (seeder.observed() for _ in range(300)) if e is not None}
    # the empty tree holds a sentinel root node, so its children are the null observations
    assert {"this.root.left == null", "this.root.size == 0"} <= texts
    assert "this.root == null" not in texts


def test_pools(avl):
    s, m, schema, *_, pools = avl
    texts = {pretty(e) for e in pools.all() + pools.ints + pools.params}
    for t in ("this.root", "this.root.left", "old_this.root.size", "this.root.*(left+right)", "index"):
        assert t in texts, t
    assert pools.closure_fields["Node"] == ("left", "right")
    for e, sort in pools.sort_of.items():
        assert sort is not None and pools.depth[e] <= 3
    assert Root("this") not in pools.sets
    with pytest.raises(ValueError):
        build_pools(schema, m, 0)


def test_evolution_is_deterministic_and_finds_a_valid_candidate():
    s = get_subject("MaxBag")
    corpus = generate_corpus(s, "get_max", GenerationConfig(Scope(3), 1.0, seed=0))
    cfg = GaConfig(population_size=30, generations=5, seed=7)
    a = evolve(s, "get_max", corpus.valid, corpus.invalid.pairs, cfg)
    b = evolve(s, "get_max", corpus.valid, corpus.invalid.pairs, cfg)
    assert a.best.key == b.best.key and a.log == b.log
    assert a.valid and a.P == 0
    assert [r["generation"] for r in a.log] == list(range(6))
    zero = evolve(s, "get_max", corpus.valid, corpus.invalid.pairs, GaConfig(population_size=30, generations=0, seed=7))
    assert zero.generations == 0 and len(zero.best) == 1
    assert a.fitness >= zero.fitness


def test_config_round_trip_and_validation():
    cfg = GaConfig(population_size=12, seed=3)
    assert GaConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(ValueError):
        GaConfig.from_json({"bogus": 1})
    with pytest.raises(ValueError):
        GaConfig(population_size=1)
    with pytest.raises(ValueError):
        GaConfig(mutation_prob=2)
