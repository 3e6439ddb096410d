import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from helpers import SCHEMA, formulas, pairs
from postinfer.assessment import (
    Postcondition, assess, dedupe_conjuncts, false_negative_proxy, false_positive_check, most_frequent,
)
from postinfer.evolution import Chromosome, GaConfig, Gene, evolve
from postinfer.generation import GenerationConfig, Scope, generate_corpus, generate_valid_pairs
from postinfer.lang import CorpusEvaluator, parse
from postinfer.subjects import get_subject
from test_subjects import FIG3

AVL = get_subject("AvlTreeList")
AVL_SCHEMA = AVL.schema_for("add")


def chrom(*texts, schema=SCHEMA):
    return Chromosome(tuple(Gene.of(parse(t, schema)) for t in texts))


def test_identical_runs():
    runs = [chrom("x >= 0", "this != null")] * 10
    post = most_frequent(runs)
    assert post.frequency == 10 and post.texts == ["this != null", "x >= 0"]


def test_gene_order_does_not_split_groups():
    a = Chromosome((Gene.of(parse("x >= 0", SCHEMA)), Gene.of(parse("this != null", SCHEMA))))
    b = Chromosome((Gene.of(parse("this != null", SCHEMA)), Gene.of(parse("x >= 0", SCHEMA))))
    assert most_frequent([a, b, chrom("x == 1")]).frequency == 2


def test_ties_go_to_higher_fitness():
    a, b, c = chrom("x >= 0"), chrom("x <= 3"), chrom("this != null")
    runs = [a] * 4 + [b] * 4 + [c] * 2
    fits = [10.0] * 4 + [9.0] * 4 + [11.0] * 2
    assert most_frequent(runs, fits).texts == ["x >= 0"]
    assert most_frequent(runs[4:8] + runs[:4], fits[4:8] + fits[:4]).texts == ["x >= 0"]
    # before fitness, ties go to the set whose conjuncts recur most across runs
    runs = [chrom("x == 0"), chrom("x == 1"), chrom("x == 1", "x != 2")]
    assert most_frequent(runs, [5.0, 1.0, 1.0]).texts == ["x != 2", "x == 1"]
    # last resort is the text
    assert most_frequent([chrom("x == 2"), chrom("x == 1")]).texts == ["x == 1"]


def test_mask_identity_joins_equivalent_spellings():
    valid = generate_valid_pairs(AVL, "add", Scope(2))
    ev = CorpusEvaluator(valid)
    a = chrom("this.root != null", schema=AVL_SCHEMA)
    b = chrom("null != this.root", schema=AVL_SCHEMA)
    c = chrom("this.root.size > 1", schema=AVL_SCHEMA)
    assert most_frequent([a, b, c]).frequency == 1
    assert most_frequent([a, b, c], identity=ev.mask).frequency == 2


def test_most_frequent_needs_runs():
    with pytest.raises(ValueError):
        most_frequent([])


def test_postcondition_ordering_and_dedupe():
    p = Postcondition((parse("#(this.*next) > 0", SCHEMA), parse("x >= 0", SCHEMA), parse("x >= 0", SCHEMA)))
    assert p.texts == ["x >= 0", "#(this.*next) > 0"]


@pytest.fixture(scope="module")
def avl_scope3():
    return generate_valid_pairs(AVL, "add", Scope(3))


def test_false_positive_check(avl_scope3):
    post = Postcondition((parse("old_this.root.size < this.root.size", AVL_SCHEMA),
                          parse("this.root.size <= 3", AVL_SCHEMA)))
    small = false_positive_check(post, AVL, "add", Scope(2))
    assert [r.false_positive for r in small] == [False, False]
    big = false_positive_check(post, AVL, "add", Scope(3), valid=avl_scope3)
    by_text = {r.text: r for r in big}
    assert not by_text["old_this.root.size < this.root.size"].false_positive
    assert by_text["this.root.size <= 3"].false_positive
    assert false_positive_check(Postcondition(()), AVL, "add", Scope(3)) == []


@pytest.mark.slow
def test_fig3_size_relation_has_no_witness_at_scope_four():
    post = Postcondition((parse("old_this.root.size < this.root.size", AVL_SCHEMA),
                          parse("this.root.size == 2", AVL_SCHEMA)))
    reports = {r.text: r for r in false_positive_check(post, AVL, "add", Scope(4))}
    assert not reports["old_this.root.size < this.root.size"].false_positive
    assert reports["this.root.size == 2"].false_positive


def test_false_negative_proxy_extremes():
    true = Postcondition((parse("this == this", AVL_SCHEMA),))
    false = Postcondition((parse("this != this", AVL_SCHEMA),))
    t = false_negative_proxy(true, AVL, "add", Scope(2), budget=200, rng=random.Random(1))
    f = false_negative_proxy(false, AVL, "add", Scope(2), budget=200, rng=random.Random(1))
    assert (t.accepted, t.drawn, t.exhausted) == (200, 200, False)
    assert f.accepted == 0
    assert "state-mutation" in t.to_json()["estimator"]
    with pytest.raises(ValueError):
        false_negative_proxy(true, AVL, "add", Scope(2), budget=0)


def test_fig3_accepts_fewer_mutants_than_a_tautology(avl_scope3):
    fig3 = Postcondition(tuple(parse(t, AVL_SCHEMA) for t in FIG3))
    true = Postcondition((parse("this == this", AVL_SCHEMA),))
    a = false_negative_proxy(fig3, AVL, "add", Scope(3), 500, random.Random(5), valid=avl_scope3)
    b = false_negative_proxy(true, AVL, "add", Scope(3), 500, random.Random(5), valid=avl_scope3)
    assert a.drawn == b.drawn == 500
    assert a.accepted < b.accepted


def test_dedupe_examples():
    valid = generate_valid_pairs(AVL, "add", Scope(2))
    g = parse("this.root != null", AVL_SCHEMA)
    assert dedupe_conjuncts(Postcondition((g, g)), valid, []).texts == ["this.root != null"]
    sym = Postcondition((parse("this.root.size == old_this.root.size + 1", AVL_SCHEMA),
                         parse("old_this.root.size + 1 == this.root.size", AVL_SCHEMA)))
    assert dedupe_conjuncts(sym, valid, []).texts == ["old_this.root.size + 1 == this.root.size"]
    # equivalent on this corpus, the longer one goes
    longer = Postcondition((parse("this.root.size >= 1", AVL_SCHEMA),
                            parse("#(this.root.*(left+right) - null) >= 2", AVL_SCHEMA)))
    ev = CorpusEvaluator(valid)
    assert ev.mask(longer.conjuncts[0]) == ev.mask(longer.conjuncts[1])
    assert dedupe_conjuncts(longer, valid, []).texts == ["this.root.size >= 1"]


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(es=st.lists(formulas(2), min_size=1, max_size=5), batch=st.lists(pairs(3), min_size=1, max_size=6),
       cut=st.integers(0, 6))
def test_dedupe_preserves_evaluation(es, batch, cut):
    post = Postcondition(tuple(es))
    out = dedupe_conjuncts(post, batch[:cut], batch[cut:])
    ev = CorpusEvaluator(batch)
    assert ev.conjunction(out.conjuncts) == ev.conjunction(post.conjuncts)
    assert len(out) <= len(post)


def test_evolved_result_has_no_witness_at_its_own_scope():
    s = get_subject("MaxBag")
    corpus = generate_corpus(s, "get_max", GenerationConfig(Scope(3), 1.0, seed=2))
    r = evolve(s, "get_max", corpus.valid, corpus.invalid.pairs, GaConfig(population_size=30, generations=4, seed=2))
    assert r.P == 0
    reports = false_positive_check(Postcondition.of(r.best), s, "get_max", Scope(3))
    assert not any(rep.false_positive for rep in reports)


def test_assess_is_deterministic():
    post = Postcondition((parse("old_this.root.size < this.root.size", AVL_SCHEMA),
                          parse("this.root.size <= 2", AVL_SCHEMA)))
    a = assess(post, AVL, "add", Scope(2), budget=100, seed=3)
    b = assess(post, AVL, "add", Scope(2), budget=100, seed=3)
    assert a.to_json() == b.to_json()
    doc = a.to_json()
    assert doc["fp_scope"] == 3 and doc["false_positives"] == 1 and doc["fp_pct"] == 50.0
    assert "FPs" in a.table()
