import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from helpers import SCHEMA, formulas, oracle_outcome, pairs
from postinfer.lang import (
    ERR, Card, Compare, CorpusEvaluator, DslSyntaxError, EvalEnv, EvalTypeError, IntLit, Root, complexity, evaluate, infer_sort, is_mca, parse, pretty, well_sorted,
)
from postinfer.subjects import get_subject


def _norm(v):
    if isinstance(v, (set, frozenset)):
        return frozenset(v)
    if isinstance(v, int) and not isinstance(v, bool):
        return frozenset((v,))
    return v


def interpreter_outcome(e, pair):
    try:
        return _norm(evaluate(e, EvalEnv(pair)))
    except EvalTypeError:
        return "error"


def batch_outcome(e, pair):
    v = CorpusEvaluator([pair]).column(e)[0]
    return "error" if v is ERR else _norm(v)


@settings(max_examples=600, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(e=formulas(3, ill_sorted=True), pair=pairs(3))
def test_evaluators_match_bruteforce_oracle(e, pair):
    expected = _norm(oracle_outcome(e, pair))
    assert interpreter_outcome(e, pair) == expected
    assert batch_outcome(e, pair) == expected


@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(e=formulas(2), batch=st.lists(pairs(3), min_size=1, max_size=6))
def test_corpus_mask_agrees_pairwise(e, batch):
    ev = CorpusEvaluator(batch)
    m = ev.mask(e)
    for i, p in enumerate(batch):
        assert bool(m >> i & 1) == (oracle_outcome(e, p) is True)


@settings(max_examples=1200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(e=formulas(3).filter(lambda e: well_sorted(e, SCHEMA)))
def test_pretty_parse_round_trip(e):
    text = pretty(e)
    assert parse(text, SCHEMA) == e
    assert pretty(parse(text, SCHEMA)) == text


@settings(max_examples=300, deadline=None)
@given(e=formulas(3))
def test_pretty_is_a_fixpoint_after_one_parse(e):
    once = pretty(parse(pretty(e), SCHEMA))
    assert pretty(parse(once, SCHEMA)) == once


AVL = get_subject("AvlTreeList").schema_for("add")


@pytest.mark.parametrize("text", [
    "this.root != null",
    "this.root.left != null",
    "old_this.root.size < this.root.size",
    "val in this.root.*(left+right).value",
    "this.root.size == #(this.root.*(left+right - null)) - 1",
    "all n : this.root.*(left+right) : n.size >= 0",
    "!(this.root == null) && (this.root.height >= 0 => true)",
])
def test_parse_examples(text):
    e = parse(text, AVL)
    assert well_sorted(e, AVL)
    assert parse(pretty(e), AVL) == e


def test_closure_minus_null_sugar():
    e = parse("this.root.*(left+right - null)", AVL)
    assert pretty(e) == "this.root.*(left+right) - null"


@pytest.mark.parametrize("text", ["this.root ==", "all n : true", "this..root", "#"])
def test_syntax_errors_carry_position(text):
    with pytest.raises(DslSyntaxError) as info:
        parse(text, AVL)
    assert info.value.line >= 1 and info.value.column >= 1


@pytest.mark.parametrize("text, value", [
    ("this.root != null", 1),
    ("old_this.root.size < this.root.size", 1),
    ("val in this.root.*(left+right).value", 2),
    ("this.root.size == #(this.root.*(left+right - null)) - 1", 4),
    ("all n : this.root.*(left+right) : n.size >= 0", 4),
    ("#(this.root.*(left+right)) > 0", 3),
])
def test_complexity_table(text, value):
    assert complexity(parse(text, AVL)) == value


def test_mca_classification():
    add = get_subject("AvlTreeList").method("add")
    assert is_mca(parse("old_this.root.size < this.root.size", AVL), add)
    assert is_mca(parse("val in this.root.*(left+right).value", AVL), add)
    assert not is_mca(parse("this.root != null", AVL), add)


def test_sorts():
    assert infer_sort(parse("this.root.size", AVL), AVL) == infer_sort(IntLit(1), AVL)
    assert not well_sorted(Compare("<", Root("this"), IntLit(1)), AVL)
    assert not well_sorted(Card(IntLit(1)), AVL)
    assert well_sorted(parse("all n : this.root.*(left) : n != null", AVL), AVL)
