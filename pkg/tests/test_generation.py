import itertools
import logging
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from postinfer.generation import (
    GenerationConfig, Scope, enumerate_states, generate_corpus, generate_invalid_pairs,
    generate_valid_pairs, mutate_pair,
)
from postinfer.state_model import Obj, UsageError, canonicalize
from postinfer.subjects import get_subject, list_subjects
from postinfer.subjects.max_bag import elements


def _list_values(g):
    out, c = [], g.get(g.roots["this"], "head")
    while isinstance(c, Obj):
        out.append(g.get(c, "value"))
        c = g.get(c, "next")
    return tuple(out)


def test_singly_linked_list_k2_has_seven_states():
    states = enumerate_states(get_subject("SinglyLinkedList"), Scope(2))
    # every list of length <= 2 over {0, 1}
    expected = {seq for n in range(3) for seq in itertools.product((0, 1), repeat=n)}
    assert len(expected) == 7
    assert len(states) == 7
    assert {_list_values(g) for g in states} == expected


@pytest.mark.parametrize("subject", ["AvlTreeList", "SinglyLinkedList", "MaxBag", "DoublyLinkedListNode", "Map"])
def test_zero_scope_gives_constructor_states(subject):
    s = get_subject(subject)
    states = enumerate_states(s, Scope(0))
    assert len(states) == sum(1 for b in s.builders if b.constructor and not b.params)


@pytest.mark.parametrize("subject, k", [(s.name, k) for s in list_subjects() for k in (1, 2)])
def test_state_sets_nest_across_scopes(subject, k):
    s = get_subject(subject)
    small = {canonicalize(g) for g in enumerate_states(s, Scope(k))}
    big = {canonicalize(g) for g in enumerate_states(s, Scope(k + 1))}
    assert small <= big


def test_avl_add_k1_pair_count_matches_argument_enumeration():
    s = get_subject("AvlTreeList")
    scope = Scope(1)
    states = enumerate_states(s, scope)
    lo, hi = scope.int_range
    values = 1  # the generic domain at k=1 is {e0}
    expected = 0
    for g in states:
        size = len([o for o in g.reachable() if o.type == "Node" and g.get(o, "size") > 0])
        expected += sum(1 for i in range(lo, hi + 1) if 0 <= i <= size) * values
    assert len(generate_valid_pairs(s, "add", scope)) == expected


def test_unsatisfiable_precondition_gives_empty_set(caplog):
    with caplog.at_level(logging.WARNING):
        assert generate_valid_pairs(get_subject("MaxBag"), "get_max", Scope(0)) == []
    assert "no valid executions" in caplog.text


def test_mutation_changes_exactly_one_slot():
    s = get_subject("AvlTreeList")
    pairs = generate_valid_pairs(s, "add", Scope(2))
    rng = random.Random(3)
    for p in pairs[:50]:
        m = mutate_pair(p, Scope(2), rng)
        assert m is not None and m.tag == "invalid"
        diffs = [(o, f) for o in p.post.store for f in p.post.store[o]
                 if repr(p.post.store[o][f]) != repr(m.post.store[o][f])]
        diffs += [r for r in p.post.roots if repr(p.post.roots[r]) != repr(m.post.roots[r])]
        assert len(diffs) == 1
        assert m.pre is p.pre


def test_mutants_colliding_with_valid_pairs_are_rejected():
    s = get_subject("MaxBag")
    pairs = generate_valid_pairs(s, "get_max", Scope(3))
    keys = {p.key() for p in pairs}
    rng = random.Random(0)
    for p in pairs:
        m = mutate_pair(p, Scope(3), rng, keys)
        assert m is None or m.key() not in keys


def test_some_avl_mutant_breaks_the_walker():
    s = get_subject("AvlTreeList")
    pairs = generate_valid_pairs(s, "add", Scope(3))
    keys = {p.key() for p in pairs}
    rng = random.Random(0)
    broken = 0
    for _ in range(1000):
        m = mutate_pair(pairs[rng.randrange(len(pairs))], Scope(3), rng, keys)
        broken += bool(m is not None and s.walker(m.post))
    assert broken >= 1


@settings(max_examples=25, deadline=None)
@given(subject=st.sampled_from(["AvlTreeList", "MaxBag", "Composite", "RingBuffer"]),
       ratio=st.sampled_from([0.5, 1.0, 2.0]), seed=st.integers(0, 2**32))
def test_invalid_pairs_are_disjoint_from_valid(subject, ratio, seed):
    s = get_subject(subject)
    m = s.methods[0]
    c = generate_corpus(s, m, GenerationConfig(Scope(2), ratio, seed=seed))
    v = {p.key() for p in c.valid}
    i = [p.key() for p in c.invalid.pairs]
    assert not v & set(i)
    assert len(set(i)) == len(i)
    assert len(i) + c.invalid.shortfall == round(ratio * len(c.valid))


def test_exhaustion_is_reported_as_shortfall():
    s = get_subject("DoublyLinkedListNode")
    c = generate_corpus(s, "remove", GenerationConfig(Scope(2), 50.0, seed=1, mutation_retry_limit=5))
    assert c.invalid.shortfall > 0
    assert len(c.invalid.pairs) + c.invalid.shortfall == c.invalid.requested


def test_fixed_seed_is_deterministic():
    s = get_subject("AvlTreeList")
    a = generate_corpus(s, "add", GenerationConfig(Scope(2), 1.0, seed=42))
    b = generate_corpus(s, "add", GenerationConfig(Scope(2), 1.0, seed=42))
    assert [p.key() for p in a.pairs] == [p.key() for p in b.pairs]


def test_invalid_generation_needs_valid_pairs():
    with pytest.raises(UsageError):
        generate_invalid_pairs([], get_subject("MaxBag"), GenerationConfig(Scope(1)), random.Random(0))


def test_config_validation():
    with pytest.raises(UsageError):
        GenerationConfig(Scope(1), 0)
    with pytest.raises(UsageError):
        GenerationConfig(Scope(1), 1.0, mutation_retry_limit=0)
    with pytest.raises(UsageError):
        Scope(-1)
    assert Scope(3).int_range == (0, 2) and Scope(3).max_objects_per_type == 3


def test_max_bag_states_are_sets():
    for g in enumerate_states(get_subject("MaxBag"), Scope(3)):
        vals = elements(g)
        assert len(vals) == len(set(vals))
