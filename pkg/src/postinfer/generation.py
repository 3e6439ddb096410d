"""Bounded-exhaustive generation of valid pairs and mutation of invalid ones."""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field

from .state_model import (
    BOOLEAN, GENERIC, INTEGER, NULL, ObjectGraph, Obj, StatePair, UsageError, atom_sort_key,
    canonicalize, value_domain,
)
from .subjects.base import (
    Method, PreconditionViolation, Subject, apply_builder, execute, merge_roots, primitive_domain,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Scope:
    k: int
    max_objects_per_type: int | None = None
    int_range: tuple | None = None

    def __post_init__(self):
        if self.k < 0:
            raise UsageError("scope must be nonnegative")
        if self.max_objects_per_type is None:
            object.__setattr__(self, "max_objects_per_type", self.k)
        if self.int_range is None:
            object.__setattr__(self, "int_range", (0, self.k - 1))

    def bumped(self, by: int = 1) -> "Scope":
        return Scope(self.k + by)

    def to_json(self) -> dict:
        return {"k": self.k, "max_objects_per_type": self.max_objects_per_type, "int_range": list(self.int_range)}


@dataclass(frozen=True)
class GenerationConfig:
    scope: Scope
    invalid_ratio: float = 1.0
    mutation_retry_limit: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.invalid_ratio <= 0:
            raise UsageError("invalid_ratio must be positive")
        if self.mutation_retry_limit < 1:
            raise UsageError("mutation_retry_limit must be at least 1")


def _within_bound(subject: Subject, g: ObjectGraph, scope: Scope) -> bool:
    return all(n <= scope.max_objects_per_type for n in subject.object_counts(g).values())


def _arg_tuples(subject: Subject, params, scope: Scope, states=None, method=None) -> list[tuple]:
    domains = []
    schema = subject.schema
    for p in params:
        if schema.kind(p.type) in (INTEGER, BOOLEAN, GENERIC):
            domains.append(primitive_domain(schema, p.type, scope.k, scope.int_range))
        else:
            if p.type != subject.receiver or states is None:
                raise UsageError(f"cannot enumerate arguments of reference type {p.type}")
            if method is not None and method.arg_filter is not None:
                domains.append([g for g in states if method.arg_filter(p.name, g)])
            else:
                domains.append(list(states))
    return list(itertools.product(*domains))


def enumerate_states(subject: Subject, scope: Scope, rng=None) -> list[ObjectGraph]:
    """Canonically distinct receiver states reachable by builder traces of length <= k.

    Traces start with one constructor call (not counted against k).  Results
    come in discovery order, which is deterministic.
    """
    if not subject.builders:
        raise UsageError(f"{subject.name} has no builders")
    constructors = [b for b in subject.builders if b.constructor]
    modifiers = [b for b in subject.builders if not b.constructor]
    seen: set = set()
    states: list[ObjectGraph] = []

    def retain(g: ObjectGraph) -> bool:
        key = canonicalize(g)
        if key in seen:
            return False
        seen.add(key)
        states.append(g)
        return True

    frontier = []
    for b in constructors:
        for args in _arg_tuples(subject, b.params, scope):
            try:
                g = apply_builder(subject, b, None, args)
            except PreconditionViolation:
                continue
            if retain(g):
                frontier.append(g)
    for _ in range(scope.k):
        nxt = []
        for state in frontier:
            for b in modifiers:
                for args in _arg_tuples(subject, b.params, scope):
                    try:
                        g = apply_builder(subject, b, state, args)
                    except PreconditionViolation:
                        continue
                    if _within_bound(subject, g, scope) and retain(g):
                        nxt.append(g)
        frontier = nxt
        if not frontier:
            break
    return states


def generate_valid_pairs(subject: Subject, method: Method | str, scope: Scope, rng=None,
                         states: list[ObjectGraph] | None = None) -> list[StatePair]:
    """Execute ``method`` on every enumerated state under every argument tuple."""
    if isinstance(method, str):
        method = subject.method(method)
    if states is None:
        states = enumerate_states(subject, scope)
    schema = subject.schema_for(method)
    names = [p.name for p in method.params]
    tuples = _arg_tuples(subject, method.params, scope, states, method)
    seen: set = set()
    pairs = []
    for state in states:
        for args in tuples:
            pre = merge_roots(schema, state, dict(zip(names, args)))
            try:
                pair = execute(subject, method, pre)
            except PreconditionViolation:
                continue
            k = pair.key()
            if k not in seen:
                seen.add(k)
                pairs.append(pair)
    if not pairs:
        log.warning("%s.%s: no valid executions within scope %d", subject.name, method.name, scope.k)
    return pairs


def _slots(post: ObjectGraph) -> list[tuple]:
    roles = ["this"] + (["result"] if "result" in post.roots else [])
    out = [(obj, f.name, f.target) for obj in post.reachable(roles) for f in post.schema.fields_of(obj.type)]
    if "result" in post.roots:
        out.append((None, "result", post.schema.result.type))
    return out


def _candidates(post: ObjectGraph, type_name: str, scope: Scope) -> list:
    schema = post.schema
    kind = schema.kind(type_name)
    if kind == INTEGER:
        lo, hi = scope.int_range
        return list(range(lo, hi + 1))
    if kind == BOOLEAN:
        return [False, True]
    if kind == GENERIC:
        return [NULL] + value_domain(type_name, scope.k)
    objs = sorted((a for a in post.atoms if isinstance(a, Obj) and a.type == type_name), key=atom_sort_key)
    return [NULL] + objs


def mutate_pair(pair: StatePair, scope: Scope, rng: random.Random, valid_keys: set | None = None,
                retry_limit: int = 50) -> StatePair | None:
    """One single-slot mutation of ``pair.post`` that is not a valid pair, or ``None``.

    ``valid_keys`` holds the canonical keys of the valid set to reject collisions.
    """
    post = pair.post
    slots = _slots(post)
    if not slots:
        return None
    for _ in range(retry_limit):
        obj, name, target = slots[rng.randrange(len(slots))]
        current = post.roots["result"] if obj is None else post.get(obj, name)
        options = [v for v in _candidates(post, target, scope) if not _same_atom(v, current)]
        if not options:
            continue
        v = options[rng.randrange(len(options))]
        if obj is None:
            roots = dict(post.roots)
            roots["result"] = v
            mutated = post.with_roots(roots)
        else:
            mutated = post.replace(obj, name, v)
        candidate = pair.retag("invalid", mutated)
        if valid_keys is not None and candidate.key() in valid_keys:
            continue
        return candidate
    return None


def _same_atom(a, b) -> bool:
    # 1 == True in Python; atoms of different kinds must stay distinct
    return a is b or (type(a) is type(b) and a == b)


@dataclass
class InvalidPairs:
    pairs: list = field(default_factory=list)
    requested: int = 0

    @property
    def shortfall(self) -> int:
        return self.requested - len(self.pairs)


def generate_invalid_pairs(valid: list[StatePair], subject: Subject, cfg: GenerationConfig,
                           rng: random.Random) -> InvalidPairs:
    """round(ratio * |V|) distinct mutants outside V; stops early when mutation is exhausted."""
    if not valid:
        raise UsageError("cannot mutate an empty valid set")
    target = round(cfg.invalid_ratio * len(valid))
    valid_keys = {p.key() for p in valid}
    taken: set = set()
    out = InvalidPairs(requested=target)
    for _ in range(target):
        found = None
        for _attempt in range(cfg.mutation_retry_limit):
            source = valid[rng.randrange(len(valid))]
            m = mutate_pair(source, cfg.scope, rng, valid_keys, retry_limit=1)
            if m is not None and m.key() not in taken:
                found = m
                break
        if found is None:
            log.warning("mutation exhausted after %d of %d invalid pairs", len(out.pairs), target)
            break
        taken.add(found.key())
        out.pairs.append(found)
    return out


@dataclass
class GeneratedCorpus:
    subject: Subject
    method: Method
    scope: Scope
    valid: list
    invalid: InvalidPairs

    @property
    def schema(self):
        return self.subject.schema_for(self.method)

    @property
    def pairs(self) -> list:
        return self.valid + self.invalid.pairs


def generate_corpus(subject: Subject, method: Method | str, cfg: GenerationConfig) -> GeneratedCorpus:
    if isinstance(method, str):
        method = subject.method(method)
    valid = generate_valid_pairs(subject, method, cfg.scope)
    invalid = InvalidPairs()
    if valid:
        invalid = generate_invalid_pairs(valid, subject, cfg, random.Random(cfg.seed))
    return GeneratedCorpus(subject, method, cfg.scope, valid, invalid)
