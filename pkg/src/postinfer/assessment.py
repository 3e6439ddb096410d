"""Quality checks for inferred postconditions.

Repeated runs are reduced to their most frequent result; each conjunct is
then checked for false positives against the valid pairs of a larger scope,
and the whole postcondition is probed for weakness by counting how many
mutated post-states it still accepts.  The mutant count is a state-mutation
estimator of false negatives, not a program-mutation one.
"""

from __future__ import annotations

import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .evolution.fitness import Chromosome, Gene
from .generation import Scope, generate_valid_pairs, mutate_pair
from .lang.ast import Expr
from .lang.batch import CorpusEvaluator
from .lang.metrics import complexity
from .lang.printer import pretty

FN_ESTIMATOR = "state-mutation proxy: single-slot post-state mutants drawn with replacement"


def _order(e: Expr) -> tuple:
    return (complexity(e), pretty(e))


@dataclass(frozen=True)
class Postcondition:
    conjuncts: tuple  # of Expr, ordered by (complexity, text)
    provenance: tuple = ()  # run ids that produced it
    fitness: float | None = None

    def __post_init__(self):
        unique = {pretty(e): e for e in self.conjuncts}
        object.__setattr__(self, "conjuncts", tuple(sorted(unique.values(), key=_order)))

    @classmethod
    def of(cls, c, provenance=(), fitness=None) -> "Postcondition":
        exprs = c.exprs if isinstance(c, Chromosome) else tuple(getattr(g, "expr", g) for g in c)
        return cls(tuple(exprs), tuple(provenance), fitness)

    @property
    def texts(self) -> list[str]:
        return [pretty(e) for e in self.conjuncts]

    @property
    def frequency(self) -> int:
        return len(self.provenance)

    def __len__(self) -> int:
        return len(self.conjuncts)

    def __str__(self) -> str:
        return "\n".join(self.texts)

    def to_json(self) -> dict:
        return {"conjuncts": self.texts, "provenance": list(self.provenance), "fitness": self.fitness}


def most_frequent(runs, fitnesses=None, identity=None) -> Postcondition:
    """The conjunct set produced by the most runs.

    Conjuncts are compared through ``identity`` (default: their text), so
    with an evaluation-vector identity two runs that differ only in how they
    spell a conjunct count as the same postcondition.  Ties go to the set
    whose conjuncts recur most across all runs, then to higher inference
    fitness, fewer conjuncts and the lexicographically smallest text.
    """
    runs = list(runs)
    if not runs:
        raise ValueError("most_frequent needs at least one run")
    fitnesses = list(fitnesses) if fitnesses is not None else [0.0] * len(runs)
    identity = identity or pretty
    groups: dict = defaultdict(list)
    first: dict = {}
    support: Counter = Counter()
    for i, c in enumerate(runs):
        post = Postcondition.of(c)
        key = frozenset(identity(e) for e in post.conjuncts)
        support.update(key)
        groups[key].append(i)
        first.setdefault(key, post)

    def rank(key):
        ids = groups[key]
        best = max(fitnesses[i] for i in ids)
        return (-len(ids), -sum(support[k] for k in key), -best, len(key), "\n".join(first[key].texts))

    key = min(groups, key=rank)
    ids = groups[key]
    return Postcondition(first[key].conjuncts, tuple(ids), max(fitnesses[i] for i in ids))


def dedupe_conjuncts(post: Postcondition, valid, invalid) -> Postcondition:
    """Keep one conjunct per distinct truth vector over V and I, preferring low complexity."""
    ev = CorpusEvaluator(list(valid) + list(invalid))
    kept: dict = {}
    for e in post.conjuncts:  # already in (complexity, text) order
        kept.setdefault(ev.mask(e), e)
    return Postcondition(tuple(kept.values()), post.provenance, post.fitness)


@dataclass
class ConjunctReport:
    text: str
    complexity: int
    witnesses: list  # indices into the larger-scope valid corpus

    @property
    def false_positive(self) -> bool:
        return bool(self.witnesses)

    def to_json(self) -> dict:
        return {
            "text": self.text,
            "complexity": self.complexity,
            "false_positive": self.false_positive,
            "witness_count": len(self.witnesses),
            "witnesses": self.witnesses[:5],
        }


def false_positive_check(post: Postcondition, subject, method, scope: Scope, valid=None) -> list[ConjunctReport]:
    """Evaluate each conjunct on the valid pairs at ``scope`` (normally inference scope + 1)."""
    if not post.conjuncts:
        return []
    if valid is None:
        valid = generate_valid_pairs(subject, method, scope)
    ev = CorpusEvaluator(valid)
    out = []
    for e in post.conjuncts:
        m = ev.mask(e)
        missing = [i for i in range(len(valid)) if not (m >> i) & 1]
        out.append(ConjunctReport(pretty(e), complexity(e), missing))
    return out


@dataclass
class FalseNegativeProxy:
    accepted: int
    drawn: int
    budget: int
    exhausted: bool

    def to_json(self) -> dict:
        return {
            "estimator": FN_ESTIMATOR,
            "accepted": self.accepted,
            "drawn": self.drawn,
            "budget": self.budget,
            "exhausted": self.exhausted,
            "accepted_pct": round(100.0 * self.accepted / self.drawn, 2) if self.drawn else 0.0,
        }


def false_negative_proxy(post: Postcondition, subject, method, scope: Scope, budget: int = 1000,
                         rng: random.Random | None = None, valid=None, retry_limit: int = 50) -> FalseNegativeProxy:
    """Count mutated pairs (outside V) that satisfy the whole postcondition."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    rng = rng or random.Random(0)
    if valid is None:
        valid = generate_valid_pairs(subject, method, scope)
    if not valid:
        return FalseNegativeProxy(0, 0, budget, True)
    keys = {p.key() for p in valid}
    mutants = []
    misses = 0
    while len(mutants) < budget and misses < retry_limit:
        m = mutate_pair(valid[rng.randrange(len(valid))], scope, rng, keys, retry_limit)
        if m is None:
            misses += 1
            continue
        mutants.append(m)
    ev = CorpusEvaluator(mutants)
    accepted = ev.conjunction(post.conjuncts).bit_count() if mutants else 0
    return FalseNegativeProxy(accepted, len(mutants), budget, len(mutants) < budget)


@dataclass
class QualityReport:
    subject: str
    method: str
    scope: int
    fp_scope: int
    conjuncts: list = field(default_factory=list)
    fn: FalseNegativeProxy | None = None
    manifest: dict = field(default_factory=dict)

    @property
    def false_positives(self) -> int:
        return sum(1 for c in self.conjuncts if c.false_positive)

    @property
    def fp_pct(self) -> float:
        return round(100.0 * self.false_positives / len(self.conjuncts), 2) if self.conjuncts else 0.0

    def to_json(self) -> dict:
        return {
            "subject": self.subject,
            "method": self.method,
            "scope": self.scope,
            "fp_scope": self.fp_scope,
            "assertions": len(self.conjuncts),
            "false_positives": self.false_positives,
            "fp_pct": self.fp_pct,
            "conjuncts": [c.to_json() for c in self.conjuncts],
            "false_negatives": self.fn.to_json() if self.fn else None,
            "manifest": self.manifest,
        }

    def table(self) -> str:
        fn = "-" if self.fn is None else f"{self.fn.accepted}/{self.fn.drawn}"
        rows = [
            f"{'subject':<24} {'assertions':>10} {'FPs':>5} {'FP %':>7} {'FN (mutants accepted)':>22}",
            f"{self.subject + '.' + self.method:<24} {len(self.conjuncts):>10} {self.false_positives:>5} "
            f"{self.fp_pct:>7.2f} {fn:>22}",
            "",
        ]
        for c in self.conjuncts:
            flag = f"FP x{len(c.witnesses)}" if c.false_positive else "ok"
            rows.append(f"  [{flag:>7}] {c.text}")
        return "\n".join(rows) + "\n"


def assess(post: Postcondition, subject, method, scope: Scope, bump: int = 1, budget: int = 1000,
           seed: int = 0, manifest: dict | None = None) -> QualityReport:
    bigger = scope.bumped(bump)
    valid_big = generate_valid_pairs(subject, method, bigger)
    conj = false_positive_check(post, subject, method, bigger, valid=valid_big)
    fn = false_negative_proxy(post, subject, method, scope, budget, random.Random(seed))
    name = method if isinstance(method, str) else method.name
    return QualityReport(subject.name, name, scope.k, bigger.k, conj, fn, dict(manifest or {}))


__all__ = [
    "ConjunctReport", "FN_ESTIMATOR", "FalseNegativeProxy", "Gene", "Postcondition", "QualityReport",
    "assess", "dedupe_conjuncts", "false_negative_proxy", "false_positive_check", "most_frequent",
]
