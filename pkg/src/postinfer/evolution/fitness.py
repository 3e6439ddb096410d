"""Genes, chromosomes, GA configuration and the case-split fitness function.

With ``l`` genes of total complexity ``comp`` of which ``mca`` are method
component assertions::

    aux = w1 / (l + comp) + w2 * mca / l
    f   = MAX - #P - |I| + aux     if #P > 0
    f   = MAX - #N + aux           otherwise

``MAX = 2 (|V| + |I|)``.  With ``w1 = w2 = 0.5`` the auxiliary term is below
1, so any candidate without positive counterexamples outscores any candidate
with one.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from ..lang.ast import Expr
from ..lang.batch import CorpusEvaluator
from ..lang.metrics import complexity, is_mca
from ..lang.printer import pretty


@dataclass(frozen=True)
class Gene:
    expr: Expr
    complexity: int
    mca: bool
    text: str

    @classmethod
    def of(cls, expr: Expr, method=None) -> "Gene":
        return cls(expr, complexity(expr), is_mca(expr, method), pretty(expr))

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class Chromosome:
    """A conjunction of genes kept sorted by text with duplicates removed."""

    genes: tuple

    def __post_init__(self):
        unique = {g.text: g for g in self.genes}
        object.__setattr__(self, "genes", tuple(unique[t] for t in sorted(unique)))

    @property
    def key(self) -> tuple:
        return tuple(g.text for g in self.genes)

    def __len__(self) -> int:
        return len(self.genes)

    @property
    def complexity(self) -> int:
        return sum(g.complexity for g in self.genes)

    @property
    def mca(self) -> int:
        return sum(1 for g in self.genes if g.mca)

    @property
    def exprs(self) -> tuple:
        return tuple(g.expr for g in self.genes)

    def __str__(self) -> str:
        return " && ".join(g.text for g in self.genes) if self.genes else "true"


@dataclass
class GaConfig:
    population_size: int = 100
    max_len: int = 10
    generations: int = 30
    timeout: float = 600.0
    mutation_prob: float = 0.3
    crossover_rate: float = 0.35
    w1: float = 0.5
    w2: float = 0.5
    # None: 2 * (|V| + |I|)
    max_constant: float | None = None
    seed: int = 0
    repeats: int = 10
    pool_depth: int = 3
    seed_sample: int = 10
    # mutations producing a gene above this complexity are rejected
    max_gene_complexity: int = 8
    archive_mutants: int = 100

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.max_len < 1:
            raise ValueError("max_len must be at least 1")
        if not 0 <= self.mutation_prob <= 1 or not 0 <= self.crossover_rate <= 1:
            raise ValueError("probabilities must lie in [0, 1]")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "GaConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown GA config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "GaConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class Counterexamples:
    P: tuple  # indices into V of falsified valid pairs
    N: tuple  # indices into I of satisfied invalid pairs


def _bits(m: int) -> tuple:
    out, i = [], 0
    while m:
        if m & 1:
            out.append(i)
        m >>= 1
        i += 1
    return tuple(out)


@dataclass
class Scored:
    chromosome: Chromosome
    fitness: float
    P: int
    N: int


class FitnessEvaluator:
    """Fitness over fixed V and I, with gene masks cached across calls.

    V and I get separate evaluators: a candidate with a positive counterexample
    scores independently of I, so I is only evaluated for candidates that hold
    on all of V.
    """

    def __init__(self, valid, invalid, cfg: GaConfig | None = None):
        self.cfg = cfg or GaConfig()
        self.nv, self.ni = len(valid), len(invalid)
        self.ev_valid = CorpusEvaluator(valid)
        self.ev_invalid = CorpusEvaluator(invalid)
        self.max = self.cfg.max_constant if self.cfg.max_constant is not None else 2 * (self.nv + self.ni)
        self._cache: dict = {}

    def counts(self, c: Chromosome) -> tuple[int, int]:
        """``(#P, #N)``; ``#N`` is left at ``|I|`` without evaluation when ``#P > 0``."""
        p = self.nv - self.ev_valid.conjunction(c.exprs).bit_count()
        if p:
            return p, self.ni
        return 0, self.ev_invalid.conjunction(c.exprs).bit_count()

    def counterexamples(self, c: Chromosome) -> Counterexamples:
        vm = self.ev_valid.conjunction(c.exprs)
        im = self.ev_invalid.conjunction(c.exprs)
        return Counterexamples(_bits(~vm & self.ev_valid.all_bits), _bits(im))

    def aux(self, c: Chromosome) -> float:
        l = len(c)
        if l == 0:
            return self.cfg.w1
        return self.cfg.w1 / (l + c.complexity) + self.cfg.w2 * c.mca / l

    def score(self, c: Chromosome) -> Scored:
        hit = self._cache.get(c.key)
        if hit is not None:
            return hit
        p, n = self.counts(c)
        f = fitness_value(p, n, self.ni, self.max, self.aux(c))
        s = Scored(c, f, p, n)
        if len(self._cache) > 200_000:
            self._cache.clear()
        self._cache[c.key] = s
        return s

    def fitness(self, c: Chromosome) -> float:
        return self.score(c).fitness


def fitness_value(p: int, n: int, n_invalid: int, max_constant: float, aux: float) -> float:
    if p > 0:
        return (max_constant - p - n_invalid) + aux
    return (max_constant - n) + aux


def fitness(c: Chromosome, valid, invalid, cfg: GaConfig | None = None) -> float:
    return FitnessEvaluator(valid, invalid, cfg).fitness(c)


def counterexamples(c: Chromosome, valid, invalid) -> Counterexamples:
    return FitnessEvaluator(valid, invalid).counterexamples(c)
