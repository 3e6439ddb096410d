"""The generation loop."""

from __future__ import annotations

import json
import logging
import random
import time
from dataclasses import dataclass, field

from .fitness import Chromosome, FitnessEvaluator, GaConfig, Scored
from .operators import Mutator, crossover, rank_key, select
from .pools import ExpressionPools, build_pools
from .seeding import seed_population

log = logging.getLogger(__name__)


@dataclass
class EvolutionResult:
    best: Chromosome
    fitness: float
    P: int
    N: int
    valid: bool  # False when no candidate reached #P = 0
    generations: int
    elapsed: float
    log: list = field(default_factory=list)
    population: list = field(default_factory=list, repr=False)

    def log_lines(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.log)


def _best(population: list[Scored]) -> Scored:
    ranked = sorted(range(len(population)), key=lambda i: rank_key(population[i], i))
    return population[ranked[0]]


def _record(gen: int, population: list[Scored]) -> dict:
    best = _best(population)
    return {
        "generation": gen,
        "population": len(population),
        "best_fitness": round(best.fitness, 6),
        "mean_fitness": round(sum(s.fitness for s in population) / len(population), 6),
        "best_P": best.P,
        "best_N": best.N,
        "valid_candidates": sum(1 for s in population if s.P == 0),
        "best": str(best.chromosome),
    }


def evolve(subject, method, valid, invalid, cfg: GaConfig | None = None, rng: random.Random | None = None,
           pools: ExpressionPools | None = None, fitness: FitnessEvaluator | None = None) -> EvolutionResult:
    """Seed, then mutate, cross over and select until the generation or time budget runs out.

    Random streams are derived from ``cfg.seed`` per generation and candidate, so a
    run is reproducible regardless of how scoring is scheduled. ``rng`` is only
    consulted to pick a seed when given.
    """
    cfg = cfg or GaConfig()
    if not valid:
        raise ValueError("evolve needs a nonempty valid set")
    seed = cfg.seed if rng is None else rng.randrange(2**32)
    method = subject.method(method) if isinstance(method, str) else method
    schema = valid[0].pre.schema
    pools = pools or build_pools(schema, method, cfg.pool_depth)
    fit = fitness or FitnessEvaluator(valid, invalid, cfg)
    mutator = Mutator(pools, cfg, method)
    start = time.monotonic()

    seeds = seed_population(pools, valid, invalid, cfg, random.Random(f"{seed}:seed"), method=method)
    population = [fit.score(c) for c in seeds]
    history = [_record(0, population)]
    gen = 0
    for gen in range(1, cfg.generations + 1):
        if time.monotonic() - start > cfg.timeout:
            log.info("timeout after %d generations", gen - 1)
            gen -= 1
            break
        seen = {s.chromosome.key for s in population}
        fresh: list[Chromosome] = []
        n = cfg.population_size
        picks = list(range(min(n, len(population))))
        archive = len(population) - n
        if archive > 0:
            # a sample of the retained unary candidates beyond the first n is mutated too
            k = min(archive, cfg.archive_mutants)
            picks += sorted(n + j for j in random.Random(f"{seed}:{gen}:a").sample(range(archive), k))
        for i in picks:
            m = mutator.mutate(population[i].chromosome, random.Random(f"{seed}:{gen}:{i}"))
            if m.key not in seen:
                seen.add(m.key)
                fresh.append(m)
        for c in crossover(population, random.Random(f"{seed}:{gen}:x"), cfg):
            if c.key not in seen:
                seen.add(c.key)
                fresh.append(c)
        population = select(population + [fit.score(c) for c in fresh], cfg)
        history.append(_record(gen, population))

    best = _best(population)
    if best.P > 0:
        log.warning("no candidate without positive counterexamples")
    return EvolutionResult(best.chromosome, best.fitness, best.P, best.N, best.P == 0, gen,
                           time.monotonic() - start, history, population)
