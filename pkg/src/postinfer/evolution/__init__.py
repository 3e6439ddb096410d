"""Genetic search for postconditions."""

from .fitness import (
    Chromosome, Counterexamples, FitnessEvaluator, GaConfig, Gene, Scored, counterexamples, fitness,
    fitness_value,
)
from .ga import EvolutionResult, evolve
from .operators import Mutator, crossover, mutate_chromosome, select
from .pools import ExpressionPools, build_pools
from .seeding import seed_population

__all__ = [
    "Chromosome", "Counterexamples", "EvolutionResult", "ExpressionPools", "FitnessEvaluator",
    "GaConfig", "Gene", "Mutator", "Scored", "build_pools", "counterexamples", "crossover", "evolve",
    "fitness", "fitness_value", "mutate_chromosome", "seed_population", "select",
]
