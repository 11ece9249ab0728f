"""Genetic algorithm that learns damping schedules.

A candidate is a full damping schedule; its fitness is the Es/N0 needed
to reach a target BLER (lower is better).  One generation produces one
offspring: select two distinct parents by rank, cross them over
factor-by-factor, mutate, evaluate, and insert the offspring into the
rank-ordered population, dropping the worst candidate.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channel import StopRule, snr_at_target_bler
from .code import CodeSpec
from .decoder import DampingSchedule, Graph

__all__ = [
    "FitnessConfig",
    "GaConfig",
    "Candidate",
    "Population",
    "SnrFitness",
    "init_population",
    "select_parent",
    "select_parents",
    "crossover",
    "mutate",
    "insert",
    "train",
    "TrainResult",
]

MAX_PARENT_DRAWS = 100


@dataclass(frozen=True)
class FitnessConfig:
    """How a schedule is scored: SNR@targetBLER on a fixed code and seed."""

    spec: CodeSpec
    target_bler: float = 1e-3
    snr_lo: float = 0.0
    snr_hi: float = 10.0
    tol_db: float = 0.02
    seed: int = 0
    stop: StopRule = StopRule()
    start_graph: Graph = Graph.ROWS
    kernel: str = "minsum"
    workers: int = 1


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 32
    v_sup: float = 2.0
    sample_focus: float = 0.01
    p_mutate: float = 0.07
    sigma_mutate: float = 0.3
    t_max: int = 8
    max_generations: int = 3000
    clip_negative: bool = True
    fitness: FitnessConfig | None = None

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.v_sup <= 0:
            raise ValueError("v_sup must be positive")
        if not 0.0 <= self.p_mutate <= 1.0:
            raise ValueError("p_mutate must lie in [0, 1]")
        if self.sigma_mutate <= 0:
            raise ValueError("sigma_mutate must be positive")
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")
        if self.max_generations < 0:
            raise ValueError("max_generations must be >= 0")


@dataclass(frozen=True)
class Candidate:
    schedule: DampingSchedule
    fitness: float | None = None
    bracketed: bool = True

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None


@dataclass
class Population:
    """Candidates sorted by ascending fitness; index 0 is rank 1."""

    candidates: list = field(default_factory=list)

    def __len__(self):
        return len(self.candidates)

    def __getitem__(self, i):
        return self.candidates[i]

    @property
    def best(self) -> Candidate:
        return self.candidates[0]

    def fitnesses(self) -> list:
        return [c.fitness for c in self.candidates]


class SnrFitness:
    """Fitness oracle: bisected SNR@targetBLER with common random numbers."""

    def __init__(self, cfg: FitnessConfig, t_max: int):
        self.cfg = cfg
        self.t_max = t_max
        self.evaluations = 0
        self.unbracketed = 0

    def __call__(self, schedule: DampingSchedule):
        c = self.cfg
        res = snr_at_target_bler(
            c.spec, schedule, self.t_max, c.target_bler, c.snr_lo, c.snr_hi, c.tol_db,
            seed=c.seed, stop=c.stop, start_graph=c.start_graph, kernel=c.kernel,
            workers=c.workers,
        )
        self.evaluations += 1
        self.unbracketed += not res.bracketed
        return res.snr_db, res.bracketed


def _evaluate(fitness: Callable, schedule: DampingSchedule) -> Candidate:
    value = fitness(schedule)
    if isinstance(value, tuple):
        value, bracketed = value
    else:
        bracketed = True
    return Candidate(schedule, float(value), bool(bracketed))


def _sorted(cands) -> Population:
    # stable: among equal fitness the earlier candidate keeps the better rank
    return Population(sorted(cands, key=lambda c: c.fitness))


def init_population(cfg: GaConfig, rng: np.random.Generator, fitness: Callable) -> Population:
    """``M`` schedules with free factors drawn from U(0, v_sup), evaluated and ranked."""
    mask = DampingSchedule.free_mask(cfg.t_max)
    cands = []
    for _ in range(cfg.population_size):
        vec = np.zeros(3 * cfg.t_max)
        vec[mask] = rng.uniform(0.0, cfg.v_sup, size=int(mask.sum()))
        cands.append(_evaluate(fitness, DampingSchedule.from_vector(vec)))
    return _sorted(cands)


def rank_probabilities(size: int, sample_focus: float) -> np.ndarray:
    """Selection probability of ranks 1..size, proportional to exp(-focus * rank)."""
    ranks = np.arange(1, size + 1)
    logits = -sample_focus * ranks
    w = np.exp(logits - logits.max())
    return w / w.sum()


def select_parent(pop: Population, sample_focus: float, rng: np.random.Generator) -> Candidate:
    return pop[_select_rank(pop, sample_focus, rng)]


def _select_rank(pop, sample_focus, rng) -> int:
    p = rank_probabilities(len(pop), sample_focus)
    return int(rng.choice(len(pop), p=p))


def select_parents(pop: Population, sample_focus: float, rng: np.random.Generator):
    """Two parents at distinct ranks.

    The second draw is repeated until it differs from the first; after
    ``MAX_PARENT_DRAWS`` failures the rank adjacent to the first is used.
    """
    first = _select_rank(pop, sample_focus, rng)
    for _ in range(MAX_PARENT_DRAWS):
        second = _select_rank(pop, sample_focus, rng)
        if second != first:
            break
    else:
        second = first + 1 if first + 1 < len(pop) else first - 1
    return pop[first], pop[second]


def crossover(a: Candidate, b: Candidate, rng: np.random.Generator) -> Candidate:
    """Copy every free factor from ``a`` or ``b`` with probability 1/2 each."""
    ta, tb = a.schedule.t_max, b.schedule.t_max
    if ta != tb:
        raise ValueError(f"parents have different t_max ({ta} vs {tb})")
    va, vb = a.schedule.to_vector(), b.schedule.to_vector()
    mask = DampingSchedule.free_mask(ta)
    take_b = (rng.random(va.size) < 0.5) & mask
    return Candidate(DampingSchedule.from_vector(np.where(take_b, vb, va)))


def mutate(c: Candidate, p_mutate: float, sigma_mutate: float, rng: np.random.Generator,
           clip_negative: bool = True) -> Candidate:
    """Add N(0, sigma_mutate^2) to each free factor with probability ``p_mutate``."""
    vec = c.schedule.to_vector()
    mask = DampingSchedule.free_mask(c.schedule.t_max)
    hit = (rng.random(vec.size) < p_mutate) & mask
    noise = rng.normal(0.0, sigma_mutate, size=vec.size)
    vec = np.where(hit, vec + noise, vec)
    if clip_negative:
        vec = np.maximum(vec, 0.0)
    return Candidate(DampingSchedule.from_vector(vec))


def insert(pop: Population, offspring: Candidate) -> Population:
    """Insert by fitness and drop the worst so the size stays fixed."""
    if not offspring.evaluated:
        raise ValueError("offspring must be evaluated before insertion")
    cands = list(pop.candidates)
    keys = [c.fitness for c in cands]
    cands.insert(bisect.bisect_right(keys, offspring.fitness), offspring)
    return Population(cands[:len(pop)])


@dataclass(frozen=True)
class TrainResult:
    best: Candidate
    trajectory: list  # (generation, best_fitness, median_fitness, evaluations)
    population: Population
    evaluations: int

    def __iter__(self):
        # allows ``best, trajectory = train(...)``
        return iter((self.best, self.trajectory))


def train(cfg: GaConfig, rng: np.random.Generator, fitness: Callable | None = None,
          callback: Callable | None = None) -> TrainResult:
    """Run the GA for ``cfg.max_generations`` offspring.

    ``fitness`` maps a schedule to a float (or ``(float, bracketed)``);
    by default it is the SNR@targetBLER oracle described by ``cfg.fitness``.
    """
    if fitness is None:
        if cfg.fitness is None:
            raise ValueError("GaConfig.fitness is required when no fitness callable is given")
        fitness = SnrFitness(cfg.fitness, cfg.t_max)
    pop = init_population(cfg, rng, fitness)
    evals = len(pop)

    def record(gen):
        fits = pop.fitnesses()
        row = (gen, pop.best.fitness, float(np.median(fits)), evals)
        trajectory.append(row)
        if callback is not None:
            callback(row, pop)

    trajectory: list = []
    record(0)
    for gen in range(1, cfg.max_generations + 1):
        a, b = select_parents(pop, cfg.sample_focus, rng)
        child = mutate(crossover(a, b, rng), cfg.p_mutate, cfg.sigma_mutate, rng, cfg.clip_negative)
        child = _evaluate(fitness, child.schedule)
        evals += 1
        pop = insert(pop, child)
        record(gen)
    return TrainResult(pop.best, trajectory, pop, evals)


def is_monotone_nonincreasing(values) -> bool:
    return all(b <= a for a, b in zip(values, values[1:])) and not any(map(math.isnan, values))
