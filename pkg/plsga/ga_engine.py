"""
Genetic algorithm for variable subset selection.

Chromosomes are sorted tuples of column indices within [min_vars, max_vars]. Each
generation selects parents from population and elite with probabilities from the
standardized (optionally exponentiated) negated criterion, mates them by single or
uniform crossover, repairs and mutates the children, and accepts them unless they are
much worse than the worse parent or duplicate another offspring.

Offspring are produced in mating units of two slots. A unit draws only from the stream
(master_seed, OFFSPRING, generation, unit, round), so the new generation does not depend
on how many workers produce it. Duplicates across units are resolved at a barrier in
unit order; units which lost a slot retry in the next round.
"""
from __future__ import absolute_import
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Tuple

import numpy as np

from .core.configuration import ConfigurationError, InfeasibleGeometryError
from .core.gadist import DtGeomParams, dtgeom_sample
from .core.parallel import parallel_map
from .core.random import StreamTag, derive_seed, stream
from .fitness import Criterion, FitnessConfig, FitnessEvaluator, FitnessValue
from .utils.logging import log_stage, log_verbose
from .utils.timeit import timeit

MAX_BARRIER_ROUNDS = 1000


class Crossover(Enum):
    SINGLE = "single"
    UNIFORM = "uniform"

    @classmethod
    def parse(cls, value):
        return value if isinstance(value, cls) else cls(str(value).strip().lower())


class DuplicateScope(Enum):
    """Which chromosomes an offspring must differ from"""
    OFFSPRING = "offspring"
    OFFSPRING_ELITE = "offspring_elite"

    @classmethod
    def parse(cls, value):
        return value if isinstance(value, cls) else \
            cls(str(value).strip().lower().replace("-", "_"))


@dataclass(frozen=True)
class VariableSubset:
    """A chromosome: strictly increasing column indices, size within bounds"""
    genes: Tuple[int, ...]
    bounds: Tuple[int, int]

    def __post_init__(self):
        genes = tuple(int(g) for g in self.genes)
        object.__setattr__(self, "genes", genes)
        if any(b <= a for a, b in zip(genes, genes[1:])):
            raise ValueError("Genes must be strictly increasing: {}".format(genes))
        if genes and genes[0] < 0:
            raise ValueError("Negative column index in {}".format(genes))
        low, high = self.bounds
        if not low <= len(genes) <= high:
            raise ValueError("Subset size {} outside [{}, {}]".format(len(genes), low, high))

    @classmethod
    def from_genes(cls, genes, bounds):
        return cls(tuple(sorted(set(int(g) for g in genes))), tuple(bounds))

    @property
    def size(self):
        return len(self.genes)

    def mask(self, p):
        mask = np.zeros(p, dtype=bool)
        mask[list(self.genes)] = True
        return mask

    def __len__(self):
        return len(self.genes)


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 4000
    generations: int = 300
    min_vars: int = 3
    max_vars: int = 30
    mutation_probability: float = 0.005
    crossover: Crossover = Crossover.SINGLE
    exp_transform: bool = True
    elite_size: int = 10
    rejection_factor: float = 1.0
    max_mate_attempts: int = 100
    criterion: Criterion = Criterion.SEP_SRCV
    fitness: FitnessConfig = field(default_factory=FitnessConfig)
    master_seed: int = 0
    workers: int = 1
    top_count: int = 10
    duplicate_scope: DuplicateScope = DuplicateScope.OFFSPRING_ELITE

    def __post_init__(self):
        if self.population_size < 4 or self.population_size % 2:
            raise ConfigurationError("population must be an even number >= 4, got {}"
                                     .format(self.population_size))
        if self.generations < 1:
            raise ConfigurationError("generations must be >= 1")
        if not 1 <= self.min_vars <= self.max_vars:
            raise ConfigurationError("Need 1 <= min_vars <= max_vars, got [{}, {}]"
                                     .format(self.min_vars, self.max_vars))
        if not 0 <= self.mutation_probability < 1:
            raise ConfigurationError("mutation probability must be in [0, 1)")
        if self.elite_size < 0 or self.rejection_factor < 0 or self.max_mate_attempts < 1:
            raise ConfigurationError("elite_size, rejection_factor must be >= 0 and "
                                     "max_mate_attempts >= 1")

    @property
    def bounds(self):
        return (self.min_vars, self.max_vars)

    def validate_for(self, p):
        if self.max_vars > p:
            raise ConfigurationError("max_vars ({}) exceeds the number of variables ({})"
                                     .format(self.max_vars, p))


@dataclass(frozen=True)
class Chromosome:
    """An evaluated subset. flags: 'escape' (accepted after max attempts), 'duplicate'"""
    subset: VariableSubset
    fitness: FitnessValue
    flags: Tuple[str, ...] = ()

    @property
    def genes(self):
        return self.subset.genes

    @property
    def mean(self):
        return self.fitness.mean

    def sort_key(self):
        return (self.fitness.mean, self.subset.genes)


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    mean_fitness: float
    best_fitness: float
    best_subset: VariableSubset
    escapes: int = 0


@dataclass
class GaResult:
    top_subsets: List[Chromosome]
    history: List[GenerationStats]
    elite: List[Chromosome]
    summary: Dict[str, float] = field(default_factory=dict)


# --- Operators ---------------------------------------------------------------

def init_population(p, cfg: GaConfig, rng) -> List[VariableSubset]:
    """population_size distinct random subsets, sizes uniform over the bounds.

    When fewer distinct subsets exist than population slots, duplicates are allowed and a
    warning is logged.
    """
    cfg.validate_for(p)
    n_distinct = sum(math.comb(p, k) for k in range(cfg.min_vars, cfg.max_vars + 1))
    allow_duplicates = n_distinct < cfg.population_size
    if allow_duplicates:
        logging.warning("Only %d distinct subsets exist for %d slots. "
                        "Initial population will contain duplicates",
                        n_distinct, cfg.population_size)
    population, seen = [], set()
    while len(population) < cfg.population_size:
        size = int(rng.integers(cfg.min_vars, cfg.max_vars + 1))
        subset = VariableSubset.from_genes(rng.choice(p, size=size, replace=False), cfg.bounds)
        if subset.genes in seen and not allow_duplicates:
            continue
        seen.add(subset.genes)
        population.append(subset)
    return population


def selection_probabilities(fitness_means, exp_transform=True):
    """Mating probabilities from criterion means (lower is better).

    The internal fitness f = -mean is standardized with the sample SD; with
    `exp_transform` the weights are exp(f*), otherwise f* - min(f*). Non-finite means get
    probability zero. Without spread, all finite entries are equally likely.
    """
    means = np.asarray(fitness_means, dtype=float)
    if means.size < 2:
        raise ValueError("Selection needs at least two chromosomes")
    finite = np.isfinite(means)
    probs = np.zeros(means.size)
    if not finite.any():
        probs[:] = 1.0 / means.size
        return probs
    f = -means[finite]
    sd = f.std(ddof=1) if f.size > 1 else 0.0
    if sd == 0 or not np.isfinite(sd):
        probs[finite] = 1.0 / f.size
        return probs
    f_star = (f - f.mean()) / sd
    weights = np.exp(f_star) if exp_transform else f_star - f_star.min()
    probs[finite] = weights / weights.sum()
    return probs


def crossover_single(a, b, p, rng, cut=None):
    """Children take one parent's genes at positions [0..cut] and the other's beyond.

    Returns the raw (unrepaired) children as sorted index arrays.
    """
    mask_a, mask_b = _mask(a, p), _mask(b, p)
    cut = int(rng.integers(0, p)) if cut is None else int(cut)
    left = np.arange(p) <= cut
    return (np.flatnonzero(np.where(left, mask_a, mask_b)),
            np.flatnonzero(np.where(left, mask_b, mask_a)))


def crossover_uniform(a, b, p, rng, selection=None):
    """Selected positions come from the first parent, the others from the second"""
    mask_a, mask_b = _mask(a, p), _mask(b, p)
    selection = rng.random(p) < 0.5 if selection is None else np.asarray(selection, bool)
    return (np.flatnonzero(np.where(selection, mask_a, mask_b)),
            np.flatnonzero(np.where(selection, mask_b, mask_a)))


def _mask(subset, p):
    genes = getattr(subset, "genes", subset)
    mask = np.zeros(p, dtype=bool)
    mask[np.asarray(genes, dtype=int)] = True
    return mask


def repair(child, bounds, p, rng) -> VariableSubset:
    """Randomly drops genes above max_vars, or adds absent ones below min_vars"""
    genes = np.unique(np.asarray(child, dtype=int))
    low, high = bounds
    if genes.size > high:
        genes = rng.choice(genes, size=high, replace=False)
    elif genes.size < low:
        absent = np.setdiff1d(np.arange(p), genes)
        genes = np.concatenate([genes, rng.choice(absent, size=low - genes.size,
                                                  replace=False)])
    return VariableSubset.from_genes(genes, bounds)


def mutate(subset: VariableSubset, mutation_probability, p, rng) -> VariableSubset:
    """Adds (k > 0) or removes (-k) random genes, k ~ DtGeom truncated to the bounds"""
    low, high = subset.bounds
    params = DtGeomParams.for_mutation(mutation_probability, subset.size, low, high)
    k = dtgeom_sample(params, rng)
    if k == 0:
        return subset
    genes = np.asarray(subset.genes, dtype=int)
    if k > 0:
        absent = np.setdiff1d(np.arange(p), genes)
        genes = np.concatenate([genes, rng.choice(absent, size=k, replace=False)])
    else:
        genes = rng.choice(genes, size=genes.size + k, replace=False)
    return VariableSubset.from_genes(genes, subset.bounds)


# --- Offspring production ----------------------------------------------------

@dataclass(frozen=True)
class _MatingContext:
    """Everything a mating unit needs, shared read-only by all units of a generation"""
    pool: Tuple[Chromosome, ...]
    probs: np.ndarray
    tolerance: float
    cfg: GaConfig
    p: int
    evaluator: FitnessEvaluator
    generation: int


def _select_parents(ctx, rng):
    nonzero = np.count_nonzero(ctx.probs)
    i, j = rng.choice(len(ctx.pool), size=2, replace=nonzero < 2, p=ctx.probs)
    return ctx.pool[i], ctx.pool[j]


def _mate(ctx, parent_a, parent_b, rng):
    cfg = ctx.cfg
    crossover_f = crossover_single if cfg.crossover is Crossover.SINGLE else crossover_uniform
    for raw in crossover_f(parent_a.subset, parent_b.subset, ctx.p, rng):
        child = repair(raw, cfg.bounds, ctx.p, rng)
        yield mutate(child, cfg.mutation_probability, ctx.p, rng)


def _produce_unit(ctx: _MatingContext, unit, round_no, need, taken):
    """Produces `need` accepted children for one mating unit.

    A child is rejected when infeasible, when its mean exceeds the worse parent's by more
    than ctx.tolerance, or when its genes are in `taken` / already produced here. After
    max_mate_attempts consecutive rejections one candidate is accepted anyway, see `_escape`.
    """
    cfg = ctx.cfg
    rng = stream(cfg.master_seed, StreamTag.OFFSPRING, ctx.generation, unit, round_no)
    known = set(taken)
    accepted, rejected, duplicates = [], [], []
    serial = attempts = 0

    def evaluate(subset):
        nonlocal serial
        seed = derive_seed(cfg.master_seed, StreamTag.EVALUATION, ctx.generation,
                           unit, round_no, serial)
        serial += 1
        return ctx.evaluator(subset.genes, seed)

    while len(accepted) < need:
        parent_a, parent_b = _select_parents(ctx, rng)
        limit = max(parent_a.mean, parent_b.mean) + ctx.tolerance
        for child in _mate(ctx, parent_a, parent_b, rng):
            if len(accepted) == need:
                break
            attempts += 1
            if child.genes in known:
                duplicates.append(child)
            else:
                fitness = evaluate(child)
                if fitness.feasible and fitness.mean <= limit:
                    accepted.append(Chromosome(child, fitness))
                    known.add(child.genes)
                    attempts, rejected, duplicates = 0, [], []
                    continue
                rejected.append(Chromosome(child, fitness))
            if attempts >= cfg.max_mate_attempts:
                accepted.append(_escape(rejected, duplicates, evaluate))
                known.add(accepted[-1].genes)
                attempts, rejected, duplicates = 0, [], []
    return accepted


def _escape(rejected, duplicates, evaluate):
    """The chromosome accepted after max_mate_attempts rejections.

    Prefers the best feasible rejected candidate, then a feasible duplicate. If neither
    exists an infeasible chromosome is accepted; with mean +inf it gets no mating weight.
    """
    best = min(rejected, key=Chromosome.sort_key) if rejected else None
    if best is not None and best.fitness.feasible:
        logging.debug("Livelock escape: accepting rejected subset %s", best.genes)
        return Chromosome(best.subset, best.fitness, ("escape",))
    if duplicates:
        duplicate = Chromosome(duplicates[0], evaluate(duplicates[0]), ("escape", "duplicate"))
        if best is None or duplicate.fitness.feasible:
            logging.debug("Livelock escape: accepting duplicate subset %s", duplicate.genes)
            return duplicate
    logging.debug("Livelock escape: accepting infeasible subset %s", best.genes)
    return Chromosome(best.subset, best.fitness, ("escape",))


def _produce_chunk(args):
    ctx, requests, taken = args
    return [_produce_unit(ctx, unit, round_no, need, taken)
            for unit, round_no, need in requests]


def _chunks(items, n_chunks):
    n_chunks = max(1, min(n_chunks, len(items)))
    bounds = np.linspace(0, len(items), n_chunks + 1).astype(int)
    return [items[lo:hi] for lo, hi in zip(bounds[:-1], bounds[1:])]


def produce_offspring(ctx: _MatingContext, excluded=frozenset()) -> List[Chromosome]:
    """population_size accepted children, identical for any worker count"""
    cfg = ctx.cfg
    n_units = cfg.population_size // 2
    pending = [(unit, 0, 2) for unit in range(n_units)]
    produced = {unit: [] for unit in range(n_units)}
    accepted_keys = set()
    round_no = 0
    while pending:
        taken = frozenset(accepted_keys | excluded)
        chunks = _chunks(pending, cfg.workers)
        outputs = [children for chunk_out in parallel_map(
            _produce_chunk, [(ctx, chunk, taken) for chunk in chunks], cfg.workers)
            for children in chunk_out]
        round_no += 1
        next_pending = []
        for (unit, _, need), children in zip(pending, outputs):
            kept = 0
            for child in children:
                if child.genes in accepted_keys and "duplicate" not in child.flags \
                        and round_no < MAX_BARRIER_ROUNDS:
                    continue
                produced[unit].append(child)
                accepted_keys.add(child.genes)
                kept += 1
            if kept < need:
                next_pending.append((unit, round_no, need - kept))
        pending = next_pending
    return [child for unit in range(n_units) for child in produced[unit]]


# --- Generations -------------------------------------------------------------

def _merge_pool(population, elite):
    keys = {c.genes for c in population}
    return tuple(population) + tuple(c for c in elite if c.genes not in keys)


def update_elite(elite, offspring, elite_size):
    """Offspring better than the worst elite member join it; the worst are evicted.

    A child re-evaluating an elite subset to a better value replaces that member.
    """
    elite = sorted(elite, key=Chromosome.sort_key)
    keys = {c.genes for c in elite}
    for child in sorted(offspring, key=Chromosome.sort_key):
        if elite_size == 0 or not child.fitness.feasible:
            continue
        if child.genes in keys:
            i = next(i for i, c in enumerate(elite) if c.genes == child.genes)
            if child.mean < elite[i].mean:
                elite[i] = Chromosome(child.subset, child.fitness)
                elite.sort(key=Chromosome.sort_key)
            continue
        if len(elite) < elite_size or child.mean < elite[-1].mean:
            elite.append(Chromosome(child.subset, child.fitness))
            keys.add(child.genes)
            elite.sort(key=Chromosome.sort_key)
            if len(elite) > elite_size:
                keys.discard(elite.pop().genes)
    return elite


def _finite_sd(values):
    values = np.asarray([v for v in values if np.isfinite(v)])
    return float(values.std(ddof=1)) if values.size > 1 else 0.0


def _generation_stats(generation, population, elite):
    means = np.array([c.mean for c in population])
    finite = means[np.isfinite(means)]
    best = min(list(population) + list(elite), key=Chromosome.sort_key)
    return GenerationStats(
        generation,
        float(finite.mean()) if finite.size else math.inf,
        best.mean,
        best.subset,
        sum("escape" in c.flags for c in population),
    )


def evolve_generation(population, elite, cfg: GaConfig, evaluator, generation, p):
    """One GA step: returns (offspring, new elite, stats)"""
    pool = _merge_pool(population, elite)
    ctx = _MatingContext(
        pool=pool,
        probs=selection_probabilities([c.mean for c in pool], cfg.exp_transform),
        tolerance=cfg.rejection_factor * _finite_sd(c.mean for c in population),
        cfg=cfg,
        p=p,
        evaluator=evaluator,
        generation=generation,
    )
    excluded = frozenset(c.genes for c in elite) \
        if cfg.duplicate_scope is DuplicateScope.OFFSPRING_ELITE else frozenset()
    offspring = produce_offspring(ctx, excluded)
    new_elite = update_elite(elite, offspring, cfg.elite_size)
    stats = _generation_stats(generation, offspring, new_elite)
    log_verbose("Generation %d: mean %.6g, best %.6g, escapes %d",
                generation, stats.mean_fitness, stats.best_fitness, stats.escapes)
    return offspring, new_elite, stats


def evaluate_population(subsets, cfg: GaConfig, evaluator, generation=0):
    """Evaluates subsets with seeds keyed by (generation, position)"""
    seeds = [derive_seed(cfg.master_seed, StreamTag.EVALUATION, generation, i)
             for i in range(len(subsets))]
    chunks = _chunks(list(zip(subsets, seeds)), cfg.workers)
    fitness = [f for out in parallel_map(_evaluate_chunk, [(evaluator, c) for c in chunks],
                                         cfg.workers) for f in out]
    return [Chromosome(s, f) for s, f in zip(subsets, fitness)]


def _evaluate_chunk(args):
    evaluator, items = args
    return [evaluator(subset.genes, seed) for subset, seed in items]


def rank_chromosomes(chromosomes, count=None):
    """Distinct chromosomes sorted by criterion mean (ties by genes)"""
    ranked, seen = [], set()
    for chromosome in sorted(chromosomes, key=Chromosome.sort_key):
        if chromosome.genes in seen:
            continue
        seen.add(chromosome.genes)
        ranked.append(chromosome)
    return ranked if count is None else ranked[:count]


def run_ga(data, cfg: GaConfig, evaluator=None) -> GaResult:
    """Runs cfg.generations generations (no early stopping) and ranks the final
    population together with the elite.
    """
    cfg.validate_for(data.p)
    evaluator = evaluator or FitnessEvaluator(data, cfg.criterion, cfg.fitness)
    try:
        evaluator.check_geometry(cfg.min_vars)
        if evaluator.criterion is Criterion.BIC_OLS:
            evaluator.check_geometry(cfg.max_vars)
    except ValueError as e:
        raise InfeasibleGeometryError(str(e)) from e

    log_stage("GA: %s, population %d, %d generations, %d workers",
              evaluator.criterion.value, cfg.population_size, cfg.generations, cfg.workers)
    with timeit(name="initial population"):
        subsets = init_population(data.p, cfg, stream(cfg.master_seed, StreamTag.INIT))
        population = evaluate_population(subsets, cfg, evaluator)
    elite = update_elite([], population, cfg.elite_size)
    initial = [c.mean for c in population if c.fitness.feasible]
    if not initial:
        logging.warning("No feasible chromosome in the initial population")

    history = []
    with timeit(name="generations"):
        for generation in range(1, cfg.generations + 1):
            population, elite, stats = evolve_generation(
                population, elite, cfg, evaluator, generation, data.p)
            history.append(stats)

    top = rank_chromosomes(list(population) + list(elite), cfg.top_count)
    summary = {"initial_mean": float(np.mean(initial)) if initial else math.inf,
               "final_best": history[-1].best_fitness}
    if initial and summary["final_best"] > 0 and math.isfinite(summary["final_best"]):
        summary["initial_to_best_ratio"] = summary["initial_mean"] / summary["final_best"]
        log_verbose("Initial mean fitness is %.3g times the final best",
                    summary["initial_to_best_ratio"])
    log_stage("GA finished. Best %s = %.6g with %d variables", evaluator.criterion.value,
              history[-1].best_fitness, history[-1].best_subset.size)
    return GaResult(top, history, elite, summary)
