import math
from dataclasses import replace

import numpy as np
import pytest

from plsga.core.configuration import ConfigurationError, InfeasibleGeometryError
from plsga.core.gadist import DtGeomParams, dtgeom_pmf
from plsga.core.random import StreamTag, stream
from plsga.fitness import Criterion, FitnessValue
from plsga.ga_engine import (Chromosome, Crossover, DuplicateScope, GaConfig, VariableSubset,
                             _escape, crossover_single, crossover_uniform, evaluate_population,
                             evolve_generation, init_population, mutate, rank_chromosomes,
                             repair, run_ga, selection_probabilities, update_elite)

TARGET = {0, 1, 2}


class TargetDistance:
    """Toy criterion: distance of the subset to TARGET, plus seeded jitter"""
    criterion = Criterion.BIC_OLS

    def __init__(self, jitter=0.01):
        self.jitter = jitter

    def __call__(self, genes, seed):
        jitter = self.jitter * stream(seed).random()
        return FitnessValue(self.criterion, (len(TARGET.symmetric_difference(genes)) + jitter,))

    def check_geometry(self, n_vars):
        pass


def _chromosome(genes, mean, bounds=(1, 10)):
    return Chromosome(VariableSubset.from_genes(genes, bounds),
                      FitnessValue(Criterion.BIC_OLS, (mean,)))


def test_variable_subset():
    subset = VariableSubset.from_genes([5, 1, 3, 3], (2, 4))
    assert subset.genes == (1, 3, 5)
    assert subset.size == len(subset) == 3
    assert np.array_equal(np.flatnonzero(subset.mask(6)), [1, 3, 5])
    with pytest.raises(ValueError):
        VariableSubset((3, 1), (1, 4))
    with pytest.raises(ValueError):
        VariableSubset.from_genes([1, 2, 3, 4, 5], (1, 4))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        GaConfig(population_size=7)
    with pytest.raises(ConfigurationError):
        GaConfig(min_vars=5, max_vars=4)
    with pytest.raises(ConfigurationError):
        GaConfig(max_vars=30).validate_for(20)
    assert Crossover.parse("Uniform") is Crossover.UNIFORM
    assert DuplicateScope.parse("offspring-elite") is DuplicateScope.OFFSPRING_ELITE


def test_selection_probabilities():
    probs = selection_probabilities([1.0, 2.0, 3.0])
    assert np.allclose(probs, [0.6652, 0.2447, 0.0900], atol=1e-4)
    probs = selection_probabilities([1.0, 2.0, 3.0], exp_transform=False)
    assert np.allclose(probs, [2 / 3, 1 / 3, 0])
    assert np.allclose(selection_probabilities([2.0, 2.0, 2.0, 2.0]), 0.25)


def test_selection_probabilities_infeasible():
    probs = selection_probabilities([1.0, math.inf, 3.0])
    assert probs[1] == 0
    assert probs.sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        selection_probabilities([1.0])


def test_selection_frequencies():
    probs = selection_probabilities([1.0, 2.0, 3.0])
    draws = stream(3).choice(3, size=100000, p=probs)
    assert np.allclose(np.bincount(draws) / 100000, probs, atol=0.01)


@pytest.mark.parametrize("exp_transform", [True, False])
def test_selection_probabilities_invariants(exp_transform):
    rng = stream(11)
    for _ in range(200):
        means = rng.uniform(0.1, 10, size=int(rng.integers(2, 40)))
        probs = selection_probabilities(means, exp_transform)
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert (probs >= 0).all()
        assert np.argmax(probs) == np.argmin(means)


def test_crossover_single_example():
    child1, child2 = crossover_single([0, 1], [4, 5], 6, stream(0), cut=2)
    assert child1.tolist() == [0, 1, 4, 5]
    assert child2.tolist() == []


@pytest.mark.parametrize("seed", range(10))
def test_crossover_exchanges_genes(seed):
    rng = stream(seed)
    a = sorted(rng.choice(20, size=6, replace=False))
    b = sorted(rng.choice(20, size=4, replace=False))
    for crossover in (crossover_single, crossover_uniform):
        c1, c2 = crossover(a, b, 20, rng)
        union = np.zeros(20, int)
        for genes in (a, b):
            union[genes] += 1
        children = np.zeros(20, int)
        for genes in (c1, c2):
            children[genes] += 1
        assert np.array_equal(union, children)


def test_crossover_uniform_selection():
    selection = [True, False, True, False, True, False]
    c1, c2 = crossover_uniform([0, 1], [1, 2, 3], 6, stream(0), selection=selection)
    assert c1.tolist() == [0, 1, 3]
    assert c2.tolist() == [1, 2]


def test_repair():
    rng = stream(1)
    big = repair(np.arange(40), (3, 30), 50, rng)
    assert big.size == 30
    assert set(big.genes) <= set(range(40))
    small = repair(np.array([], dtype=int), (3, 30), 50, rng)
    assert small.size == 3
    kept = repair(np.array([4, 9]), (3, 30), 50, rng)
    assert {4, 9} < set(kept.genes)


def test_mutate_without_probability():
    subset = VariableSubset.from_genes([1, 5, 7], (2, 6))
    rng = stream(2)
    assert all(mutate(subset, 0.0, 20, rng) is subset for _ in range(50))


def test_mutate_at_upper_bound_only_removes():
    subset = VariableSubset.from_genes(range(6), (2, 6))
    rng = stream(3)
    for _ in range(200):
        mutated = mutate(subset, 0.4, 20, rng)
        assert 2 <= mutated.size <= 6
        assert set(mutated.genes) <= set(subset.genes)


def test_init_population():
    cfg = GaConfig(population_size=40, min_vars=2, max_vars=5)
    population = init_population(12, cfg, stream(4))
    assert len(population) == 40
    assert len({s.genes for s in population}) == 40
    assert all(2 <= s.size <= 5 and max(s.genes) < 12 for s in population)


def test_init_population_degenerate(caplog):
    cfg = GaConfig(population_size=8, min_vars=1, max_vars=1)
    population = init_population(3, cfg, stream(5))
    assert len(population) == 8
    assert {s.genes for s in population} <= {(0,), (1,), (2,)}
    assert "duplicates" in caplog.text


def test_init_population_deterministic():
    cfg = GaConfig(population_size=30, min_vars=2, max_vars=6)
    first = init_population(25, cfg, stream(9, StreamTag.INIT))
    again = init_population(25, cfg, stream(9, StreamTag.INIT))
    other = init_population(25, cfg, stream(10, StreamTag.INIT))
    assert [s.genes for s in first] == [s.genes for s in again]
    assert [s.genes for s in first] != [s.genes for s in other]


def test_mutate_size_change_distribution():
    subset = VariableSubset.from_genes([3, 8, 11, 17], (2, 10))
    params = DtGeomParams.for_mutation(0.3, subset.size, 2, 10)
    n_draws = 100000
    rng = stream(8)
    changes = np.array([mutate(subset, 0.3, 20, rng).size - subset.size
                        for _ in range(n_draws)])
    support = np.arange(params.l, params.u + 1)
    expected = dtgeom_pmf(support, params)
    counts = np.array([(changes == k).sum() for k in support])
    assert counts.sum() == n_draws
    sigma = np.sqrt(n_draws * expected * (1 - expected))
    assert (np.abs(counts - n_draws * expected) <= 4 * sigma).all()


def test_update_elite():
    elite = [_chromosome([1, 2], 1.0), _chromosome([3], 2.0)]
    offspring = [_chromosome([4], 1.5), _chromosome([5], 3.0), _chromosome([1, 2], 0.5),
                 Chromosome(VariableSubset.from_genes([6], (1, 10)),
                            FitnessValue.infeasible(Criterion.BIC_OLS, "x"))]
    updated = update_elite(elite, offspring, 2)
    assert [c.genes for c in updated] == [(1, 2), (4,)]
    assert updated[0].mean == 0.5
    assert update_elite([], offspring, 0) == []


def test_rank_chromosomes():
    chromosomes = [_chromosome([3], 2.0), _chromosome([1], 1.0), _chromosome([3], 2.0),
                   _chromosome([2], 1.0)]
    ranked = rank_chromosomes(chromosomes)
    assert [c.genes for c in ranked] == [(1,), (2,), (3,)]
    assert len(rank_chromosomes(chromosomes, 2)) == 2


def test_clones_without_mutation_escape():
    cfg = GaConfig(population_size=4, generations=1, min_vars=2, max_vars=4,
                   mutation_probability=0.0, elite_size=0, max_mate_attempts=5,
                   duplicate_scope=DuplicateScope.OFFSPRING)
    evaluator = TargetDistance(jitter=0.0)
    clone = VariableSubset.from_genes([0, 4], cfg.bounds)
    population = evaluate_population([clone] * 4, cfg, evaluator)
    offspring, elite, stats = evolve_generation(population, [], cfg, evaluator, 1, 8)
    assert len(offspring) == 4
    assert all(c.genes == clone.genes for c in offspring)
    assert sum("duplicate" in c.flags for c in offspring) == 3
    assert stats.escapes == 3
    assert elite == []


def _infeasible(genes):
    return Chromosome(VariableSubset.from_genes(genes, (1, 10)),
                      FitnessValue.infeasible(Criterion.BIC_OLS, "SingularDesignError"))


def test_escape_prefers_feasible_candidates():
    evaluator = TargetDistance(jitter=0.0)
    duplicate = VariableSubset.from_genes([0, 1], (1, 10))

    def evaluate(subset):
        return evaluator(subset.genes, 0)

    chosen = _escape([_infeasible([5]), _chromosome([4, 6], 4.0)], [duplicate], evaluate)
    assert chosen.genes == (4, 6) and chosen.flags == ("escape",)
    chosen = _escape([_infeasible([5]), _infeasible([7])], [duplicate], evaluate)
    assert chosen.genes == (0, 1) and chosen.flags == ("escape", "duplicate")
    assert chosen.fitness.feasible
    chosen = _escape([], [duplicate], evaluate)
    assert chosen.flags == ("escape", "duplicate")


def test_escape_infeasible_as_last_resort():
    def evaluate(subset):
        return FitnessValue.infeasible(Criterion.BIC_OLS, "SingularDesignError")

    chosen = _escape([_infeasible([5])], [VariableSubset.from_genes([0, 1], (1, 10))], evaluate)
    assert chosen.genes == (5,) and chosen.flags == ("escape",)
    assert chosen.mean == math.inf
    assert selection_probabilities([1.0, chosen.mean, 2.0])[1] == 0


def test_offspring_avoid_elite():
    cfg = GaConfig(population_size=8, generations=1, min_vars=1, max_vars=3,
                   mutation_probability=0.2, elite_size=2, max_mate_attempts=50)
    evaluator = TargetDistance()
    subsets = init_population(10, cfg, stream(cfg.master_seed, StreamTag.INIT))
    population = evaluate_population(subsets, cfg, evaluator)
    elite = update_elite([], population, cfg.elite_size)
    offspring, _, _ = evolve_generation(population, elite, cfg, evaluator, 1, 10)
    elite_keys = {c.genes for c in elite}
    assert not [c for c in offspring if c.genes in elite_keys and "escape" not in c.flags]
    assert len({c.genes for c in offspring if "duplicate" not in c.flags}) == \
        sum("duplicate" not in c.flags for c in offspring)


def test_run_ga_toy_problem(small_benchmark):
    data = small_benchmark[0]
    cfg = GaConfig(population_size=20, generations=8, min_vars=2, max_vars=5,
                   mutation_probability=0.05, elite_size=4, max_mate_attempts=30,
                   master_seed=9, top_count=5)
    result = run_ga(data, cfg, TargetDistance())
    assert len(result.history) == 8
    bests = [s.best_fitness for s in result.history]
    assert all(b2 <= b1 for b1, b2 in zip(bests, bests[1:]))
    assert len(result.top_subsets) == 5
    assert [c.mean for c in result.top_subsets] == sorted(c.mean for c in result.top_subsets)
    assert result.top_subsets[0].mean == pytest.approx(bests[-1])
    assert result.summary["final_best"] == bests[-1]
    assert result.summary["initial_mean"] >= bests[-1]


def test_run_ga_deterministic(small_benchmark, quick_ga):
    data = small_benchmark[0]
    cfg = replace(quick_ga, criterion=Criterion.BIC_OLS)
    a, b = run_ga(data, cfg), run_ga(data, cfg)
    assert [c.genes for c in a.top_subsets] == [c.genes for c in b.top_subsets]
    assert a.history == b.history
    other = run_ga(data, replace(cfg, master_seed=cfg.master_seed + 1))
    assert other.history != a.history


def test_run_ga_worker_count_irrelevant(small_benchmark, quick_ga):
    data = small_benchmark[0]
    cfg = replace(quick_ga, criterion=Criterion.BIC_OLS, generations=2)
    serial = run_ga(data, cfg)
    parallel = run_ga(data, replace(cfg, workers=2))
    assert serial.history == parallel.history
    assert [(c.genes, c.mean) for c in serial.top_subsets] == \
        [(c.genes, c.mean) for c in parallel.top_subsets]


def test_run_ga_single_generation(small_benchmark, quick_ga):
    result = run_ga(small_benchmark[0], replace(quick_ga, generations=1))
    assert len(result.history) == 1
    assert result.history[0].generation == 1
    assert all(c.fitness.criterion is Criterion.SEP_SRCV for c in result.top_subsets)


def test_run_ga_infeasible_geometry(small_benchmark, quick_ga):
    data = small_benchmark[0].take_rows(range(8))
    cfg = replace(quick_ga, criterion=Criterion.BIC_OLS, max_vars=7)
    with pytest.raises(InfeasibleGeometryError):
        run_ga(data, cfg)
