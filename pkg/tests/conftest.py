import numpy as np
import pytest
from pathlib import Path

from plsga.dataset import Dataset, make_benchmark, write_csv
from plsga.fitness import FitnessConfig
from plsga.ga_engine import GaConfig

TEST_DATA = Path(__file__).parent.absolute() / "data"


@pytest.fixture
def benchmark():
    """(dataset, active columns) of the default synthetic benchmark"""
    return make_benchmark(n=60, p=100, active=5, noise_ratio=0.5, seed=7)


@pytest.fixture
def small_benchmark():
    return make_benchmark(n=30, p=12, active=3, noise_ratio=0.3, seed=3)


@pytest.fixture
def noiseless():
    """y = 3 x_2 + 1 exactly, with two noise columns"""
    rng = np.random.default_rng(11)
    X = rng.standard_normal((24, 3))
    return Dataset(X, 3 * X[:, 2] + 1, ["a", "b", "c"])


@pytest.fixture
def quick_fitness():
    return FitnessConfig(inner_segments=4, outer_segments=3, replications=2,
                         calibration_ratio=0.6, max_components=5)


@pytest.fixture
def quick_ga(quick_fitness):
    return GaConfig(population_size=16, generations=3, min_vars=2, max_vars=5,
                    mutation_probability=0.05, elite_size=4, max_mate_attempts=20,
                    fitness=quick_fitness, master_seed=42, workers=1, top_count=5)


@pytest.fixture
def benchmark_csv(tmp_path, small_benchmark):
    path = tmp_path / "benchmark.csv"
    write_csv(small_benchmark[0], path)
    return path
