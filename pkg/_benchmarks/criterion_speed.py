"""
Wall-clock of GA selection with srCV against rdCV on the synthetic benchmark.

    python _benchmarks/criterion_speed.py [population] [generations]

Both runs share the GA configuration (R=30, S=4, K=10); the ratio rdCV / srCV is printed.
"""
from __future__ import print_function
import sys
import time as _time
from dataclasses import replace

from plsga.core.parallel import default_workers
from plsga.dataset import make_benchmark
from plsga.fitness import Criterion, FitnessConfig
from plsga.ga_engine import GaConfig, run_ga
from plsga.utils.logging import setup_logging


def timeit(min_total=4):
    """Yields loop numbers until `min_total` seconds were spent; reports the best loop"""
    tot_time = .0
    loop = 0
    start = _time.time()
    yield 0
    stop = _time.time()
    best_time = tot_time = stop - start

    while tot_time < min_total:
        loop += 1
        start = stop
        yield loop
        stop = _time.time()
        tdiff = stop - start
        best_time = min(best_time, tdiff)
        tot_time += tdiff

    timeit.best = best_time
    print("Best run: %.3f s. [%d loops]" % (best_time, loop + 1))


def main(population=200, generations=10):
    setup_logging(0)
    data, _ = make_benchmark(n=60, p=100, active=5, noise_ratio=0.5, seed=1)
    fitness = FitnessConfig(inner_segments=10, outer_segments=4, replications=30)
    cfg = GaConfig(population_size=population, generations=generations, fitness=fitness,
                   master_seed=1, workers=default_workers())
    best = {}
    for criterion in (Criterion.SEP_SRCV, Criterion.SEP_RDCV):
        print("select with", criterion.value)
        for _ in timeit(min_total=0):
            run_ga(data, replace(cfg, criterion=criterion))
        best[criterion] = timeit.best
    print("rdCV / srCV wall-clock ratio: %.2f"
          % (best[Criterion.SEP_RDCV] / best[Criterion.SEP_SRCV]))


if __name__ == "__main__":
    main(*(int(arg) for arg in sys.argv[1:3]))
