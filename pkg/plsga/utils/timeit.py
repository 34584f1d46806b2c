"""
Wall-clock accounting of run phases

`timeit` works as a decorator or a context manager::

    with timeit(name="select"):
        with timeit(name="load data"):
            ...

Nested phases are recorded under their path, e.g. "select/load data". Repeated phases
accumulate. `TimerManager.timings()` feeds the run manifest.
"""
from __future__ import absolute_import
import logging
import time
from contextlib import ContextDecorator
from dataclasses import dataclass

from .logging import log_verbose

PATH_SEP = "/"


@dataclass
class PhaseTimer:
    path: str
    total: float = 0.0
    hits: int = 0
    _started: float = None

    @property
    def depth(self):
        return self.path.count(PATH_SEP)

    def start(self):
        self._started = time.perf_counter()

    def stop(self):
        elapsed = time.perf_counter() - self._started
        self._started = None
        self.total += elapsed
        self.hits += 1
        return elapsed


class _TimerRegistry:
    def __init__(self):
        self._timers = {}
        self._stack = []

    def reset(self):
        self._timers = {}
        self._stack = []

    def push(self, name):
        path = PATH_SEP.join(self._stack + [name])
        self._stack.append(name)
        timer = self._timers.setdefault(path, PhaseTimer(path))
        timer.start()
        return timer

    def pop(self, timer, verbose=True):
        elapsed = timer.stop()
        self._stack.pop()
        if verbose:
            log_verbose("%-40s %10.4f s%s", timer.path, elapsed,
                        " (total %.4g s over %d)" % (timer.total, timer.hits)
                        if timer.hits > 1 else "")

    def timings(self):
        """Accumulated seconds per phase path, in first-start order"""
        return {path: timer.total for path, timer in self._timers.items()}

    def show_stats(self):
        if not self._timers:
            return
        logging.info("%-48s %12s %8s", "Phase", "Seconds", "Hits")
        for timer in self._timers.values():
            label = "  " * timer.depth + timer.path.rsplit(PATH_SEP, 1)[-1]
            logging.info("%-48s %12.2f %8d", label, timer.total, timer.hits)


TimerManager = _TimerRegistry()


class timeit(ContextDecorator):
    def __init__(self, name, verbose=True):
        self.name = name
        self.verbose = verbose
        self._timer = None

    def __enter__(self):
        self._timer = TimerManager.push(self.name)
        return self

    def __exit__(self, exc_type, exc, exc_tb):
        TimerManager.pop(self._timer, self.verbose)
