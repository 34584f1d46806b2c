"""
Ordered parallel map over a pool of workers
"""
from __future__ import absolute_import
import logging
import os

import psutil
from joblib import Parallel, delayed


def default_workers():
    """Physical cores when known, else logical cores"""
    return psutil.cpu_count(logical=False) or os.cpu_count() or 1


def parallel_map(func, items, workers=1):
    """Applies func to every item, returning results in input order.

    With `workers` <= 1, or a single item, work runs inline in this process.
    Results never depend on the worker count as long as `func` is pure.
    """
    items = list(items)
    if workers is None or workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    n_jobs = min(workers, len(items))
    logging.debug("Dispatching %d tasks to %d workers", len(items), n_jobs)
    return Parallel(n_jobs=n_jobs)(delayed(func)(item) for item in items)
