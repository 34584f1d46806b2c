# flake8: noqa
"""
    plsga
    -----

    Variable subset selection for PLS regression with a genetic algorithm.
    Subsets are scored by internal prediction criteria (repeated double cross-validation,
    simple repeated cross-validation) or by the BIC of PLS / least squares fits, then
    verified and externally validated.
"""
from __future__ import absolute_import
try:
    from importlib.metadata import version as _dist_version
    __version__ = _dist_version(__name__)
except Exception:
    __version__ = 'devel'

from .dataset import Dataset, load_csv, make_benchmark
from .fitness import Criterion, FitnessConfig, FitnessEvaluator
from .ga_engine import GaConfig, run_ga
from .evaluation import external_validate, verify_internal


__all__ = ["Dataset", "load_csv", "make_benchmark", "Criterion", "FitnessConfig",
           "FitnessEvaluator", "GaConfig", "run_ga", "external_validate", "verify_internal"]
