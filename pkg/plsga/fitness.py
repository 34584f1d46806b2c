"""
Validation criteria of a variable subset, used as (minimized) GA fitness:

 - SEP_rdCV: repeated double cross-validation
 - SEP_srCV: simple repeated cross-validation (random calibration/test split)
 - BIC_PLS: BIC of a PLS model fit to all data, components chosen by inner CV
 - BIC_OLS: BIC of an ordinary least squares fit to all data

Evaluations never raise for a bad subset; they return an infeasible `FitnessValue`
(mean = +inf) which the GA discards.
"""
from __future__ import absolute_import
import functools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np

from .core.pls import PlsError, fit_ols, fit_simpls
from .core.random import StreamTag, stream
from .dataset import DatasetError, calibration_size, make_segments, split_random
from .model_selection import choose_components, cv_msep, max_components

RSS_FLOOR = 1e-24
"""Per-observation floor of the RSS in BIC, avoiding -inf on interpolating fits"""


class MetricError(ValueError):
    pass


class Criterion(Enum):
    SEP_RDCV = "rdcv"
    SEP_SRCV = "srcv"
    BIC_PLS = "bic-pls"
    BIC_OLS = "bic-ols"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        token = str(value).strip().lower().replace("_", "-")
        for member in cls:
            if token in (member.value, member.name.lower().replace("_", "-")):
                return member
        raise ValueError("Unknown criterion: {} (expected one of {})".format(
            value, ", ".join(m.value for m in cls)))


class BicPenalty(Enum):
    """What BIC_PLS counts as model parameters"""
    VARIABLES = "variables"
    COMPONENTS = "components"

    @classmethod
    def parse(cls, value):
        return value if isinstance(value, cls) else cls(str(value).strip().lower())


@dataclass(frozen=True)
class FitnessConfig:
    inner_segments: int = 10
    outer_segments: int = 4
    replications: int = 30
    calibration_ratio: float = 0.6
    max_components: int = 30
    bic_penalty: BicPenalty = BicPenalty.VARIABLES
    reorthogonalize: bool = False

    def __post_init__(self):
        if self.inner_segments < 2 or self.outer_segments < 2:
            raise ValueError("Cross-validation needs at least 2 segments")
        if self.replications < 1:
            raise ValueError("At least one replication is required")
        if not 0 < self.calibration_ratio < 1:
            raise ValueError("calibration_ratio must be in (0, 1)")
        if self.max_components < 1:
            raise ValueError("max_components must be positive")


@dataclass(frozen=True)
class FitnessValue:
    """Criterion value(s) of one subset. Lower is better.

    `replicates` has one entry per replication (one for the BIC criteria);
    `a_opt` holds, per replicate, the chosen component counts (one per outer fold in rdCV).
    """
    criterion: Criterion
    replicates: Tuple[float, ...]
    a_opt: Tuple[Tuple[int, ...], ...] = ()
    feasible: bool = True
    flags: Tuple[str, ...] = ()
    mean: float = field(init=False)
    sd: float = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.replicates, dtype=float)
        feasible = self.feasible and values.size > 0 and bool(np.isfinite(values).all())
        object.__setattr__(self, "feasible", feasible)
        if not feasible:
            object.__setattr__(self, "mean", math.inf)
            object.__setattr__(self, "sd", 0.0)
            return
        object.__setattr__(self, "mean", float(values.mean()))
        object.__setattr__(self, "sd", float(values.std(ddof=1)) if values.size > 1 else 0.0)

    @classmethod
    def infeasible(cls, criterion, reason):
        return cls(criterion, (), (), False, (reason,))

    def as_dict(self):
        return {
            "criterion": self.criterion.value,
            "replicates": list(self.replicates),
            "mean": self.mean if self.feasible else None,
            "sd": self.sd,
            "a_opt": [list(a) for a in self.a_opt],
            "feasible": self.feasible,
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, info):
        return cls(Criterion.parse(info["criterion"]),
                   tuple(info["replicates"]),
                   tuple(tuple(a) for a in info.get("a_opt", ())),
                   info.get("feasible", True),
                   tuple(info.get("flags", ())))


def sep(y, y_hat):
    """Standard error of prediction and bias of residuals y - y_hat.

    bias = mean(y - y_hat); SEP = sqrt( sum (y - y_hat - bias)^2 / (N - 1) )
    """
    residuals = _residuals(y, y_hat, minimum=2)
    bias = residuals.mean()
    return float(np.sqrt(np.sum((residuals - bias) ** 2) / (residuals.size - 1))), float(bias)


def rmsep(y, y_hat):
    """Root mean squared error of prediction"""
    residuals = _residuals(y, y_hat, minimum=1)
    return float(np.sqrt(np.mean(residuals ** 2)))


def bic(rss, n, n_params):
    """N log(RSS / N) + k log(N), natural log, with the RSS floored at N * RSS_FLOOR.

    Returns:
        (value, floored)
    """
    floor = n * RSS_FLOOR
    floored = rss < floor
    return n * math.log(max(rss, floor) / n) + n_params * math.log(n), floored


def _residuals(y, y_hat, minimum):
    y = np.asarray(y, dtype=float).reshape(-1)
    y_hat = np.asarray(y_hat, dtype=float).reshape(-1)
    if y.shape != y_hat.shape:
        raise MetricError("Length mismatch: {} vs {}".format(y.size, y_hat.size))
    if y.size < minimum:
        raise MetricError("At least {} values required, got {}".format(minimum, y.size))
    return y - y_hat


def _genes(subset):
    genes = getattr(subset, "genes", subset)
    genes = np.asarray(genes, dtype=int)
    if genes.size == 0:
        raise DatasetError("Empty variable subset")
    return genes


def default_fitter(cfg, fitter=None):
    """The given fitter, else SIMPLS (reorthogonalized when configured)"""
    if fitter is not None:
        return fitter
    if cfg.reorthogonalize:
        return lambda X, y, a: fit_simpls(X, y, a, reorthogonalize=True)
    return fit_simpls


def tuned_fit(X_cal, y_cal, K, cfg, fitter, rng):
    """Inner K-fold CV on the calibration data, then the A_opt model on all of it"""
    A_max = max_components(len(y_cal), X_cal.shape[1], K, cfg.max_components)
    if A_max < 1:
        raise DatasetError("{} calibration rows are too few for {} inner segments"
                           .format(len(y_cal), K))
    seg = make_segments(len(y_cal), K, rng)
    choice = choose_components(cv_msep(X_cal, y_cal, seg, A_max, fitter))
    return fitter(X_cal, y_cal, choice.a_opt), choice.a_opt


_NUMERICAL_ERRORS = (PlsError, DatasetError, FloatingPointError, np.linalg.LinAlgError)


def _guarded(criterion):
    def decorator(f):
        @functools.wraps(f)
        def wrapper(*args, **kw):
            try:
                with np.errstate(all="raise", under="ignore"):
                    return f(*args, **kw)
            except _NUMERICAL_ERRORS as e:
                logging.debug("Infeasible subset for %s: %s", criterion.value, e)
                return FitnessValue.infeasible(criterion, type(e).__name__)
        return wrapper
    return decorator


@_guarded(Criterion.SEP_SRCV)
def fitness_srcv(data, subset, cfg: FitnessConfig, seed, fitter=None) -> FitnessValue:
    """Mean SEP over replications of: random calibration/test split, inner CV for the
    number of components on the calibration part, refit, SEP of the test residuals.

    Replicate r draws from stream (seed, REPLICATE, r) only.
    """
    fitter = default_fitter(cfg, fitter)
    X = data.take_columns(_genes(subset))
    y = data.y
    values, a_opts = [], []
    for r in range(cfg.replications):
        rng = stream(seed, StreamTag.REPLICATE, r)
        split = split_random(len(y), cfg.calibration_ratio, rng)
        cal, test = split.calibration_idx, split.test_idx
        model, a_opt = tuned_fit(X[cal], y[cal], cfg.inner_segments, cfg, fitter, rng)
        values.append(sep(y[test], model.predict(X[test], min(a_opt, model.A_max)))[0])
        a_opts.append((a_opt,))
    return FitnessValue(Criterion.SEP_SRCV, tuple(values), tuple(a_opts))


@_guarded(Criterion.SEP_RDCV)
def fitness_rdcv(data, subset, cfg: FitnessConfig, seed, fitter=None) -> FitnessValue:
    """Mean SEP over replications of double cross-validation: every outer segment is
    predicted once by a model tuned by inner CV on the other segments, and SEP is
    computed from the N pooled outer predictions.
    """
    fitter = default_fitter(cfg, fitter)
    X = data.take_columns(_genes(subset))
    y = data.y
    values, a_opts = [], []
    for r in range(cfg.replications):
        rng = stream(seed, StreamTag.REPLICATE, r)
        outer = make_segments(len(y), cfg.outer_segments, rng)
        y_hat = np.empty_like(y)
        fold_a_opt = []
        for s, test in enumerate(outer.segments):
            cal = outer.training_indices(s)
            model, a_opt = tuned_fit(X[cal], y[cal], cfg.inner_segments, cfg, fitter, rng)
            y_hat[test] = model.predict(X[test], min(a_opt, model.A_max))
            fold_a_opt.append(a_opt)
        values.append(sep(y, y_hat)[0])
        a_opts.append(tuple(fold_a_opt))
    return FitnessValue(Criterion.SEP_RDCV, tuple(values), tuple(a_opts))


@_guarded(Criterion.BIC_PLS)
def fitness_bic_pls(data, subset, cfg: FitnessConfig, seed, fitter=None) -> FitnessValue:
    """BIC of the PLS model fit to all data, A_opt chosen by inner CV on all data"""
    fitter = default_fitter(cfg, fitter)
    genes = _genes(subset)
    X = data.take_columns(genes)
    y = data.y
    rng = stream(seed, StreamTag.REPLICATE, 0)
    model, a_opt = tuned_fit(X, y, cfg.inner_segments, cfg, fitter, rng)
    residuals = y - model.predict(X, min(a_opt, model.A_max))
    n_params = len(genes) if cfg.bic_penalty is BicPenalty.VARIABLES else a_opt
    value, floored = bic(float(residuals @ residuals), len(y), n_params)
    return FitnessValue(Criterion.BIC_PLS, (value,), ((a_opt,),),
                        flags=("rss_floor",) if floored else ())


@_guarded(Criterion.BIC_OLS)
def fitness_bic_ols(data, subset, cfg: FitnessConfig = None, seed=None,
                    fitter=None) -> FitnessValue:
    """BIC of the least squares fit to all data. Singular designs are infeasible"""
    genes = _genes(subset)
    model = fit_ols(data.take_columns(genes), data.y)
    value, floored = bic(model.rss, data.n, len(genes))
    return FitnessValue(Criterion.BIC_OLS, (value,), flags=("rss_floor",) if floored else ())


CRITERION_FUNCTIONS = {
    Criterion.SEP_RDCV: fitness_rdcv,
    Criterion.SEP_SRCV: fitness_srcv,
    Criterion.BIC_PLS: fitness_bic_pls,
    Criterion.BIC_OLS: fitness_bic_ols,
}


class FitnessEvaluator:
    """Binds a dataset, criterion and configuration; called with (genes, seed).

    Instances are picklable so worker processes can evaluate chromosomes.
    """

    def __init__(self, data, criterion, cfg=None, fitter=None):
        self.data = data
        self.criterion = Criterion.parse(criterion)
        self.cfg = cfg or FitnessConfig()
        self.fitter = fitter

    def __call__(self, genes, seed):
        func = CRITERION_FUNCTIONS[self.criterion]
        return func(self.data, genes, self.cfg, seed, fitter=self.fitter)

    def check_geometry(self, n_vars):
        """Raises ValueError when the data cannot support the criterion at all"""
        cfg, n = self.cfg, self.data.n
        if self.criterion is Criterion.SEP_SRCV:
            n_cal = calibration_size(n, cfg.calibration_ratio)
            if n_cal < 2 or n - n_cal < 2:
                raise ValueError("calibration_ratio {} leaves no test set for N={}"
                                 .format(cfg.calibration_ratio, n))
        elif self.criterion is Criterion.SEP_RDCV:
            if cfg.outer_segments > n:
                raise ValueError("{} outer segments for N={}".format(cfg.outer_segments, n))
            n_cal = n - math.ceil(n / cfg.outer_segments)
        elif self.criterion is Criterion.BIC_PLS:
            n_cal = n
        else:
            if n_vars + 2 > n:
                raise ValueError("BIC_OLS needs N >= max_vars + 2, got N={}".format(n))
            return
        if max_components(n_cal, n_vars, cfg.inner_segments, cfg.max_components) < 1:
            raise ValueError("{} calibration rows are too few for {} inner segments"
                             .format(n_cal, cfg.inner_segments))
