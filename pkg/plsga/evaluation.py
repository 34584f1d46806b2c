"""
Assessment of selected subsets after the GA:

 - `verify_internal` reruns repeated double cross-validation on the top subsets with
   fresh random streams, once with SIMPLS and once with the NIPALS cross-check fitter.
 - `external_validate` repeatedly splits the data, runs the GA on the training part only
   and measures the prediction error of the best subset on the held-out part.
"""
from __future__ import absolute_import
import dataclasses
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import stats

from .core.configuration import InfeasibleGeometryError
from .core.parallel import parallel_map
from .core.pls import fit_pls_oracle
from .core.random import StreamTag, derive_seed, stream
from .dataset import (MIN_OBSERVATIONS, SplitError, SubsetIndexError, calibration_size,
                      split_random, subset_names)
from .fitness import (Criterion, FitnessConfig, FitnessValue, default_fitter, fitness_rdcv,
                      rmsep, tuned_fit)
from .ga_engine import GaConfig, run_ga
from .utils.logging import log_stage, log_verbose


@dataclass(frozen=True)
class BoxplotStats:
    """Tukey five-number summary; whiskers reach the most extreme values within 1.5 IQR"""
    whisker_low: float
    q1: float
    median: float
    q3: float
    whisker_high: float
    outliers: Tuple[float, ...] = ()

    @classmethod
    def from_values(cls, values):
        values = np.sort(np.asarray(values, dtype=float))
        q1, median, q3 = np.percentile(values, [25, 50, 75])
        iqr = q3 - q1
        inside = values[(values >= q1 - 1.5 * iqr) & (values <= q3 + 1.5 * iqr)]
        outliers = values[(values < q1 - 1.5 * iqr) | (values > q3 + 1.5 * iqr)]
        return cls(float(inside.min()), float(q1), float(median), float(q3),
                   float(inside.max()), tuple(float(v) for v in outliers))


@dataclass(frozen=True)
class SubsetVerification:
    """rdCV verification of one subset with both fitters (same random streams)"""
    rank: int
    genes: Tuple[int, ...]
    simpls: FitnessValue
    oracle: FitnessValue
    names: Tuple[str, ...] = ()

    @property
    def size(self):
        return len(self.genes)

    @property
    def feasible(self):
        return self.simpls.feasible and self.oracle.feasible

    @property
    def mean(self):
        return self.simpls.mean

    @property
    def oracle_mean(self):
        return self.oracle.mean

    @property
    def boxplot(self) -> Optional[BoxplotStats]:
        return BoxplotStats.from_values(self.simpls.replicates) if self.feasible else None

    @property
    def a_opt_distribution(self) -> Dict[int, int]:
        counts = Counter(a for replicate in self.simpls.a_opt for a in replicate)
        return dict(sorted(counts.items()))

    def as_dict(self):
        box = self.boxplot
        return {
            "rank": self.rank,
            "genes": list(self.genes),
            "names": list(self.names),
            "size": self.size,
            "feasible": self.feasible,
            "mean": self.mean if self.feasible else None,
            "oracle_mean": self.oracle_mean if self.feasible else None,
            "boxplot": dataclasses.asdict(box) if box else None,
            "a_opt_distribution": {str(k): v for k, v in self.a_opt_distribution.items()},
            "simpls": self.simpls.as_dict(),
            "oracle": self.oracle.as_dict(),
        }

    @classmethod
    def from_dict(cls, info):
        return cls(info["rank"], tuple(info["genes"]),
                   FitnessValue.from_dict(info["simpls"]),
                   FitnessValue.from_dict(info["oracle"]),
                   tuple(info.get("names", ())))


@dataclass
class VerificationReport:
    rows: List[SubsetVerification]
    replications: int
    inner_segments: int
    outer_segments: int

    @property
    def flagged(self):
        return [row for row in self.rows if not row.feasible]

    def as_dict(self):
        return {
            "replications": self.replications,
            "inner_segments": self.inner_segments,
            "outer_segments": self.outer_segments,
            "subsets": [row.as_dict() for row in self.rows],
        }

    @classmethod
    def from_dict(cls, info):
        return cls([SubsetVerification.from_dict(row) for row in info["subsets"]],
                   info["replications"], info["inner_segments"], info["outer_segments"])


def _verify_one(args):
    data, rank, genes, cfg, seed = args
    simpls = fitness_rdcv(data, genes, cfg, seed)
    oracle = fitness_rdcv(data, genes, cfg, seed, fitter=fit_pls_oracle)
    return SubsetVerification(rank, tuple(genes), simpls, oracle,
                              tuple(subset_names(data, genes)))


def verify_internal(data, subsets, R=50, K=10, S=4, seed=0, workers=1,
                    max_components=30, reorthogonalize=False) -> VerificationReport:
    """Independent rdCV of each subset: R replications, K inner and S outer segments.

    Subset i draws from streams keyed (seed, VERIFY, i), disjoint from every stream of a
    GA run. Infeasible subsets give flagged rows instead of errors.
    """
    cfg = FitnessConfig(inner_segments=K, outer_segments=S, replications=R,
                        max_components=max_components, reorthogonalize=reorthogonalize)
    subsets = [tuple(getattr(s, "genes", s)) for s in subsets]
    for genes in subsets:
        if not genes or min(genes) < 0 or max(genes) >= data.p:
            raise SubsetIndexError("Subset {} out of range for {} variables"
                                   .format(genes, data.p))
    log_stage("Verifying %d subsets: %d replications, %d inner / %d outer segments",
              len(subsets), R, K, S)
    tasks = [(data, rank, genes, cfg, derive_seed(seed, StreamTag.VERIFY, rank - 1))
             for rank, genes in enumerate(subsets, start=1)]
    rows = parallel_map(_verify_one, tasks, workers)
    for row in rows:
        if row.feasible:
            log_verbose("Subset %d (%d vars): SEP %.6g (oracle %.6g)",
                        row.rank, row.size, row.mean, row.oracle_mean)
        else:
            logging.warning("Subset %d (%s) is infeasible for rdCV", row.rank, row.genes)
    return VerificationReport(rows, R, K, S)


@dataclass(frozen=True)
class ExternalRun:
    """One train / validation repetition"""
    repeat: int
    n_training: int
    n_validation: int
    genes: Tuple[int, ...]
    n_components: int
    rmsep_training: float
    rmsep_validation: float
    rmsep_total: float
    criterion_value: float
    names: Tuple[str, ...] = ()

    @property
    def n_variables(self):
        return len(self.genes)


EXTERNAL_SUMMARY_FIELDS = ("n_training", "n_validation", "n_variables", "n_components",
                           "rmsep_training", "rmsep_validation", "rmsep_total")


@dataclass
class ExternalReport:
    runs: List[ExternalRun]
    ratio: float
    criterion: Criterion
    summary: Dict[str, Dict[str, float]] = field(init=False)

    def __post_init__(self):
        self.summary = {}
        for name in EXTERNAL_SUMMARY_FIELDS:
            values = np.array([getattr(run, name) for run in self.runs], dtype=float)
            self.summary[name] = {
                "median": float(np.median(values)),
                "mad": float(stats.median_abs_deviation(values, scale=1.0)),
            }

    def as_dict(self):
        runs = []
        for run in self.runs:
            info = dataclasses.asdict(run)
            info["genes"] = list(run.genes)
            info["names"] = list(run.names)
            runs.append(info)
        return {"ratio": self.ratio, "criterion": self.criterion.value,
                "runs": runs, "summary": self.summary}

    @classmethod
    def from_dict(cls, info):
        runs = [ExternalRun(**dict(run, genes=tuple(run["genes"]), names=tuple(run["names"])))
                for run in info["runs"]]
        return cls(runs, info["ratio"], Criterion.parse(info["criterion"]))


def external_validate(data, cfg: GaConfig, ratio=0.6, repeats=10, seed=0,
                      verify: Optional[FitnessConfig] = None) -> ExternalReport:
    """Repeated external validation of the whole selection procedure.

    Per repeat: random training / validation split (both >= 4 rows), GA on the training
    rows, PLS fit of the best subset with components chosen by inner CV on the training
    rows, and RMSEP on the training, validation and all rows.

    With `verify`, the GA's top subsets are re-ranked by an rdCV verification on the
    training rows and the verified best is used.
    """
    n_train = calibration_size(data.n, ratio)
    if min(n_train, data.n - n_train) < MIN_OBSERVATIONS:
        raise SplitError("ratio {} splits {} observations into {} / {}; both parts need {}"
                         .format(ratio, data.n, n_train, data.n - n_train, MIN_OBSERVATIONS))
    runs = []
    for r in range(repeats):
        log_stage("External validation repeat %d/%d", r + 1, repeats)
        rng = stream(seed, StreamTag.EXTERNAL, r)
        split = split_random(data.n, ratio, rng)
        train = data.take_rows(split.calibration_idx)
        repeat_cfg = dataclasses.replace(
            cfg, master_seed=derive_seed(seed, StreamTag.EXTERNAL, r, 0))
        result = run_ga(train, repeat_cfg)
        best = result.top_subsets[0]
        if verify is not None:
            report = verify_internal(
                train, [c.genes for c in result.top_subsets], verify.replications,
                verify.inner_segments, verify.outer_segments,
                derive_seed(seed, StreamTag.EXTERNAL, r, 1), cfg.workers,
                verify.max_components, verify.reorthogonalize)
            feasible = [row for row in report.rows if row.feasible]
            if feasible:
                best = result.top_subsets[min(feasible, key=lambda row: row.mean).rank - 1]
        if not best.fitness.feasible:
            raise InfeasibleGeometryError("No feasible subset found in repeat {}".format(r))
        runs.append(_score_subset(data, split, best.genes, best.mean, cfg.fitness,
                                  stream(seed, StreamTag.EXTERNAL, r, 2), r))
        log_verbose("Repeat %d: %d variables, %d components, RMSEP train %.4g / valid %.4g",
                    r + 1, runs[-1].n_variables, runs[-1].n_components,
                    runs[-1].rmsep_training, runs[-1].rmsep_validation)
    return ExternalReport(runs, float(ratio), cfg.criterion)


def _score_subset(data, split, genes, criterion_value, fitness_cfg, rng, repeat):
    X = data.take_columns(genes)
    train, valid = split.calibration_idx, split.test_idx
    fitter = default_fitter(fitness_cfg)
    with np.errstate(all="raise", under="ignore"):
        model, a_opt = tuned_fit(X[train], data.y[train], fitness_cfg.inner_segments,
                                 fitness_cfg, fitter, rng)
        a = min(a_opt, model.A_max)
        y_hat = model.predict(X, a)
    return ExternalRun(
        repeat=repeat,
        n_training=len(train),
        n_validation=len(valid),
        genes=tuple(genes),
        n_components=a,
        rmsep_training=rmsep(data.y[train], y_hat[train]),
        rmsep_validation=rmsep(data.y[valid], y_hat[valid]),
        rmsep_total=rmsep(data.y, y_hat),
        criterion_value=float(criterion_value),
        names=tuple(subset_names(data, genes)),
    )
