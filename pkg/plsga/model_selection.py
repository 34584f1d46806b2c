"""
Inner cross-validation of PLS models: MSEP per number of components, its standard
error and the one-standard-error choice of the number of components.
"""
from __future__ import absolute_import
from dataclasses import dataclass

import numpy as np

from .core.pls import InvalidComponentsError, fit_simpls

DEFAULT_COMPONENTS_CAP = 30


@dataclass(frozen=True)
class MsepCurve:
    """msep[a-1] = MSEP_a; per_segment_msep[k, a-1] = mean squared error on segment k"""
    msep: np.ndarray
    per_segment_msep: np.ndarray

    @property
    def K(self):
        return self.per_segment_msep.shape[0]

    @property
    def A_max(self):
        return self.msep.shape[0]

    @classmethod
    def from_segments(cls, per_segment_msep):
        per_segment_msep = np.asarray(per_segment_msep, dtype=float)
        return cls(per_segment_msep.mean(axis=0), per_segment_msep)


@dataclass(frozen=True)
class ComponentChoice:
    a_opt: int
    a_min: int
    se: np.ndarray


def max_components(n_cal, q, K, cap=DEFAULT_COMPONENTS_CAP):
    """Largest component count every inner training fold can support.

    The smallest training fold of a balanced K-segmentation has floor(n_cal (K-1) / K)
    rows, which allows at most that minus one components.
    """
    return int(min(q, (n_cal * (K - 1)) // K - 1, cap))


def cv_msep(X_cal, y_cal, seg, A_max, fitter=fit_simpls) -> MsepCurve:
    """K-fold MSEP for a = 1..A_max.

    Each segment is predicted by a model fit on the other K-1 segments. The overall
    MSEP is the unweighted mean of the segment means, even for unequal segment sizes.
    """
    X_cal = np.asarray(X_cal, dtype=float)
    y_cal = np.asarray(y_cal, dtype=float)
    A_max = int(A_max)
    if seg.K < 2:
        raise InvalidComponentsError("Cross-validation needs at least 2 segments")
    smallest_fold = seg.n_total - max(seg.sizes())
    if A_max < 1 or smallest_fold < A_max + 1:
        raise InvalidComponentsError(
            "{} components need training folds of {} rows, smallest has {}".format(
                A_max, A_max + 1, smallest_fold))

    per_segment = np.empty((seg.K, A_max))
    for k, test_idx in enumerate(seg.segments):
        train_idx = seg.training_indices(k)
        model = fitter(X_cal[train_idx], y_cal[train_idx], A_max)
        residuals = y_cal[test_idx, None] - model.predict_path(X_cal[test_idx], A_max)
        per_segment[k] = np.mean(residuals ** 2, axis=0)
    return MsepCurve.from_segments(per_segment)


def se_of_msep(curve: MsepCurve):
    """SE_a = sqrt( sum_k (MSEP_a - segment_mean_ka)^2 / (K - 1) )"""
    deviations = curve.per_segment_msep - curve.msep
    return np.sqrt(np.sum(deviations ** 2, axis=0) / (curve.K - 1))


def choose_components(curve: MsepCurve) -> ComponentChoice:
    """One standard error rule: the smallest a with MSEP_a <= MSEP_m + SE_m / sqrt(K),
    m being the first argmin of the MSEP curve. Counts are 1-based.
    """
    se = se_of_msep(curve)
    m = int(np.argmin(curve.msep))  # first occurrence on ties
    threshold = curve.msep[m] + se[m] / np.sqrt(curve.K)
    a_opt = int(np.flatnonzero(curve.msep <= threshold)[0])
    return ComponentChoice(a_opt + 1, m + 1, se)
