"""
Data model, CSV ingestion and random partitioning of observations.

The `Dataset` is immutable after load, and all partitioning functions are pure given
an explicit numpy Generator, so both can be shared freely among workers.
"""
from __future__ import absolute_import
import hashlib
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .core.random import StreamTag, stream
from .utils.logging import log_verbose

MIN_OBSERVATIONS = 4


class DatasetError(Exception):
    """Base error for invalid data or partitions"""


class MissingColumnError(DatasetError):
    pass


class CsvParseError(DatasetError):
    """A cell could not be read as a finite number"""
    def __init__(self, msg, row=None, column=None):
        super().__init__(msg)
        self.row = row
        self.column = column


class TooFewObservationsError(DatasetError):
    pass


class SegmentationError(DatasetError):
    pass


class SplitError(DatasetError):
    pass


class SubsetIndexError(DatasetError, IndexError):
    """A variable subset refers to columns the dataset does not have"""


class Dataset:
    """Predictor matrix X (N x p), response y and their labels.

    Arrays are stored read-only. Use `take_rows` / `take_columns` for derived datasets.
    """

    __slots__ = ("X", "y", "variable_names", "observation_ids", "source")

    def __init__(self, X, y, variable_names=None, observation_ids=None, source=None):
        X = np.array(X, dtype=float, copy=True)
        y = np.array(y, dtype=float, copy=True).reshape(-1)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise DatasetError("X must be N x p with N = len(y), got {} and {}"
                               .format(X.shape, y.shape))
        n, p = X.shape
        if n < MIN_OBSERVATIONS:
            raise TooFewObservationsError(
                "At least {} observations required, got {}".format(MIN_OBSERVATIONS, n))
        if p < 1:
            raise DatasetError("No predictor variables")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise DatasetError("Data contains missing or non-finite values")
        variable_names = [str(v) for v in (variable_names if variable_names is not None
                                           else ("x%d" % (j + 1) for j in range(p)))]
        observation_ids = [str(o) for o in (observation_ids if observation_ids is not None
                                            else (str(i + 1) for i in range(n)))]
        if len(variable_names) != p or len(observation_ids) != n:
            raise DatasetError("Label counts do not match the data shape")
        if len(set(variable_names)) != p:
            raise DatasetError("Variable names must be unique")
        X.setflags(write=False)
        y.setflags(write=False)
        self.X = X
        self.y = y
        self.variable_names = tuple(variable_names)
        self.observation_ids = tuple(observation_ids)
        self.source = source

    n = property(lambda self: self.X.shape[0])
    p = property(lambda self: self.X.shape[1])

    def __repr__(self):
        return "<Dataset: N={} p={}{}>".format(
            self.n, self.p, " from " + str(self.source) if self.source else "")

    def take_rows(self, idx):
        """A new dataset restricted to the given observation indices"""
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.X[idx], self.y[idx], self.variable_names,
                       [self.observation_ids[i] for i in idx], self.source)

    def take_columns(self, genes):
        """The X columns of a variable subset (a copy)"""
        return self.X[:, np.asarray(genes, dtype=int)]


def load_csv(path, response_column, id_column=None):
    """Reads a comma separated table with a header row.

    The response column becomes y, the optional id column labels the observations and
    every other column becomes a predictor. Row order is preserved.

    Raises:
        MissingColumnError: response or id column absent
        CsvParseError: empty / non-numeric / non-finite cell (row is the file line number)
        TooFewObservationsError: less than 4 data rows
    """
    try:
        raw = pd.read_csv(path, header=None, dtype=str, keep_default_na=False,
                          encoding="utf-8", skip_blank_lines=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise CsvParseError("Could not read {}: {}".format(path, e)) from e

    header = [h.strip() for h in raw.iloc[0].tolist()]
    body = raw.iloc[1:].reset_index(drop=True)
    body.columns = range(len(header))
    duplicates = sorted({h for h in header if header.count(h) > 1})
    if duplicates:
        raise CsvParseError("Duplicated column names: " + ", ".join(duplicates), row=1)

    for name in (response_column, id_column):
        if name is not None and name not in header:
            raise MissingColumnError("Column '{}' not found in {}".format(name, path))

    if len(body) < MIN_OBSERVATIONS:
        raise TooFewObservationsError(
            "At least {} observations required, {} has {}".format(
                MIN_OBSERVATIONS, path, len(body)))

    numeric_cols = [j for j, h in enumerate(header) if h != id_column]
    values = np.empty((len(body), len(numeric_cols)))
    for out_j, j in enumerate(numeric_cols):
        column = _parse_floats(body[j].str.strip())
        bad = np.flatnonzero(~np.isfinite(column))
        if bad.size:
            i = int(bad[0])
            raise CsvParseError("Invalid value {!r} at row {}, column '{}'".format(
                body[j].iloc[i], i + 2, header[j]), row=i + 2, column=header[j])
        values[:, out_j] = column

    names = [header[j] for j in numeric_cols]
    y_pos = names.index(response_column)
    y = values[:, y_pos]
    X = np.delete(values, y_pos, axis=1)
    var_names = names[:y_pos] + names[y_pos + 1:]
    if not var_names:
        raise DatasetError("No predictor columns besides the response in " + str(path))
    ids = (body[header.index(id_column)].str.strip().tolist() if id_column
           else [str(i + 1) for i in range(len(body))])
    dataset = Dataset(X, y, var_names, ids, source=str(path))
    log_verbose("Loaded %s: N=%d, p=%d", path, dataset.n, dataset.p)
    return dataset


def _float_or_nan(cell):
    try:
        return float(cell)
    except ValueError:
        return math.nan


def _parse_floats(cells):
    """Correctly rounded float conversion of a column of strings, nan where invalid"""
    try:
        return cells.astype(float).to_numpy()
    except ValueError:
        return cells.map(_float_or_nan).to_numpy(dtype=float)


def file_sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass(frozen=True)
class CvSegmentation:
    """K disjoint index arrays covering range(n_total)"""
    segments: Tuple[np.ndarray, ...]
    n_total: int

    @property
    def K(self):
        return len(self.segments)

    def training_indices(self, k):
        """All indices outside segment k, ascending"""
        return np.sort(np.concatenate([s for j, s in enumerate(self.segments) if j != k]))

    def sizes(self):
        return [len(s) for s in self.segments]


@dataclass(frozen=True)
class Split:
    calibration_idx: np.ndarray
    test_idx: np.ndarray
    ratio: float


def make_segments(n, K, rng) -> CvSegmentation:
    """Uniform random partition of range(n) into K segments whose sizes differ by <= 1"""
    n, K = int(n), int(K)
    if K < 2 or K > n:
        raise SegmentationError("Need 2 <= K <= n, got K={} for n={}".format(K, n))
    perm = rng.permutation(n)
    # np.array_split gives the first n % K segments one extra element
    segments = tuple(np.sort(part) for part in np.array_split(perm, K))
    return CvSegmentation(segments, n)


def calibration_size(n, ratio):
    """round-half-up of ratio * n"""
    return int(math.floor(ratio * n + 0.5))


def split_random(n, ratio, rng) -> Split:
    """Uniform random calibration subset of size round(ratio * n); the rest is test"""
    n = int(n)
    if not 0 < ratio < 1:
        raise SplitError("Split ratio must be in (0, 1), got {}".format(ratio))
    n_cal = calibration_size(n, ratio)
    if n_cal < 2 or n - n_cal < 2:
        raise SplitError("Split of {} observations with ratio {} leaves {} / {} rows"
                         .format(n, ratio, n_cal, n - n_cal))
    perm = rng.permutation(n)
    return Split(np.sort(perm[:n_cal]), np.sort(perm[n_cal:]), float(ratio))


def make_benchmark(n=60, p=100, active=5, noise_ratio=0.5, seed=0,
                   coefficient_range=(1.0, 2.0)) -> Tuple[Dataset, List[int]]:
    """Synthetic regression benchmark with a known active variable set.

    X is standard normal; y is a linear combination of `active` randomly chosen columns
    with coefficients of random sign and magnitude in `coefficient_range`, plus Gaussian
    noise whose SD is `noise_ratio` times the SD of the noiseless signal.

    Returns:
        (dataset, sorted list of active column indices)
    """
    rng = stream(seed, StreamTag.BENCHMARK)
    X = rng.standard_normal((n, p))
    truth = np.sort(rng.choice(p, size=active, replace=False))
    beta = rng.uniform(*coefficient_range, size=active) * rng.choice([-1.0, 1.0], size=active)
    signal = X[:, truth] @ beta
    noise_sd = noise_ratio * signal.std(ddof=1)
    y = signal + rng.standard_normal(n) * noise_sd
    names = ["v%d" % (j + 1) for j in range(p)]
    logging.debug("Benchmark active variables: %s", [names[j] for j in truth])
    return Dataset(X, y, names, ["obs%d" % (i + 1) for i in range(n)]), truth.tolist()


def write_csv(dataset: Dataset, path, response_column="y", id_column: Optional[str] = "id"):
    """Writes a dataset in the format read by `load_csv`"""
    frame = pd.DataFrame(np.asarray(dataset.X), columns=list(dataset.variable_names))
    frame.insert(len(frame.columns), response_column, np.asarray(dataset.y))
    if id_column:
        frame.insert(0, id_column, list(dataset.observation_ids))
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")


def subset_names(dataset: Dataset, genes: Sequence[int]):
    return [dataset.variable_names[g] for g in genes]
