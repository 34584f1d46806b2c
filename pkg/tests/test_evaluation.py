from dataclasses import replace

import numpy as np
import pytest

from plsga.dataset import Dataset, SplitError, SubsetIndexError
from plsga.evaluation import (BoxplotStats, ExternalReport, VerificationReport,
                              external_validate, verify_internal)
from plsga.fitness import Criterion, FitnessConfig

QUICK_VERIFY = dict(R=3, K=4, S=3, max_components=5)


def test_boxplot_stats():
    box = BoxplotStats.from_values([3.0, 1.0, 100.0, 2.0, 4.0])
    assert (box.q1, box.median, box.q3) == (2.0, 3.0, 4.0)
    assert (box.whisker_low, box.whisker_high) == (1.0, 4.0)
    assert box.outliers == (100.0,)


def test_verify_noiseless(noiseless):
    report = verify_internal(noiseless, [[2], [1, 2]], seed=3, **QUICK_VERIFY)
    assert [row.rank for row in report.rows] == [1, 2]
    for row in report.rows:
        assert row.feasible
        assert row.mean < 1e-10
        assert row.mean == pytest.approx(np.mean(row.simpls.replicates))
        assert len(row.simpls.replicates) == 3
    assert report.rows[0].names == ("c",)
    assert report.flagged == []


def test_verify_fitters_agree(small_benchmark):
    data, truth = small_benchmark
    report = verify_internal(data, [truth, [0, 5, 9, 11]], seed=8, **QUICK_VERIFY)
    for row in report.rows:
        assert row.oracle_mean == pytest.approx(row.mean, rel=0.01)
        assert sum(row.a_opt_distribution.values()) == 3 * 3
        assert row.boxplot.median == pytest.approx(np.median(row.simpls.replicates))


def test_verify_flags_infeasible(small_benchmark):
    data = small_benchmark[0]
    constant = Dataset(np.column_stack([data.X, np.ones(data.n)]), data.y)
    report = verify_internal(constant, [[0, 1], [data.p]], **QUICK_VERIFY)
    assert report.rows[0].feasible
    assert report.flagged == [report.rows[1]]
    assert report.rows[1].boxplot is None
    assert report.rows[1].as_dict()["mean"] is None


def test_verify_out_of_range(small_benchmark):
    data = small_benchmark[0]
    with pytest.raises(SubsetIndexError):
        verify_internal(data, [[0, data.p]], **QUICK_VERIFY)
    with pytest.raises(IndexError):
        verify_internal(data, [[-1, 2]], **QUICK_VERIFY)


def test_verify_streams_keyed_by_rank(small_benchmark):
    data = small_benchmark[0]
    a = verify_internal(data, [[0, 1], [2, 3, 4]], seed=5, **QUICK_VERIFY)
    b = verify_internal(data, [[6, 7], [2, 3, 4]], seed=5, **QUICK_VERIFY)
    c = verify_internal(data, [[6, 7], [2, 3, 4]], seed=6, **QUICK_VERIFY)
    assert a.rows[1].simpls == b.rows[1].simpls
    assert c.rows[1].simpls != b.rows[1].simpls


def test_verify_report_dict(small_benchmark):
    report = verify_internal(small_benchmark[0], [[0, 1, 2]], **QUICK_VERIFY)
    again = VerificationReport.from_dict(report.as_dict())
    assert again == report


@pytest.fixture
def external_cfg(quick_ga):
    return replace(quick_ga, criterion=Criterion.BIC_OLS, generations=2)


def test_external_validation(small_benchmark, external_cfg):
    data = small_benchmark[0]
    report = external_validate(data, external_cfg, ratio=0.6, repeats=2, seed=4)
    assert len(report.runs) == 2
    for run in report.runs:
        assert (run.n_training, run.n_validation) == (18, 12)
        assert 2 <= run.n_variables <= 5
        assert run.n_components >= 1
        assert data.n * run.rmsep_total ** 2 == pytest.approx(
            run.n_training * run.rmsep_training ** 2
            + run.n_validation * run.rmsep_validation ** 2, rel=1e-10)
    assert report.summary["n_training"] == {"median": 18.0, "mad": 0.0}
    assert report.criterion is Criterion.BIC_OLS


def test_external_single_repeat(small_benchmark, external_cfg):
    report = external_validate(small_benchmark[0], external_cfg, repeats=1, seed=1)
    assert all(entry["mad"] == 0 for entry in report.summary.values())
    assert report.summary["rmsep_validation"]["median"] == report.runs[0].rmsep_validation


def test_external_deterministic(small_benchmark, external_cfg):
    a = external_validate(small_benchmark[0], external_cfg, repeats=1, seed=2)
    b = external_validate(small_benchmark[0], external_cfg, repeats=1, seed=2)
    assert a.runs == b.runs
    assert ExternalReport.from_dict(a.as_dict()).runs == a.runs


def test_external_with_verification(small_benchmark, external_cfg):
    verify = FitnessConfig(inner_segments=4, outer_segments=3, replications=2,
                           max_components=5)
    report = external_validate(small_benchmark[0], external_cfg, repeats=1, seed=3,
                               verify=verify)
    assert len(report.runs) == 1
    assert np.isfinite(report.runs[0].criterion_value)


def test_external_split_too_small(small_benchmark, external_cfg):
    tiny = small_benchmark[0].take_rows(range(8))
    with pytest.raises(SplitError):
        external_validate(tiny, external_cfg, ratio=0.6, repeats=1)
