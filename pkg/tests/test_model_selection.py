import numpy as np
import pytest

from plsga.core.pls import InvalidComponentsError, fit_simpls
from plsga.core.random import stream
from plsga.dataset import CvSegmentation, make_segments
from plsga.model_selection import (MsepCurve, choose_components, cv_msep, max_components,
                                   se_of_msep)


def _refit_oracle(X, y, seg, A_max):
    """One model per (segment, component count)"""
    per_segment = np.empty((seg.K, A_max))
    for k, test in enumerate(seg.segments):
        train = seg.training_indices(k)
        for a in range(1, A_max + 1):
            model = fit_simpls(X[train], y[train], a)
            per_segment[k, a - 1] = np.mean((y[test] - model.predict(X[test], a)) ** 2)
    return per_segment


def test_max_components():
    assert max_components(125, 30, 10) == 30
    assert max_components(125, 200, 10, cap=200) == 111
    assert max_components(125, 5, 10) == 5
    assert max_components(20, 30, 10) == 17
    assert max_components(3, 2, 2) == 0
    assert max_components(1000, 100, 10, cap=12) == 12


def test_noiseless_msep_is_zero():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(20)
    y = 3 * x + 2
    seg = make_segments(20, 5, stream(1))
    curve = cv_msep(x[:, None], y, seg, 1)
    assert curve.msep[0] < 1e-16 * y.var()


def test_cv_msep_matches_refit_oracle():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((20, 5))
        y = X @ rng.standard_normal(5) + rng.standard_normal(20)
        seg = make_segments(20, 4, stream(seed))
        curve = cv_msep(X, y, seg, 3)
        oracle = _refit_oracle(X, y, seg, 3)
        assert np.allclose(curve.per_segment_msep, oracle, rtol=1e-12, atol=0)
        assert np.allclose(curve.msep, oracle.mean(axis=0), rtol=1e-12, atol=0)
        assert np.allclose(se_of_msep(curve),
                           np.sqrt(((oracle - oracle.mean(axis=0)) ** 2).sum(axis=0) / 3),
                           rtol=1e-12, atol=0)


def test_unequal_segments_use_mean_of_means():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((11, 3))
    y = X @ [1.0, 0.5, -1.0] + rng.standard_normal(11)
    seg = make_segments(11, 2, stream(4))
    assert sorted(seg.sizes()) == [5, 6]
    curve = cv_msep(X, y, seg, 2)
    assert np.allclose(curve.msep, curve.per_segment_msep.mean(axis=0))
    pooled = sum(curve.per_segment_msep[k] * len(s) for k, s in enumerate(seg.segments)) / 11
    assert not np.allclose(curve.msep, pooled)


def test_segment_order_irrelevant():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((16, 4))
    y = X @ rng.standard_normal(4) + rng.standard_normal(16)
    seg = make_segments(16, 4, stream(6))
    reordered = CvSegmentation(seg.segments[::-1], seg.n_total)
    a, b = cv_msep(X, y, seg, 3), cv_msep(X, y, reordered, 3)
    assert np.allclose(a.msep, b.msep, rtol=1e-14)
    assert choose_components(a).a_opt == choose_components(b).a_opt


def test_cv_msep_fold_too_small():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((6, 5))
    seg = make_segments(6, 3, stream(0))
    with pytest.raises(InvalidComponentsError):
        cv_msep(X, rng.standard_normal(6), seg, 4)


def test_se_of_msep_hand_values():
    curve = MsepCurve.from_segments([[1.0, 5.0], [3.0, 5.0]])
    se = se_of_msep(curve)
    assert se[0] == pytest.approx(np.sqrt(2))
    assert se[1] == 0


def test_se_scales_with_square():
    per_segment = np.array([[1.0, 2.0], [3.0, 0.5], [2.0, 1.0]])
    base = se_of_msep(MsepCurve.from_segments(per_segment))
    scaled = se_of_msep(MsepCurve.from_segments(per_segment * 4.0))  # y scaled by 2
    assert np.allclose(scaled, 4.0 * base)


def test_choose_strictly_decreasing():
    per_segment = np.tile([5.0, 4.0, 3.0, 2.0], (4, 1))
    choice = choose_components(MsepCurve.from_segments(per_segment))
    assert choice.a_opt == choice.a_min == 4


def test_choose_one_se_rule():
    # SE_3 = 0.3, so the threshold is 1.9 + 0.3 / sqrt(4) = 2.05
    column3 = 1.9 + 0.3 * np.sqrt(3) / 2 * np.array([1.0, -1.0, 1.0, -1.0])
    per_segment = np.column_stack([np.full(4, 4.0), np.full(4, 2.0), column3, np.full(4, 1.95)])
    curve = MsepCurve.from_segments(per_segment)
    se = se_of_msep(curve)
    assert se[2] / 2 == pytest.approx(0.15)
    assert np.allclose(curve.msep, [4.0, 2.0, 1.9, 1.95])
    choice = choose_components(curve)
    assert (choice.a_opt, choice.a_min) == (2, 3)


def test_choose_constant_curve():
    choice = choose_components(MsepCurve.from_segments(np.ones((3, 5))))
    assert choice.a_opt == 1
    assert choice.a_min == 1


def test_choose_matches_direct_rule_on_random_curves():
    rng = np.random.default_rng(9)
    for _ in range(1000):
        K = int(rng.integers(2, 11))
        A = int(rng.integers(1, 9))
        per_segment = np.round(rng.uniform(0, 3, size=(K, A)), 1)  # rounding creates ties
        curve = MsepCurve.from_segments(per_segment)
        msep, se = curve.msep, se_of_msep(curve)
        m = min(range(A), key=lambda a: (msep[a], a))
        expected = next(a for a in range(A) if msep[a] <= msep[m] + se[m] / np.sqrt(K))
        choice = choose_components(curve)
        assert choice.a_min == m + 1
        assert choice.a_opt == expected + 1
        assert choice.a_opt <= choice.a_min
