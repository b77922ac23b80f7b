import math
from importlib import resources

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from stlf.dataio import read_error_matrix
from stlf.errors import ConfigError, DataError, ShapeError
from stlf.evalstat import (
    P_CLAMP, Q_ALPHA, friedman_test, mape, mase, metric_report, naive_mae, nemenyi_cd,
    nemenyi_pairwise, rank_diagram, rank_models, rmse, studentized_range_sf,
)

FIXTURES = resources.files("stlf") / "data"

# reference average-rank rows, in fixture column order
REFERENCE_RANKS = {
    "rmse": [14.65, 11.85, 11.3, 10.65, 7.45, 11.45, 9.55, 7.95, 8.30, 7.75, 4.05, 5.15, 4.6, 3.15, 2.15],
    "mase": [14.7, 11.85, 10.6, 11.1, 7.4, 11.7, 9.45, 8.25, 8.25, 7.85, 4.75, 4.7, 3.95, 3.25, 2.20],
}

# selected entries of the reference pairwise RMSE table (row model, column model, p)
REFERENCE_PAIRS = [
    ("Persistence", "ARIMA", 0.783), ("Persistence", "SVR", 0.533), ("Persistence", "MLP", 0.232),
    ("Persistence", "EWTFCMSVR", 0.025), ("LSTM", "EWTRVFL", 0.510), ("LSTM", "EWTMea-edRVFL", 0.015),
    ("WHFCM", "EWTMed-edRVFL", 0.050), ("RVFL", "EWTMed-edRVFL", 0.077), ("MLP", "Med-edRVFL", 0.009),
    ("Med-edRVFL", "EWTMea-edRVFL", 0.692),
]


def load(metric):
    with resources.as_file(FIXTURES / f"aemo2020_{metric}.csv") as path:
        return read_error_matrix(path)


# metrics

def test_rmse_examples():
    assert rmse([0, 0], [3, 4]) == pytest.approx(math.sqrt(12.5), abs=1e-12)
    assert rmse([1, 2, 3], [1, 2, 3]) == 0.0


def test_mase_examples():
    assert mase([3.0], [2.0], [0, 1, 0, 1]) == pytest.approx(1.0, abs=1e-12)
    assert mase([2.0], [2.0], [0, 1, 0, 1]) == 0.0
    assert naive_mae([0, 1, 0, 1]) == 1.0
    with pytest.raises(DataError):
        mase([1.0], [2.0], [5.0, 5.0, 5.0])


def test_mape_examples():
    assert mape([110.0], [100.0]) == pytest.approx(0.10, abs=1e-12)
    assert mape([5.0], [5.0]) == 0.0
    with pytest.raises(DataError):
        mape([1.0], [0.0])


def test_metric_length_mismatch():
    with pytest.raises(ShapeError):
        rmse([1.0], [1.0, 2.0])
    with pytest.raises(ShapeError):
        rmse([], [])


def test_naive_on_train_mase_is_one(rng):
    train = rng.normal(size=500).cumsum() + 100
    assert abs(mase(train[:-1], train[1:], train) - 1.0) <= 1e-12


vec = arrays(float, 12, elements=st.floats(1.0, 1e4))


@given(vec, vec, st.floats(-50, 50))
def test_rmse_scale_equivariance(p, x, a):
    assert rmse(a * p, a * x) == pytest.approx(abs(a) * rmse(p, x), rel=1e-12, abs=1e-9)


@given(vec, vec, st.floats(0.01, 100))
def test_mape_scale_invariance(p, x, a):
    assert mape(a * p, a * x) == pytest.approx(mape(p, x), rel=1e-10)


@given(vec, vec)
def test_metrics_zero_iff_equal(p, x):
    train = np.arange(10.0)
    zero = np.array_equal(p, x)
    assert (rmse(p, x) == 0) == zero
    assert (mase(p, x, train) == 0) == zero
    assert (mape(p, x) == 0) == zero


def test_metric_report_fields():
    r = metric_report([1.0, 2.0], [1.0, 4.0], [0.0, 2.0, 0.0])
    assert r.n_test == 2 and r.mase_denominator == 2.0 and r.mase == 0.5


# ranking

def test_rank_examples():
    t = rank_models([[1.0], [2.0], [3.0]])
    assert t.ranks[:, 0].tolist() == [1.0, 2.0, 3.0]
    t = rank_models([[1.0], [1.0], [3.0]])
    assert t.ranks[:, 0].tolist() == [1.5, 1.5, 3.0]


def test_rank_rejects_nan():
    with pytest.raises(DataError):
        rank_models([[1.0, np.nan], [2.0, 3.0]])


@given(arrays(float, (5, 4), elements=st.floats(0.1, 100)))
def test_ranks_invariant_to_monotone_transform(E):
    a = rank_models(E)
    b = rank_models(np.log(E) * 3 + 7)
    assert np.array_equal(a.ranks, b.ranks)
    assert np.allclose(a.ranks.sum(axis=0), 5 * 6 / 2)
    assert np.all((a.avg_ranks >= 1) & (a.avg_ranks <= 5))


@pytest.mark.parametrize("metric", ["rmse", "mase"])
def test_reference_average_ranks(metric):
    E, models, datasets = load(metric)
    assert E.shape == (15, 20)
    table = rank_models(E, models, datasets)
    assert np.round(table.avg_ranks, 2).tolist() == REFERENCE_RANKS[metric]


# Friedman

def test_friedman_reference_rmse_ranks():
    table = rank_models(*load("rmse"))
    chi2, p = friedman_test(table)
    R = np.array(REFERENCE_RANKS["rmse"])
    k, n = 15, 20
    oracle = 12 * n / (k * (k + 1)) * (np.sum(R**2) - k * (k + 1) ** 2 / 4)
    assert chi2 == pytest.approx(oracle, rel=1e-12)
    assert chi2 == pytest.approx(184.7, abs=0.1)
    assert p < 1e-20
    assert p == pytest.approx(stats.chi2.sf(chi2, k - 1), rel=1e-10)


def test_friedman_null():
    chi2, p = friedman_test(rank_models(np.ones((3, 5))))
    assert chi2 == 0.0 and p == 1.0


def test_friedman_p_decreases_with_separation():
    # m of 8 datasets order the models A < B < C, the rest C < B < A;
    # raising m spreads the average ranks apart
    ps = []
    for m in range(4, 9):
        E = np.array([[1.0, 2.0, 3.0]] * m + [[3.0, 2.0, 1.0]] * (8 - m)).T
        chi2, p = friedman_test(rank_models(E))
        assert p == pytest.approx(stats.chi2.sf(chi2, 2), rel=1e-12)
        ps.append(p)
    assert ps[0] == 1.0
    assert all(a > b for a, b in zip(ps, ps[1:]))


def test_friedman_domain():
    with pytest.raises(ConfigError):
        friedman_test(rank_models(np.ones((2, 5))))
    with pytest.raises(ConfigError):
        friedman_test(rank_models(np.ones((4, 1))))


# Nemenyi

def test_q_table_matches_studentized_range_quantiles():
    for alpha, row in Q_ALPHA.items():
        for k in (2, 3, 7, 15, 20):
            q = stats.studentized_range.isf(alpha, k, np.inf) / math.sqrt(2)
            assert row[k - 2] == pytest.approx(q, abs=5e-6)


def test_q_table_against_standard_values():
    # widely reproduced 3-decimal q_0.05 / sqrt(2) values
    standard = {2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850, 7: 2.949, 8: 3.031, 9: 3.102, 10: 3.164}
    for k, q in standard.items():
        assert Q_ALPHA[0.05][k - 2] == pytest.approx(q, abs=1e-3)


def test_cd_examples():
    assert nemenyi_cd(2, 4) == pytest.approx(0.980, abs=1e-3)
    cd = nemenyi_cd(15, 20, 0.05)
    assert 4.45 <= cd <= 4.85
    assert cd == pytest.approx(4.80, abs=0.01)


def test_cd_decreasing_in_datasets():
    cds = [nemenyi_cd(6, n) for n in range(1, 30)]
    assert all(a > b for a, b in zip(cds, cds[1:]))


def test_cd_domain():
    with pytest.raises(ConfigError):
        nemenyi_cd(5, 10, 0.01)
    with pytest.raises(ConfigError):
        nemenyi_cd(21, 10)
    with pytest.raises(ConfigError):
        nemenyi_cd(1, 10)


@pytest.mark.parametrize("k", [2, 3, 5, 10, 15, 20])
def test_studentized_range_sf_against_scipy(k):
    for q in (0.5, 1.5, 3.0, 4.5, 6.0):
        assert studentized_range_sf(q, k) == pytest.approx(
            stats.studentized_range.sf(q, k, np.inf), abs=1e-9)


def test_pairwise_structure():
    table = rank_models(*load("rmse"))
    res = nemenyi_pairwise(table)
    P = res.p_values
    assert np.all(np.diag(P) == -1.0)
    assert np.array_equal(P, P.T)
    off = P[~np.eye(15, dtype=bool)]
    assert off.min() >= P_CLAMP[0] and off.max() <= P_CLAMP[1]
    assert np.all(np.diag(res.raw) == 1.0)


def test_pairwise_close_to_reference():
    E, models, datasets = load("rmse")
    res = nemenyi_pairwise(rank_models(E, models, datasets))
    idx = {m: i for i, m in enumerate(models)}
    for a, b, p in REFERENCE_PAIRS:
        assert res.p_values[idx[a], idx[b]] == pytest.approx(p, abs=0.05)


def test_pairwise_identical_models_at_clamp():
    res = nemenyi_pairwise(rank_models(np.ones((3, 4))))
    off = res.p_values[~np.eye(3, dtype=bool)]
    assert np.all(off == 0.9)


@given(arrays(float, (6, 8), elements=st.floats(0, 1)))
def test_cd_pairwise_consistency(E):
    table = rank_models(E)
    cd = nemenyi_cd(6, 8, 0.05)
    raw = nemenyi_pairwise(table).raw
    R = table.avg_ranks
    for i in range(6):
        for j in range(i + 1, 6):
            gap = abs(R[i] - R[j])
            if abs(gap - cd) > 1e-6:
                assert (raw[i, j] < 0.05) == (gap > cd)


def test_rank_diagram_lists_models_best_first():
    table = rank_models(*load("rmse"))
    text = rank_diagram(table, nemenyi_cd(15, 20))
    first = text.splitlines()[0]
    assert first.startswith("EWTMea-edRVFL") and "2.15" in first
    assert "critical distance 4.796" in text
