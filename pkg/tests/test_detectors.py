import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from synthbench.detectors import (
    DETECTORS,
    HIGHER_IS_OUTLIER,
    LOWER_IS_OUTLIER,
    ScoreVector,
    average_path_length,
    iforest_anomaly_score,
    iforest_scores,
    kde_scores,
    lof_scores,
    run_detector,
    wknn_scores,
)

LINE = np.array([[0.0], [1.0], [2.0], [10.0]])


def test_lof_hand_values():
    # k-distances 1,1,1,9; lrd 1, 2/3, 1, 2/17
    s = lof_scores(LINE, 2).scores
    np.testing.assert_allclose(s, [7 / 8, 4 / 3, 7 / 8, 119 / 24], atol=1e-9)
    assert s[3] > 2 and s.argmax() == 3


def test_lof_uniform_grid_interior():
    g = np.array([[i, j] for i in range(20) for j in range(20)], float)
    s = lof_scores(g, 5).scores.reshape(20, 20)
    interior = s[3:17, 3:17]
    assert interior.min() >= 0.8 and interior.max() <= 1.2


def test_lof_simplex_is_one():
    s = lof_scores(np.eye(4), 3).scores
    np.testing.assert_allclose(s, 1.0)


def test_lof_duplicates_stay_finite():
    X = np.vstack([np.zeros((8, 2)), [[1.0, 1.0]], [[3.0, 0.0]]])
    s = lof_scores(X, 5).scores
    assert np.all(np.isfinite(s))


def test_lof_tied_k_distance_includes_all_ties():
    # point 0 has three neighbours at distance 1; all count for k=2
    X = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [5.0, 5.0]])
    s = lof_scores(X, 2).scores
    assert np.all(np.isfinite(s)) and s.argmax() == 4


def test_wknn_hand_values():
    np.testing.assert_array_equal(wknn_scores(np.array([[0.0], [1.0], [3.0]]), 2).scores,
                                  [4.0, 3.0, 5.0])


def test_wknn_identical_points():
    np.testing.assert_array_equal(wknn_scores(np.ones((6, 3)), 2).scores, 0.0)


def test_wknn_isolated_point_max():
    X = np.vstack([np.random.default_rng(0).normal(0, 0.1, (50, 2)), [[100.0, 0.0]]])
    assert wknn_scores(X, 5).scores.argmax() == 50


@pytest.mark.parametrize("fn,arg", [(lof_scores, 4), (wknn_scores, 4), (lof_scores, 0)])
def test_neighbour_preconditions(fn, arg):
    with pytest.raises(ValueError):
        fn(np.zeros((4, 1)) + np.arange(4)[:, None], arg)


def test_average_path_length():
    assert average_path_length(2) == 1.0
    assert average_path_length(1) == 0.0
    h = sum(1.0 / i for i in range(1, 256))
    assert average_path_length(256) == pytest.approx(2 * h - 2 * 255 / 256, abs=1e-12)


def test_iforest_half_at_average_path():
    assert iforest_anomaly_score(average_path_length(256), 256) == 0.5
    assert iforest_anomaly_score(average_path_length(37), 37) == 0.5


def test_iforest_far_point():
    # subsamples without the far point see it only as a boundary point, so it
    # is not the unique maximum on every seed
    tops = 0
    for seed in range(20):
        X = np.random.default_rng(seed).normal(size=(500, 2))
        X[17] = [10.0, 0.0]
        s = iforest_scores(X, seed=seed).scores
        assert s[17] > 0.6
        assert np.sum(s > s[17]) <= 2
        tops += s.argmax() == 17
    assert tops >= 14


def test_iforest_deterministic():
    X = np.random.default_rng(1).normal(size=(300, 2))
    np.testing.assert_array_equal(iforest_scores(X, seed=3).scores,
                                  iforest_scores(X, seed=3).scores)


def test_iforest_small_sample_clips_psi():
    s = iforest_scores(np.arange(10.0)[:, None], seed=0)
    assert len(s) == 10 and np.all((s.scores > 0) & (s.scores <= 1))


def test_kde_two_points_symmetric():
    s = kde_scores(np.array([[0.0], [1.0]])).scores
    assert s[0] == s[1]
    h = 1.06 * np.sqrt(0.5) * 2 ** -0.2
    assert s[0] == pytest.approx(stats.norm.logpdf(1.0, scale=h), abs=1e-12)


def test_kde_isolated_point_min():
    X = np.vstack([np.random.default_rng(0).normal(0, 1, (100, 2)), [[8.0, 8.0]]])
    sv = kde_scores(X)
    assert sv.orientation == LOWER_IS_OUTLIER and sv.scores.argmin() == 100


def test_kde_tracks_true_density():
    X = np.random.default_rng(2).standard_normal((10_000, 1))
    s = kde_scores(X).scores
    tau = stats.kendalltau(s, stats.norm.logpdf(X[:, 0])).statistic
    assert tau > 0.8


def test_kde_constant_attribute_uses_floor():
    X = np.column_stack([np.arange(10.0), np.zeros(10)])
    assert np.all(np.isfinite(kde_scores(X).scores))


def _shuffle_equivariant(name, X, perm):
    a = run_detector(name, X, seed=4).scores
    b = run_detector(name, X[perm], seed=4).scores
    return a, b


@pytest.mark.parametrize("name", ["lof_5", "wknn_5", "kde"])
def test_permutation_equivariance(name):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(120, 3))
    perm = rng.permutation(120)
    a, b = _shuffle_equivariant(name, X, perm)
    np.testing.assert_allclose(a[perm], b, rtol=1e-10, atol=1e-12)


def test_iforest_top_outlier_stable_under_shuffle():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(300, 2))
    X[5] = [7.0, -7.0]
    for s in range(3):
        perm = np.random.default_rng(s).permutation(300)
        assert perm[iforest_scores(X[perm], seed=9).scores.argmax()] == 5


# dyadic grid values keep translated differences exact in floating point
grid = st.integers(-80, 80).map(lambda v: v / 8)


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, (30, 2), elements=grid),
       arrays(np.float64, 2, elements=st.integers(-800, 800).map(lambda v: v / 8)))
def test_translation_invariance(X, shift):
    for fn in (lambda Z: lof_scores(Z, 5), lambda Z: wknn_scores(Z, 5)):
        np.testing.assert_allclose(fn(X).scores, fn(X + shift).scores, atol=1e-9, rtol=1e-9)


@settings(max_examples=20, deadline=None)
@given(arrays(np.float64, (40, 2), elements=st.floats(-5, 5)))
def test_scores_always_finite(X):
    for name in ("lof_5", "wknn_5", "iforest", "kde"):
        assert np.all(np.isfinite(run_detector(name, X, seed=0).scores))


def test_registry_and_orientation():
    assert set(DETECTORS) == {"lof_5", "lof_100", "wknn_5", "wknn_100", "iforest", "kde"}
    X = np.random.default_rng(0).normal(size=(150, 2))
    for name in DETECTORS:
        sv = run_detector(name, X, seed=1)
        assert sv.method_id == name and len(sv) == 150
    with pytest.raises(ValueError):
        run_detector("svm", X)


def test_score_vector_validation():
    with pytest.raises(ValueError):
        ScoreVector([1.0, np.nan], HIGHER_IS_OUTLIER, "x")
    with pytest.raises(ValueError):
        ScoreVector([1.0], "sideways", "x")
    sv = ScoreVector([1.0, 2.0], LOWER_IS_OUTLIER, "x")
    np.testing.assert_array_equal(sv.aligned(), [-1.0, -2.0])
