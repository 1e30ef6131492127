import math

import numpy as np
import pytest

from synthbench import fixtures
from synthbench.dataset import LabeledDataset, stratified_split
from synthbench.generators import GeneratorPair
from synthbench.realness import (
    TRAIN_FRACTION,
    _seeds,
    classify_protocol,
    random_guess_kappa,
    training_set,
)


@pytest.fixture(scope="module")
def data():
    return fixtures.clustered(0, n=600, d=3)


def test_real_problem_has_zero_drop(data):
    res = classify_protocol(data, "Real", None, seed=1, ntrees=30)
    assert res.ok and res.kappa_drop == 0.0
    assert res.kappa > random_guess_kappa(data, 1)


def test_kappa_real_reused(data):
    a = classify_protocol(data, "Real", None, seed=2, ntrees=20)
    pair = GeneratorPair.parse("unif_unif")
    b = classify_protocol(data, "SynthRegular", pair, seed=2, ntrees=20)
    c = classify_protocol(data, "SynthRegular", pair, seed=2, ntrees=20, kappa_real=a.kappa)
    assert b == c
    assert b.kappa_drop == pytest.approx(a.kappa - b.kappa)


@pytest.mark.parametrize("problem", ["SynthRegular", "SynthOutliers", "Synth"])
def test_training_set_keeps_class_counts(data, problem):
    split = stratified_split(data, TRAIN_FRACTION, 0)
    X, y = training_set(split.train, problem, GeneratorPair.parse("unif_unif"), _seeds(0))
    assert X.shape == split.train.instances.shape
    assert y.sum() == split.train.n_outliers


def test_real_training_set_is_untouched(data):
    split = stratified_split(data, TRAIN_FRACTION, 0)
    X, y = training_set(split.train, "Real", None, _seeds(0))
    np.testing.assert_array_equal(X, split.train.instances)


def test_synth_replaces_only_requested_class(data):
    split = stratified_split(data, TRAIN_FRACTION, 0)
    pair = GeneratorPair.parse("unif_unif")
    X, y = training_set(split.train, "SynthOutliers", pair, _seeds(0))
    np.testing.assert_array_equal(X[~y], split.train.regulars)
    assert not np.array_equal(X[y], split.train.outliers)


def test_fitted_outlier_variant(data):
    res = classify_protocol(data, "Synth", GeneratorPair.parse("unif_unif"), seed=0,
                            outlier_variant="fitted", ntrees=20)
    assert res.ok and res.outlier_variant == "fitted" and math.isfinite(res.kappa)


def test_failed_fit_is_flagged():
    rng = np.random.default_rng(0)
    one_col = LabeledDataset.from_parts(rng.normal(size=(200, 1)), rng.normal(5, 1, (20, 1)))
    res = classify_protocol(one_col, "Synth", GeneratorPair.parse("vine_vine"), seed=0, ntrees=10)
    assert res.status == "failed" and math.isnan(res.kappa) and res.reason


def test_argument_validation(data):
    with pytest.raises(ValueError):
        classify_protocol(data, "Nope", None, 0)
    with pytest.raises(ValueError):
        classify_protocol(data, "Synth", None, 0)
    with pytest.raises(ValueError):
        classify_protocol(data, "Real", None, 0, outlier_variant="other")


def test_random_guess_near_zero():
    d = fixtures.clustered(3, n=2000, d=2, outlier_fraction=0.2)
    vals = [random_guess_kappa(d, s) for s in range(10)]
    assert abs(np.mean(vals)) < 0.05
