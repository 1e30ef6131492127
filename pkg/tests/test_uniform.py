import math

import numpy as np
import pytest

from synthbench.uniform import (
    UniformModel,
    uniform_fit,
    uniform_gen,
    uniform_logdens,
    uniform_modify_expand,
)


def test_fit_is_min_max():
    m = uniform_fit(np.array([[0.0, 0.0], [2.0, 4.0]]))
    np.testing.assert_array_equal(m.lower, [0, 0])
    np.testing.assert_array_equal(m.upper, [2, 4])


def test_fit_on_normalized_data_is_unit_box():
    X = np.random.default_rng(0).uniform(size=(50, 3))
    X = (X - X.min(0)) / (X.max(0) - X.min(0))
    m = uniform_fit(X)
    np.testing.assert_array_equal(m.lower, 0.0)
    np.testing.assert_array_equal(m.upper, 1.0)


@pytest.mark.parametrize("X", [np.zeros((1, 2)), np.array([[0.0, 1.0], [1.0, 1.0]])])
def test_fit_preconditions(X):
    with pytest.raises(ValueError):
        uniform_fit(X)


def test_gen_inside_box_centered_and_deterministic():
    m = UniformModel(np.array([-1.0, 2.0]), np.array([3.0, 2.5]))
    n = 100_000
    X = uniform_gen(m, n, seed=5)
    assert m.contains(X).all()
    mid = (m.lower + m.upper) / 2
    r = m.upper - m.lower
    assert np.all(np.abs(X.mean(axis=0) - mid) <= 3 * r / math.sqrt(12 * n))
    np.testing.assert_array_equal(X, uniform_gen(m, n, seed=5))


def test_logdens_values():
    unit = UniformModel(np.zeros(2), np.ones(2))
    assert uniform_logdens(unit, [[0.3, 0.7]])[0] == 0.0
    wide = uniform_modify_expand(unit, 0.10)
    assert uniform_logdens(wide, [[0.5, 0.5]])[0] == pytest.approx(math.log(1 / 1.2 ** 2))
    assert uniform_logdens(wide, [[0.5, 0.5]])[0] == pytest.approx(-0.36464, abs=1e-5)
    assert uniform_logdens(unit, [[1.5, 0.5]])[0] == -np.inf


def test_logdens_constant_on_support():
    m = UniformModel(np.array([0.0, -2.0, 1.0]), np.array([1.0, 5.0, 1.5]))
    vals = uniform_logdens(m, uniform_gen(m, 100, 0))
    assert np.all(vals == vals[0])


def test_expand_bounds():
    m = UniformModel(np.zeros(1), np.ones(1))
    w = uniform_modify_expand(m, 0.10)
    np.testing.assert_allclose(w.lower, [-0.1])
    np.testing.assert_allclose(w.upper, [1.1])
    np.testing.assert_array_equal(m.upper, [1.0])
    tiny = uniform_modify_expand(m, 1e-12)
    assert abs(tiny.lower[0]) <= 1e-11 and abs(tiny.upper[0] - 1) <= 1e-11
    assert tiny.lower[0] < m.lower[0] and tiny.upper[0] > m.upper[0]
    with pytest.raises(ValueError):
        uniform_modify_expand(m, 0.0)


def test_outliers_outside_regular_box():
    d = 2
    reg = UniformModel(np.zeros(d), np.ones(d))
    X = uniform_gen(uniform_modify_expand(reg), 10_000, seed=1)
    frac = 1 - reg.contains(X).mean()
    assert abs(frac - (1 - 1.2 ** -d)) <= 0.03


def test_density_ratio_constant_on_regular_box():
    reg = UniformModel(np.zeros(3), np.ones(3))
    out = uniform_modify_expand(reg)
    X = uniform_gen(reg, 100, seed=2)
    ratio = uniform_logdens(out, X) - uniform_logdens(reg, X)
    assert np.ptp(ratio) == 0.0


def test_dict_roundtrip():
    m = UniformModel(np.array([0.0, 1.0]), np.array([2.0, 3.0]))
    back = UniformModel.from_dict(m.to_dict())
    np.testing.assert_array_equal(back.lower, m.lower)
    np.testing.assert_array_equal(back.upper, m.upper)
