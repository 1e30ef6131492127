import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthbench.detectors import HIGHER_IS_OUTLIER, LOWER_IS_OUTLIER
from synthbench.ideal import ideal_scores
from synthbench.metrics import auc_pr_adjusted
from synthbench.uniform import UniformModel, uniform_gen, uniform_logdens, uniform_modify_expand


def test_hand_example():
    ideal = ideal_scores([math.log(1.0)], [math.log(2.0)], 0.05)
    assert math.exp(ideal.rd.scores[0]) == pytest.approx(1.0)
    assert math.exp(ideal.od.scores[0]) == pytest.approx(1.05)
    assert math.exp(ideal.c.scores[0]) == pytest.approx(0.10526, abs=1e-5)
    assert ideal.rd.orientation == LOWER_IS_OUTLIER
    assert ideal.od.orientation == LOWER_IS_OUTLIER
    assert ideal.c.orientation == HIGHER_IS_OUTLIER


def test_equal_densities_give_constant_ratio():
    lr = np.random.default_rng(0).normal(size=20)
    ideal = ideal_scores(lr, lr, 0.1)
    np.testing.assert_allclose(ideal.c.scores, math.log(0.1 / 0.9), atol=1e-12)


def test_outside_regular_support_is_certain_outlier():
    ideal = ideal_scores([-np.inf, 0.0], [0.5, 0.5], 0.05)
    assert ideal.c.scores[0] == np.inf
    assert ideal.c.scores.argmax() == 0
    assert np.isfinite(ideal.od.scores[0])


def test_outside_both_supports():
    ideal = ideal_scores([-np.inf], [-np.inf], 0.05)
    assert ideal.c.scores[0] == np.inf
    assert ideal.od.scores[0] == -np.inf


@pytest.mark.parametrize("xi", [0.0, 1.0, -0.1])
def test_xi_range(xi):
    with pytest.raises(ValueError):
        ideal_scores([0.0], [0.0], xi)


def test_length_mismatch():
    with pytest.raises(ValueError):
        ideal_scores([0.0, 1.0], [0.0], 0.05)


@settings(max_examples=100, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(0.001, 0.999))
def test_ratio_sign_flips_at_break_even(lr, lo, xi):
    ideal = ideal_scores([lr], [lo], xi)
    c = ideal.c.scores[0]
    margin = math.log(xi) + lo - (math.log1p(-xi) + lr)
    assert c == pytest.approx(margin, abs=1e-9)
    if abs(margin) > 1e-9:
        assert (c > 0) == (margin > 0)
    # mixture density bounded below by each weighted component
    assert ideal.od.scores[0] >= max(math.log(xi) + lo, math.log1p(-xi) + lr) - 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(-20, 20), st.floats(0.01, 0.5))
def test_rd_od_agree_when_outlier_density_constant(lr1, lr2, lo, xi):
    ideal = ideal_scores([lr1, lr2], [lo, lo], xi)
    rd, od = ideal.rd.scores, ideal.od.scores
    # od is non-decreasing in rd; a dominant outlier term may collapse it to a tie
    assert (rd[0] - rd[1]) * (od[0] - od[1]) >= 0


def test_nested_uniform_boxes_give_identical_rankings():
    reg = UniformModel(np.zeros(2), np.ones(2))
    out = uniform_modify_expand(reg)
    X = np.vstack([uniform_gen(reg, 190, 0), uniform_gen(out, 10, 1)])
    y = np.r_[np.zeros(190, bool), np.ones(10, bool)]
    ideal = ideal_scores(uniform_logdens(reg, X), uniform_logdens(out, X), 0.05)
    values = [auc_pr_adjusted(sv, y).auc_pr_adjusted for sv in (ideal.rd, ideal.od, ideal.c)]
    assert max(values) - min(values) <= 1e-9
