import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from synthbench.marginals import (
    MarginalKde,
    kde_marginal_fit,
    marginal_cdf,
    marginal_quantile,
    normal_reference_bandwidth,
)


def test_bandwidth_rule():
    x = np.array([0.0, 1.0])
    assert normal_reference_bandwidth(x) == pytest.approx(1.06 * np.sqrt(0.5) * 2 ** -0.2)


def test_rejects_degenerate_input():
    with pytest.raises(ValueError):
        kde_marginal_fit([1.0])
    with pytest.raises(ValueError):
        kde_marginal_fit([2.0, 2.0, 2.0])


def test_two_point_symmetry():
    m = kde_marginal_fit([0.0, 1.0])
    assert m.cdf(0.5) == pytest.approx(0.5, abs=1e-15)
    assert marginal_quantile(m, 0.5) == pytest.approx(0.5, abs=1e-12)


def test_normal_sample_against_analytic():
    x = np.random.default_rng(0).standard_normal(10_000)
    m = kde_marginal_fit(x)
    assert abs(m.cdf(0.0) - 0.5) < 0.02
    assert abs(m.pdf(0.0) - 0.39894) / 0.39894 < 0.10


def test_pdf_is_cdf_derivative_and_integrates():
    m = kde_marginal_fit(np.random.default_rng(1).gamma(2.0, size=200))
    total, _ = integrate.quad(lambda t: float(m.pdf(t)), -5, 25, limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)
    t, eps = 1.7, 1e-5
    num = (m.cdf(t + eps) - m.cdf(t - eps)) / (2 * eps)
    assert num == pytest.approx(float(m.pdf(t)), rel=1e-6)
    assert float(m.logpdf(t)) == pytest.approx(np.log(float(m.pdf(t))), abs=1e-12)


def test_quantile_roundtrip():
    rng = np.random.default_rng(2)
    data = rng.normal(size=300)
    m = kde_marginal_fit(data)
    x = rng.uniform(data.min(), data.max(), size=100)
    np.testing.assert_allclose(marginal_quantile(m, marginal_cdf(m, x)), x, atol=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-6, 1 - 1e-6), st.floats(1e-6, 1 - 1e-6))
def test_quantile_monotone(u1, u2):
    m = kde_marginal_fit(np.array([0.0, 0.1, 0.5, 2.0, 2.2, 7.0]))
    if u1 == u2:
        return
    lo, hi = sorted((u1, u2))
    qlo, qhi = marginal_quantile(m, lo), marginal_quantile(m, hi)
    assert qlo <= qhi
    if hi - lo > 1e-9:
        assert qlo < qhi


@pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5])
def test_quantile_rejects_out_of_range(u):
    m = kde_marginal_fit([0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        marginal_quantile(m, u)


def test_cdf_stays_inside_unit_interval():
    m = kde_marginal_fit([0.0, 1.0, 2.0])
    u = marginal_cdf(m, np.array([-1e6, 1e6]))
    assert 0.0 < u[0] and u[1] < 1.0


def test_dict_roundtrip():
    m = MarginalKde(np.array([3.0, 1.0, 2.0]), 0.4)
    back = MarginalKde.from_dict(m.to_dict())
    np.testing.assert_array_equal(back.support_points, [1.0, 2.0, 3.0])
    assert back.bandwidth == m.bandwidth
