import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize, stats

from stochsir.boundary import (
    StationaryDensity,
    binned_mass,
    density_at,
    quad_cdf,
    quad_mean,
    quad_total_mass,
    sample,
    stationary_cdf,
    stationary_mean,
    stationary_quantile,
    stationary_sf,
)
from stochsir.errors import DomainError
from stochsir.params import EXAMPLE_1, EXAMPLE_2, EXAMPLE_3, SirParams
from stochsir.rng import RngStream

ALL = [EXAMPLE_1, EXAMPLE_2, EXAMPLE_3]


@st.composite
def densities(draw):
    p = SirParams(draw(st.floats(0.1, 50)), 1.0, draw(st.floats(0.05, 5)), 0, 0,
                  draw(st.floats(0.1, 3)), 1.0)
    return StationaryDensity.from_params(p)


def test_example1_shape_and_scale():
    d = StationaryDensity.from_params(EXAMPLE_1)
    assert (d.a, d.b) == (3.0, 40.0)
    assert d.mode == 10.0


def test_mode_by_grid_search():
    d = StationaryDensity.from_params(EXAMPLE_1)
    x = np.linspace(0.01, 100, 10_000)
    assert x[np.argmax(density_at(d, x))] == pytest.approx(10.0, abs=0.011)


def test_density_vanishes_at_zero_and_rejects_nonpositive():
    d = StationaryDensity.from_params(EXAMPLE_1)
    assert density_at(d, 1e-3) == 0.0
    with pytest.raises(DomainError):
        density_at(d, 0.0)
    with pytest.raises(DomainError):
        stationary_cdf(d, -1.0)


@pytest.mark.parametrize("params", ALL)
def test_quadrature_mass_and_mean(params):
    d = StationaryDensity.from_params(params)
    mass, _ = quad_total_mass(d)
    mean, _ = quad_mean(d)
    assert mass == pytest.approx(1.0, abs=1e-8)
    assert mean == pytest.approx(stationary_mean(d), abs=1e-8)
    assert stationary_mean(d) == pytest.approx(params.alpha / params.mu, rel=1e-14)


def test_means_of_examples():
    assert stationary_mean(StationaryDensity.from_params(EXAMPLE_1)) == pytest.approx(20.0)
    assert stationary_mean(StationaryDensity.from_params(EXAMPLE_3)) == pytest.approx(1.25)


@given(densities(), st.floats(0.02, 0.98))
def test_cdf_against_scipy_invgamma(d, q):
    x = float(stationary_quantile(d, q))
    assert stationary_cdf(d, x) == pytest.approx(q, abs=1e-10)
    assert stationary_cdf(d, x) == pytest.approx(stats.invgamma.cdf(x, d.a, scale=d.b), abs=1e-10)
    assert density_at(d, x) == pytest.approx(stats.invgamma.pdf(x, d.a, scale=d.b), rel=1e-9)
    assert stationary_cdf(d, x) + stationary_sf(d, x) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("params", ALL)
def test_cdf_against_quadrature(params):
    d = StationaryDensity.from_params(params)
    for x in stationary_quantile(d, np.array([0.01, 0.2, 0.5, 0.9, 0.999])):
        assert stationary_cdf(d, x) == pytest.approx(quad_cdf(d, x)[0], abs=1e-7)


def test_median_by_bisection():
    d = StationaryDensity.from_params(EXAMPLE_1)
    med = optimize.bisect(lambda x: stationary_cdf(d, x) - 0.5, 1e-3, 1e4, xtol=1e-14)
    assert stationary_cdf(d, med) == pytest.approx(0.5, abs=1e-9)
    assert stationary_cdf(d, 1e12) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("params", ALL)
def test_density_is_cdf_derivative(params):
    d = StationaryDensity.from_params(params)
    x = np.geomspace(d.b / 100, 100 * d.b, 400)
    h = 1e-5 * x
    med = stationary_quantile(d, 0.5)
    lower = (stationary_cdf(d, x + h) - stationary_cdf(d, x - h)) / (2 * h)
    upper = -(stationary_sf(d, x + h) - stationary_sf(d, x - h)) / (2 * h)
    fd = np.where(x < med, lower, upper)
    np.testing.assert_allclose(fd, density_at(d, x), rtol=1e-5)


def test_sampler_mean_ks_positivity():
    d = StationaryDensity.from_params(EXAMPLE_1)
    n = 100_000
    xs = sample(d, RngStream(20240), n)
    assert np.all(xs > 0)
    # a = 3: variance is finite, so the CLT band applies
    se = xs.std(ddof=1) / math.sqrt(n)
    assert abs(xs.mean() - 20.0) < 3 * se
    ks = stats.kstest(xs, lambda x: stationary_cdf(d, x)).statistic
    assert ks < 1.36 / math.sqrt(n)


def test_sampler_reproducible():
    d = StationaryDensity.from_params(EXAMPLE_2)
    np.testing.assert_array_equal(sample(d, RngStream(5, 2), 100), sample(d, RngStream(5, 2), 100))
    with pytest.raises(ValueError):
        sample(d, RngStream(5), 0)


def test_binned_mass_absorbs_tails():
    d = StationaryDensity.from_params(EXAMPLE_3)
    edges = np.linspace(0.1, 3.0, 11)
    m = binned_mass(d, edges)
    assert m.sum() == pytest.approx(1.0, abs=1e-14)
    assert m[0] == pytest.approx(stationary_cdf(d, edges[1]))
    assert m[-1] == pytest.approx(1 - stationary_cdf(d, edges[-2]))
