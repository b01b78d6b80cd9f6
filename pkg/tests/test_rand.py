import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from synthcard.rand import (IndividualDistribution, PopulationDistribution, derive_stream, individualize,
                            individualize_many, lognormal_params, sample_categorical, sample_lognormal,
                            sample_truncated_gaussian, truncated_gaussian_cdf, truncated_gaussian_ppf)


def test_same_path_same_sequence():
    a = derive_stream(7, ("consumer", 3, "bio")).generator.random(50)
    b = derive_stream(7, ("consumer", 3, "bio")).generator.random(50)
    assert np.array_equal(a, b)


def test_distinct_paths_and_seeds_differ():
    base = derive_stream(7, ("consumer", 3, "bio")).generator.random(20)
    for seed, path in [(8, ("consumer", 3, "bio")), (7, ("consumer", 4, "bio")), (7, ("consumer", 3, "geo")),
                       (7, ("consumer", "3", "bio"))]:
        assert not np.array_equal(base, derive_stream(seed, path).generator.random(20))


def test_streams_are_uncorrelated():
    xs = np.array([derive_stream(1, ("c", i)).generator.random(2000) for i in range(20)])
    c = np.corrcoef(xs)
    off = c[~np.eye(20, dtype=bool)]
    # 4 SE of a null correlation at n = 2000
    assert np.abs(off).max() < 4 / math.sqrt(2000)


def test_empty_path_rejected():
    with pytest.raises(ValueError):
        derive_stream(1, ())


def test_child_extends_path():
    s = derive_stream(5, ("a",))
    assert np.array_equal(s.child("b").generator.random(5), derive_stream(5, ("a", "b")).generator.random(5))


def test_truncated_gaussian_matches_scipy_truncnorm():
    g = derive_stream(2, ("tg",)).generator
    mean, std, lo, hi = 712.0, 60.0, 300.0, 850.0
    x = sample_truncated_gaussian(g, mean, std, lo, hi, size=20000)
    ref = stats.truncnorm((lo - mean) / std, (hi - mean) / std, loc=mean, scale=std)
    assert stats.kstest(x, ref.cdf).pvalue > 1e-3
    assert abs(x.mean() - ref.mean()) < 4 * ref.std() / math.sqrt(len(x))


def test_truncated_gaussian_one_sided():
    g = derive_stream(2, ("tg1",)).generator
    x = sample_truncated_gaussian(g, 0.0, 1.0, 0.5, math.inf, size=20000)
    ref = stats.truncnorm(0.5, np.inf)
    assert x.min() >= 0.5
    assert stats.kstest(x, ref.cdf).pvalue > 1e-3


def test_truncated_cdf_and_ppf_agree_with_scipy():
    mean, std, lo, hi = 3.0, 2.0, 0.0, 10.0
    ref = stats.truncnorm((lo - mean) / std, (hi - mean) / std, loc=mean, scale=std)
    xs = np.linspace(0.1, 9.9, 25)
    assert np.allclose(truncated_gaussian_cdf(xs, mean, std, lo, hi), ref.cdf(xs), atol=1e-12)
    us = np.linspace(0.01, 0.99, 25)
    assert np.allclose(truncated_gaussian_ppf(us, mean, std, lo, hi), ref.ppf(us), atol=1e-9)


def test_far_tail_interval_is_clamped_not_looping():
    g = derive_stream(2, ("tail",)).generator
    x = sample_truncated_gaussian(g, 0.0, 1.0, 40.0, 41.0, size=10)
    assert np.all((x >= 40.0) & (x <= 41.0))


def test_zero_std_returns_mean():
    assert sample_truncated_gaussian(derive_stream(1, ("z",)), 5.0, 0.0, 0.0, 10.0) == 5.0


def test_invalid_arguments():
    with pytest.raises(ValueError):
        sample_truncated_gaussian(derive_stream(1, ("z",)), 0.0, 1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        PopulationDistribution(1.0, -1.0)
    with pytest.raises(ValueError):
        PopulationDistribution(1.0, 1.0, 1.5)
    with pytest.raises(ValueError):
        IndividualDistribution(1.0, -0.1)
    with pytest.raises(ValueError):
        lognormal_params(0.0, 1.0)


def test_lognormal_params_reproduce_moments():
    mu, sigma = lognormal_params(72000.0, 55000.0)
    ref = stats.lognorm(s=sigma, scale=math.exp(mu))
    assert ref.mean() == pytest.approx(72000.0, rel=1e-12)
    assert ref.std() == pytest.approx(55000.0, rel=1e-12)
    x = sample_lognormal(derive_stream(3, ("ln",)), 72000.0, 55000.0, size=200000)
    assert abs(x.mean() - 72000.0) < 4 * 55000.0 / math.sqrt(len(x))


def test_individualize_splits_variance():
    pop = PopulationDistribution(100.0, 20.0, 0.25)
    d = individualize(pop, derive_stream(1, ("ind",)))
    assert d.indiv_std == pytest.approx(20.0 * math.sqrt(0.75))


def test_individualize_extremes():
    s = derive_stream(1, ("ind",))
    assert individualize(PopulationDistribution(10.0, 3.0, 0.0), s) == IndividualDistribution(10.0, 3.0)
    d = individualize(PopulationDistribution(10.0, 3.0, 1.0), s)
    assert d.indiv_std == 0.0


def test_variance_decomposition_monte_carlo():
    """Pooled variance equals the population variance; personal means carry spread_fraction of it."""
    pop = PopulationDistribution(50.0, 10.0, 0.5)
    g = derive_stream(4, ("vd",)).generator
    n_ind, n_ev = 3000, 20
    means, within = individualize_many(pop, g, n_ind)
    events = means[:, None] + within * g.standard_normal((n_ind, n_ev))
    sigma2 = pop.std_dev ** 2
    pooled = events.var(ddof=1)
    # Events share personal means, so the effective sample size is set by individuals.
    se_pooled = sigma2 * math.sqrt(2.0 / (n_ind - 1))
    assert abs(pooled - sigma2) < 3 * se_pooled
    between = means.var(ddof=1)
    target_between = pop.spread_fraction * sigma2
    assert abs(between - target_between) < 3 * target_between * math.sqrt(2.0 / (n_ind - 1))


@settings(max_examples=60, deadline=None)
@given(mean=st.floats(-100, 100), std=st.floats(0.01, 50), lo=st.floats(-200, 150), width=st.floats(0.01, 100),
       seed=st.integers(0, 2**32))
def test_truncated_draws_always_in_bounds(mean, std, lo, width, seed):
    hi = lo + width
    x = sample_truncated_gaussian(derive_stream(seed, ("p",)), mean, std, lo, hi, size=50)
    assert np.all((x >= lo) & (x <= hi))


@settings(max_examples=60, deadline=None)
@given(w=st.lists(st.floats(0, 10), min_size=1, max_size=12), seed=st.integers(0, 2**32))
def test_categorical_never_picks_zero_weight(w, seed):
    w = np.array(w)
    if w.sum() <= 0:
        with pytest.raises(ValueError):
            sample_categorical(derive_stream(seed, ("c",)).generator, w, 10)
        return
    idx = sample_categorical(derive_stream(seed, ("c",)).generator, w, 200)
    assert idx.min() >= 0 and idx.max() < len(w)
    assert np.all(w[idx] > 0)
