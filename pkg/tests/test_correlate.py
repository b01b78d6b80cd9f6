import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from synthcard.correlate import (AttributeMatrix, CorrelationSpec, complete_to_psd, impose_correlation,
                                 monotone_couple, nearest_psd_correlation, normal_scores)
from synthcard.errors import CalibrationError
from synthcard.rand import PopulationDistribution, derive_stream


def random_pd_correlation(g, k):
    a = g.standard_normal((k, k + 2))
    cov = a @ a.T
    d = np.sqrt(np.diag(cov))
    return cov / d[:, None] / d[None, :]


def test_impose_hits_target_and_keeps_moments():
    g = np.random.default_rng(0)
    x = g.normal([1, 2, 3, 4, 5, 6, 7, 8], [1, 2, 3, 4, 5, 6, 7, 8], size=(10000, 8))
    t = random_pd_correlation(g, 8)
    out = impose_correlation(AttributeMatrix(x, [f"a{i}" for i in range(8)]), t)
    assert np.abs(out.correlation() - t).max() <= 1e-4
    assert np.allclose(out.columns.mean(axis=0), x.mean(axis=0), rtol=1e-6)
    assert np.allclose(out.columns.std(axis=0), x.std(axis=0), rtol=1e-6)


def test_impose_current_correlation_is_identity():
    g = np.random.default_rng(1)
    x = g.standard_normal((500, 3))
    m = AttributeMatrix(x, ["a", "b", "c"])
    out = impose_correlation(m, m.correlation())
    assert np.allclose(out.columns, x, atol=1e-10)


def test_impose_is_idempotent():
    g = np.random.default_rng(2)
    m = AttributeMatrix(g.standard_normal((400, 4)), list("abcd"))
    t = random_pd_correlation(g, 4)
    once = impose_correlation(m, t)
    twice = impose_correlation(once, t)
    assert np.allclose(once.columns, twice.columns, atol=1e-9)


def test_impose_rejects_bad_inputs():
    g = np.random.default_rng(3)
    m = AttributeMatrix(g.standard_normal((50, 2)), ["a", "b"])
    with pytest.raises(ValueError):
        impose_correlation(m, np.array([[1, 2], [2, 1.0]]))  # not PSD
    with pytest.raises(ValueError):
        impose_correlation(m, np.eye(3))
    with pytest.raises(ValueError):
        impose_correlation(AttributeMatrix(np.ones((50, 2)), ["a", "b"]), np.eye(2))
    with pytest.raises(ValueError):
        impose_correlation(AttributeMatrix(g.standard_normal((2, 2)), ["a", "b"]), np.eye(2))


def test_contradictory_triple_repaired_to_psd():
    spec = CorrelationSpec.from_triples("abc", [("a", "b", 0.9), ("b", "c", 0.9), ("a", "c", -0.9)])
    assert np.linalg.eigvalsh(spec.raw_matrix())[0] < 0
    done = complete_to_psd(spec, max_shift=None)
    w = np.linalg.eigvalsh(done.matrix)
    assert w[0] >= -1e-8
    assert np.allclose(np.diag(done.matrix), 1.0)
    assert done.repaired
    assert done.max_deviation > 0.2


def test_contradiction_beyond_limit_raises_with_pair():
    spec = CorrelationSpec.from_triples("abc", [("a", "b", 0.9), ("b", "c", 0.9), ("a", "c", -0.9)])
    with pytest.raises(CalibrationError) as ei:
        complete_to_psd(spec, max_shift=0.2)
    assert ei.value.pair is not None
    assert ei.value.completion.max_deviation > 0.2


def test_consistent_spec_untouched():
    spec = CorrelationSpec.from_triples("abc", [("a", "b", 0.3)])
    done = complete_to_psd(spec)
    assert not done.repaired
    assert done.matrix[0, 1] == 0.3 and done.matrix[0, 2] == 0.0


def test_spec_validation():
    with pytest.raises(ValueError):
        CorrelationSpec.from_triples("ab", [("a", "z", 0.1)])
    with pytest.raises(ValueError):
        CorrelationSpec.from_triples("ab", [("a", "b", 1.5)])
    with pytest.raises(ValueError):
        CorrelationSpec.from_triples("ab", [("a", "b", 0.1), ("b", "a", 0.2)])


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_repair_always_psd_unit_diagonal(rhos):
    spec = CorrelationSpec.from_triples("abc", [("a", "b", rhos[0]), ("b", "c", rhos[1]), ("a", "c", rhos[2])])
    m = complete_to_psd(spec, max_shift=None).matrix
    assert np.linalg.eigvalsh(m)[0] >= -1e-8
    assert np.allclose(np.diag(m), 1.0)
    assert np.allclose(m, m.T)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10**6))
def test_nearest_psd_keeps_pd_matrices(k, seed):
    t = random_pd_correlation(np.random.default_rng(seed), k)
    assert np.allclose(nearest_psd_correlation(t), t)


def test_normal_scores_are_rank_preserving():
    x = np.array([3.0, 1.0, 2.0, 2.0])
    z = normal_scores(x)
    assert np.all(np.argsort(z, kind="stable") == np.argsort(x, kind="stable"))
    assert abs(z.sum()) < 1e-12


@pytest.mark.parametrize("strength", [0.0, 0.3, 0.5, 0.9])
def test_monotone_couple_spearman_matches_copula_formula(strength):
    n = 20000
    driver = np.random.default_rng(5).lognormal(11, 0.6, n)
    s = derive_stream(1, ("mc", int(strength * 10)))
    y = monotone_couple(driver, PopulationDistribution(0.2, 0.08), strength, s, 0.0, 1.0)
    rho = stats.spearmanr(driver, y).statistic
    expected = 6 / math.pi * math.asin(strength / 2)
    assert abs(rho - expected) < 4 / math.sqrt(n)
    assert y.min() >= 0.0 and y.max() <= 1.0


def test_monotone_couple_full_strength_comonotone():
    driver = np.random.default_rng(6).normal(size=500)
    y = monotone_couple(driver, PopulationDistribution(0.0, 1.0), 1.0, derive_stream(1, ("mc1",)))
    assert stats.spearmanr(driver, y).statistic == pytest.approx(1.0)


def test_monotone_couple_rejects_bad_strength():
    with pytest.raises(ValueError):
        monotone_couple(np.zeros(3), PopulationDistribution(0, 1), 1.5, derive_stream(1, ("x",)))
