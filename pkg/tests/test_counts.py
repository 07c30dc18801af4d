import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from counts import (
    count_distribution,
    count_moments,
    count_tv_distance,
    poisson_binomial_pmf,
    standardized_count,
)
from errors import OutOfRange
from kernel import complement_kernel
from measure import full_pmf


def test_two_fair_coins():
    np.testing.assert_allclose(poisson_binomial_pmf([0.5, 0.5]).pmf, [0.25, 0.5, 0.25], atol=1e-15)


def test_degenerate_parameters():
    np.testing.assert_array_equal(poisson_binomial_pmf([1.0, 1.0, 0.0]).pmf, [0.0, 0.0, 1.0, 0.0])
    np.testing.assert_array_equal(poisson_binomial_pmf([]).pmf, [1.0])


def test_rejects_invalid_parameters():
    with pytest.raises(OutOfRange):
        poisson_binomial_pmf([0.5, 1.2])
    with pytest.raises(OutOfRange):
        poisson_binomial_pmf([np.nan])


def test_moments():
    pb = poisson_binomial_pmf([0.2, 0.5, 0.9])
    mean, variance = count_moments(pb)
    assert mean == pytest.approx(1.6)
    assert variance == pytest.approx(0.2 * 0.8 + 0.25 + 0.9 * 0.1)
    assert pb.mean == pytest.approx(mean, abs=1e-14)
    assert pb.variance == pytest.approx(variance, abs=1e-14)


def test_count_distribution_of_diagonal(diag_kernel):
    pb = count_distribution(diag_kernel, [0, 1])
    np.testing.assert_allclose(pb.pmf, [0.375, 0.5, 0.125], atol=1e-15)


def test_count_distribution_of_empty_set(diag_kernel):
    np.testing.assert_array_equal(count_distribution(diag_kernel, []).pmf, [1.0])


def test_count_distribution_matches_enumeration(make_kernel):
    K = make_kernel(6)
    E = [0, 2, 3]
    pmf = full_pmf(K)
    expected = np.zeros(len(E) + 1)
    for S, p in pmf.probabilities.items():
        expected[len(set(S).intersection(E))] += p
    assert np.max(np.abs(count_distribution(K, E).pmf - expected)) < 1e-10


def test_standardized_count():
    assert standardized_count(34.0, 64, 32.0) == pytest.approx(2.0 * math.pi / math.sqrt(math.log(64)))
    with pytest.raises(OutOfRange):
        standardized_count(1.0, 1, 0.5)


def test_count_tv_distance():
    pb = poisson_binomial_pmf([0.5, 0.5])
    assert count_tv_distance({0: 25, 1: 50, 2: 25}, pb) == pytest.approx(0.0, abs=1e-15)
    assert count_tv_distance({1: 10}, pb) == pytest.approx(0.5)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(0, 40), elements=st.floats(0.0, 1.0)))
def test_pmf_is_a_distribution(lambdas):
    pb = poisson_binomial_pmf(lambdas)
    assert pb.pmf.shape == (lambdas.shape[0] + 1,)
    assert np.all(pb.pmf >= 0.0)
    assert abs(pb.pmf.sum() - 1.0) < 1e-12
    assert abs(pb.mean - lambdas.sum()) < 1e-9


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.integers(1, 12), elements=st.floats(0.0, 1.0)))
def test_order_does_not_matter(lambdas):
    forward = poisson_binomial_pmf(lambdas).pmf
    backward = poisson_binomial_pmf(lambdas[::-1]).pmf
    assert np.max(np.abs(forward - backward)) < 1e-15


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(1, 40), elements=st.floats(0.0, 1.0)))
def test_extreme_counts_are_products(lambdas):
    pb = poisson_binomial_pmf(lambdas)
    assert abs(pb.pmf[-1] - np.prod(lambdas)) < 1e-12
    assert abs(pb.pmf[0] - np.prod(1.0 - lambdas)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.integers(0, 20), elements=st.floats(0.0, 1.0)))
def test_flipped_parameters_reverse_the_pmf(lambdas):
    forward = poisson_binomial_pmf(lambdas).pmf
    flipped = poisson_binomial_pmf(1.0 - lambdas).pmf
    assert np.max(np.abs(flipped - forward[::-1])) < 1e-12


def test_complement_kernel_reverses_counts(make_kernel):
    K = make_kernel(6)
    C = complement_kernel(K)
    for E in ([0, 1, 2, 3, 4, 5], [0, 2, 3], [4]):
        forward = count_distribution(K, E).pmf
        assert np.max(np.abs(count_distribution(C, E).pmf - forward[::-1])) < 1e-10
