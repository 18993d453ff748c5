import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import spearmanr

from conftest import random_instance
from spoc.exceptions import DimensionError
from spoc.metrics import (
    beta,
    beta_row,
    beta_rows,
    compute_diagnostics,
    concentration_check,
    membership_singular_values,
    population_spectrum,
    relative_frobenius_error,
    spearman_quality,
    spearman_scores,
    theorem2_check,
    theorem2_rate,
)
from spoc.model import SimulationConfig, simulate


def test_relative_error_example():
    X = np.array([[1.0, 0.0], [0.0, 2.0]])
    Y = np.array([[1.0, 1.0], [0.0, 2.0]])
    assert relative_frobenius_error(Y, X) == pytest.approx(1 / np.sqrt(5), rel=1e-15)
    assert relative_frobenius_error(X, X) == 0.0
    with pytest.raises(ValueError):
        relative_frobenius_error(X, np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        relative_frobenius_error(X, np.ones((3, 2)))


def test_population_spectrum_constant_matrix():
    U, lam, kappa = population_spectrum(np.full((5, 5), 0.2), 1)
    assert lam == pytest.approx(1.0) and kappa == pytest.approx(1.0)
    np.testing.assert_allclose(np.abs(U[:, 0]), np.full(5, 1 / np.sqrt(5)))


def test_beta_zero_without_noise(rng):
    for _ in range(10):
        Theta, B, P = random_instance(rng, 80, 3, 0.5)
        U = population_spectrum(P, 3).U
        assert beta(P, P, U) == 0.0


def test_beta_single_perturbation_hand_oracle():
    # P = 0.5 J on 4 nodes: lambda_1 = 2, kappa = 1, U = 1/2. E perturbs (0, 1) by 0.5.
    P = np.full((4, 4), 0.5)
    A = P.copy()
    A[0, 1] = A[1, 0] = 1.0
    U = np.full((4, 1), 0.5)
    rows = beta_rows(A, P, U)
    row0 = 23 * np.sqrt(1.75) * 0.5 / 4 + 0.25 / 2
    row2 = 23 * 1.0 * 0.5 / 4
    np.testing.assert_allclose(rows, [row0, row0, row2, row2], rtol=1e-6)
    assert beta_row(A, P, U, 2) == pytest.approx(row2, rel=1e-6)


def test_beta_nonnegative_and_monotone_in_noise_scale(rng):
    Theta, B, P = random_instance(rng, 60, 2, 1.0)
    U = population_spectrum(P, 2).U
    E = rng.random(P.shape)
    E = np.triu(E, 1) + np.triu(E, 1).T
    vals = [beta(P + t * E, P, U) for t in (0.0, 0.01, 0.1, 0.5, 1.0)]
    assert vals[0] == 0.0
    assert all(v >= 0 for v in vals)
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_beta_shape_checks():
    with pytest.raises(DimensionError):
        beta_rows(np.zeros((3, 3)), np.zeros((4, 4)), np.zeros((4, 1)))


def test_membership_singular_values():
    lo, hi = membership_singular_values(np.diag([3.0, 1.0]))
    assert (lo, hi) == (1.0, 3.0)


def test_theorem2_rate_and_ratio():
    rate = theorem2_rate(1000, 3, 0.7)
    assert rate == pytest.approx(3 * np.sqrt(np.log(1000) / (0.49 * 1000)))
    assert tuple(theorem2_check(rate, rate, 2 * rate)) == pytest.approx((1.0, 2.0))


def test_concentration_single_edge():
    n = 10
    A = np.zeros((n, n))
    A[2, 7] = A[7, 2] = 1.0
    rep = concentration_check(A, np.zeros((n, n)))
    assert rep.lhs == pytest.approx(1.0, rel=1e-6)
    assert rep.rhs_scale == pytest.approx(np.sqrt(np.log(n)))
    assert rep.ratio == pytest.approx(1 / np.sqrt(np.log(n)), rel=1e-6)


def test_diagnostics_on_noiseless_input():
    Theta, B, P, _ = simulate(SimulationConfig(n=200, seed=0))
    diag = compute_diagnostics(P, P, Theta, B)
    assert diag.spec_norm_gap == 0.0 and diag.beta == 0.0
    assert diag.lambda_K_P > 0 and diag.kappa_P >= 1
    assert diag.theorem2_rhs == pytest.approx(theorem2_rate(200, 3, 0.7))


def test_spearman_examples():
    Theta = np.array([[0.1, 0.9], [0.5, 0.5], [0.8, 0.2], [0.3, 0.7]])
    assert spearman_quality(Theta, Theta) == pytest.approx(1.0)
    assert spearman_quality(1 - Theta, Theta) == pytest.approx(-1.0)


def test_spearman_hand_oracle_with_ties():
    # ranks (1, 2.5, 2.5, 4) against (1, 3, 2, 4) give 4.5 / sqrt(4.5 * 5)
    truth = np.array([[1.0], [2.0], [2.0], [3.0]])
    est = np.array([[0.1], [0.4], [0.3], [0.9]])
    scores, undefined = spearman_scores(est, truth)
    assert scores[0] == pytest.approx(3 / np.sqrt(10), rel=1e-14)
    assert not undefined.any()


def test_spearman_permutation_applied():
    Theta = np.array([[0.1, 0.9], [0.6, 0.4], [0.8, 0.2]])
    assert spearman_quality(Theta[:, ::-1], Theta, perm=[1, 0]) == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_spearman_matches_scipy_and_is_rank_invariant(seed):
    rng = np.random.default_rng(seed)
    Theta = rng.dirichlet(np.ones(3), size=12)
    est = np.round(Theta + 0.2 * rng.standard_normal(Theta.shape), 1)  # rounding creates ties
    scores, undefined = spearman_scores(est, Theta)
    for k in range(3):
        if not undefined[k]:
            assert scores[k] == pytest.approx(spearmanr(est[:, k], Theta[:, k]).statistic, abs=1e-12)
    transformed, _ = spearman_scores(np.exp(3 * est) + 1, Theta)
    np.testing.assert_allclose(transformed, scores, atol=1e-12)


def test_spearman_constant_column_warns():
    Theta = np.array([[0.2, 0.8], [0.5, 0.5], [0.9, 0.1]])
    est = Theta.copy()
    est[:, 1] = 0.3
    with pytest.warns(RuntimeWarning, match="constant"):
        q = spearman_quality(est, Theta)
    assert q == pytest.approx(0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        spearman_quality(Theta, Theta)
