import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spoc.exceptions import DimensionError
from spoc.model import (
    SimulationConfig,
    check_identifiability,
    edge_probabilities,
    sample_adjacency,
    sample_membership,
    simulate,
    trial_seed,
)
from spoc.validation import check_membership


def test_identifiability_default_example():
    Theta = np.vstack([np.eye(3), np.full((1, 3), 1 / 3)])
    rep = check_identifiability(Theta, np.diag([0.3, 0.5, 0.7]))
    assert rep == (True, True, True)
    assert rep.identifiable


def test_identifiability_missing_pure_node():
    Theta = np.array([[1.0, 0.0], [0.5, 0.5], [0.2, 0.8]])
    rep = check_identifiability(Theta, np.diag([0.3, 0.5]))
    assert not rep.has_pure_node_per_community
    assert rep.B_full_rank


def test_identifiability_rank_deficient_B():
    rep = check_identifiability(np.eye(2), np.full((2, 2), 0.5))
    assert not rep.B_full_rank


def test_identifiability_unnormalized_rows():
    rep = check_identifiability(np.array([[1.0, 0.0], [0.0, 1.0], [0.3, 0.3]]), np.eye(2) * 0.5)
    assert not rep.rows_normalized


def test_identifiability_dimension_mismatch():
    with pytest.raises(DimensionError):
        check_identifiability(np.eye(3), np.eye(2))


def test_sample_membership_default_layout():
    cfg = SimulationConfig(n=1000, K=3, dirichlet_alpha=0.5, pure_per_community=1, seed=5)
    Theta = sample_membership(cfg)
    assert Theta.shape == (1000, 3)
    np.testing.assert_array_equal(Theta[:3], np.eye(3))
    check_membership(Theta)
    # Dirichlet(0.5) rows are almost surely not pure
    assert not np.any(Theta[3:].max(axis=1) == 1.0)


def test_sample_membership_pure_ordering():
    Theta = sample_membership(SimulationConfig(n=10, K=2, dirichlet_alpha=1.0, B=np.eye(2) * 0.5, pure_per_community=3))
    np.testing.assert_array_equal(Theta[:6], np.repeat(np.eye(2), 3, axis=0))


def test_sample_membership_all_pure():
    Theta = sample_membership(SimulationConfig(n=4, K=4, dirichlet_alpha=2.0, B=np.eye(4) * 0.5, pure_per_community=1))
    np.testing.assert_array_equal(Theta, np.eye(4))


def test_sample_membership_deterministic():
    cfg = SimulationConfig(n=200, seed=99)
    np.testing.assert_array_equal(sample_membership(cfg), sample_membership(cfg))
    assert not np.array_equal(sample_membership(cfg), sample_membership(SimulationConfig(n=200, seed=100)))


def test_sample_membership_too_many_pure():
    with pytest.raises(ValueError):
        sample_membership(SimulationConfig(n=5, K=3, pure_per_community=2))


def test_sampler_hook():
    def uniform_pairs(rng, size, K):
        x = rng.random(size)
        return np.column_stack([x, 1 - x])

    Theta = sample_membership(SimulationConfig(n=20, K=2, B=np.eye(2) * 0.4, sampler=uniform_pairs, seed=3))
    check_membership(Theta)


def test_config_validation():
    with pytest.raises(ValueError):
        SimulationConfig(n=2, K=3)
    with pytest.raises(ValueError):
        SimulationConfig(dirichlet_alpha=(0.5, -1.0, 0.5))
    with pytest.raises(DimensionError):
        SimulationConfig(K=4)


def test_edge_probabilities_identity():
    B = np.array([[0.8, 0.1], [0.1, 0.6]])
    np.testing.assert_allclose(edge_probabilities(np.eye(2), B), B)


def test_edge_probabilities_mixed_entry():
    Theta = np.array([[1, 0], [0, 1], [0.5, 0.5]])
    B = np.array([[0.8, 0.1], [0.1, 0.6]])
    P = edge_probabilities(Theta, B)
    # 0.25*0.8 + 2*0.25*0.1 + 0.25*0.6
    assert P[2, 2] == pytest.approx(0.4, abs=1e-15)
    assert P[0, 2] == pytest.approx(0.5 * 0.8 + 0.5 * 0.1)


def test_edge_probabilities_max_equals_max_B():
    cfg = SimulationConfig(n=300, B=np.array([[0.3, 0.6, 0.1], [0.6, 0.5, 0.2], [0.1, 0.2, 0.7]]), seed=4)
    Theta = sample_membership(cfg)
    P = edge_probabilities(Theta, cfg.B_array)
    assert P.max() == cfg.B_array.max()


def test_edge_probabilities_dimension_mismatch():
    with pytest.raises(DimensionError):
        edge_probabilities(np.eye(3), np.eye(2) * 0.5)


@settings(max_examples=40, deadline=None)
@given(
    K=st.integers(1, 5),
    n_extra=st.integers(0, 60),
    alpha=st.floats(0.1, 5.0),
    seed=st.integers(0, 2**32),
)
def test_edge_probability_invariants(K, n_extra, alpha, seed):
    rng = np.random.default_rng(seed)
    B = rng.random((K, K))
    B = (B + B.T) / 2
    cfg = SimulationConfig(n=K + n_extra, K=K, dirichlet_alpha=alpha, B=B, seed=seed)
    Theta = sample_membership(cfg)
    P = edge_probabilities(Theta, B)
    assert np.array_equal(P, P.T)
    assert P.min() >= 0 and P.max() <= 1
    sv = np.linalg.svd(P, compute_uv=False)
    assert np.all(sv[K:] <= 1e-10 * sv[0])
    # pure rows exist for every community, so the max is attained exactly
    assert P.max() == B.max()


def test_membership_invariants_many_configs():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        K = int(rng.integers(1, 6))
        n = int(rng.integers(K, 40))
        alpha = rng.uniform(0.05, 5.0, size=K)
        cfg = SimulationConfig(n=n, K=K, dirichlet_alpha=tuple(alpha), B=np.eye(K) * 0.5, seed=int(rng.integers(2**63)))
        Theta = sample_membership(cfg)
        assert Theta.min() >= 0 and Theta.max() <= 1
        assert np.abs(Theta.sum(axis=1) - 1).max() <= 1e-12


def test_sample_adjacency_extremes():
    A0 = sample_adjacency(np.zeros((30, 30)), 1)
    assert not A0.any()
    A1 = sample_adjacency(np.ones((30, 30)), 1)
    np.testing.assert_array_equal(A1, np.ones((30, 30)) - np.eye(30))


def test_sample_adjacency_density_within_three_sigma():
    n, p = 2000, 0.3
    A = sample_adjacency(np.full((n, n), p), 12345)
    pairs = n * (n - 1) / 2
    density = np.triu(A, 1).sum() / pairs
    sigma = np.sqrt(p * (1 - p) / pairs)
    assert abs(density - p) <= 3 * sigma


def test_sample_adjacency_structure_and_determinism():
    P = edge_probabilities(sample_membership(SimulationConfig(n=100, seed=2)), np.diag([0.3, 0.5, 0.7]))
    A = sample_adjacency(P, 7)
    assert np.array_equal(A, A.T)
    assert np.all(np.diag(A) == 0)
    assert set(np.unique(A)) <= {0.0, 1.0}
    np.testing.assert_array_equal(A, sample_adjacency(P, 7))


def test_trial_seed_is_xor():
    assert trial_seed(10, 3) == 10 ^ 3
    assert len({trial_seed(12345, t) for t in range(10)}) == 10


def test_simulate_returns_consistent_tuple():
    Theta, B, P, A = simulate(SimulationConfig(n=50, seed=1))
    np.testing.assert_allclose(P, edge_probabilities(Theta, B))
    assert A.shape == (50, 50)


def test_singular_value_band_is_stable():
    # Band recorded from 20 seeds per n for Dirichlet(0.5) rows plus one pure
    # node per community: lambda_K^2/n in [0.110, 0.136], lambda_max^2/n ~ 1/3.
    for n in (500, 1000, 2000):
        vals = []
        for s in range(20):
            sv = np.linalg.svd(sample_membership(SimulationConfig(n=n, seed=s)), compute_uv=False)
            vals.append((sv[-1] ** 2 / n, sv[0] ** 2 / n))
        vals = np.array(vals)
        assert 0.10 <= vals[:, 0].min() and vals[:, 0].max() <= 0.14
        assert 0.33 <= vals[:, 1].min() and vals[:, 1].max() <= 0.34
        assert vals[:, 0].std() / vals[:, 0].mean() < 0.2
