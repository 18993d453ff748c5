import numpy as np
import pytest

from spoc.model import edge_probabilities

ACCEPTANCE_LINES = []


def random_connectivity(rng, K, max_cond=50.0):
    """Random symmetric full-rank B in [0, 1] with bounded condition number."""
    while True:
        M = rng.uniform(0.0, 0.3, size=(K, K))
        B = np.triu(M, 1)
        B = B + B.T + np.diag(rng.uniform(0.4, 0.95, size=K))
        sv = np.linalg.svd(B, compute_uv=False)
        if sv[-1] > 0 and sv[0] / sv[-1] <= max_cond:
            return B


def random_instance(rng, n, K, alpha):
    """Identifiable (Theta, B, P): one pure node per community at random positions."""
    Theta = rng.dirichlet(np.full(K, alpha), size=n)
    Theta /= Theta.sum(axis=1, keepdims=True)
    pure_at = rng.choice(n, size=K, replace=False)
    Theta[pure_at] = np.eye(K)
    B = random_connectivity(rng, K)
    return Theta, B, edge_probabilities(Theta, B)


def random_separable(rng, K, n, duplicates=0):
    """``G = F W`` with ``W = (I, M) Pi``; returns ``(G, F, pure_positions)``."""
    while True:
        F = rng.standard_normal((K, K))
        if np.linalg.cond(F) < 20:
            break
    n_mixed = n - K * (1 + duplicates)
    M = rng.dirichlet(np.ones(K), size=n_mixed).T
    W = np.hstack([np.tile(np.eye(K), 1 + duplicates), M])
    perm = rng.permutation(n)
    W = W[:, perm]
    inv = np.argsort(perm)
    pure_positions = inv[: K * (1 + duplicates)].reshape(1 + duplicates, K)
    return F @ W, F, pure_positions


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
