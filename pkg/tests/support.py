"""Shared fixtures and independent oracles for the test suite.

Oracles here deliberately avoid the package's solver paths: transport is
re-solved with scipy's LP directly, reachability by matrix closure, and
stationary laws by dense eigendecomposition.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog

from otcalign.networks import Network


def random_strongly_connected(rng, n: int, density: float = 0.5, directed: bool = True) -> Network:
    """Random weighted network made strongly connected by a planted cycle."""
    W = np.zeros((n, n))
    if n == 1:
        W[0, 0] = rng.uniform(0.5, 2.0)
        return Network(n=1, weights=W, directed=directed)
    extra = rng.random((n, n)) < density
    W[extra] = rng.uniform(0.5, 2.0, size=int(extra.sum()))
    if not directed:
        W = np.triu(W, k=1)
        W = W + W.T
    perm = rng.permutation(n)
    for i in range(n):
        u, v = perm[i], perm[(i + 1) % n]
        w = rng.uniform(0.5, 2.0)
        W[u, v] = w
        if not directed:
            W[v, u] = w
    return Network(n=n, weights=W, directed=directed)


def random_connected_undirected(rng, n: int, density: float = 0.5) -> Network:
    return random_strongly_connected(rng, n, density=density, directed=False)


def lp_transport_value(mu, nu, cost) -> float:
    """Transport optimum by a direct scipy LP, independent of the package."""
    mu = np.asarray(mu, float)
    nu = np.asarray(nu, float)
    C = np.asarray(cost, float)
    na, nb = C.shape
    A_eq = np.zeros((na + nb, na * nb))
    for i in range(na):
        A_eq[i, i * nb:(i + 1) * nb] = 1.0
    for j in range(nb):
        A_eq[na + j, j::nb] = 1.0
    res = linprog(C.ravel(), A_eq=A_eq, b_eq=np.concatenate([mu, nu]),
                  bounds=(0, None), method="highs")
    assert res.success, res.message
    return float(res.fun)


def reachable_closure(adj: np.ndarray) -> np.ndarray:
    """Boolean reachability matrix by repeated squaring of the adjacency."""
    n = adj.shape[0]
    R = adj.astype(bool) | np.eye(n, dtype=bool)
    for _ in range(n):
        R = R | (R @ R)
    return R


def brute_strongly_connected(net: Network) -> bool:
    R = reachable_closure(net.weights > 0)
    return bool(R.all())


def eig_stationary(P: np.ndarray) -> np.ndarray:
    """Stationary law from the left eigenvector at eigenvalue one."""
    vals, vecs = np.linalg.eig(P.T)
    k = int(np.argmin(np.abs(vals - 1.0)))
    v = np.real(vecs[:, k])
    v = np.abs(v)
    return v / v.sum()


def enumerate_paths_average_cost(lam, R, c, k: int) -> float:
    """Expected k-step average cost by explicit summation over all paths."""
    N = len(lam)
    total = 0.0
    for path in itertools.product(range(N), repeat=k):
        prob = lam[path[0]]
        if prob == 0.0:
            continue
        for a, b in zip(path, path[1:]):
            prob *= R[a, b]
            if prob == 0.0:
                break
        if prob == 0.0:
            continue
        total += prob * sum(c[s] for s in path) / k
    return total


def simulate_average_cost(lam, R, c, steps: int, seed) -> float:
    """Monte Carlo long-run average cost of the coupled chain."""
    rng = np.random.default_rng(seed)
    N = len(lam)
    state = rng.choice(N, p=lam / lam.sum())
    total = 0.0
    cum = np.cumsum(R, axis=1)
    for _ in range(steps):
        total += c[state]
        state = int(np.searchsorted(cum[state], rng.random()))
    return total / steps
