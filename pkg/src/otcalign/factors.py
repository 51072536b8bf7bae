"""Factor maps between networks and the couplings they induce.

A surjection f collapses a network onto a smaller one when, for every vertex
u and every target vertex v', the total weight u sends into the fiber of v'
is proportional to the target's edge weight, with the ratio d1(u)/d2(f(u)).
Equivalently P F = F Q for the fiber indicator matrix F. Such maps induce
deterministic transition couplings, and two factor maps onto one common
target induce a relatively independent coupling supported on matched fibers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .costs import as_cost_matrix
from .errors import (
    CommonFactorMismatch,
    GenerationFailed,
    NotAFactor,
    NotSurjective,
)
from .networks import (
    Network,
    is_strongly_connected,
    stationary_matrix,
    transition_kernel,
)
from .solver import TransitionCoupling

FACTOR_REL_TOL = 1e-9


@dataclass
class FactorMap:
    """Total surjective vertex map from a source network onto a target."""

    mapping: np.ndarray
    source: Network
    target: Network

    def __post_init__(self):
        f = np.asarray(self.mapping, dtype=int)
        if f.shape != (self.source.n,):
            raise NotSurjective("mapping must assign every source vertex")
        if (f < 0).any() or (f >= self.target.n).any():
            raise NotSurjective("mapping leaves the target vertex range")
        if len(np.unique(f)) != self.target.n:
            raise NotSurjective("mapping must cover every target vertex")
        f = np.ascontiguousarray(f)
        f.setflags(write=False)
        self.mapping = f

    @property
    def indicator(self) -> np.ndarray:
        """0/1 matrix F with F[u, v] = 1 iff the map sends u to v."""
        F = np.zeros((self.source.n, self.target.n))
        F[np.arange(self.source.n), self.mapping] = 1.0
        return F

    def fiber(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.mapping == v)


@dataclass
class FactorCheck:
    exact: bool
    max_violation: float
    kernel_violation: float


def verify_factor(g1: Network, g2: Network, f: FactorMap, tol: float = FACTOR_REL_TOL) -> FactorCheck:
    """Check the fiber-weight identity and its matrix form P F = F Q.

    max_violation is the worst absolute deviation of fiber-aggregated weights
    from their required values; kernel_violation is the worst entry of
    P F - F Q. The verdict requires both, at a tolerance relative to the
    largest required value.
    """
    F = f.indicator
    d1 = g1.out_degrees()
    d2 = g2.out_degrees()
    fiber_sums = g1.weights @ F
    required = (d1 / d2[f.mapping])[:, None] * g2.weights[f.mapping, :]
    weight_violation = float(np.abs(fiber_sums - required).max())
    P = transition_kernel(g1).matrix
    Q = transition_kernel(g2).matrix
    kernel_violation = float(np.abs(P @ F - F @ Q).max())
    scale = max(1.0, float(required.max()))
    exact = weight_violation <= tol * scale and kernel_violation <= max(tol, 1e-10)
    return FactorCheck(
        exact=bool(exact),
        max_violation=weight_violation,
        kernel_violation=kernel_violation,
    )


def factor_coupling(g1: Network, g2: Network, f: FactorMap) -> TransitionCoupling:
    """Deterministic transition coupling (walk, image of the walk).

    On-fiber states move together: the source walk steps and the target
    coordinate follows through the map. Off-fiber states get independent
    rows. The stationary law sits on the graph of the map with the source
    walk's stationary weights.
    """
    if not verify_factor(g1, g2, f).exact:
        raise NotAFactor("the supplied map does not satisfy the factor identity")
    P = transition_kernel(g1).matrix
    Q = transition_kernel(g2).matrix
    n, m = g1.n, g2.n
    R = np.kron(P, Q)
    for u in range(n):
        v = int(f.mapping[u])
        row = np.zeros((n, m))
        row[np.arange(n), f.mapping] = P[u]
        R[u * m + v] = row.ravel()
    p = stationary_matrix(P)
    lam = np.zeros(n * m)
    lam[np.arange(n) * m + f.mapping] = p
    return TransitionCoupling(kernel=R, stationary=lam, shape=(n, m))


def check_cost_compatible(cost, f: FactorMap) -> bool:
    """True iff every row of the cost attains its minimum at the mapped vertex."""
    cm = as_cost_matrix(cost)
    vals = cm.values
    mapped = vals[np.arange(vals.shape[0]), f.mapping]
    return bool((mapped <= vals.min(axis=1) + 1e-12).all())


def relatively_independent_coupling(
    g1: Network, g2: Network, g3: Network, f: FactorMap, g: FactorMap
) -> TransitionCoupling:
    """Coupling of two walks that agree on a common factor.

    Both source chains are coupled so that their images under the two maps
    coincide almost surely; conditionally on the common-factor move the two
    chains step independently. Requires f: g1 -> g3 and g: g2 -> g3 to be
    exact factor maps onto the same network.
    """
    if f.target is not g3 and f.target.n != g3.n:
        raise CommonFactorMismatch("first map does not target the common factor")
    if g.target is not g3 and g.target.n != g3.n:
        raise CommonFactorMismatch("second map does not target the common factor")
    if not verify_factor(g1, g3, f).exact:
        raise NotAFactor("first map fails the factor identity")
    if not verify_factor(g2, g3, g).exact:
        raise NotAFactor("second map fails the factor identity")
    P = transition_kernel(g1).matrix
    Q = transition_kernel(g2).matrix
    O = transition_kernel(g3).matrix
    n, m, w = g1.n, g2.n, g3.n
    p = stationary_matrix(P)
    q = stationary_matrix(Q)
    z = stationary_matrix(O)
    fiber_match = f.mapping[:, None] == g.mapping[None, :]
    lam = np.where(fiber_match, np.outer(p, q) / z[f.mapping][:, None], 0.0)
    lam = lam.ravel()
    R = np.kron(P, Q)
    for u in range(n):
        wu = int(f.mapping[u])
        for v in np.flatnonzero(fiber_match[u]):
            row = np.outer(P[u], Q[v])
            denom = O[wu, f.mapping][:, None] * np.ones((1, m))
            scaled = np.where(
                fiber_match & (denom > 0), row / np.where(denom > 0, denom, 1.0), 0.0
            )
            R[u * m + v] = scaled.ravel()
    return TransitionCoupling(kernel=R, stationary=lam, shape=(n, m))


def _mean_zero_project(theta: np.ndarray, row_w: np.ndarray, col_s: np.ndarray) -> np.ndarray:
    """Exact projection of a fluctuation block onto the subspace with
    row_w-weighted zero row sums and col_s-weighted zero column sums."""
    mm, bb = theta.shape
    cons = []
    for i in range(mm):
        block = np.zeros((mm, bb))
        block[i, :] = row_w
        cons.append(block.ravel())
    for j in range(bb):
        block = np.zeros((mm, bb))
        block[:, j] = col_s
        cons.append(block.ravel())
    A = np.array(cons)
    x = theta.ravel()
    pinv = np.linalg.pinv(A @ A.T)
    return (x - A.T @ (pinv @ (A @ x))).reshape(mm, bb)


def _ipf(init: np.ndarray, rows: np.ndarray, cols: np.ndarray, iters: int = 2000) -> np.ndarray:
    """Iterative proportional fitting of a positive matrix to given margins."""
    X = init.copy()
    for _ in range(iters):
        X *= (rows / X.sum(axis=1))[:, None]
        X *= (cols / X.sum(axis=0))[None, :]
        if max(
            np.abs(X.sum(axis=1) - rows).max(), np.abs(X.sum(axis=0) - cols).max()
        ) < 1e-13 * rows.max():
            break
    return X


def _ipf_symmetric(init: np.ndarray, margins: np.ndarray, iters: int = 5000) -> np.ndarray:
    """Symmetric scaling D X D of a symmetric positive matrix to given margins."""
    X = 0.5 * (init + init.T)
    d = np.ones(len(margins))
    for _ in range(iters):
        row = (X * np.outer(d, d)).sum(axis=1)
        d *= np.sqrt(margins / row)
        if np.abs((X * np.outer(d, d)).sum(axis=1) - margins).max() < 1e-13 * margins.max():
            break
    return X * np.outer(d, d)


def _synthesize_extension_weights(
    W2: np.ndarray, m: int, epsilon: float, rng: np.random.Generator, directed: bool
) -> np.ndarray:
    """Source weight matrix whose fibers of size m collapse onto W2.

    Per-vertex scales s set the factor ratios d1(u)/d2(v); for undirected
    targets the scales are a Dirichlet split per fiber (equal fiber totals
    keep the symmetric synthesis feasible). A positive epsilon perturbs the
    per-vertex fiber sums inside the relative epsilon band while keeping
    realized out-degrees and fiber aggregates exact by projecting the
    fluctuations onto weighted zero row and column sums.
    """
    b = W2.shape[0]
    n1 = b * m
    mapping = np.repeat(np.arange(b), m)
    if directed:
        s = rng.uniform(0.5, 1.5, size=n1)
    else:
        s = np.concatenate([rng.dirichlet(np.ones(m)) for _ in range(b)])
    fiber_sums = s[:, None] * W2[mapping, :]
    if epsilon > 0:
        for v in range(b):
            rows = slice(v * m, (v + 1) * m)
            theta = rng.uniform(-1.0, 1.0, size=(m, b))
            theta = _mean_zero_project(theta, W2[v], s[rows])
            peak = np.abs(theta).max()
            if peak > 0:
                theta *= 0.95 / max(1.0, peak)
            fiber_sums[rows] *= 1.0 + epsilon * theta
    W1 = np.zeros((n1, n1))
    if directed:
        for u in range(n1):
            for vp in range(b):
                if W2[mapping[u], vp] <= 0:
                    continue
                cols = slice(vp * m, (vp + 1) * m)
                W1[u, cols] = rng.dirichlet(np.ones(m)) * fiber_sums[u, vp]
    else:
        for v in range(b):
            for vp in range(v, b):
                if W2[v, vp] <= 0:
                    continue
                rs = slice(v * m, (v + 1) * m)
                cs = slice(vp * m, (vp + 1) * m)
                init = rng.uniform(0.5, 1.5, size=(m, m))
                if v == vp:
                    blk = _ipf_symmetric(init, fiber_sums[rs, vp])
                else:
                    blk = _ipf(init, fiber_sums[rs, vp], fiber_sums[cs, v])
                W1[rs, cs] = blk
                if v != vp:
                    W1[cs, rs] = blk.T
    return W1


def extend_network(
    target: Network,
    m: int,
    epsilon: float = 0.0,
    seed=None,
    retry_cap: int = 100,
) -> Tuple[Network, FactorMap]:
    """Random extension of an existing network with m vertices per fiber.

    The returned map sends source vertex u to u // m and satisfies the
    factor identity exactly when epsilon is zero, approximately within the
    relative epsilon band otherwise.
    """
    if m < 1:
        raise GenerationFailed("m must be positive")
    if not (0 <= epsilon < 1):
        raise GenerationFailed("epsilon must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    mapping = np.repeat(np.arange(target.n), m)
    for _ in range(retry_cap):
        W1 = _synthesize_extension_weights(target.weights, m, epsilon, rng, target.directed)
        ext = Network(n=target.n * m, weights=W1, directed=target.directed)
        if not is_strongly_connected(ext):
            continue
        fmap = FactorMap(mapping=mapping, source=ext, target=target)
        if epsilon == 0 and not verify_factor(ext, target, fmap, tol=1e-8).exact:
            continue
        return ext, fmap
    raise GenerationFailed(f"no valid extension after {retry_cap} attempts")


def generate_factor_pair(
    b: int,
    m: int,
    sigma: float,
    directed_flag: bool = False,
    epsilon: float = 0.0,
    seed=None,
    retry_cap: int = 100,
) -> Tuple[Network, Network, FactorMap, Tuple[np.ndarray, np.ndarray]]:
    """Random extension/factor pair with Gaussian vertex embeddings.

    The factor network has b vertices embedded at centers drawn from a
    centered Gaussian with scale sigma, complete integer weights in [1, 10],
    and m source vertices per fiber embedded around each center with unit
    noise. Source weights are synthesized so the factor identity holds
    exactly when epsilon is zero; for positive epsilon, per-vertex fiber
    sums fluctuate inside the relative epsilon band while fiber aggregates
    still match exactly.
    """
    if b < 1 or m < 1:
        raise GenerationFailed("b and m must be positive")
    if sigma <= 0:
        raise GenerationFailed("sigma must be positive")
    if not (0 <= epsilon < 1):
        raise GenerationFailed("epsilon must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    n1 = b * m
    mapping = np.repeat(np.arange(b), m)
    for _ in range(retry_cap):
        centers = sigma * rng.standard_normal((b, 5))
        points = centers[mapping] + rng.standard_normal((n1, 5))
        if b == 1:
            W2 = np.array([[float(rng.integers(1, 11))]])
        elif directed_flag:
            W2 = rng.integers(1, 11, size=(b, b)).astype(float)
            np.fill_diagonal(W2, 0.0)
        else:
            W2 = np.zeros((b, b))
            iu = np.triu_indices(b, k=1)
            W2[iu] = rng.integers(1, 11, size=len(iu[0])).astype(float)
            W2 = W2 + W2.T
        W1 = _synthesize_extension_weights(W2, m, epsilon, rng, directed_flag)
        g1 = Network(n=n1, weights=W1, directed=directed_flag, embedding=points)
        g2 = Network(n=b, weights=W2, directed=directed_flag, embedding=centers)
        if not (is_strongly_connected(g1) and is_strongly_connected(g2)):
            continue
        fmap = FactorMap(mapping=mapping, source=g1, target=g2)
        check = verify_factor(g1, g2, fmap, tol=1e-8)
        if epsilon == 0 and not check.exact:
            continue
        return g1, g2, fmap, (points, centers)
    raise GenerationFailed(f"no valid factor pair after {retry_cap} attempts")
