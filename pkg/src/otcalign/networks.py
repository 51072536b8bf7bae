"""Weighted directed networks and their associated random walks.

A network on vertices 0..n-1 is stored as a dense nonnegative weight matrix
where a strictly positive entry w[u, u'] is exactly an edge u -> u'.
Undirected networks are kept as symmetric directed networks. Every operation
here is a pure function of immutable inputs; the arrays inside the dataclasses
are marked read-only after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    AsymmetricUndirected,
    DirectedInput,
    IndexOutOfRange,
    InvariantViolation,
    ModeInvalidForDirected,
    NonPositiveWeight,
    NotStronglyConnected,
    NumericalNonConvergence,
    ZeroOutDegree,
)

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-10
KERNEL_EQ_TOL = 1e-12

# above this size the stationary solve falls back to (lazy) power iteration
DENSE_SOLVE_LIMIT = 512


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass
class Network:
    """Weighted directed network with optional per-vertex attributes.

    Attributes
    ----------
    n : number of vertices.
    weights : (n, n) matrix, w[u, u'] > 0 iff the edge (u, u') exists.
    directed : False means the weight matrix is exactly symmetric.
    labels : optional discrete attribute per vertex.
    embedding : optional (n, d) real vectors, one row per vertex.
    """

    n: int
    weights: np.ndarray
    directed: bool = True
    labels: Optional[np.ndarray] = None
    embedding: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.n < 1:
            raise IndexOutOfRange(f"vertex count must be positive, got {self.n}")
        W = np.asarray(self.weights, dtype=float)
        if W.shape != (self.n, self.n):
            raise IndexOutOfRange(f"weight matrix shape {W.shape} does not match n={self.n}")
        if not np.isfinite(W).all():
            raise NonPositiveWeight("weights must be finite")
        if (W < 0).any():
            u, v = np.argwhere(W < 0)[0]
            raise NonPositiveWeight(f"negative weight on edge ({u}, {v})")
        if not self.directed and not np.array_equal(W, W.T):
            raise AsymmetricUndirected("undirected network requires a symmetric weight matrix")
        self.weights = _readonly(W)
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.shape[0] != self.n:
                raise IndexOutOfRange("one label per vertex required")
            self.labels = _readonly(lab)
        if self.embedding is not None:
            emb = np.asarray(self.embedding, dtype=float)
            if emb.ndim != 2 or emb.shape[0] != self.n:
                raise IndexOutOfRange("embedding must be an (n, d) array")
            self.embedding = _readonly(emb)

    @property
    def edges(self) -> set:
        """Set of directed edges (u, u') with positive weight."""
        return {(int(u), int(v)) for u, v in np.argwhere(self.weights > 0)}

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(self.weights))

    def out_degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def total_degree(self) -> float:
        return float(self.weights.sum())


@dataclass
class MarkovKernel:
    """Row-stochastic transition matrix of the random walk on a network."""

    matrix: np.ndarray
    source: Network

    def __post_init__(self):
        P = np.asarray(self.matrix, dtype=float)
        rows = P.sum(axis=1)
        if np.abs(rows - 1.0).max() > ROW_SUM_TOL:
            raise InvariantViolation("kernel rows must sum to 1")
        self.matrix = _readonly(P)


@dataclass
class StationaryDistribution:
    """Probability vector p with p @ P = p."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if (p < -1e-15).any() or abs(p.sum() - 1.0) > 1e-10:
            raise InvariantViolation("stationary vector must be a distribution")
        self.probs = _readonly(np.clip(p, 0.0, None) / np.clip(p, 0.0, None).sum())


def build_network(
    n: int,
    weighted_edge_list: Iterable[Tuple[int, int, float]],
    directed_flag: bool = True,
    attributes: Optional[dict] = None,
) -> Network:
    """Construct a validated Network from an edge list.

    For undirected networks each edge may be given in either orientation (it
    is mirrored), or in both orientations with identical weights. Duplicate
    listings of the same ordered pair are rejected.
    """
    if n < 1:
        raise IndexOutOfRange(f"vertex count must be positive, got {n}")
    W = np.zeros((n, n))
    seen = set()
    for u, v, w in weighted_edge_list:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise IndexOutOfRange(f"edge ({u}, {v}) outside vertex range [0, {n})")
        if not (w > 0):
            raise NonPositiveWeight(f"edge ({u}, {v}) has non-positive weight {w}")
        if (u, v) in seen:
            raise InvariantViolation(f"duplicate edge ({u}, {v})")
        if directed_flag:
            W[u, v] = w
        else:
            if (v, u) in seen and W[v, u] != w:
                raise AsymmetricUndirected(
                    f"edge ({u}, {v}) listed with weight {w} but ({v}, {u}) has {W[v, u]}"
                )
            W[u, v] = w
            W[v, u] = w
        seen.add((u, v))
    attributes = attributes or {}
    return Network(
        n=n,
        weights=W,
        directed=directed_flag,
        labels=attributes.get("labels"),
        embedding=attributes.get("embedding"),
    )


def transition_kernel(net: Network) -> MarkovKernel:
    """Random-walk kernel: each row of the weight matrix normalized to sum 1."""
    d = net.weights.sum(axis=1)
    if (d <= 0).any():
        raise ZeroOutDegree(f"vertex {int(np.argmin(d))} has zero out-degree")
    return MarkovKernel(matrix=net.weights / d[:, None], source=net)


def is_strongly_connected(net: Network) -> bool:
    """True iff every ordered vertex pair is joined by a directed path."""
    if net.n == 1:
        return True
    ncomp, _ = connected_components(csr_matrix(net.weights > 0), connection="strong")
    return ncomp == 1


def stationary_matrix(P: np.ndarray, max_power_iter: int = 200_000) -> np.ndarray:
    """Stationary distribution of a row-stochastic matrix.

    Dense linear solve of (P^T - I) p = 0 with sum(p) = 1 up to
    DENSE_SOLVE_LIMIT states; lazy power iteration above. The lazy kernel
    (P + I)/2 shares the stationary distribution and is aperiodic, which
    makes power iteration applicable to periodic chains.
    """
    n = P.shape[0]
    if n == 1:
        return np.ones(1)
    if n <= DENSE_SOLVE_LIMIT:
        A = P.T - np.eye(n)
        A[-1, :] = 1.0
        b = np.zeros(n)
        b[-1] = 1.0
        try:
            p = np.linalg.solve(A, b)
        except np.linalg.LinAlgError:
            A2 = np.vstack([P.T - np.eye(n), np.ones(n)])
            b2 = np.zeros(n + 1)
            b2[-1] = 1.0
            p, *_ = np.linalg.lstsq(A2, b2, rcond=None)
        p = np.clip(p, 0.0, None)
        p /= p.sum()
        if np.abs(p @ P - p).sum() > STATIONARY_TOL:
            raise NumericalNonConvergence("stationary solve residual above tolerance")
        return p
    p = np.full(n, 1.0 / n)
    for _ in range(max_power_iter):
        nxt = 0.5 * (p + p @ P)
        if np.abs(nxt - p).sum() < 0.25 * STATIONARY_TOL:
            p = nxt
            break
        p = nxt
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    if np.abs(p @ P - p).sum() > STATIONARY_TOL:
        raise NumericalNonConvergence("power iteration did not reach tolerance")
    return p


def stationary_distribution(kernel: MarkovKernel) -> StationaryDistribution:
    """Unique stationary distribution of the walk on a strongly connected network."""
    if not is_strongly_connected(kernel.source):
        raise NotStronglyConnected("stationary distribution requires strong connectivity")
    return StationaryDistribution(probs=stationary_matrix(kernel.matrix))


def degree_vector(net: Network, mode: str = "out") -> np.ndarray:
    """Weighted degree per vertex.

    mode 'out' sums rows, 'in' sums columns, 'undirected' is the symmetric
    degree and is only valid for undirected networks.
    """
    if mode == "out":
        return net.weights.sum(axis=1)
    if mode == "in":
        return net.weights.sum(axis=0)
    if mode == "undirected":
        if net.directed:
            raise ModeInvalidForDirected("undirected degree mode requires an undirected network")
        return net.weights.sum(axis=1)
    raise ValueError(f"unknown degree mode {mode!r}")


def networks_equivalent(g1: Network, g2: Network) -> bool:
    """True iff the networks share an edge set and weights differ by one global factor.

    Equivalently the two random walks are identical; the proportionality check
    here is independent of the kernels and is cross-validated against kernel
    equality in the test suite.
    """
    if g1.directed or g2.directed:
        raise DirectedInput("equivalence is defined for undirected networks")
    if g1.n != g2.n:
        return False
    m1 = g1.weights > 0
    if not np.array_equal(m1, g2.weights > 0):
        return False
    if not m1.any():
        return True
    ratios = g1.weights[m1] / g2.weights[m1]
    lo, hi = ratios.min(), ratios.max()
    return bool(hi - lo <= KERNEL_EQ_TOL * hi)
