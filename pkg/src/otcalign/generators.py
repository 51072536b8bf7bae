"""Seeded random-network generators for the benchmark protocols.

Every generator is a deterministic function of its parameters and seed; the
stream is a fresh PCG64 instance per call, so parallel generation across
seeds is safe and outputs are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import GenerationFailed, IndexOutOfRange
from .networks import Network, is_strongly_connected


@dataclass
class GeneratorSpec:
    """Named random-network class with its parameters and base seed."""

    kind: str
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None

    KINDS = ("erdos_renyi", "sbm", "lollipop", "random_weighted_adjacency", "permuted_copy")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")


def _resolve_n(params: dict, rng: np.random.Generator) -> int:
    if "n" in params:
        return int(params["n"])
    lo, hi = params["n_range"]
    return int(rng.integers(lo, hi + 1))


def gen_erdos_renyi(spec: GeneratorSpec) -> Network:
    """Unit-weight undirected network where each vertex pair is connected
    independently with probability p. Connectivity is not enforced; callers
    filter disconnected draws."""
    rng = np.random.default_rng(spec.seed)
    n = _resolve_n(spec.params, rng)
    if n < 2:
        raise GenerationFailed("Erdos-Renyi networks need at least 2 vertices")
    p = float(spec.params["p"])
    W = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    mask = rng.random(len(iu[0])) < p
    W[iu[0][mask], iu[1][mask]] = 1.0
    W = W + W.T
    return Network(n=n, weights=W, directed=False)


def gen_sbm(
    block_sizes: Sequence[int],
    p_within,
    p_between: float,
    seed=None,
) -> Tuple[Network, np.ndarray]:
    """Unit-weight undirected stochastic block model.

    p_within may be a scalar or one probability per block. Returns the
    network and the per-vertex block labels (also stored on the network).
    """
    sizes = [int(s) for s in block_sizes]
    if any(s <= 0 for s in sizes):
        raise GenerationFailed("block sizes must be positive")
    rng = np.random.default_rng(seed)
    n = sum(sizes)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    pw = np.broadcast_to(np.asarray(p_within, dtype=float), (len(sizes),))
    W = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            p = pw[labels[i]] if labels[i] == labels[j] else p_between
            if rng.random() < p:
                W[i, j] = W[j, i] = 1.0
    net = Network(n=n, weights=W, directed=False, labels=labels)
    return net, labels


def gen_lollipop(
    candy_range: Tuple[int, int] = (7, 15),
    stick_range: Tuple[int, int] = (7, 15),
    extra_edge_p: float = 0.5,
    seed=None,
) -> Network:
    """Candy-and-stick network: a cycle over the candy vertices with random
    chords added at extra_edge_p, plus a path stick attached to candy
    vertex 0. Always connected by construction."""
    rng = np.random.default_rng(seed)
    k1 = int(rng.integers(candy_range[0], candy_range[1] + 1))
    k2 = int(rng.integers(stick_range[0], stick_range[1] + 1))
    n = k1 + k2
    W = np.zeros((n, n))
    for i in range(k1):
        j = (i + 1) % k1
        W[i, j] = W[j, i] = 1.0
    for i in range(k1):
        for j in range(i + 2, k1):
            if (i, j) == (0, k1 - 1):
                continue
            if rng.random() < extra_edge_p:
                W[i, j] = W[j, i] = 1.0
    W[0, k1] = W[k1, 0] = 1.0
    for t in range(k1, n - 1):
        W[t, t + 1] = W[t + 1, t] = 1.0
    return Network(n=n, weights=W, directed=False)


def gen_random_weighted_adjacency(
    n_range: Tuple[int, int] = (6, 20),
    alphabet: Sequence[int] = (0, 1, 2),
    seed=None,
) -> Network:
    """Symmetric weighted network with upper-triangular entries drawn
    uniformly from the alphabet; zeros mean no edge."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    alpha = np.asarray(sorted(alphabet), dtype=float)
    if (alpha < 0).any():
        raise GenerationFailed("alphabet must be nonnegative")
    W = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    W[iu] = alpha[rng.integers(0, len(alpha), size=len(iu[0]))]
    W = W + W.T
    return Network(n=n, weights=W, directed=False)


def permuted_copy(net: Network, seed=None) -> Tuple[Network, np.ndarray]:
    """Isomorphic copy under a random vertex permutation phi, with
    w2(phi(u), phi(u')) = w1(u, u'). Returns the copy and phi."""
    rng = np.random.default_rng(seed)
    phi = rng.permutation(net.n)
    W2 = np.zeros_like(net.weights)
    W2[np.ix_(phi, phi)] = net.weights
    labels = None if net.labels is None else _permute_rows(net.labels, phi)
    embedding = None if net.embedding is None else _permute_rows(net.embedding, phi)
    copy = Network(n=net.n, weights=W2, directed=net.directed, labels=labels, embedding=embedding)
    return copy, phi


def _permute_rows(arr: np.ndarray, phi: np.ndarray) -> np.ndarray:
    out = np.empty_like(arr)
    out[phi] = arr
    return out


def gen_random_strongly_connected(
    n: int, density: float = 0.5, directed: bool = True, seed=None
) -> Network:
    """Random weighted network guaranteed strongly connected by planting a
    random Hamiltonian cycle under uniformly weighted extra edges. Used by
    the oracle cross-checks and the property suites."""
    rng = np.random.default_rng(seed)
    if n < 1:
        raise IndexOutOfRange("need at least one vertex")
    W = np.zeros((n, n))
    if n == 1:
        W[0, 0] = rng.uniform(0.5, 2.0)
        return Network(n=1, weights=W, directed=directed)
    perm = rng.permutation(n)
    extra = rng.random((n, n)) < density
    W[extra] = rng.uniform(0.5, 2.0, size=int(extra.sum()))
    if not directed:
        W = np.triu(W, k=1)
        W = W + W.T
    for i in range(n):
        u, v = perm[i], perm[(i + 1) % n]
        w = rng.uniform(0.5, 2.0)
        W[u, v] = w
        if not directed:
            W[v, u] = w
    net = Network(n=n, weights=W, directed=directed)
    assert is_strongly_connected(net)
    return net


def generate(spec: GeneratorSpec):
    """Dispatch a GeneratorSpec to its generator."""
    if spec.kind == "erdos_renyi":
        return gen_erdos_renyi(spec)
    if spec.kind == "sbm":
        return gen_sbm(
            spec.params["block_sizes"],
            spec.params.get("p_within", 0.7),
            spec.params.get("p_between", 0.1),
            seed=spec.seed,
        )[0]
    if spec.kind == "lollipop":
        return gen_lollipop(
            tuple(spec.params.get("candy_range", (7, 15))),
            tuple(spec.params.get("stick_range", (7, 15))),
            float(spec.params.get("extra_edge_p", 0.5)),
            seed=spec.seed,
        )
    if spec.kind == "random_weighted_adjacency":
        return gen_random_weighted_adjacency(
            tuple(spec.params.get("n_range", (6, 20))),
            tuple(spec.params.get("alphabet", (0, 1, 2))),
            seed=spec.seed,
        )
    raise ValueError(f"generator {spec.kind!r} is not directly generable")
