"""Benchmark protocols: isomorphism detection, block alignment, factor
alignment, the circle example, and k-NN classification over precomputed
distances.

Trials are seeded through spawned substreams, so every run is reproducible
from (spec, seed) and trials are independent; records are merged in trial
order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .costs import CostMatrix, cost_degree, cost_embedding
from .errors import DegenerateSplit, GenerationFailed, LabelMismatch
from .factors import generate_factor_pair
from .generators import GeneratorSpec, generate, permuted_copy
from .networks import (
    Network,
    is_strongly_connected,
    stationary_matrix,
    transition_kernel,
)
from .solver import (
    OtcSolution,
    hard_alignment,
    one_step_otc_baseline,
    solve_entropic_otc,
    solve_exact_otc,
)
from .transport import ot_exact

SOLVERS = ("exact", "entropic", "onestep", "ot")


@dataclass
class BenchResult:
    """Per-trial records plus aggregates that can be recomputed from them."""

    experiment: str
    records: List[dict]
    summary: dict = field(default_factory=dict)

    def recompute_summary(self) -> dict:
        return summarize_records(self.experiment, self.records)


def summarize_records(experiment: str, records: List[dict]) -> dict:
    out: dict = {"experiment": experiment, "trials": len(records)}
    if not records:
        return out
    keys = [k for k, v in records[0].items() if isinstance(v, (bool, int, float))]
    for k in keys:
        vals = np.array([float(r[k]) for r in records])
        out[f"{k}_mean"] = float(vals.mean())
        out[f"{k}_sd"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
    return out


def solve_alignment(
    g1: Network,
    g2: Network,
    cost: CostMatrix,
    solver: str = "exact",
    solver_options: Optional[dict] = None,
) -> Tuple[float, np.ndarray, Optional[OtcSolution]]:
    """Run one comparison method and return (value, vertex alignment, solution).

    The 'ot' method is the marginal baseline: an optimal coupling of the two
    stationary distributions only; it has no transition coupling, so the
    solution slot is None.
    """
    opts = dict(solver_options or {})
    if solver == "exact":
        sol = solve_exact_otc(g1, g2, cost, **opts)
        return sol.rho, sol.vertex_alignment, sol
    if solver == "entropic":
        sol = solve_entropic_otc(g1, g2, cost, **opts)
        return sol.rho, sol.vertex_alignment, sol
    if solver == "onestep":
        sol = one_step_otc_baseline(g1, g2, cost)
        return sol.rho, sol.vertex_alignment, sol
    if solver == "ot":
        p = stationary_matrix(transition_kernel(g1).matrix)
        q = stationary_matrix(transition_kernel(g2).matrix)
        coupling, value = ot_exact(p, q, cost.values)
        return value, coupling.plan, None
    raise ValueError(f"unknown solver {solver!r}")


# ---------------------------------------------------------------------------
# circle example


def circle_example_networks() -> Tuple[Network, Network, Network]:
    """Unit-circle triple: an octagon ring, the same ring with the edge
    crossing the positive x axis removed, and that chain re-embedded
    uniformly on the left semicircle."""
    angles = np.pi / 8 + np.arange(8) * np.pi / 4
    ring_xy = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    semi = np.pi / 2 + np.arange(8) * np.pi / 7
    semi_xy = np.stack([np.cos(semi), np.sin(semi)], axis=1)
    W_ring = np.zeros((8, 8))
    for i in range(8):
        j = (i + 1) % 8
        W_ring[i, j] = W_ring[j, i] = 1.0
    W_chain = W_ring.copy()
    W_chain[7, 0] = W_chain[0, 7] = 0.0
    ring = Network(n=8, weights=W_ring, directed=False, embedding=ring_xy)
    chain = Network(n=8, weights=W_chain, directed=False, embedding=ring_xy)
    semichain = Network(n=8, weights=W_chain, directed=False, embedding=semi_xy)
    return ring, chain, semichain


# ---------------------------------------------------------------------------
# isomorphism detection


def _is_weighted_isomorphism(g1: Network, g2: Network, psi: np.ndarray) -> bool:
    n = g1.n
    if sorted(int(x) for x in psi) != list(range(n)):
        return False
    inv = np.empty(n, dtype=int)
    inv[psi] = np.arange(n)
    for u, up in np.argwhere(g1.weights > 0):
        if abs(g2.weights[psi[u], psi[up]] - g1.weights[u, up]) > 1e-9:
            return False
    for v, vp in np.argwhere(g2.weights > 0):
        if abs(g1.weights[inv[v], inv[vp]] - g2.weights[v, vp]) > 1e-9:
            return False
    return True


def isomorphism_success(
    g1: Network, g2: Network, phi_truth: np.ndarray, pi_v: np.ndarray
) -> bool:
    """True iff the hard alignment of pi_v is a weight-preserving
    isomorphism (bijective, preserving edges and weights both ways). Any
    isomorphism counts, not only the planted phi_truth."""
    if g1.n != g2.n:
        return False
    psi = hard_alignment(pi_v)
    return _is_weighted_isomorphism(g1, g2, psi)


def run_isomorphism_bench(
    class_spec: GeneratorSpec,
    trials: int,
    solver: str = "exact",
    solver_options: Optional[dict] = None,
    max_draw_attempts: int = 300,
) -> BenchResult:
    """Isomorphism-detection success rate over permuted copies of random
    networks, using the raw squared-degree vertex cost. Disconnected draws
    are skipped and redrawn."""
    seeds = np.random.SeedSequence(class_spec.seed).spawn(trials)
    records = []
    for t in range(trials):
        rng = np.random.default_rng(seeds[t])
        net = None
        for _ in range(max_draw_attempts):
            cand = generate(GeneratorSpec(class_spec.kind, class_spec.params, seed=rng))
            if is_strongly_connected(cand):
                net = cand
                break
        if net is None:
            raise GenerationFailed(
                f"no connected draw for {class_spec.kind} in {max_draw_attempts} attempts"
            )
        copy, phi = permuted_copy(net, seed=rng)
        cost = cost_degree(net, copy, standardized=False)
        t0 = time.perf_counter()
        value, pi_v, _ = solve_alignment(net, copy, cost, solver, solver_options)
        elapsed = time.perf_counter() - t0
        success = isomorphism_success(net, copy, phi, pi_v)
        exact_match = bool(np.array_equal(hard_alignment(pi_v), phi))
        records.append(
            {
                "trial": t,
                "n": net.n,
                "success": success,
                "exact_match": exact_match,
                "rho": float(value),
                "runtime": elapsed,
            }
        )
    result = BenchResult(experiment=f"isomorphism/{class_spec.kind}", records=records)
    result.summary = result.recompute_summary()
    result.summary["success_rate_pct"] = 100.0 * result.summary.get("success_mean", 0.0)
    return result


# ---------------------------------------------------------------------------
# stochastic block model alignment


def sbm_alignment_accuracy(
    pi_v: np.ndarray,
    pi_e: Optional[Dict[tuple, float]],
    labels1: Sequence,
    labels2: Sequence,
    prob_map: Dict,
) -> Tuple[float, float]:
    """Mass of the vertex and edge alignments on block-matched pairs.

    Blocks correspond when their within-connection probabilities are equal.
    When pi_e is None the product convention pi_e = pi_v x pi_v applies, so
    the edge accuracy is the squared vertex accuracy.
    """
    l1 = np.asarray(labels1)
    l2 = np.asarray(labels2)
    if l1.shape[0] != pi_v.shape[0] or l2.shape[0] != pi_v.shape[1]:
        raise LabelMismatch("label vectors must cover both vertex sets")
    try:
        p1 = np.array([prob_map[x] for x in l1.tolist()])
        p2 = np.array([prob_map[x] for x in l2.tolist()])
    except KeyError as exc:
        raise LabelMismatch(f"label {exc} missing from prob_map") from exc
    match = p1[:, None] == p2[None, :]
    vertex_acc = float(pi_v[match].sum())
    if pi_e is None:
        return vertex_acc, vertex_acc**2
    edge_acc = 0.0
    for ((u, up), (v, vp)), mass in pi_e.items():
        if match[u, v] and match[up, vp]:
            edge_acc += mass
    return vertex_acc, float(edge_acc)


def run_sbm_bench(
    block_sizes1: Sequence[int] = (12, 12, 12, 12),
    block_sizes2: Sequence[int] = (8, 8, 8, 8),
    p_within: Sequence[float] = (1.0, 0.8, 0.6, 0.4),
    p_between: float = 0.1,
    trials: int = 10,
    solver: str = "exact",
    solver_options: Optional[dict] = None,
    seed=None,
    max_draw_attempts: int = 300,
) -> BenchResult:
    """Vertex and edge alignment accuracy across same-structure block models
    of different sizes, under the standardized squared-degree cost."""
    from .generators import gen_sbm

    seeds = np.random.SeedSequence(seed).spawn(trials)
    prob_map = {b: p_within[b] for b in range(len(p_within))}
    records = []
    for t in range(trials):
        rng = np.random.default_rng(seeds[t])
        nets = []
        for sizes in (block_sizes1, block_sizes2):
            net = None
            for _ in range(max_draw_attempts):
                cand, _ = gen_sbm(sizes, p_within, p_between, seed=rng)
                if is_strongly_connected(cand):
                    net = cand
                    break
            if net is None:
                raise GenerationFailed("no connected block-model draw")
            nets.append(net)
        g1, g2 = nets
        cost = cost_degree(g1, g2, standardized=True)
        t0 = time.perf_counter()
        value, pi_v, sol = solve_alignment(g1, g2, cost, solver, solver_options)
        elapsed = time.perf_counter() - t0
        pi_e = sol.edge_alignment() if sol is not None else None
        vacc, eacc = sbm_alignment_accuracy(pi_v, pi_e, g1.labels, g2.labels, prob_map)
        records.append(
            {
                "trial": t,
                "vertex_acc": vacc,
                "edge_acc": eacc,
                "rho": float(value),
                "runtime": elapsed,
            }
        )
    result = BenchResult(experiment="sbm_alignment", records=records)
    result.summary = result.recompute_summary()
    return result


# ---------------------------------------------------------------------------
# factor alignment


def run_factor_bench(
    sigma_list: Sequence[float],
    epsilon: float = 0.0,
    trials: int = 20,
    solver: str = "exact",
    solver_options: Optional[dict] = None,
    seed=None,
    b: int = 6,
    m: int = 5,
    directed: bool = False,
) -> BenchResult:
    """Alignment accuracy against a known factor map under the
    squared-Euclidean embedding cost: the mass the vertex alignment puts on
    pairs (u, f(u)), per embedding scale sigma."""
    seeds = np.random.SeedSequence(seed).spawn(len(sigma_list) * trials)
    records = []
    k = 0
    for sigma in sigma_list:
        for t in range(trials):
            g1, g2, fmap, (points, centers) = generate_factor_pair(
                b=b, m=m, sigma=float(sigma), directed_flag=directed,
                epsilon=epsilon, seed=seeds[k],
            )
            k += 1
            cost = cost_embedding(points, centers, squared=True)
            t0 = time.perf_counter()
            value, pi_v, _ = solve_alignment(g1, g2, cost, solver, solver_options)
            elapsed = time.perf_counter() - t0
            acc = float(pi_v[np.arange(g1.n), fmap.mapping].sum())
            records.append(
                {
                    "sigma": float(sigma),
                    "epsilon": float(epsilon),
                    "trial": t,
                    "accuracy": acc,
                    "rho": float(value),
                    "runtime": elapsed,
                }
            )
    result = BenchResult(experiment="factor_alignment", records=records)
    result.summary = result.recompute_summary()
    by_sigma = {}
    for sigma in sigma_list:
        vals = np.array([r["accuracy"] for r in records if r["sigma"] == float(sigma)])
        by_sigma[float(sigma)] = {
            "accuracy_pct_mean": float(100 * vals.mean()),
            "accuracy_pct_sd": float(100 * vals.std(ddof=1)) if len(vals) > 1 else 0.0,
        }
    result.summary["by_sigma"] = by_sigma
    return result


# ---------------------------------------------------------------------------
# nearest-neighbor classification on a precomputed distance matrix


@dataclass
class KnnResult:
    accuracy_mean: float
    accuracy_sd: float
    per_repeat: List[float]


def knn_classify(
    distance_matrix: np.ndarray,
    labels: Sequence,
    k: int = 5,
    train_fraction: float = 0.8,
    repeats: int = 5,
    seed=None,
) -> KnnResult:
    """Majority-vote k-NN accuracy over repeated random train/test splits.

    The matrix is symmetrized by averaging. Vote ties break to the class
    with the smallest mean neighbor distance, then to the lowest label.
    """
    D = np.asarray(distance_matrix, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise DegenerateSplit("distance matrix must be square")
    if k < 1:
        raise ValueError("k must be at least 1")
    D = 0.5 * (D + D.T)
    n = D.shape[0]
    y = np.asarray(labels)
    if y.shape[0] != n:
        raise LabelMismatch("one label per item required")
    rng = np.random.default_rng(seed)
    accs = []
    for _ in range(repeats):
        perm = rng.permutation(n)
        n_train = int(round(train_fraction * n))
        if n_train < 1 or n_train >= n:
            raise DegenerateSplit(f"split {train_fraction} leaves an empty side for n={n}")
        train, test = perm[:n_train], perm[n_train:]
        correct = 0
        k_eff = min(k, n_train)
        for item in test:
            order = train[np.argsort(D[item, train], kind="stable")][:k_eff]
            votes: Dict = {}
            for nb in order:
                lab = y[nb]
                cnt, dsum = votes.get(lab, (0, 0.0))
                votes[lab] = (cnt + 1, dsum + D[item, nb])
            best = min(
                votes.items(),
                key=lambda kv: (-kv[1][0], kv[1][1] / kv[1][0], kv[0]),
            )[0]
            if best == y[item]:
                correct += 1
        accs.append(correct / len(test))
    arr = np.array(accs)
    sd = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return KnnResult(accuracy_mean=float(arr.mean()), accuracy_sd=sd, per_repeat=accs)
