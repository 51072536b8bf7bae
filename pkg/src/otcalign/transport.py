"""Discrete optimal transport primitives.

Exact transport is solved as a min-cost flow by successive shortest paths
with node potentials, with a dense linear-programming fallback. Entropic
transport runs Sinkhorn iterations in the log domain so that sharp
regularization (large xi) does not underflow. All functions are pure and
reentrant; concurrent solves share no state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

from .errors import DimensionMismatch, MarginalInvalid, NumericalUnderflow

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency, kept soft for safety
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap

COUPLING_TOL = 1e-9
_MASS_EPS = 1e-14


@dataclass
class Coupling:
    """Joint distribution with prescribed marginals.

    residual records the worst marginal deviation for approximate plans
    (zero for exact solvers).
    """

    plan: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray
    residual: float = 0.0

    def __post_init__(self):
        self.plan = np.ascontiguousarray(np.asarray(self.plan, dtype=float))
        self.plan.setflags(write=False)
        self.row_marginal = np.asarray(self.row_marginal, dtype=float)
        self.col_marginal = np.asarray(self.col_marginal, dtype=float)

    def marginal_errors(self) -> Tuple[float, float, float]:
        r = np.abs(self.plan.sum(axis=1) - self.row_marginal).max()
        c = np.abs(self.plan.sum(axis=0) - self.col_marginal).max()
        m = abs(self.plan.sum() - 1.0)
        return float(r), float(c), float(m)

    def validate(self, tol: float = COUPLING_TOL) -> None:
        r, c, m = self.marginal_errors()
        if max(r, c, m) > tol:
            raise MarginalInvalid(
                f"coupling violates marginals: row {r:.2e}, col {c:.2e}, mass {m:.2e}"
            )


def _check_distribution(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise MarginalInvalid(f"{name} must be a vector")
    if (v < 0).any() or not np.isfinite(v).all():
        raise MarginalInvalid(f"{name} must be nonnegative and finite")
    if abs(v.sum() - 1.0) > 1e-9:
        raise MarginalInvalid(f"{name} must sum to 1, got {v.sum()!r}")
    return v


@njit(cache=True)
def _ssp_core(mu: np.ndarray, nu: np.ndarray, cost: np.ndarray) -> np.ndarray:
    """Successive shortest paths with node potentials on a dense bipartite
    transportation instance. Multi-source Dijkstra on reduced costs stops at
    the first settled sink with remaining demand."""
    na = mu.shape[0]
    nb = nu.shape[0]
    ra = mu.copy()
    rb = nu * (mu.sum() / nu.sum())
    X = np.zeros((na, nb))
    pu = np.zeros(na)
    pv = np.zeros(nb)
    scale = max(ra.max(), rb.max())
    mass_eps = _MASS_EPS * scale
    INF = np.inf
    dist_a = np.empty(na)
    dist_b = np.empty(nb)
    par_a = np.empty(na, dtype=np.int64)
    par_b = np.empty(nb, dtype=np.int64)
    done_a = np.empty(na, dtype=np.bool_)
    done_b = np.empty(nb, dtype=np.bool_)
    max_rounds = 4 * (na + nb) * (na + nb)
    rounds = 0
    while True:
        has_supply = False
        for i in range(na):
            if ra[i] > mass_eps:
                has_supply = True
                break
        if not has_supply:
            break
        rounds += 1
        if rounds > max_rounds:
            raise RuntimeError("successive shortest paths failed to terminate")
        for i in range(na):
            dist_a[i] = 0.0 if ra[i] > mass_eps else INF
            done_a[i] = False
            par_a[i] = -1
        for j in range(nb):
            dist_b[j] = INF
            done_b[j] = False
            par_b[j] = -1
        target = -1
        while True:
            best = INF
            side = -1
            node = -1
            for i in range(na):
                if not done_a[i] and dist_a[i] < best:
                    best = dist_a[i]
                    side = 0
                    node = i
            for j in range(nb):
                if not done_b[j] and dist_b[j] < best:
                    best = dist_b[j]
                    side = 1
                    node = j
            if side < 0:
                break
            if side == 1:
                j = node
                done_b[j] = True
                if rb[j] > mass_eps:
                    target = j
                    break
                dj = dist_b[j]
                for i in range(na):
                    if not done_a[i] and X[i, j] > mass_eps:
                        rc = -(cost[i, j] + pu[i] - pv[j])
                        if rc < 0.0:
                            rc = 0.0
                        nd = dj + rc
                        if nd < dist_a[i]:
                            dist_a[i] = nd
                            par_a[i] = j
            else:
                i = node
                done_a[i] = True
                di = dist_a[i]
                for j in range(nb):
                    if not done_b[j]:
                        rc = cost[i, j] + pu[i] - pv[j]
                        if rc < 0.0:
                            rc = 0.0
                        nd = di + rc
                        if nd < dist_b[j]:
                            dist_b[j] = nd
                            par_b[j] = i
        if target < 0:
            raise RuntimeError("no augmenting path; marginals are unbalanced")
        D = dist_b[target]
        for i in range(na):
            pu[i] += dist_a[i] if dist_a[i] < D else D
        for j in range(nb):
            pv[j] += dist_b[j] if dist_b[j] < D else D
        # bottleneck along the alternating path
        delta = rb[target]
        j = target
        origin = -1
        while True:
            i = par_b[j]
            if par_a[i] < 0:
                origin = i
                if ra[i] < delta:
                    delta = ra[i]
                break
            jn = par_a[i]
            if X[i, jn] < delta:
                delta = X[i, jn]
            j = jn
        # apply the augmentation
        j = target
        while True:
            i = par_b[j]
            X[i, j] += delta
            if par_a[i] < 0:
                break
            jn = par_a[i]
            X[i, jn] -= delta
            j = jn
        ra[origin] -= delta
        rb[target] -= delta
    return X


def transport_plan_flow(mu: np.ndarray, nu: np.ndarray, cost: np.ndarray) -> np.ndarray:
    """Exact optimal transport plan via successive shortest paths.

    Assumes strictly positive marginals with equal total mass and a finite
    nonnegative cost matrix. Zero-mass handling and validation live in
    ot_exact.
    """
    na, nb = cost.shape
    if na == 1:
        return nu[None, :] * (mu.sum() / nu.sum())
    if nb == 1:
        return mu[:, None].astype(float).copy()
    return _ssp_core(
        np.ascontiguousarray(mu, dtype=np.float64),
        np.ascontiguousarray(nu, dtype=np.float64),
        np.ascontiguousarray(cost, dtype=np.float64),
    )


def _transport_linprog(mu: np.ndarray, nu: np.ndarray, cost: np.ndarray) -> np.ndarray:
    na, nb = cost.shape
    rows, cols, data = [], [], []
    for i in range(na):
        for j in range(nb):
            rows.append(i)
            cols.append(i * nb + j)
            data.append(1.0)
    for j in range(nb):
        for i in range(na):
            rows.append(na + j)
            cols.append(i * nb + j)
            data.append(1.0)
    A = csr_matrix((data, (rows, cols)), shape=(na + nb, na * nb))
    b = np.concatenate([mu, nu * (mu.sum() / nu.sum())])
    res = linprog(
        cost.ravel(),
        A_eq=A,
        b_eq=b,
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return res.x.reshape(na, nb)


def transport_plan(mu, nu, cost, engine: str = "flow") -> np.ndarray:
    """Exact transport plan between positive marginals of equal mass."""
    if engine == "lp":
        return _transport_linprog(mu, nu, cost)
    try:
        return transport_plan_flow(mu, nu, cost)
    except RuntimeError:
        return _transport_linprog(mu, nu, cost)


def ot_exact(mu, nu, cost, engine: str = "flow") -> Tuple[Coupling, float]:
    """Exact optimal transport between two distributions.

    Zero-mass marginal entries are dropped before solving and reinserted as
    zero rows and columns of the plan.
    """
    mu = _check_distribution(mu, "mu")
    nu = _check_distribution(nu, "nu")
    C = np.asarray(cost, dtype=float)
    if C.shape != (len(mu), len(nu)):
        raise DimensionMismatch(f"cost shape {C.shape} does not match marginals")
    if not np.isfinite(C).all() or (C < 0).any():
        raise MarginalInvalid("cost must be finite and nonnegative")
    ia = np.where(mu > 0)[0]
    ib = np.where(nu > 0)[0]
    sub = transport_plan(mu[ia], nu[ib], C[np.ix_(ia, ib)], engine=engine)
    plan = np.zeros_like(C)
    plan[np.ix_(ia, ib)] = sub
    value = float((plan * C).sum())
    coupling = Coupling(plan=plan, row_marginal=mu, col_marginal=nu)
    coupling.validate()
    return coupling, value


def sinkhorn_plan(
    mu: np.ndarray, nu: np.ndarray, cost: np.ndarray, xi: float, iters: int
) -> Tuple[np.ndarray, float]:
    """Log-domain Sinkhorn plan with exact row marginals.

    Returns the plan and the column-marginal residual (infinity norm). The
    final update scales rows, so row sums match mu to machine precision.
    """
    logmu = np.log(mu)
    lognu = np.log(nu)
    L = -xi * cost
    if not np.isfinite(L).all():
        raise NumericalUnderflow("xi times cost overflows; rescale the cost")
    f = np.zeros(len(mu))
    g = np.zeros(len(nu))
    for _ in range(iters):
        g = lognu - _logsumexp(L + f[:, None], axis=0)
        f = logmu - _logsumexp(L + g[None, :], axis=1)
    plan = np.exp(L + f[:, None] + g[None, :])
    if not np.isfinite(plan).all():
        raise NumericalUnderflow("Sinkhorn plan lost precision; reduce xi or rescale")
    residual = float(np.abs(plan.sum(axis=0) - nu).max())
    return plan, residual


def _logsumexp(A: np.ndarray, axis: int) -> np.ndarray:
    m = A.max(axis=axis)
    safe = np.where(np.isfinite(m), m, 0.0)
    out = safe + np.log(np.exp(A - np.expand_dims(safe, axis)).sum(axis=axis))
    return np.where(np.isfinite(m), out, -np.inf)


def ot_sinkhorn(mu, nu, cost, xi: float, iters: int) -> Tuple[Coupling, float]:
    """Entropy-regularized transport with kernel exp(-xi * cost)."""
    if xi <= 0:
        raise ValueError("xi must be positive")
    if iters < 1:
        raise ValueError("iters must be at least 1")
    mu = _check_distribution(mu, "mu")
    nu = _check_distribution(nu, "nu")
    C = np.asarray(cost, dtype=float)
    if C.shape != (len(mu), len(nu)):
        raise DimensionMismatch(f"cost shape {C.shape} does not match marginals")
    ia = np.where(mu > 0)[0]
    ib = np.where(nu > 0)[0]
    sub, residual = sinkhorn_plan(mu[ia], nu[ib], C[np.ix_(ia, ib)], xi, iters)
    plan = np.zeros_like(C)
    plan[np.ix_(ia, ib)] = sub
    value = float((plan * C).sum())
    coupling = Coupling(plan=plan, row_marginal=mu, col_marginal=nu, residual=residual)
    coupling.validate(tol=max(COUPLING_TOL, residual * (1 + 1e-9) + 1e-12))
    return coupling, value


def total_variation(mu, nu) -> float:
    """Half the L1 distance between two distributions."""
    a = np.asarray(mu, dtype=float)
    b = np.asarray(nu, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch("distributions must have equal length")
    return float(0.5 * np.abs(a - b).sum())
