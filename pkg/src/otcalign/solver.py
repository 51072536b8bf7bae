"""Optimal transition couplings of two random walks.

The exact solver is a multichain average-cost policy iteration over the
polytope of transition couplings. Policy evaluation solves the gain and bias
equations with dense linear algebra, treating every recurrent class
separately. Policy improvement solves, for every product state, one exact
transport problem whose cost lexicographically prefers the gain and breaks
ties by the bias. The returned objective is the smallest stationary expected
cost among the recurrent classes of the final coupling kernel.

An occupation-measure linear program over joint transitions provides a
globally optimal oracle for small instances and is used throughout the test
suite to certify the policy iteration.

Within one solve, the per-state improvement problems only read the shared
(gain, bias) snapshot and are safe to run concurrently; separate solves share
no state at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .costs import CostMatrix, as_cost_matrix
from .errors import (
    DimensionMismatch,
    InstanceTooLarge,
    IterationCapExceeded,
    NotStronglyConnected,
    PreconditionViolated,
)
from .networks import (
    MarkovKernel,
    Network,
    degree_vector,
    is_strongly_connected,
    stationary_matrix,
    transition_kernel,
)
from .transport import ot_exact, sinkhorn_plan, transport_plan

MARGINAL_TOL = 1e-9
STATIONARY_LAW_TOL = 1e-8
SUPPORT_EPS = 1e-13
ROW_CHANGE_TOL = 1e-12
DEFAULT_ITERATION_CAP = 50
DEFAULT_GAP_FLOOR = 1e-7
ORACLE_STATE_LIMIT = 64


@dataclass
class TransitionCoupling:
    """Row-stochastic kernel on product states with a stationary law.

    States (u, v) are flattened to u * m + v. The kernel couples the two
    marginal kernels row by row: summing any row over second coordinates
    recovers the first chain's transition row and vice versa.
    """

    kernel: np.ndarray
    stationary: np.ndarray
    shape: Tuple[int, int]

    def __post_init__(self):
        self.kernel = np.ascontiguousarray(np.asarray(self.kernel, dtype=float))
        self.stationary = np.ascontiguousarray(np.asarray(self.stationary, dtype=float))
        self.kernel.setflags(write=False)
        self.stationary.setflags(write=False)

    def marginal_residuals(self, P: np.ndarray, Q: np.ndarray) -> Tuple[float, float]:
        n, m = self.shape
        R3 = self.kernel.reshape(n * m, n, m)
        left = R3.sum(axis=2) - np.repeat(P, m, axis=0)
        right = R3.sum(axis=1) - np.tile(Q, (n, 1))
        return float(np.abs(left).max()), float(np.abs(right).max())

    def stationarity_residual(self) -> float:
        return float(np.abs(self.stationary @ self.kernel - self.stationary).sum())

    def validate(
        self,
        P: np.ndarray,
        Q: np.ndarray,
        marginal_tol: float = MARGINAL_TOL,
        stationary_tol: float = STATIONARY_LAW_TOL,
    ) -> None:
        lresid, rresid = self.marginal_residuals(P, Q)
        if max(lresid, rresid) > marginal_tol:
            raise PreconditionViolated(
                f"kernel marginal residuals {lresid:.2e}/{rresid:.2e} exceed {marginal_tol:.0e}"
            )
        sresid = self.stationarity_residual()
        if sresid > stationary_tol:
            raise PreconditionViolated(
                f"stationary-law residual {sresid:.2e} exceeds {stationary_tol:.0e}"
            )


@dataclass
class SolverDiagnostics:
    solver: str
    iterations: int
    objectives: List[float]
    converged: bool
    marginal_residual: float = 0.0


@dataclass
class OtcSolution:
    """Solver output: difference cost, coupling, and vertex/edge alignments."""

    rho: float
    coupling: TransitionCoupling
    vertex_alignment: np.ndarray
    cost: CostMatrix
    diagnostics: SolverDiagnostics

    def edge_alignment(self, threshold: float = 0.0) -> Dict[tuple, float]:
        """Sparse two-step alignment ((u, u'), (v, v')) -> probability."""
        n, m = self.coupling.shape
        lam = self.coupling.stationary
        R = self.coupling.kernel
        out: Dict[tuple, float] = {}
        for s in np.flatnonzero(lam > threshold):
            u, v = divmod(int(s), m)
            row = lam[s] * R[s]
            for t in np.flatnonzero(row > threshold):
                up, vp = divmod(int(t), m)
                out[((u, up), (v, vp))] = out.get(((u, up), (v, vp)), 0.0) + float(row[t])
        return out


def hard_alignment(pi_v: np.ndarray) -> np.ndarray:
    """Row-wise argmax of a vertex alignment; ties break to the lowest index."""
    pi = np.asarray(pi_v, dtype=float)
    if (pi < 0).any():
        raise PreconditionViolated("vertex alignment must be nonnegative")
    return np.argmax(pi, axis=1)


# ---------------------------------------------------------------------------
# chain structure and policy evaluation


def _closed_classes(R: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
    """Recurrent (closed) communicating classes of a stochastic matrix.

    Returns the list of index arrays and a boolean mask of recurrent states.
    """
    support = R > SUPPORT_EPS
    ncomp, comp = connected_components(csr_matrix(support), connection="strong")
    closed = np.ones(ncomp, dtype=bool)
    rows, cols = np.nonzero(support)
    cross = comp[rows] != comp[cols]
    closed[comp[rows[cross]]] = False
    classes = [np.flatnonzero(comp == k) for k in range(ncomp) if closed[k]]
    rec = np.zeros(R.shape[0], dtype=bool)
    for idx in classes:
        rec[idx] = True
    return classes, rec


def evaluate_average_cost(
    R: np.ndarray, c: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, List[Tuple[np.ndarray, np.ndarray, float]]]:
    """Gain and bias of a stationary policy with per-class normalization.

    Solves g = R g and g + h = c + R h, pinning the bias by mu_C @ h = 0 on
    every recurrent class C. Returns (g, h, classes) where classes holds
    (indices, stationary law, gain) per recurrent class.
    """
    N = len(c)
    classes, rec = _closed_classes(R)
    g = np.zeros(N)
    h = np.zeros(N)
    infos = []
    for idx in classes:
        sub = R[np.ix_(idx, idx)]
        sub = sub / sub.sum(axis=1, keepdims=True)
        mu = stationary_matrix(sub)
        gamma = float(mu @ c[idx])
        g[idx] = gamma
        A = np.eye(len(idx)) - sub + np.outer(np.ones(len(idx)), mu)
        h[idx] = np.linalg.solve(A, c[idx] - gamma)
        infos.append((idx, mu, gamma))
    t_idx = np.flatnonzero(~rec)
    if t_idx.size:
        r_idx = np.flatnonzero(rec)
        RTT = R[np.ix_(t_idx, t_idx)]
        RTC = R[np.ix_(t_idx, r_idx)]
        I = np.eye(t_idx.size)
        g[t_idx] = np.linalg.solve(I - RTT, RTC @ g[r_idx])
        h[t_idx] = np.linalg.solve(I - RTT, c[t_idx] - g[t_idx] + RTC @ h[r_idx])
    return g, h, infos


def best_stationary_law(R: np.ndarray, c: np.ndarray) -> Tuple[float, np.ndarray]:
    """Cheapest stationary law of R: the stationary laws of R form the convex
    hull of the per-recurrent-class laws, so the minimum of <lam, c> is
    attained on a single class."""
    classes, _ = _closed_classes(R)
    best_val = math.inf
    best_lam = None
    for idx in classes:
        sub = R[np.ix_(idx, idx)]
        sub = sub / sub.sum(axis=1, keepdims=True)
        mu = stationary_matrix(sub)
        val = float(mu @ c[idx])
        if val < best_val:
            best_val = val
            lam = np.zeros(len(c))
            lam[idx] = mu
            best_lam = lam
    return best_val, best_lam


# ---------------------------------------------------------------------------
# couplings


def independent_coupling(P: MarkovKernel, Q: MarkovKernel) -> TransitionCoupling:
    """Product coupling: the two walks move independently."""
    Pm, Qm = P.matrix, Q.matrix
    R = np.kron(Pm, Qm)
    lam = np.kron(stationary_matrix(Pm), stationary_matrix(Qm))
    return TransitionCoupling(kernel=R, stationary=lam, shape=(Pm.shape[0], Qm.shape[0]))


def _prepare_instance(g1: Network, g2: Network, cost) -> Tuple[np.ndarray, np.ndarray, CostMatrix]:
    if not is_strongly_connected(g1):
        raise NotStronglyConnected("first network is not strongly connected")
    if not is_strongly_connected(g2):
        raise NotStronglyConnected("second network is not strongly connected")
    cm = as_cost_matrix(cost)
    if cm.shape != (g1.n, g2.n):
        raise DimensionMismatch(
            f"cost shape {cm.shape} does not match network sizes ({g1.n}, {g2.n})"
        )
    P = transition_kernel(g1).matrix
    Q = transition_kernel(g2).matrix
    return P, Q, cm


def _row_supports(K: np.ndarray) -> List[np.ndarray]:
    return [np.flatnonzero(K[i] > 0) for i in range(K.shape[0])]


def solve_exact_otc(
    g1: Network,
    g2: Network,
    cost,
    iteration_cap: int = DEFAULT_ITERATION_CAP,
    gap_floor: float = DEFAULT_GAP_FLOOR,
) -> OtcSolution:
    """Exact optimal transition coupling by policy iteration.

    Starts from the independent coupling and alternates policy evaluation
    with a per-state improvement that minimizes expected gain and breaks
    ties by expected bias (a single transport solve per state against a
    lexicographically weighted cost). Stops when no row changes.
    """
    P, Q, cm = _prepare_instance(g1, g2, cost)
    n, m = g1.n, g2.n
    c = cm.values.ravel()
    sup_p = _row_supports(P)
    sup_q = _row_supports(Q)
    R = np.kron(P, Q)
    objectives: List[float] = []
    converged = False
    g = h = None
    sweeps = 0
    for sweeps in range(1, iteration_cap + 1):
        g, h, _ = evaluate_average_cost(R, c)
        objectives.append(float(g.min()))
        R_new, changed = _improve_policy(R, g, h, P, Q, sup_p, sup_q, gap_floor)
        if not changed:
            converged = True
            break
        R = R_new
    if not converged:
        raise IterationCapExceeded(f"policy iteration did not settle in {iteration_cap} sweeps")
    rho, lam = best_stationary_law(R, c)
    coupling = TransitionCoupling(kernel=R, stationary=lam, shape=(n, m))
    diag = SolverDiagnostics(
        solver="exact", iterations=sweeps, objectives=objectives, converged=True
    )
    return OtcSolution(
        rho=rho,
        coupling=coupling,
        vertex_alignment=lam.reshape(n, m),
        cost=cm,
        diagnostics=diag,
    )


def _improve_policy(
    R: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    P: np.ndarray,
    Q: np.ndarray,
    sup_p: List[np.ndarray],
    sup_q: List[np.ndarray],
    gap_floor: float,
) -> Tuple[np.ndarray, bool]:
    n, m = P.shape[0], Q.shape[0]
    G = g.reshape(n, m)
    H = h.reshape(n, m)
    R_new = R.copy()
    changed = False
    for u in range(n):
        iu = sup_p[u]
        mu = P[u, iu]
        row_base = iu * m
        for v in range(m):
            iv = sup_q[v]
            nu = Q[v, iv]
            s = u * m + v
            Gs = G[np.ix_(iu, iv)]
            Hs = H[np.ix_(iu, iv)]
            tol_g = 1e-9 * max(1.0, float(np.abs(Gs).max()))
            tol_h = 1e-9 * max(1.0, float(np.abs(Hs).max()))
            # single lexicographic transport solve: the bias acts only within
            # gain gaps smaller than gap_floor
            hspan = float(Hs.max() - Hs.min())
            M = 1.0 + hspan / gap_floor
            Wc = (Gs - Gs.min()) + (Hs - Hs.min()) / M
            plan = transport_plan(mu, nu, Wc)
            cand_g = float((plan * Gs).sum())
            cand_h = float((plan * Hs).sum())
            old = R[s, (row_base[:, None] + iv[None, :]).ravel()].reshape(len(iu), len(iv))
            inc_g = float((old * Gs).sum())
            inc_h = float((old * Hs).sum())
            adopt = cand_g < inc_g - tol_g or (
                cand_g <= inc_g + tol_g and cand_h < inc_h - tol_h
            )
            if not adopt:
                continue
            flat = (row_base[:, None] + iv[None, :]).ravel()
            newrow = np.zeros(n * m)
            newrow[flat] = plan.ravel()
            if np.abs(newrow - R[s]).max() > ROW_CHANGE_TOL:
                changed = True
                R_new[s] = newrow
    return R_new, changed


def solve_entropic_otc(
    g1: Network,
    g2: Network,
    cost,
    outer_iters: int = 10,
    horizon: int = 50,
    xi: float = 100.0,
    sinkhorn_iters: int = 50,
) -> OtcSolution:
    """Approximate optimal transition coupling with entropic improvement.

    Each outer iteration scores states by the truncated accumulated future
    cost over the horizon (horizon times the gain plus a bias correction,
    so gain differences dominate and bias differences break ties at full
    Sinkhorn sharpness) and rebuilds every kernel row with Sinkhorn
    transport against that score. The reported value is the exact expected
    cost of the coupling produced, which upper-bounds the exact optimum up
    to the Sinkhorn marginal residual.
    """
    if outer_iters < 1 or horizon < 1 or sinkhorn_iters < 1:
        raise ValueError("outer_iters, horizon, and sinkhorn_iters must be at least 1")
    if xi <= 0:
        raise ValueError("xi must be positive")
    P, Q, cm = _prepare_instance(g1, g2, cost)
    n, m = g1.n, g2.n
    c = cm.values.ravel()
    sup_p = _row_supports(P)
    sup_q = _row_supports(Q)
    R = np.kron(P, Q)
    objectives: List[float] = []
    worst_residual = 0.0
    for _ in range(outer_iters):
        x = c.copy()
        acc = c.copy()
        for _ in range(horizon - 1):
            x = R @ x
            acc += x
        J = acc.reshape(n, m)
        R_next = np.zeros_like(R)
        for u in range(n):
            iu = sup_p[u]
            mu = P[u, iu]
            row_base = iu * m
            for v in range(m):
                iv = sup_q[v]
                nu = Q[v, iv]
                Js = J[np.ix_(iu, iv)]
                plan, resid = sinkhorn_plan(mu, nu, Js - Js.min(), xi, sinkhorn_iters)
                worst_residual = max(worst_residual, resid)
                flat = (row_base[:, None] + iv[None, :]).ravel()
                R_next[u * m + v, flat] = plan.ravel()
        R = R_next
        val, _ = best_stationary_law(R, c)
        objectives.append(val)
    rho, lam = best_stationary_law(R, c)
    coupling = TransitionCoupling(kernel=R, stationary=lam, shape=(n, m))
    diag = SolverDiagnostics(
        solver="entropic",
        iterations=outer_iters,
        objectives=objectives,
        converged=True,
        marginal_residual=worst_residual,
    )
    return OtcSolution(
        rho=rho,
        coupling=coupling,
        vertex_alignment=lam.reshape(n, m),
        cost=cm,
        diagnostics=diag,
    )


def solve_lp_oracle(g1: Network, g2: Network, cost) -> OtcSolution:
    """Globally optimal transition coupling via an occupation-measure LP.

    Variables are stationary joint-transition masses x(u, v; u', v') on the
    product edge support. Constraints: per-state conditional marginals tie x
    to the two kernels, flow balance makes the state marginal stationary,
    and the total mass is one. Guarded to small instances.
    """
    P, Q, cm = _prepare_instance(g1, g2, cost)
    n, m = g1.n, g2.n
    N = n * m
    if N > ORACLE_STATE_LIMIT:
        raise InstanceTooLarge(f"oracle limited to {ORACLE_STATE_LIMIT} product states, got {N}")
    c = cm.values.ravel()

    var_index: Dict[Tuple[int, int], int] = {}
    for u in range(n):
        for v in range(m):
            s = u * m + v
            for up in np.flatnonzero(P[u] > 0):
                for vp in np.flatnonzero(Q[v] > 0):
                    var_index[(s, int(up) * m + int(vp))] = len(var_index)
    nv = len(var_index)
    rows: List[int] = []
    cols: List[int] = []
    data: List[float] = []
    r = 0
    state_vars: List[List[Tuple[int, int]]] = [[] for _ in range(N)]
    for (s, t), k in var_index.items():
        state_vars[s].append((t, k))
    # conditional marginal constraints per state
    for u in range(n):
        for v in range(m):
            s = u * m + v
            for up in np.flatnonzero(P[u] > 0):
                coef = P[u, up]
                for t, k in state_vars[s]:
                    val = (1.0 if t // m == up else 0.0) - coef
                    if val != 0.0:
                        rows.append(r)
                        cols.append(k)
                        data.append(val)
                r += 1
            for vp in np.flatnonzero(Q[v] > 0):
                coef = Q[v, vp]
                for t, k in state_vars[s]:
                    val = (1.0 if t % m == vp else 0.0) - coef
                    if val != 0.0:
                        rows.append(r)
                        cols.append(k)
                        data.append(val)
                r += 1
    # stationarity: inflow equals outflow at every state
    for t in range(N):
        for tt, k in state_vars[t]:
            rows.append(r)
            cols.append(k)
            data.append(-1.0)
        r += 1
    for (s, t), k in var_index.items():
        rows.append(t + r - N)
        cols.append(k)
        data.append(1.0)
    # total mass
    for k in range(nv):
        rows.append(r)
        cols.append(k)
        data.append(1.0)
    r += 1
    b_eq = np.zeros(r)
    b_eq[-1] = 1.0
    obj = np.zeros(nv)
    for (s, t), k in var_index.items():
        obj[k] += c[s]
    res = linprog(
        obj,
        A_eq=csr_matrix((data, (rows, cols)), shape=(r, nv)),
        b_eq=b_eq,
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if not res.success:
        raise PreconditionViolated(f"occupation LP failed: {res.message}")
    X = np.zeros((N, N))
    for (s, t), k in var_index.items():
        X[s, t] = res.x[k]
    X[X < 1e-13] = 0.0
    mass = X.sum(axis=1)
    R = np.kron(P, Q)
    carried = mass > 1e-9
    R[carried] = X[carried] / mass[carried, None]
    rho = float(res.fun)
    _, lam = best_stationary_law(R, c)
    coupling = TransitionCoupling(kernel=R, stationary=lam, shape=(n, m))
    diag = SolverDiagnostics(solver="lp_oracle", iterations=1, objectives=[rho], converged=True)
    return OtcSolution(
        rho=rho,
        coupling=coupling,
        vertex_alignment=lam.reshape(n, m),
        cost=cm,
        diagnostics=diag,
    )


def one_step_otc_baseline(g1: Network, g2: Network, cost) -> OtcSolution:
    """Myopic transition coupling: every row is the plain optimal transport
    coupling of the two conditional next-state laws under the vertex cost."""
    P, Q, cm = _prepare_instance(g1, g2, cost)
    n, m = g1.n, g2.n
    c = cm.values.ravel()
    sup_p = _row_supports(P)
    sup_q = _row_supports(Q)
    R = np.zeros((n * m, n * m))
    for u in range(n):
        iu = sup_p[u]
        mu = P[u, iu]
        row_base = iu * m
        for v in range(m):
            iv = sup_q[v]
            nu = Q[v, iv]
            plan = transport_plan(mu, nu, cm.values[np.ix_(iu, iv)])
            flat = (row_base[:, None] + iv[None, :]).ravel()
            R[u * m + v, flat] = plan.ravel()
    rho, lam = best_stationary_law(R, c)
    coupling = TransitionCoupling(kernel=R, stationary=lam, shape=(n, m))
    diag = SolverDiagnostics(
        solver="one_step_baseline", iterations=1, objectives=[rho], converged=True
    )
    return OtcSolution(
        rho=rho,
        coupling=coupling,
        vertex_alignment=lam.reshape(n, m),
        cost=cm,
        diagnostics=diag,
    )


def multistep_average_cost(solution: OtcSolution, k: int) -> float:
    """Expected k-step average cost of the coupled walk started from its
    stationary law, computed by explicit unrolling."""
    if k < 1:
        raise ValueError("k must be at least 1")
    lam = solution.coupling.stationary
    R = solution.coupling.kernel
    c = solution.cost.values.ravel()
    dist = lam.copy()
    total = 0.0
    for _ in range(k):
        total += float(dist @ c)
        dist = dist @ R
    return total / k


@dataclass
class LowerBoundReport:
    rho: float
    degree_l1_bound: float
    weight_l1_bound: float
    marginal_ot_bound: float
    satisfied: bool
    slack: float


def verify_lower_bounds(g1: Network, g2: Network, solution: OtcSolution) -> LowerBoundReport:
    """Audit the degree, weight, and marginal-transport lower bounds on rho.

    Requires undirected networks on one vertex set with equal total degree
    and a zero-one identity cost.
    """
    if g1.directed or g2.directed:
        raise PreconditionViolated("lower bounds require undirected networks")
    if g1.n != g2.n:
        raise PreconditionViolated("lower bounds require a common vertex set")
    if solution.cost.rule != "zero_one_identity":
        raise PreconditionViolated("lower bounds require the zero-one identity cost")
    D1 = g1.total_degree()
    D2 = g2.total_degree()
    if abs(D1 - D2) > 1e-9 * max(D1, D2):
        raise PreconditionViolated("lower bounds require equal total degree")
    D = D1
    d1 = degree_vector(g1, "undirected")
    d2 = degree_vector(g2, "undirected")
    degree_bound = float(np.abs(d1 - d2).sum() / (2 * D))
    weight_bound = float(np.abs(g1.weights - g2.weights).sum() / (4 * D))
    p = stationary_matrix(transition_kernel(g1).matrix)
    q = stationary_matrix(transition_kernel(g2).matrix)
    _, ot_bound = ot_exact(p, q, solution.cost.values)
    slack = solution.rho - max(degree_bound, weight_bound, ot_bound)
    return LowerBoundReport(
        rho=solution.rho,
        degree_l1_bound=degree_bound,
        weight_l1_bound=weight_bound,
        marginal_ot_bound=ot_bound,
        satisfied=bool(slack >= -MARGINAL_TOL),
        slack=float(slack),
    )
