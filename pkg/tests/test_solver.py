import numpy as np
import pytest

from otcalign.costs import cost_zero_one_identity
from otcalign.errors import (
    DimensionMismatch,
    InstanceTooLarge,
    NotStronglyConnected,
    PreconditionViolated,
)
from otcalign.networks import Network, build_network, stationary_matrix, transition_kernel
from otcalign.solver import (
    OtcSolution,
    evaluate_average_cost,
    hard_alignment,
    independent_coupling,
    multistep_average_cost,
    one_step_otc_baseline,
    solve_entropic_otc,
    solve_exact_otc,
    solve_lp_oracle,
    verify_lower_bounds,
)
from otcalign.transport import ot_exact

from support import (
    enumerate_paths_average_cost,
    random_connected_undirected,
    random_strongly_connected,
    simulate_average_cost,
)


def kernels(g1, g2):
    return transition_kernel(g1).matrix, transition_kernel(g2).matrix


class TestIndependentCoupling:
    def test_single_state_chains(self):
        net = build_network(1, [(0, 0, 1.0)])
        k = transition_kernel(net)
        tc = independent_coupling(k, k)
        assert tc.kernel.shape == (1, 1) and tc.kernel[0, 0] == 1.0
        assert tc.stationary[0] == 1.0

    def test_marginal_identities_exact(self):
        rng = np.random.default_rng(0)
        for _ in range(15):
            g1 = random_strongly_connected(rng, int(rng.integers(2, 6)))
            g2 = random_strongly_connected(rng, int(rng.integers(2, 6)))
            P, Q = kernels(g1, g2)
            tc = independent_coupling(transition_kernel(g1), transition_kernel(g2))
            tc.validate(P, Q)
            left, right = tc.marginal_residuals(P, Q)
            assert max(left, right) <= 1e-12

    def test_independent_cost_upper_bounds_optimum(self):
        rng = np.random.default_rng(1)
        for _ in range(15):
            g1 = random_strongly_connected(rng, int(rng.integers(2, 5)))
            g2 = random_strongly_connected(rng, int(rng.integers(2, 5)))
            C = rng.uniform(0, 1, size=(g1.n, g2.n))
            tc = independent_coupling(transition_kernel(g1), transition_kernel(g2))
            indep_cost = float(tc.stationary @ C.ravel())
            assert solve_exact_otc(g1, g2, C).rho <= indep_cost + 1e-9


class TestSolveExact:
    def test_identical_networks_zero_cost(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            g = random_connected_undirected(rng, int(rng.integers(2, 7)))
            sol = solve_exact_otc(g, g, cost_zero_one_identity(g.n))
            assert sol.rho <= 1e-12
            assert sol.diagnostics.converged

    def test_matches_lp_oracle_on_random_instances(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            g1 = random_strongly_connected(rng, int(rng.integers(2, 5)))
            g2 = random_strongly_connected(rng, int(rng.integers(2, 5)))
            C = rng.uniform(0, 1, size=(g1.n, g2.n))
            assert abs(solve_exact_otc(g1, g2, C).rho - solve_lp_oracle(g1, g2, C).rho) <= 1e-7

    def test_objectives_monotone_nonincreasing(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            g1 = random_strongly_connected(rng, int(rng.integers(2, 6)))
            g2 = random_strongly_connected(rng, int(rng.integers(2, 6)))
            C = rng.uniform(0, 2, size=(g1.n, g2.n))
            obj = solve_exact_otc(g1, g2, C).diagnostics.objectives
            for a, b in zip(obj, obj[1:]):
                assert b <= a + 1e-12

    def test_feasibility_of_returned_coupling(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            g1 = random_strongly_connected(rng, int(rng.integers(2, 6)))
            g2 = random_strongly_connected(rng, int(rng.integers(2, 6)))
            C = rng.uniform(0, 1, size=(g1.n, g2.n))
            sol = solve_exact_otc(g1, g2, C)
            sol.coupling.validate(*kernels(g1, g2))

    def test_single_state_instance(self):
        net = build_network(1, [(0, 0, 2.0)])
        sol = solve_exact_otc(net, net, np.array([[0.37]]))
        assert sol.rho == 0.37
        assert sol.vertex_alignment[0, 0] == 1.0

    def test_rejects_disconnected(self):
        ok = build_network(2, [(0, 1, 1.0), (1, 0, 1.0)])
        bad = Network(n=2, weights=np.array([[1.0, 1.0], [0.0, 1.0]]), directed=True)
        with pytest.raises(NotStronglyConnected):
            solve_exact_otc(bad, ok, np.zeros((2, 2)))

    def test_rejects_dimension_mismatch(self):
        g = build_network(2, [(0, 1, 1.0), (1, 0, 1.0)])
        with pytest.raises(DimensionMismatch):
            solve_exact_otc(g, g, np.zeros((2, 3)))


class TestLpOracle:
    def test_identical_two_cycles(self):
        g = build_network(2, [(0, 1, 1.0), (1, 0, 1.0)])
        sol = solve_lp_oracle(g, g, cost_zero_one_identity(2))
        assert abs(sol.rho) <= 1e-10

    def test_oracle_dominates_marginal_transport(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            g1 = random_strongly_connected(rng, int(rng.integers(2, 5)))
            g2 = random_strongly_connected(rng, int(rng.integers(2, 5)))
            C = rng.uniform(0, 1, size=(g1.n, g2.n))
            p = stationary_matrix(transition_kernel(g1).matrix)
            q = stationary_matrix(transition_kernel(g2).matrix)
            _, marginal = ot_exact(p, q, C)
            assert solve_lp_oracle(g1, g2, C).rho >= marginal - 1e-9

    def test_guard_on_large_instances(self):
        rng = np.random.default_rng(7)
        g1 = random_strongly_connected(rng, 9)
        g2 = random_strongly_connected(rng, 9)
        with pytest.raises(InstanceTooLarge):
            solve_lp_oracle(g1, g2, np.zeros((9, 9)))

    def test_returned_coupling_feasible(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            g1 = random_strongly_connected(rng, 3)
            g2 = random_strongly_connected(rng, 4)
            C = rng.uniform(0, 1, size=(3, 4))
            sol = solve_lp_oracle(g1, g2, C)
            sol.coupling.validate(*kernels(g1, g2))


class TestEntropic:
    def test_identical_networks_near_zero(self):
        rng = np.random.default_rng(9)
        g = random_connected_undirected(rng, 5)
        sol = solve_entropic_otc(g, g, cost_zero_one_identity(5))
        assert sol.rho <= 0.05

    def test_within_five_percent_of_exact(self):
        rng = np.random.default_rng(10)
        checked = 0
        for _ in range(12):
            g1 = random_strongly_connected(rng, int(rng.integers(3, 7)))
            g2 = random_strongly_connected(rng, int(rng.integers(3, 7)))
            C = rng.uniform(0, 1, size=(g1.n, g2.n))
            exact = solve_exact_otc(g1, g2, C).rho
            if exact < 1e-3:
                continue
            approx = solve_entropic_otc(g1, g2, C, sinkhorn_iters=500).rho
            assert abs(approx - exact) / exact <= 0.05
            checked += 1
        assert checked >= 8

    def test_single_recurrent_class_for_aperiodic_inputs(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            # self-loops make both walks aperiodic
            g1 = random_strongly_connected(rng, 4, density=0.9)
            g2 = random_strongly_connected(rng, 4, density=0.9)
            W1 = g1.weights.copy(); np.fill_diagonal(W1, 1.0)
            W2 = g2.weights.copy(); np.fill_diagonal(W2, 1.0)
            g1 = Network(n=4, weights=W1, directed=True)
            g2 = Network(n=4, weights=W2, directed=True)
            C = rng.uniform(0, 1, size=(4, 4))
            sol = solve_entropic_otc(g1, g2, C, outer_iters=3)
            from otcalign.solver import _closed_classes

            classes, _ = _closed_classes(sol.coupling.kernel)
            assert len(classes) == 1

    def test_parameter_validation(self):
        g = build_network(2, [(0, 1, 1.0), (1, 0, 1.0)])
        with pytest.raises(ValueError):
            solve_entropic_otc(g, g, np.zeros((2, 2)), xi=0.0)
        with pytest.raises(ValueError):
            solve_entropic_otc(g, g, np.zeros((2, 2)), outer_iters=0)


class TestOneStepBaseline:
    def test_produces_valid_coupling_on_symmetric_chain(self):
        g = build_network(3, [(0, 1, 1.0), (1, 2, 1.0)], directed_flag=False)
        sol = one_step_otc_baseline(g, g, cost_zero_one_identity(3))
        sol.coupling.validate(*kernels(g, g))

    def test_never_beats_exact(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            g1 = random_strongly_connected(rng, int(rng.integers(2, 6)))
            g2 = random_strongly_connected(rng, int(rng.integers(2, 6)))
            C = rng.uniform(0, 1, size=(g1.n, g2.n))
            assert one_step_otc_baseline(g1, g2, C).rho >= solve_exact_otc(g1, g2, C).rho - 1e-9

    def test_strictly_suboptimal_instance_exists(self):
        rng = np.random.default_rng(13)
        found = False
        for _ in range(60):
            g1 = random_strongly_connected(rng, int(rng.integers(2, 6)))
            g2 = random_strongly_connected(rng, int(rng.integers(2, 6)))
            C = rng.uniform(0, 1, size=(g1.n, g2.n))
            gap = one_step_otc_baseline(g1, g2, C).rho - solve_exact_otc(g1, g2, C).rho
            if gap > 1e-6:
                found = True
                break
        assert found


class TestMultistepAverageCost:
    def test_k_one_equals_rho(self):
        rng = np.random.default_rng(14)
        g1 = random_strongly_connected(rng, 3)
        g2 = random_strongly_connected(rng, 4)
        sol = solve_exact_otc(g1, g2, rng.uniform(0, 1, size=(3, 4)))
        assert abs(multistep_average_cost(sol, 1) - sol.rho) <= 1e-12

    def test_unrolled_matches_rho_by_stationarity(self):
        rng = np.random.default_rng(15)
        for _ in range(10):
            g1 = random_strongly_connected(rng, int(rng.integers(2, 5)))
            g2 = random_strongly_connected(rng, int(rng.integers(2, 5)))
            sol = solve_exact_otc(g1, g2, rng.uniform(0, 1, size=(g1.n, g2.n)))
            for k in (2, 5):
                assert abs(multistep_average_cost(sol, k) - sol.rho) <= 1e-9

    def test_matches_exhaustive_path_enumeration(self):
        rng = np.random.default_rng(16)
        g1 = random_strongly_connected(rng, 2)
        g2 = random_strongly_connected(rng, 2)
        sol = solve_exact_otc(g1, g2, rng.uniform(0, 1, size=(2, 2)))
        for k in (1, 2, 3):
            oracle = enumerate_paths_average_cost(
                sol.coupling.stationary, sol.coupling.kernel, sol.cost.values.ravel(), k
            )
            assert abs(multistep_average_cost(sol, k) - oracle) <= 1e-12

    def test_long_run_simulation_agrees(self):
        rng = np.random.default_rng(17)
        g1 = random_strongly_connected(rng, 3)
        g2 = random_strongly_connected(rng, 3)
        C = rng.uniform(0.5, 1.5, size=(3, 3))
        sol = solve_exact_otc(g1, g2, C)
        estimate = simulate_average_cost(
            sol.coupling.stationary, sol.coupling.kernel, sol.cost.values.ravel(),
            steps=1_000_000, seed=99,
        )
        assert abs(estimate - sol.rho) <= 0.02 * max(sol.rho, 0.1)

    def test_k_validation(self):
        rng = np.random.default_rng(18)
        g = random_strongly_connected(rng, 2)
        sol = solve_exact_otc(g, g, np.zeros((2, 2)))
        with pytest.raises(ValueError):
            multistep_average_cost(sol, 0)


class TestVerifyLowerBounds:
    def test_identical_networks_all_zero(self):
        rng = np.random.default_rng(19)
        g = random_connected_undirected(rng, 5)
        sol = solve_exact_otc(g, g, cost_zero_one_identity(5))
        report = verify_lower_bounds(g, g, sol)
        assert report.satisfied
        assert report.degree_l1_bound == 0.0
        assert report.weight_l1_bound == 0.0

    def test_rebalanced_pair_bounds_hold(self):
        g1 = build_network(
            4, [(0, 1, 2.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)], directed_flag=False
        )
        g2 = build_network(
            4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 1.0)], directed_flag=False
        )
        sol = solve_exact_otc(g1, g2, cost_zero_one_identity(4))
        report = verify_lower_bounds(g1, g2, sol)
        assert report.satisfied
        assert report.rho >= report.degree_l1_bound - 1e-9
        assert report.rho >= report.weight_l1_bound - 1e-9
        assert report.rho >= report.marginal_ot_bound - 1e-9

    def test_requires_zero_one_cost(self):
        rng = np.random.default_rng(20)
        g = random_connected_undirected(rng, 4)
        sol = solve_exact_otc(g, g, np.zeros((4, 4)))
        with pytest.raises(PreconditionViolated):
            verify_lower_bounds(g, g, sol)

    def test_requires_equal_total_degree(self):
        g1 = build_network(2, [(0, 1, 1.0)], directed_flag=False)
        g2 = build_network(2, [(0, 1, 2.0)], directed_flag=False)
        sol = solve_exact_otc(g1, g1, cost_zero_one_identity(2))
        with pytest.raises(PreconditionViolated):
            verify_lower_bounds(g1, g2, sol)


class TestHardAlignment:
    def test_diagonal(self):
        assert np.array_equal(hard_alignment(np.eye(3)), [0, 1, 2])

    def test_row_argmax(self):
        assert hard_alignment(np.array([[0.2, 0.5, 0.3]]))[0] == 1

    def test_tie_breaks_to_lowest_index(self):
        assert hard_alignment(np.array([[0.5, 0.5]]))[0] == 0

    def test_rejects_negative(self):
        with pytest.raises(PreconditionViolated):
            hard_alignment(np.array([[-0.1, 1.1]]))


class TestEvaluation:
    def test_gain_and_bias_equations_hold(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            N = int(rng.integers(2, 12))
            R = rng.dirichlet(np.ones(N), size=N)
            c = rng.uniform(0, 1, size=N)
            g, h, _ = evaluate_average_cost(R, c)
            assert np.abs(R @ g - g).max() <= 1e-9
            assert np.abs(g + h - c - R @ h).max() <= 1e-9

    def test_multichain_structure(self):
        # two absorbing blocks with a transient bridge
        R = np.array(
            [
                [0.5, 0.5, 0.0, 0.0, 0.0],
                [0.5, 0.5, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.7, 0.3, 0.0],
                [0.0, 0.0, 0.3, 0.7, 0.0],
                [0.25, 0.25, 0.25, 0.25, 0.0],
            ]
        )
        c = np.array([1.0, 1.0, 3.0, 3.0, 0.0])
        g, h, infos = evaluate_average_cost(R, c)
        assert np.allclose(g[:2], 1.0) and np.allclose(g[2:4], 3.0)
        assert np.isclose(g[4], 2.0)
        assert len(infos) == 2
