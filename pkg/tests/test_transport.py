import numpy as np
import pytest

from otcalign.errors import DimensionMismatch, MarginalInvalid
from otcalign.transport import (
    Coupling,
    ot_exact,
    ot_sinkhorn,
    sinkhorn_plan,
    total_variation,
)

from support import lp_transport_value


def random_instance(rng, zero_mass_chance=0.3):
    na, nb = rng.integers(1, 9, size=2)
    mu = rng.dirichlet(np.ones(na) * rng.uniform(0.3, 3.0))
    nu = rng.dirichlet(np.ones(nb) * rng.uniform(0.3, 3.0))
    if na > 2 and rng.random() < zero_mass_chance:
        mu[rng.integers(0, na)] = 0.0
        mu /= mu.sum()
    C = rng.uniform(0.0, 5.0, size=(na, nb))
    if rng.random() < 0.25:
        C = np.round(C)  # exercise degenerate ties
    return mu, nu, C


class TestOtExact:
    def test_point_masses(self):
        c = np.array([[4.2]])
        coupling, value = ot_exact([1.0], [1.0], c)
        assert value == 4.2
        assert coupling.plan[0, 0] == 1.0

    def test_identity_cost_same_support(self):
        mu = np.array([0.3, 0.7])
        C = 1.0 - np.eye(2)
        coupling, value = ot_exact(mu, mu, C)
        assert abs(value) <= 1e-12
        coupling.validate()

    def test_matches_independent_lp_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(120):
            mu, nu, C = random_instance(rng)
            _, value = ot_exact(mu, nu, C)
            assert abs(value - lp_transport_value(mu, nu, C)) <= 1e-9

    def test_flow_and_lp_engines_agree(self):
        rng = np.random.default_rng(12)
        for _ in range(40):
            mu, nu, C = random_instance(rng)
            _, v1 = ot_exact(mu, nu, C, engine="flow")
            _, v2 = ot_exact(mu, nu, C, engine="lp")
            assert abs(v1 - v2) <= 1e-9

    def test_never_beats_feasible_and_never_exceeds_independent(self):
        rng = np.random.default_rng(13)
        for _ in range(40):
            mu, nu, C = random_instance(rng)
            _, value = ot_exact(mu, nu, C)
            assert value <= float(mu @ C @ nu) + 1e-12

    def test_coupling_invariants(self):
        rng = np.random.default_rng(14)
        for _ in range(40):
            mu, nu, C = random_instance(rng)
            coupling, _ = ot_exact(mu, nu, C)
            coupling.validate(tol=1e-9)

    def test_invalid_marginals(self):
        with pytest.raises(MarginalInvalid):
            ot_exact([0.5, 0.4], [1.0], np.zeros((2, 1)))
        with pytest.raises(MarginalInvalid):
            ot_exact([0.5, -0.5, 1.0], [1.0], np.zeros((3, 1)))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            ot_exact([1.0], [1.0], np.zeros((2, 2)))


class TestOtSinkhorn:
    def test_zero_cost_gives_independent_coupling(self):
        rng = np.random.default_rng(15)
        mu = rng.dirichlet(np.ones(5))
        nu = rng.dirichlet(np.ones(4))
        coupling, value = ot_sinkhorn(mu, nu, np.zeros((5, 4)), xi=100.0, iters=50)
        assert np.abs(coupling.plan - np.outer(mu, nu)).max() <= 1e-12
        assert value == 0.0

    def test_sharp_regularization_approaches_exact(self):
        rng = np.random.default_rng(16)
        for _ in range(10):
            mu = rng.dirichlet(np.ones(4))
            nu = rng.dirichlet(np.ones(4))
            C = rng.uniform(0, 1, size=(4, 4))
            _, exact_value = ot_exact(mu, nu, C)
            _, sharp_value = ot_sinkhorn(mu, nu, C, xi=1000.0, iters=30000)
            assert abs(sharp_value - exact_value) <= 1e-3

    def test_residual_decreases_with_iterations(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            mu = rng.dirichlet(np.ones(5))
            nu = rng.dirichlet(np.ones(6))
            C = rng.uniform(0, 1, size=(5, 6))
            residuals = [
                sinkhorn_plan(mu, nu, C, xi=30.0, iters=k)[1] for k in (1, 3, 10, 30, 100)
            ]
            for early, late in zip(residuals, residuals[1:]):
                assert late <= early + 1e-12

    def test_rows_exact_columns_within_residual(self):
        rng = np.random.default_rng(18)
        mu = rng.dirichlet(np.ones(6))
        nu = rng.dirichlet(np.ones(5))
        C = rng.uniform(0, 2, size=(6, 5))
        coupling, _ = ot_sinkhorn(mu, nu, C, xi=100.0, iters=20)
        row_err, col_err, _ = coupling.marginal_errors()
        assert row_err <= 1e-12
        assert col_err <= coupling.residual + 1e-12

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            ot_sinkhorn([1.0], [1.0], np.zeros((1, 1)), xi=-1.0, iters=5)
        with pytest.raises(ValueError):
            ot_sinkhorn([1.0], [1.0], np.zeros((1, 1)), xi=1.0, iters=0)


class TestTotalVariation:
    def test_identical(self):
        assert total_variation([0.25, 0.75], [0.25, 0.75]) == 0.0

    def test_disjoint_point_masses(self):
        assert total_variation([1.0, 0.0], [0.0, 1.0]) == 1.0

    def test_equals_zero_one_transport(self):
        rng = np.random.default_rng(19)
        for _ in range(30):
            n = int(rng.integers(2, 8))
            mu = rng.dirichlet(np.ones(n))
            nu = rng.dirichlet(np.ones(n))
            _, value = ot_exact(mu, nu, 1.0 - np.eye(n))
            assert abs(value - total_variation(mu, nu)) <= 1e-9

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            total_variation([1.0], [0.5, 0.5])


def test_coupling_validate_catches_bad_plan():
    bad = Coupling(
        plan=np.array([[0.5, 0.0], [0.0, 0.2]]),
        row_marginal=np.array([0.5, 0.5]),
        col_marginal=np.array([0.5, 0.5]),
    )
    with pytest.raises(MarginalInvalid):
        bad.validate()
