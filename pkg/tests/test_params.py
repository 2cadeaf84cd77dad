import json

import numpy as np
import pytest

from rbm_mlmc import (AssumptionError, FactorizationError, NetworkParams, ParameterError,
                      UniformityConstants, build_symmetric, check_assumptions,
                      cholesky_factor, load_network, require_assumptions,
                      steady_state_truth, symmetric_constants)


class TestBuildSymmetric:
    def test_d5_beta08_couplings(self, symmetric5):
        # off-diagonals are -(1-beta)/(d-1) = -0.05 and +0.05 in the reflection
        assert symmetric5.sigma[0, 1] == pytest.approx(-0.05, abs=1e-15)
        assert symmetric5.refl[0, 1] == pytest.approx(-0.05, abs=1e-15)
        assert np.all(np.diag(symmetric5.sigma) == 1.0)
        assert np.all(np.diag(symmetric5.refl) == 1.0)
        assert np.all(symmetric5.mu == -1.0)

    def test_near_critical_load_stays_positive_definite(self):
        params = build_symmetric(2, 0.999)
        assert params.sigma[0, 1] == pytest.approx(-0.001, abs=1e-15)
        assert -params.refl[0, 1] == pytest.approx(0.001, abs=1e-15)
        eigs = np.sort(np.linalg.eigvalsh(params.sigma))
        assert eigs == pytest.approx([0.999, 1.001], abs=1e-12)
        assert eigs.min() > 0

    def test_routing_row_sums_equal_one_minus_beta(self):
        params = build_symmetric(10, 0.5)
        row_sums = params.q.sum(axis=1)
        assert row_sums == pytest.approx(np.full(10, 0.5), abs=1e-12)
        # oracle for the contraction assumption: explicit powers of the
        # routing matrix up to n = 64 against kappa0 * (1 - beta0)^n
        power = params.q.copy()
        for n in range(1, 65):
            col_sum = power.sum(axis=0).max()
            assert col_sum <= 1.0 * 0.5**n + 1e-12
            power = power @ params.q

    def test_sigma_spectrum(self):
        for d, beta in [(5, 0.8), (17, 0.3), (50, 0.95)]:
            params = build_symmetric(d, beta)
            rho = params.sigma[0, 1]
            eigs = np.sort(np.linalg.eigvalsh(params.sigma))
            assert eigs[0] == pytest.approx(beta, abs=1e-9)
            assert eigs[-1] == pytest.approx(1 - rho, abs=1e-9)
            assert eigs.min() >= beta - 1e-9

    def test_m_matrix_roundtrip(self, symmetric10):
        inv = symmetric10.refl_inverse()
        assert np.abs(symmetric10.refl @ inv - np.eye(10)).max() < 1e-9
        assert inv.min() >= -1e-12
        assert np.diag(inv).min() >= 1.0

    def test_dimension_and_load_guards(self):
        with pytest.raises(ParameterError):
            build_symmetric(1, 0.8)
        with pytest.raises(ParameterError):
            build_symmetric(5, 0.0)
        with pytest.raises(ParameterError):
            build_symmetric(5, 1.0)

    def test_mu_override(self):
        params = build_symmetric(4, 0.8, mu=[-2.0, -2.0, -2.0, -2.0])
        assert np.all(params.mu == -2.0)

    def test_zero_drift_fails_stability(self):
        with pytest.raises(ParameterError, match="stability"):
            build_symmetric(5, 0.8, mu=np.zeros(5))


class TestSteadyStateTruth:
    def test_beta08_gives_04(self):
        for d in (2, 5, 40):
            assert steady_state_truth(build_symmetric(d, 0.8), 0.8) == pytest.approx(0.4, abs=1e-14)

    def test_beta05_d7(self):
        assert steady_state_truth(build_symmetric(7, 0.5), 0.5) == pytest.approx(0.25, abs=1e-14)

    def test_long_form_identity(self):
        d, beta = 10, 0.8
        r = (1 - beta) / (d - 1)
        rho = -r
        long_form = (1 - (d - 2) * r + (d - 1) * r * rho) / (2 * (1 + r))
        assert abs(long_form - beta / 2) <= 1e-12

    def test_rejects_inconsistent_model(self, symmetric5):
        with pytest.raises(ParameterError):
            steady_state_truth(symmetric5, 0.5)  # wrong beta for this network


class TestCholeskyFactor:
    def test_identity(self):
        assert np.array_equal(cholesky_factor(np.eye(3)), np.eye(3))

    def test_symmetric_family_roundtrip(self, symmetric5):
        c = cholesky_factor(symmetric5.sigma)
        assert np.abs(c @ c.T - symmetric5.sigma).max() < 1e-10
        assert np.abs(np.triu(c, k=1)).max() == 0.0

    def test_rejects_indefinite(self, rng):
        basis, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        sigma = basis @ np.diag([1.0, 0.7, 0.3, -0.01]) @ basis.T
        with pytest.raises(FactorizationError):
            cholesky_factor(sigma)

    def test_error_names_leading_minor(self):
        sigma = np.diag([1.0, -0.5, 1.0])
        with pytest.raises(FactorizationError, match="minor|eigenvalue"):
            cholesky_factor(sigma)


class TestCheckAssumptions:
    def test_symmetric_d10_all_ok(self, symmetric10):
        constants = UniformityConstants(beta0=0.8, kappa0=1.0, delta0=1.0, b0=1.0)
        report = check_assumptions(symmetric10, constants, n_max=32)
        assert report.all_ok and report.a1_ok and report.a2_ok and report.a3_ok
        # drift balance is -(1/beta) = -1.25 per coordinate, margin -0.25
        assert report.a2_margin == pytest.approx(-0.25, abs=1e-12)
        assert report.a1_exact

    def test_decoupled_stations(self):
        d = 4
        params = NetworkParams.from_matrices(-np.ones(d), np.eye(d), np.eye(d))
        constants = UniformityConstants(beta0=0.5, kappa0=1.0, delta0=0.5, b0=1.0)
        report = check_assumptions(params, constants)
        assert report.all_ok
        assert report.a1_margin == 0.0  # routing matrix is identically zero

    def test_overclaimed_contraction_rate_fails(self, symmetric10):
        constants = UniformityConstants(beta0=0.9, kappa0=1.0, delta0=1.0, b0=1.0)
        report = check_assumptions(symmetric10, constants, n_max=16)
        assert not report.a1_ok
        # row sums decay at 0.2^n, the claim decays at 0.1^n: ratio 2^n
        assert report.a1_margin > 2.0**15

    def test_refl_inverse_bound_under_a1(self):
        for d, beta in [(5, 0.8), (25, 0.6)]:
            params = build_symmetric(d, beta)
            constants = symmetric_constants(beta)
            report = check_assumptions(params, constants)
            assert report.a1_ok
            bound = constants.kappa0 / constants.beta0
            assert np.abs(params.refl_inverse() @ np.ones(d)).max() <= bound + 1e-12

    def test_require_assumptions_raises(self, symmetric10):
        bad = UniformityConstants(beta0=0.9, kappa0=1.0, delta0=1.0, b0=1.0)
        with pytest.raises(AssumptionError, match="A1"):
            require_assumptions(symmetric10, bad)

    def test_n_max_guard(self, symmetric10):
        with pytest.raises(ParameterError):
            check_assumptions(symmetric10, symmetric_constants(0.8), n_max=0)


class TestUniformityConstants:
    def test_validation(self):
        with pytest.raises(ParameterError):
            UniformityConstants(beta0=1.5, kappa0=1.0, delta0=1.0, b0=1.0)
        with pytest.raises(ParameterError):
            UniformityConstants(beta0=0.5, kappa0=-1.0, delta0=1.0, b0=1.0)

    def test_b1(self):
        constants = UniformityConstants(beta0=0.8, kappa0=2.0, delta0=1.0, b0=1.0)
        assert constants.b1 == pytest.approx(2.5)


class TestFromMatrices:
    def test_rejects_super_stochastic_routing(self):
        refl = np.array([[1.0, -0.7], [-0.7, 1.0]])  # routing row sums 0.7: fine
        params = NetworkParams.from_matrices([-1.0, -1.0], np.eye(2), refl)
        assert params.d == 2
        worse = np.array([[1.0, -1.2], [-1.2, 1.0]])  # row sums 1.2: not substochastic
        with pytest.raises(ParameterError):
            NetworkParams.from_matrices([-1.0, -1.0], np.eye(2), worse)

    def test_rejects_positive_offdiagonal(self):
        refl = np.array([[1.0, 0.3], [-0.1, 1.0]])
        with pytest.raises(ParameterError, match="negative entries"):
            NetworkParams.from_matrices([-1.0, -1.0], np.eye(2), refl)

    def test_rejects_asymmetric_sigma(self):
        sigma = np.array([[1.0, 0.5], [0.1, 1.0]])
        with pytest.raises(ParameterError, match="symmetric"):
            NetworkParams.from_matrices([-1.0, -1.0], sigma, np.eye(2))

    def test_arrays_are_frozen(self, symmetric5):
        with pytest.raises(ValueError):
            symmetric5.sigma[0, 0] = 2.0


class TestLoadNetwork:
    def test_symmetric_config(self, tmp_path):
        path = tmp_path / "net.json"
        path.write_text(json.dumps({"d": 6, "beta": 0.8}))
        params = load_network(path)
        assert params.d == 6
        assert steady_state_truth(params, 0.8) == pytest.approx(0.4)

    def test_explicit_matrices(self, tmp_path):
        spec = {"mu": [-1.0], "sigma": [[2.0]], "refl": [[1.0]]}
        path = tmp_path / "net.json"
        path.write_text(json.dumps(spec))
        params = load_network(path)
        assert params.d == 1
        assert params.sigma[0, 0] == 2.0

    def test_missing_keys(self, tmp_path):
        path = tmp_path / "net.json"
        path.write_text(json.dumps({"mu": [-1.0]}))
        with pytest.raises(ParameterError, match="missing keys"):
            load_network(path)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "net.json"
        path.write_text("{not json")
        with pytest.raises(ParameterError, match="malformed"):
            load_network(path)
