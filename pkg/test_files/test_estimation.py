#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

import itertools
import numpy as np
import pytest
from scipy import stats

from kinrealize.core.config.kr_config import KRCONF
from kinrealize.engine import estimation
from kinrealize.engine.code import ContractViolation, RankDeficiencyError
from kinrealize.engine.estimation import (EstimationResult, RegressionData, build_regression, confidence_region,
                                          gamma_change, lse_fit, posterior_moments, sbl_cost, sbl_fit,
                                          weighted_l1_solve, z_update)
from kinrealize.engine.kinetic import ComplexMatrix, Trajectory, monomial_eval, simulate


def _noiseless(system, rng, count=5, T=2.0, h=0.01):
    return [simulate(system, rng.random(system.n), T, h) for _ in range(count)]


def _sparse_problem(rng, N=50, noise=0.01):
    Phi = rng.normal(size=(N, 6))
    theta = np.array([0.0, 1.5, 0.0, 0.0, -2.0, 0.0])
    y = Phi.dot(theta) + noise * rng.normal(size=N)
    return Phi, y, theta


def _logdet_sigma_y(Phi, gamma, lam):
    return np.linalg.slogdet(lam * np.eye(Phi.shape[0]) + (Phi * gamma).dot(Phi.T))[1]


class TestRegression(object):
    def test_constant_trajectory(self, benchmark):
        traj = Trajectory(np.arange(4) * 0.1, np.ones((4, 5)))
        data = build_regression([traj], benchmark[0])
        assert data.num_rows == 3
        assert not data.targets.any()

    def test_rows_per_experiment(self, benchmark_system, rng):
        dataset = _noiseless(benchmark_system, rng, count=3, T=1.0, h=0.1)
        data = build_regression(dataset, benchmark_system.complexes)
        assert data.num_rows == 3 * 10
        assert data.experiments == 3
        assert data.labels == ['X1', '2X2', 'X1+X3', 'X4', 'X2+X5']

    def test_euler_consistency(self, benchmark_system, rng):
        data = build_regression(_noiseless(benchmark_system, rng), benchmark_system.complexes)
        assert np.max(np.abs(data.targets - data.Phi.dot(benchmark_system.M.T))) <= 1e-10

    def test_mismatched_steps(self, benchmark_system, rng):
        dataset = [simulate(benchmark_system, rng.random(5), 1.0, 0.1),
                   simulate(benchmark_system, rng.random(5), 1.0, 0.05)]
        with pytest.raises(ContractViolation):
            build_regression(dataset, benchmark_system.complexes)

    def test_negative_samples(self, benchmark):
        traj = Trajectory([0.0, 0.1, 0.2], np.full((3, 5), 0.5) - np.eye(3, 5))
        with pytest.raises(ContractViolation):
            build_regression([traj], benchmark[0])
        assert build_regression([traj], benchmark[0], allow_negative=True).num_rows == 2

    def test_single_sample(self, benchmark):
        with pytest.raises(ContractViolation):
            build_regression([Trajectory([0.0], np.ones((1, 5)))], benchmark[0])


class TestLeastSquares(object):
    def test_noiseless_recovery(self, benchmark_system, rng):
        data = build_regression(_noiseless(benchmark_system, rng), benchmark_system.complexes)
        result = lse_fit(data, benchmark_system.M == 0)
        assert np.max(np.abs(result.M_hat - benchmark_system.M)) <= 1e-8
        assert np.array_equal(result.support, benchmark_system.M != 0)
        assert result.method == estimation.LSE

    def test_threads(self, benchmark_system, rng):
        data = build_regression(_noiseless(benchmark_system, rng), benchmark_system.complexes)
        assert np.array_equal(lse_fit(data, threads=2).M_hat, lse_fit(data).M_hat)

    def test_zero_targets(self, rng):
        data = RegressionData(np.zeros((30, 2)), rng.random((30, 3)), 0.1)
        result = lse_fit(data, [[False, True, False], [False, False, False]])
        assert not result.M_hat.any()
        assert result.M_hat[0, 1] == 0.0

    def test_covariance_blocks(self, rng):
        Phi = rng.random((40, 3))
        data = RegressionData((Phi.dot([1.0, 0.0, -1.0]) + 0.1 * rng.normal(size=40))[:, None], Phi, 1.0)
        result = lse_fit(data, [[False, True, False]])
        cov = result.covariances[0]
        assert cov.shape == (2, 2)
        assert np.allclose(cov, cov.T)
        assert np.all(np.linalg.eigvalsh(cov) > 0)
        expected = result.sigma2[0] * np.linalg.inv(Phi[:, [0, 2]].T.dot(Phi[:, [0, 2]]))
        assert np.allclose(cov, expected)
        assert result.covariance_vec().shape == (2, 2)
        assert result.standard_errors()[0, 1] == 0.0

    def test_rank_deficiency(self, rng):
        a = rng.random(20)
        data = RegressionData(rng.random((20, 1)), np.column_stack([a, 2 * a, rng.random(20)]), 0.1)
        with pytest.raises(RankDeficiencyError) as info:
            lse_fit(data)
        assert info.value.collinear == ['psi1', 'psi2']
        assert info.value.row == 0

    def test_mask_shape(self, rng):
        with pytest.raises(ContractViolation):
            lse_fit(RegressionData(rng.random((10, 1)), rng.random((10, 3)), 0.1), np.zeros((2, 2), bool))


def _noisy(system, rng, sigma2, count=20, T=10.0, h=0.01):
    dataset = []
    for traj in _noiseless(system, rng, count, T, h):
        dataset.append(traj.with_states(traj.states + rng.normal(0.0, np.sqrt(sigma2), traj.states.shape)))
    return dataset


class TestNoiseCorrection(object):
    @pytest.mark.parametrize('Y', [None, [[3, 1, 0], [0, 2, 1]]])
    def test_derivatives(self, benchmark, rng, Y):
        complexes = benchmark[0] if Y is None else ComplexMatrix(Y)
        states = rng.uniform(0.2, 1.0, size=(8, complexes.n))
        data = build_regression([Trajectory(np.arange(8) * 0.1, states)], complexes)
        X = states[:-1]
        curvature = np.zeros(data.curvature.shape)
        for l in range(complexes.n):
            step = np.zeros(complexes.n)
            step[l] = 1e-4
            up, mid, down = (monomial_eval(complexes, X + step), monomial_eval(complexes, X),
                             monomial_eval(complexes, X - step))
            assert np.allclose(data.jacobian[:, :, l], (up - down) / 2e-4, atol=1e-7)
            curvature += 0.5 * (up - 2 * mid + down) / 1e-8
        assert np.allclose(data.curvature, curvature, atol=1e-5)

    def test_decay_normal_equations(self, decay_system, rng):
        traj = simulate(decay_system, [1.0], 1.0, 0.1)
        traj = traj.with_states(traj.states + 0.01 * rng.normal(size=traj.states.shape))
        data = build_regression([traj], decay_system.complexes, allow_negative=True)
        G, B = data.normal_equations(1e-4)
        x, y = data.Phi[:, 0], data.targets[:, 0]
        assert G[0, 0] == pytest.approx(x.dot(x) - 1e-4 * data.num_rows)
        assert B[0, 0] == pytest.approx(x.dot(y) + 1e-3 * data.num_rows)

    def test_zero_noise_is_plain_fit(self, benchmark_system, rng):
        data = build_regression(_noisy(benchmark_system, rng, 1e-4, count=3, T=2.0), benchmark_system.complexes,
                                allow_negative=True)
        mask = benchmark_system.M == 0
        assert np.array_equal(lse_fit(data, mask, noise_var=0.0).M_hat, lse_fit(data, mask).M_hat)

    def test_state_noise_bias(self, benchmark_system):
        sigma2 = 1e-4
        M = benchmark_system.M
        dataset = _noisy(benchmark_system, np.random.default_rng(2024), sigma2)
        data = build_regression(dataset, benchmark_system.complexes, allow_negative=True)
        plain = lse_fit(data, M == 0)
        corrected = lse_fit(data, M == 0, noise_var=sigma2)
        assert np.max(np.abs(corrected.M_hat - M)) < 0.2 * np.max(np.abs(plain.M_hat - M))
        assert np.all(np.abs(corrected.M_hat - M) <= 3 * corrected.standard_errors())
        assert confidence_region(corrected).contains(M)
        assert not confidence_region(plain).contains(M)

    def test_indefinite_correction_keeps_plain_fit(self, benchmark_system, rng):
        data = build_regression(_noiseless(benchmark_system, rng), benchmark_system.complexes)
        mask = benchmark_system.M == 0
        assert np.allclose(lse_fit(data, mask, noise_var=1e6).M_hat, lse_fit(data, mask).M_hat)

    def test_needs_derivatives(self, rng):
        data = RegressionData(rng.random((10, 1)), rng.random((10, 2)), 0.1)
        assert not data.has_derivatives
        with pytest.raises(ContractViolation):
            lse_fit(data, noise_var=1e-4)
        with pytest.raises(ContractViolation):
            data.normal_equations(-1.0)


class TestWeightedL1(object):
    def test_zero_lambda_is_least_squares(self, rng):
        Phi, y, _ = _sparse_problem(rng)
        theta = weighted_l1_solve(Phi, y, np.ones(6), 0.0)
        assert np.allclose(theta, np.linalg.lstsq(Phi, y, rcond=None)[0])

    def test_zero_above_threshold(self, rng):
        Phi, y, _ = _sparse_problem(rng)
        w = rng.uniform(0.5, 2.0, size=6)
        lam_max = np.max(np.abs(Phi.T.dot(y)) / w)
        assert not weighted_l1_solve(Phi, y, w, lam_max * 1.001).any()
        assert weighted_l1_solve(Phi, y, w, lam_max * 0.9).any()

    def test_soft_threshold_on_orthonormal_design(self, rng):
        for _ in range(5):
            Q = np.linalg.qr(rng.normal(size=(30, 4)))[0]
            y = rng.normal(size=30)
            b = Q.T.dot(y)
            lam = 0.5 * np.median(np.abs(b))
            expected = np.sign(b) * np.maximum(np.abs(b) - lam, 0.0)
            assert np.max(np.abs(weighted_l1_solve(Q, y, np.ones(4), lam) - expected)) <= 1e-10

    def test_infinite_weight_pins_zero(self, rng):
        Phi, y, _ = _sparse_problem(rng)
        w = np.ones(6)
        w[1] = np.inf
        theta = weighted_l1_solve(Phi, y, w, 0.01)
        assert theta[1] == 0.0
        assert theta[4] != 0.0

    def test_zero_weight_is_unpenalized(self, rng):
        Phi, y, _ = _sparse_problem(rng)
        w = np.ones(6)
        w[4] = 0.0
        theta = weighted_l1_solve(Phi, y, w, 1e6)
        assert np.allclose(np.delete(theta, 4), 0.0)
        assert theta[4] == pytest.approx(np.linalg.lstsq(Phi[:, [4]], y, rcond=None)[0][0])

    def test_bad_weights(self, rng):
        Phi, y, _ = _sparse_problem(rng)
        with pytest.raises(ContractViolation):
            weighted_l1_solve(Phi, y, -np.ones(6), 0.1)
        with pytest.raises(ContractViolation):
            weighted_l1_solve(Phi, y, np.ones(5), 0.1)
        with pytest.raises(ContractViolation):
            weighted_l1_solve(Phi, y, np.ones(6), -0.1)


class TestPosterior(object):
    def test_point_mass_prior(self, rng):
        Phi, y, _ = _sparse_problem(rng)
        mu, Sigma = posterior_moments(Phi, y, np.zeros(6), 0.1)
        assert not mu.any()
        assert np.allclose(Sigma, 0.0)

    def test_large_noise_washes_out(self, rng):
        Phi = rng.normal(size=(10, 3))
        y = rng.normal(size=10)
        mu, _ = posterior_moments(Phi, y, np.ones(3), 1e8)
        assert np.max(np.abs(mu)) <= 1e-6

    def test_ridge_form(self, rng):
        for _ in range(10):
            Phi = rng.normal(size=(20, 5))
            y = rng.normal(size=20)
            gamma = rng.uniform(0.1, 2.0, size=5)
            lam = rng.uniform(0.1, 1.0)
            mu, Sigma = posterior_moments(Phi, y, gamma, lam)
            precision = lam * np.diag(1.0 / gamma) + Phi.T.dot(Phi)
            assert np.allclose(mu, np.linalg.solve(precision, Phi.T.dot(y)))
            assert np.allclose(Sigma, lam * np.linalg.inv(precision))
            assert np.min(np.linalg.eigvalsh(Sigma)) >= -1e-10
            assert np.min(np.linalg.eigvalsh(np.diag(gamma) - Sigma)) >= -1e-10

    def test_rejects_negative_gamma(self, rng):
        with pytest.raises(ContractViolation):
            posterior_moments(rng.random((5, 2)), rng.random(5), [-1.0, 1.0], 0.1)
        with pytest.raises(ContractViolation):
            posterior_moments(rng.random((5, 2)), rng.random(5), [1.0, 1.0], 0.0)


class TestZUpdate(object):
    def test_identity_design(self):
        assert np.allclose(z_update(np.eye(4), np.zeros(4), 0.5), 2.0)

    def test_finite_differences(self, rng):
        delta = 1e-5
        for _ in range(100):
            m = int(rng.integers(1, 11))
            N = int(rng.integers(m, 51))
            Phi = rng.normal(size=(N, m))
            gamma = rng.uniform(0.1, 2.0, size=m)
            lam = rng.uniform(0.1, 2.0)
            z = z_update(Phi, gamma, lam)
            for i in range(m):
                step = np.zeros(m)
                step[i] = delta
                fd = (_logdet_sigma_y(Phi, gamma + step, lam) - _logdet_sigma_y(Phi, gamma - step, lam)) / (2 * delta)
                assert abs(z[i] - fd) <= 1e-5 * abs(fd)

    def test_large_gamma_shrinks_z(self, rng):
        Phi = rng.normal(size=(20, 3))
        values = []
        for g in (1.0, 1e4, 1e8):
            values.append(z_update(Phi, np.array([g, 1.0, 1.0]), 0.5)[0])
        assert values[0] > values[1] > values[2]
        assert values[2] < 1e-5
        assert np.all(z_update(Phi, np.array([1e4, 1.0, 1.0]), 0.5) > 0)


class TestSparseBayes(object):
    def test_zero_targets(self, rng):
        data = RegressionData(np.zeros((30, 1)), rng.normal(size=(30, 4)), 0.1)
        result = sbl_fit(data, lam=1.0)
        assert not result.M_hat.any()
        assert not result.gamma.any()
        assert not result.support.any()
        assert result.converged

    def test_first_iteration_is_lasso(self, rng):
        for _ in range(20):
            Phi, y, _ = _sparse_problem(rng, noise=0.1)
            lam = float(rng.uniform(0.01, 1.0))
            result = sbl_fit(RegressionData(y[:, None], Phi, 1.0), lam=lam, max_iter=1)
            expected = np.abs(weighted_l1_solve(Phi, y, np.ones(6), lam))
            assert np.max(np.abs(result.gamma[0] - expected)) <= 1e-8

    def test_support_recovery(self, rng):
        Phi, y, theta = _sparse_problem(rng)
        result = sbl_fit(RegressionData(y[:, None], Phi, 1.0), lam=1e-4)
        support = np.flatnonzero(result.support[0])
        assert list(support) == [1, 4]
        assert np.all(result.gamma[0][[0, 2, 3, 5]] <= KRCONF.SBL.EPS_GAMMA)
        assert result.converged

        def rss(cols):
            fit = np.linalg.lstsq(Phi[:, cols], y, rcond=None)[0]
            return np.sum((y - Phi[:, cols].dot(fit)) ** 2)

        best = min(itertools.combinations(range(6), len(support)), key=lambda c: rss(list(c)))
        assert list(best) == list(support)
        assert np.allclose(result.M_hat[0], theta, atol=0.05)
        assert result.covariances[0].shape == (2, 2)

    def test_cost_never_increases(self, rng):
        for _ in range(5):
            Phi, y, _ = _sparse_problem(rng, noise=0.3)
            result = sbl_fit(RegressionData(y[:, None], Phi, 1.0), lam=0.09)
            costs = [step['cost'] for step in result.trace[0]]
            for before, after in zip(costs, costs[1:]):
                assert after - before <= 1e-9 * max(1.0, abs(before))
            gamma = result.gamma[0]
            assert costs[-1] == pytest.approx(sbl_cost(Phi, y, gamma, 0.09))

    def test_gamma_change_is_per_coordinate(self):
        gamma = np.array([4.0, 2e-6, 0.0])
        assert gamma_change(np.array([4.0, 1e-6, 0.0]), gamma) == pytest.approx(0.5)
        assert gamma_change(np.array([4.0 + 4e-7, 2e-6, 0.0]), gamma) == pytest.approx(1e-7)
        assert gamma_change(np.array([4.0, 2e-6, 1e-3]), gamma, 1e-8) == pytest.approx(1e5)
        assert gamma_change(np.array([4.0, 2e-6, 5e-9]), gamma, 1e-8) == 0.0

    def test_square_design_solves_the_same_problem(self, rng):
        Phi, y, _ = _sparse_problem(rng, noise=0.1)
        R, t = estimation._square_design(Phi.T.dot(Phi), Phi.T.dot(y))
        assert R.shape == (6, 6)
        w = rng.uniform(0.5, 2.0, size=6)
        for lam in (0.05, 0.5, 5.0):
            assert np.allclose(weighted_l1_solve(R, t, w, lam), weighted_l1_solve(Phi, y, w, lam), atol=1e-6)

    def test_state_noise_first_iteration(self, benchmark_system, rng):
        data = build_regression(_noisy(benchmark_system, rng, 1e-4, count=3, T=2.0), benchmark_system.complexes,
                                allow_negative=True)
        G, B = data.normal_equations(1e-4)
        result = sbl_fit(data, lam=0.01, max_iter=1, noise_var=1e-4)
        for i in range(data.n):
            R, t = estimation._square_design(G, B[:, i])
            expected = np.abs(weighted_l1_solve(R, t, np.ones(data.m), 0.01))
            assert np.max(np.abs(result.gamma[i] - expected)) <= 1e-8

    def test_default_lambda(self, rng):
        Phi, y, _ = _sparse_problem(rng, noise=0.1)
        result = sbl_fit(RegressionData(y[:, None], Phi, 1.0))
        assert result.lambdas[0] == pytest.approx(0.01, rel=0.6)
        assert result.method == estimation.SBL

    def test_rejects_nonpositive_lambda(self, rng):
        Phi, y, _ = _sparse_problem(rng)
        with pytest.raises(ContractViolation):
            sbl_fit(RegressionData(y[:, None], Phi, 1.0), lam=0.0)


class TestConfidenceRegion(object):
    def test_chi_square_semi_axis(self):
        c = 0.04
        result = EstimationResult([[1.0, 0.0]], [[True, False]], [[[c]]], [c], estimation.LSE)
        region = confidence_region(result, 0.05)
        assert region.semi_axes()[0] == pytest.approx(np.sqrt(3.841458820694124 * c))
        assert region.contains(result.M_hat)
        assert not region.contains([[1.0, 0.01]])

    def test_alpha_to_one_shrinks(self):
        result = EstimationResult([[1.0, 2.0]], [[True, True]], [np.eye(2)], [1.0], estimation.LSE)
        assert np.max(confidence_region(result, 1 - 1e-9).semi_axes()) < 1e-3

    def test_empty_support(self):
        result = EstimationResult([[0.0, 0.0]], [[False, False]], [np.zeros((0, 0))], [0.0], estimation.LSE)
        assert confidence_region(result).kind == 'exact'

    def test_singular_covariance(self):
        result = EstimationResult([[1.0, 2.0]], [[True, True]], [np.ones((2, 2))], [1.0], estimation.LSE)
        region = confidence_region(result)
        assert region.contains(result.M_hat)
        assert np.all(np.isfinite(region.W))

    def test_bad_alpha(self):
        result = EstimationResult([[1.0]], [[True]], [[[1.0]]], [1.0], estimation.LSE)
        with pytest.raises(ContractViolation):
            confidence_region(result, 1.0)

    def test_coverage(self):
        rng = np.random.default_rng(7)
        Phi = rng.uniform(0.2, 1.0, size=(40, 3))
        theta = np.array([0.5, -1.0, 0.8])
        hits = 0
        for _ in range(200):
            y = Phi.dot(theta) + 0.1 * rng.normal(size=40)
            region = confidence_region(lse_fit(RegressionData(y[:, None], Phi, 1.0)), 0.05)
            hits += region.contains(theta[None, :])
        assert hits / 200.0 >= 1 - 0.05 - 0.05

    def test_joint_quantile(self):
        result = EstimationResult([[1.0, 2.0, 3.0]], [[True, True, True]], [np.diag([1.0, 4.0, 9.0])], [1.0],
                                  estimation.LSE)
        axes = np.sort(confidence_region(result, 0.1).semi_axes())
        assert np.allclose(axes, np.sqrt(stats.chi2.ppf(0.9, 3)) * np.array([1.0, 2.0, 3.0]))
