#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

"""
Coefficient estimation from sampled trajectories.

Every state derivative is approximated by a forward difference and regressed on the
monomials of the preceding sample, one row of M at a time. Two estimators are offered:
equality-constrained least squares (LSE) over a fixed support, and sparse Bayesian
learning (SBL) solved as a sequence of reweighted L1 problems.

SBL quantities are computed in the m x m parameter space. With G = Phi^T Phi, b = Phi^T y
and Gamma = diag(gamma):
    mu_theta      = Gamma (lambda I + G Gamma)^-1 b
    Sigma_theta   = Gamma - Gamma (lambda I + G Gamma)^-1 G Gamma
    z             = diag((lambda I + G Gamma)^-1 G)
    log|Sigma_y|  = N log(lambda) + log|I + Gamma G / lambda|

When the samples carry additive state noise of known variance s, the regressor psi(x_k-1) and
the target (x_k - x_k-1) / h share the noise of x_k-1. Both estimators then work on the
corrected normal equations, with J the monomial Jacobian and c_a = 1/2 sum_l d2 psi_a / dx_l^2:
    G_c = sum_k psi psi^T - s (J J^T + c psi^T + psi c^T)
    b_c = sum_k psi y_i + (s / h) J[:, i] - s c y_i
"""

import warnings
import numpy as np
from scipy import linalg, stats
from sklearn.linear_model import Lasso
from sklearn.exceptions import ConvergenceWarning
from joblib import Parallel, delayed
from ..core.config.kr_config import KRCONF
from ..core.utils.log import logger
from .code import ContractViolation, NumericFailure, RankDeficiencyError
from .kinetic import monomial_eval
from .realization import UncertaintyRegion

LSE = 'LSE'
SBL = 'SBL'


class RegressionData(object):
    """
    Stacked regression problem: targets[:, i] = Phi theta_i + noise for every state i

    :param jacobian: rows x m x n derivatives of the monomials at the regressor samples, optional
    :param curvature: rows x m half Laplacians of the monomials, optional
    """
    def __init__(self, targets, Phi, h, labels=None, experiments=1, jacobian=None, curvature=None):
        targets = np.array(np.atleast_2d(targets), dtype=float)
        Phi = np.array(np.atleast_2d(Phi), dtype=float)
        if targets.shape[0] != Phi.shape[0]:
            raise ContractViolation('{} targets rows but {} regressor rows'.format(targets.shape[0], Phi.shape[0]))
        if (jacobian is None) != (curvature is None):
            raise ContractViolation('monomial jacobian and curvature come together')
        if jacobian is not None:
            jacobian = np.asarray(jacobian, dtype=float)
            curvature = np.asarray(curvature, dtype=float)
            if jacobian.shape != Phi.shape + (targets.shape[1],) or curvature.shape != Phi.shape:
                raise ContractViolation('monomial derivatives of shape {} and {} do not match {} regressors'.format(
                    jacobian.shape, curvature.shape, Phi.shape))
        targets.setflags(write=False)
        Phi.setflags(write=False)
        self._targets = targets
        self._Phi = Phi
        self._h = float(h)
        self._labels = list(labels) if labels is not None else ['psi{}'.format(j + 1) for j in range(Phi.shape[1])]
        self._experiments = experiments
        self._jacobian = jacobian
        self._curvature = curvature
        self._gram = None

    @property
    def targets(self):
        return self._targets

    @property
    def Phi(self):
        return self._Phi

    @property
    def h(self):
        return self._h

    @property
    def labels(self):
        return self._labels

    @property
    def experiments(self):
        return self._experiments

    @property
    def n(self):
        return self._targets.shape[1]

    @property
    def m(self):
        return self._Phi.shape[1]

    @property
    def num_rows(self):
        return self._Phi.shape[0]

    @property
    def gram(self):
        if self._gram is None:
            gram = self._Phi.T.dot(self._Phi)
            gram.setflags(write=False)
            self._gram = gram
        return self._gram

    @property
    def jacobian(self):
        return self._jacobian

    @property
    def curvature(self):
        return self._curvature

    @property
    def has_derivatives(self):
        return self._jacobian is not None

    def y(self, i):
        return self._targets[:, i]

    def normal_equations(self, noise_var=None):
        """
        (G, B) with B[:, i] the right-hand side of row i, corrected for state noise of variance noise_var
        """
        B = self._Phi.T.dot(self._targets)
        if not noise_var:
            return self.gram, B
        if noise_var < 0:
            raise ContractViolation('noise variance must be nonnegative, got {}'.format(noise_var))
        if not self.has_derivatives:
            raise ContractViolation('noise correction needs the monomial derivatives of the regressors')
        J, c = self._jacobian, self._curvature
        cross = c.T.dot(self._Phi)
        G = self.gram - noise_var * (np.einsum('kal,kbl->ab', J, J) + cross + cross.T)
        B = B + noise_var / self._h * J.sum(axis=0) - noise_var * c.T.dot(self._targets)
        return (G + G.T) / 2, B


class EstimationResult(object):
    def __init__(self, M_hat, support, covariances, sigma2, method, gamma=None, trace=None, lambdas=None,
                 converged=None):
        self._M_hat = np.array(M_hat, dtype=float)
        self._support = np.asarray(support, dtype=bool)
        self._M_hat[~self._support] = 0.0
        self._covariances = [np.asarray(c, dtype=float) for c in covariances]
        self._sigma2 = np.asarray(sigma2, dtype=float)
        self._method = method
        self._gamma = None if gamma is None else np.asarray(gamma, dtype=float)
        self._trace = trace or []
        self._lambdas = None if lambdas is None else np.asarray(lambdas, dtype=float)
        self._converged = list(converged) if converged is not None else [True] * self._M_hat.shape[0]

    @property
    def M_hat(self):
        return self._M_hat

    @property
    def support(self):
        """
        n x m boolean, True where the estimate is free to be nonzero
        """
        return self._support

    @property
    def covariances(self):
        """
        Per-row covariance over the supported entries of that row, in column order
        """
        return self._covariances

    @property
    def sigma2(self):
        return self._sigma2

    @property
    def method(self):
        return self._method

    @property
    def gamma(self):
        return self._gamma

    @property
    def trace(self):
        return self._trace

    @property
    def lambdas(self):
        return self._lambdas

    @property
    def converged(self):
        return all(self._converged)

    def standard_errors(self):
        se = np.zeros(self._M_hat.shape)
        for i, cov in enumerate(self._covariances):
            cols = np.flatnonzero(self._support[i])
            se[i, cols] = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        return se

    def covariance_vec(self):
        """
        Block-diagonal covariance over the supported entries of vec(M), row-major
        """
        blocks = [c for c in self._covariances if c.size]
        if not blocks:
            return np.zeros((0, 0))
        return linalg.block_diag(*blocks)


def _monomials(complexes, X, allow_negative):
    if not allow_negative:
        return monomial_eval(complexes, X)
    return np.prod(np.power(X[:, :, None], complexes.Y[None, :, :]), axis=1)


def _monomial_derivatives(complexes, X):
    Y = complexes.Y
    n, m = Y.shape
    J = np.zeros((X.shape[0], m, n))
    c = np.zeros((X.shape[0], m))
    for l in range(n):
        once = Y.copy()
        once[l] = np.maximum(Y[l] - 1, 0)
        J[:, :, l] = Y[l] * np.prod(np.power(X[:, :, None], once[None, :, :]), axis=1)
        twice = Y.copy()
        twice[l] = np.maximum(Y[l] - 2, 0)
        c += 0.5 * Y[l] * (Y[l] - 1) * np.prod(np.power(X[:, :, None], twice[None, :, :]), axis=1)
    return J, c


def build_regression(dataset, complexes, allow_negative=False):
    """
    Stack forward-difference targets and monomial regressors over all experiments

    :param dataset: list of Trajectory sharing one sample step
    :param allow_negative: accept negative samples with a warning instead of failing
    """
    dataset = list(dataset)
    if not dataset:
        raise ContractViolation('no trajectories to build a regression from')
    h = dataset[0].h
    targets, regressors, jacobians, curvatures = [], [], [], []
    for e, traj in enumerate(dataset):
        if traj.num_samples < 2:
            raise ContractViolation('experiment {} has {} samples, need at least 2'.format(e, traj.num_samples))
        if traj.n != complexes.n:
            raise ContractViolation('experiment {} has {} states, complexes expect {}'.format(e, traj.n, complexes.n))
        if not np.isclose(traj.h, h, rtol=1e-9, atol=0.0):
            raise ContractViolation('experiment {} has sample step {}, expected {}'.format(e, traj.h, h))
        X = traj.states
        if np.any(X < 0):
            if not allow_negative:
                raise ContractViolation('experiment {} has negative samples (min {:.3e})'.format(e, X.min()))
            logger.warning('experiment {} has negative samples (min {:.3e}), kept as requested'.format(e, X.min()))
        targets.append(np.diff(X, axis=0) / h)
        regressors.append(_monomials(complexes, X[:-1], allow_negative))
        J, c = _monomial_derivatives(complexes, X[:-1])
        jacobians.append(J)
        curvatures.append(c)
    data = RegressionData(np.vstack(targets), np.vstack(regressors), h,
                          labels=[complexes.formula(j) for j in range(complexes.m)], experiments=len(dataset),
                          jacobian=np.concatenate(jacobians), curvature=np.vstack(curvatures))
    logger.verbose('regression with {} rows over {} experiments'.format(data.num_rows, len(dataset)))
    return data


def _collinear(Phi_S, columns, labels):
    _, s, Vt = np.linalg.svd(Phi_S, full_matrices=False)
    null = np.abs(Vt[-1])
    return [labels[columns[k]] for k in np.flatnonzero(null > 1e-8 * null.max())]


def _positive_definite(G):
    try:
        np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        return False
    return True


def _lse_row(data, i, free, corrected):
    cols = np.flatnonzero(free)
    y = data.y(i)
    N = data.num_rows
    theta = np.zeros(data.m)
    if cols.size == 0:
        return theta, np.zeros((0, 0)), float(y.dot(y)) / N
    if N <= cols.size:
        raise ContractViolation('row {} has {} free parameters but only {} samples'.format(i, cols.size, N))
    Phi_S = data.Phi[:, cols]
    theta_S, _, rank, _ = np.linalg.lstsq(Phi_S, y, rcond=None)
    if rank < cols.size:
        raise RankDeficiencyError(_collinear(Phi_S, cols, data.labels), row=i)
    G_S = data.gram[np.ix_(cols, cols)]
    if corrected is not None:
        G, B = corrected
        G_c = G[np.ix_(cols, cols)]
        if _positive_definite(G_c):
            G_S = G_c
            theta_S = np.linalg.solve(G_S, B[cols, i])
        else:
            logger.warning('row {}: noise-corrected gram is not positive definite, kept the plain fit'.format(i))
    r = y - Phi_S.dot(theta_S)
    sigma2 = float(r.dot(r)) / (N - cols.size)
    cov = sigma2 * np.linalg.inv(G_S)
    theta[cols] = theta_S
    return theta, (cov + cov.T) / 2, sigma2


def lse_fit(data, zero_mask=None, threads=1, noise_var=None):
    """
    Least squares per row with the masked entries fixed at zero

    :param zero_mask: n x m boolean, True entries are forced to zero; None fits the full support
    :param noise_var: variance of additive state noise on the samples; removes the bias it puts on
        the plain fit. None or 0 fits the samples as they are
    """
    free = np.ones((data.n, data.m), dtype=bool)
    if zero_mask is not None:
        zero_mask = np.asarray(zero_mask, dtype=bool)
        if zero_mask.shape != free.shape:
            raise ContractViolation('zero mask shape {} does not match ({}, {})'.format(zero_mask.shape, *free.shape))
        free = ~zero_mask
    corrected = data.normal_equations(noise_var) if noise_var else None
    rows = Parallel(n_jobs=threads, prefer='threads')(
        delayed(_lse_row)(data, i, free[i], corrected) for i in range(data.n))
    M_hat = np.vstack([r[0] for r in rows])
    return EstimationResult(M_hat, free, [r[1] for r in rows], [r[2] for r in rows], LSE)


def _lstsq(Phi, y):
    return np.linalg.lstsq(Phi, y, rcond=None)[0]


def weighted_l1_solve(Phi, y, w, lam, tol=KRCONF.SBL.L1_TOL, max_iter=KRCONF.SBL.L1_MAX_ITER):
    """
    argmin ||y - Phi theta||^2 + 2 lam sum_i w_i |theta_i|

    Infinite weights pin the coordinate at zero, zero weights leave it unpenalized.
    """
    Phi = np.atleast_2d(np.asarray(Phi, dtype=float))
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    N, m = Phi.shape
    if w.shape != (m,) or np.any(np.isnan(w)) or np.any(w < 0):
        raise ContractViolation('weights must be {} nonnegative numbers'.format(m))
    if lam < 0:
        raise ContractViolation('lambda must be nonnegative')
    theta = np.zeros(m)
    active = np.flatnonzero(np.isfinite(w))
    if active.size == 0:
        return theta
    if lam == 0:
        theta[active] = _lstsq(Phi[:, active], y)
        return theta
    free = active[w[active] == 0]
    penalized = active[w[active] > 0]
    X = Phi[:, penalized] / w[penalized]
    target = y
    if free.size:
        Q = np.linalg.qr(Phi[:, free])[0]
        X = X - Q.dot(Q.T.dot(X))
        target = y - Q.dot(Q.T.dot(y))
    beta = np.zeros(penalized.size)
    if penalized.size:
        model = Lasso(alpha=lam / N, fit_intercept=False, tol=tol, max_iter=max_iter, precompute=True,
                      selection='cyclic')
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always', ConvergenceWarning)
            model.fit(X, target)
        if any(issubclass(c.category, ConvergenceWarning) for c in caught):
            logger.warning('weighted L1 solve stopped at max_iter={} with dual gap {:.3e}'.format(
                max_iter, float(np.max(model.dual_gap_))))
        beta = np.asarray(model.coef_, dtype=float).ravel()
        theta[penalized] = beta / w[penalized]
    if free.size:
        theta[free] = _lstsq(Phi[:, free], y - Phi[:, penalized].dot(theta[penalized]))
    if not np.all(np.isfinite(theta)):
        raise NumericFailure('weighted L1 solve produced non-finite coefficients')
    return theta


def _posterior(G, b, gamma, lam):
    K = lam * np.eye(G.shape[0]) + G * gamma[None, :]
    mu = gamma * np.linalg.solve(K, b)
    Sigma = np.diag(gamma) - gamma[:, None] * np.linalg.solve(K, G * gamma[None, :])
    return mu, (Sigma + Sigma.T) / 2


def _check_gamma(gamma, lam):
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0) or not np.all(np.isfinite(gamma)):
        raise ContractViolation('gamma must be finite and nonnegative')
    if lam <= 0:
        raise ContractViolation('lambda must be positive')
    return gamma


def posterior_moments(Phi, y, gamma, lam):
    """
    Posterior mean and covariance of theta under the prior N(0, diag(gamma)) and noise variance lam
    """
    Phi = np.atleast_2d(np.asarray(Phi, dtype=float))
    gamma = _check_gamma(gamma, lam)
    return _posterior(Phi.T.dot(Phi), Phi.T.dot(np.asarray(y, dtype=float)), gamma, lam)


def _z(G, gamma, lam):
    K = lam * np.eye(G.shape[0]) + G * gamma[None, :]
    return np.diag(np.linalg.solve(K, G)).copy()


def z_update(Phi, gamma, lam):
    """
    Gradient of log|lam I + Phi diag(gamma) Phi^T| with respect to gamma
    """
    Phi = np.atleast_2d(np.asarray(Phi, dtype=float))
    gamma = _check_gamma(gamma, lam)
    return _z(Phi.T.dot(Phi), gamma, lam)


def _logdet_sigma_y(G, gamma, lam, N):
    sign, logdet = np.linalg.slogdet(np.eye(G.shape[0]) + gamma[:, None] * G / lam)
    if sign <= 0:
        raise NumericFailure('marginal covariance lost positive definiteness')
    return N * np.log(lam) + logdet


def _cost(G, b, yy, N, gamma, lam):
    mu, _ = _posterior(G, b, gamma, lam)
    return (yy - b.dot(mu)) / lam + _logdet_sigma_y(G, gamma, lam, N)


def sbl_cost(Phi, y, gamma, lam):
    """
    y^T Sigma_y^-1 y + log|Sigma_y|, the marginal cost the reweighting never increases after its first step
    """
    Phi = np.atleast_2d(np.asarray(Phi, dtype=float))
    y = np.asarray(y, dtype=float)
    gamma = _check_gamma(gamma, lam)
    return _cost(Phi.T.dot(Phi), Phi.T.dot(y), float(y.dot(y)), Phi.shape[0], gamma, lam)


def default_lambda(data, i):
    """
    Noise variance of row i estimated from a full-support least-squares residual
    """
    y = data.y(i)
    N = data.num_rows
    _, _, rank, _ = np.linalg.lstsq(data.Phi, y, rcond=None)
    if N <= rank:
        raise ContractViolation('row {} needs more than {} samples to estimate the noise level'.format(i, rank))
    theta = _lstsq(data.Phi, y)
    r = y - data.Phi.dot(theta)
    sigma2 = float(r.dot(r)) / (N - rank)
    floor = np.finfo(float).eps * max(1.0, float(y.dot(y)) / N)
    if sigma2 < floor:
        logger.warning('row {} fits without residual, lambda floored at {:.3e}'.format(i, floor))
        sigma2 = floor
    return sigma2


def gamma_change(gamma_new, gamma, eps_gamma=KRCONF.SBL.EPS_GAMMA):
    """
    Largest per-coordinate relative change |gamma_new_i - gamma_i| / max(gamma_i, eps_gamma);
    coordinates below eps_gamma before and after are settled
    """
    live = np.maximum(gamma_new, gamma) > eps_gamma
    if not np.any(live):
        return 0.0
    return float(np.max(np.abs(gamma_new - gamma)[live] / np.maximum(gamma[live], eps_gamma)))


def _square_design(G, b):
    # R^T R = G and R^T t = b, so ||t - R theta||^2 differs from the row objective by a constant
    R = np.linalg.cholesky(G).T
    return R, linalg.solve_triangular(R, b, trans='T')


def _sbl_row(data, i, lam, tol_gamma, max_iter, eps_gamma, corrected=None):
    Phi = data.Phi
    y = data.y(i)
    N, m = Phi.shape
    G = data.gram
    b = Phi.T.dot(y)
    design, target = Phi, y
    if corrected is not None:
        G_c, b_c = corrected[0], corrected[1][:, i]
        if _positive_definite(G_c):
            G, b = G_c, b_c
            design, target = _square_design(G, b)
        else:
            logger.warning('row {}: noise-corrected gram is not positive definite, kept the plain design'.format(i))
    yy = float(y.dot(y))
    z = np.ones(m)
    gamma = np.zeros(m)
    trace = []
    converged = False
    for it in range(1, max_iter + 1):
        # the bound theta^2 / gamma + z gamma is tightest at gamma = |theta| / sqrt(z)
        w = np.sqrt(z)
        theta = weighted_l1_solve(design, target, w, lam)
        gamma_new = np.where(w > 0, np.abs(theta) / np.where(w > 0, w, 1.0), 0.0)
        z = _z(G, gamma_new, lam)
        change = gamma_change(gamma_new, gamma, eps_gamma) if it > 1 else np.inf
        gamma = gamma_new
        cost = _cost(G, b, yy, N, gamma, lam)
        trace.append({'iteration': it, 'cost': cost, 'support': int(np.sum(gamma > eps_gamma)), 'change': change})
        logger.verbose('sbl row {} iteration {}: cost {:.6g}, support {}'.format(i, it, cost, trace[-1]['support']))
        if it > 1 and change < tol_gamma:
            converged = True
            break
    if not converged:
        logger.warning('sbl row {} did not converge in {} iterations'.format(i, max_iter))
    support = gamma > eps_gamma
    cols = np.flatnonzero(support)
    _, Sigma = _posterior(G, b, gamma, lam)
    return gamma, support, Sigma[np.ix_(cols, cols)], trace, converged


def sbl_fit(data, lam=None, tol_gamma=KRCONF.SBL.TOL_GAMMA, max_iter=KRCONF.SBL.MAX_ITER,
            eps_gamma=KRCONF.SBL.EPS_GAMMA, threads=1, noise_var=None):
    """
    Sparse Bayesian learning per row, followed by a least-squares refit on the recovered support

    :param lam: noise variance of the targets, scalar or one per row; None estimates it per row
    :param noise_var: variance of additive state noise on the samples, see lse_fit
    :return: EstimationResult whose covariances are the posterior covariances on the support
    """
    if lam is None:
        lambdas = np.array([default_lambda(data, i) for i in range(data.n)])
    else:
        lambdas = np.broadcast_to(np.asarray(lam, dtype=float), (data.n,)).copy()
    if np.any(lambdas <= 0):
        raise ContractViolation('lambda must be positive')
    corrected = data.normal_equations(noise_var) if noise_var else None
    rows = Parallel(n_jobs=threads, prefer='threads')(
        delayed(_sbl_row)(data, i, lambdas[i], tol_gamma, max_iter, eps_gamma, corrected) for i in range(data.n))
    support = np.vstack([r[1] for r in rows])
    refit = lse_fit(data, ~support, threads=threads, noise_var=noise_var)
    logger.info('sbl recovered {} of {} coefficients'.format(int(support.sum()), support.size))
    return EstimationResult(refit.M_hat, support, [r[2] for r in rows], refit.sigma2, SBL,
                            gamma=np.vstack([r[0] for r in rows]), trace=[r[3] for r in rows], lambdas=lambdas,
                            converged=[r[4] for r in rows])


def confidence_region(result, alpha=KRCONF.Protocol.LSE.ALPHA):
    """
    Joint (1 - alpha) chi-square ellipsoid around the estimate over its supported entries
    """
    if not 0 < alpha < 1:
        raise ContractViolation('alpha must lie in (0, 1), got {}'.format(alpha))
    free = result.support
    df = int(free.sum())
    if df == 0:
        logger.warning('estimate has an empty support, region is the point estimate')
        return UncertaintyRegion.exact(result.M_hat)
    Sigma = result.covariance_vec()
    values, vectors = np.linalg.eigh((Sigma + Sigma.T) / 2)
    floor = 1e-12 * max(float(values.max()), np.finfo(float).tiny)
    if values.min() < floor:
        logger.warning('singular parameter covariance, {} eigenvalues floored at {:.3e}'.format(
            int(np.sum(values < floor)), floor))
        values = np.maximum(values, floor)
    q = stats.chi2.ppf(1 - alpha, df)
    W = vectors.dot(np.diag(1.0 / np.sqrt(values))).dot(vectors.T) / np.sqrt(q)
    return UncertaintyRegion.ellipsoidal(result.M_hat, (W + W.T) / 2, 1.0, free)
