#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

"""
Dense realizations of exact and uncertain kinetic systems.

Decision variables are the off-diagonal Kirchhoff entries, one per ordered complex pair,
ordered by source then target; the diagonal is eliminated through the column-sum identity.
When the region is not exact, vec(M) (row-major) follows the rate variables.
"""

import numpy as np
from ..core.config.kr_config import KRCONF
from ..core.utils.log import logger
from ..core.utils.convert import edge_label
from . import conic
from .code import ContractViolation, InfeasibleError, NumericFailure
from .kinetic import KirchhoffMatrix, Realization

EXACT = 'exact'
SPHERICAL = 'spherical'
ELLIPSOIDAL = 'ellipsoidal'


class UncertaintyRegion(object):
    """
    Admissible set of coefficient matrices around a nominal M:
        exact:       M = M_nominal
        spherical:   ||vec(M) - vec(M_nominal)||_2 <= rho
        ellipsoidal: ||W (vec(M) - vec(M_nominal))[free]||_2 <= level, fixed coordinates equal the nominal
    """
    def __init__(self, nominal, kind=EXACT, rho=0.0, W=None, level=1.0, free_mask=None):
        self._nominal = np.array(np.atleast_2d(nominal), dtype=float)
        self._nominal.setflags(write=False)
        if kind not in (EXACT, SPHERICAL, ELLIPSOIDAL):
            raise ContractViolation('unknown region kind {}'.format(kind))
        self._kind = kind
        self._rho = float(rho)
        self._level = float(level)
        if self._rho < 0 or self._level < 0:
            raise ContractViolation('region radius must be nonnegative')
        self._free_mask = None
        self._W = None
        if kind == ELLIPSOIDAL:
            mask = np.ones(self._nominal.shape, dtype=bool) if free_mask is None else np.asarray(free_mask, bool)
            if mask.shape != self._nominal.shape:
                raise ContractViolation('free mask shape {} does not match nominal {}'.format(
                    mask.shape, self._nominal.shape))
            W = np.atleast_2d(np.asarray(W, dtype=float))
            k = int(mask.sum())
            if W.shape != (k, k):
                raise ContractViolation('ellipsoid transform must be {0}x{0}, got {1}'.format(k, W.shape))
            if k and np.linalg.matrix_rank(W) < k:
                raise ContractViolation('ellipsoid transform is not full rank')
            self._free_mask = mask
            self._W = W

    @classmethod
    def exact(cls, nominal):
        return cls(nominal, EXACT)

    @classmethod
    def spherical(cls, nominal, rho):
        return cls(nominal, SPHERICAL, rho=rho)

    @classmethod
    def ellipsoidal(cls, nominal, W, level=1.0, free_mask=None):
        return cls(nominal, ELLIPSOIDAL, W=W, level=level, free_mask=free_mask)

    @property
    def nominal(self):
        return self._nominal

    @property
    def kind(self):
        return self._kind

    @property
    def rho(self):
        return self._rho

    @property
    def W(self):
        return self._W

    @property
    def level(self):
        return self._level

    @property
    def free_mask(self):
        return self._free_mask

    @property
    def is_point(self):
        return self._kind == EXACT or (self._kind == SPHERICAL and self._rho == 0.0)

    @property
    def free_indices(self):
        """
        Row-major positions of vec(M) that may move away from the nominal
        """
        size = self._nominal.size
        if self.is_point:
            return np.zeros(0, dtype=int)
        if self._kind == SPHERICAL:
            return np.arange(size)
        return np.flatnonzero(self._free_mask.ravel())

    def semi_axes(self):
        if self.is_point:
            return np.zeros(0)
        if self._kind == SPHERICAL:
            return np.full(self._nominal.size, self._rho)
        return self._level / np.linalg.svd(self._W, compute_uv=False)

    def contains(self, M, tol=KRCONF.Solver.TOL):
        delta = (np.asarray(M, dtype=float) - self._nominal).ravel()
        if self._kind == EXACT:
            return bool(np.max(np.abs(delta), initial=0.0) <= tol)
        if self._kind == SPHERICAL:
            return bool(np.linalg.norm(delta) <= self._rho + tol)
        fixed = ~self._free_mask.ravel()
        if np.max(np.abs(delta[fixed]), initial=0.0) > tol:
            return False
        return bool(np.linalg.norm(self._W.dot(delta[~fixed])) <= self._level + tol)


class RealizationProblem(object):
    def __init__(self, complexes, region, excluded=(), required=()):
        if region.nominal.shape != (complexes.n, complexes.m):
            raise ContractViolation('region nominal shape {} does not match complexes ({}, {})'.format(
                region.nominal.shape, complexes.n, complexes.m))
        self._complexes = complexes
        self._region = region
        self._excluded = self._check_edges(excluded, 'excluded')
        self._required = self._check_edges(required, 'required')
        clash = self._excluded & self._required
        if clash:
            logger.warning('edges {} are both excluded and required; the problem is infeasible'.format(sorted(clash)))

    def _check_edges(self, edges, name):
        m = self._complexes.m
        out = set()
        for src, dst in edges:
            src, dst = int(src), int(dst)
            if src == dst:
                raise ContractViolation('{} edge {} -> {} has identical endpoints'.format(name, src, dst))
            if not (0 <= src < m and 0 <= dst < m):
                raise ContractViolation('{} edge ({}, {}) outside [0, {})'.format(name, src, dst, m))
            out.add((src, dst))
        return frozenset(out)

    @property
    def complexes(self):
        return self._complexes

    @property
    def region(self):
        return self._region

    @property
    def excluded(self):
        return self._excluded

    @property
    def required(self):
        return self._required

    @property
    def edges(self):
        """
        All ordered complex pairs in variable order
        """
        m = self._complexes.m
        return [(s, t) for s in range(m) for t in range(m) if s != t]

    @property
    def candidate_edges(self):
        return [e for e in self.edges if e not in self._excluded]

    def with_exclusions(self, extra):
        extra = frozenset(extra)
        if not extra:
            return self
        return RealizationProblem(self._complexes, self._region, self._excluded | extra, self._required)


def edge_index(m, edge):
    src, dst = edge
    return src * (m - 1) + (dst if dst < src else dst - 1)


def selector(m, edges):
    E = np.zeros((m, m))
    for src, dst in edges:
        E[dst, src] = 1.0
    return E


def build_program(problem, E):
    """
    Conic program of the realization constraints with objective sum_ij E_ij [A]_ij
    """
    Y = problem.complexes.Y.astype(float)
    n, m = Y.shape
    E = np.asarray(E, dtype=float)
    if E.shape != (m, m):
        raise ContractViolation('selector must be {0}x{0}, got {1}'.format(m, E.shape))
    if np.any(np.diag(E) != 0):
        raise ContractViolation('selector must be zero on the diagonal')
    region = problem.region
    edges = problem.edges
    R = len(edges)
    with_M = region.kind != EXACT
    d = R + (n * m if with_M else 0)

    A_eq = np.zeros((n * m, d))
    b_eq = np.zeros(n * m)
    for k, (src, dst) in enumerate(edges):
        # column src of Y A picks up a_k (y_dst - y_src)
        A_eq[src::m, k] = Y[:, dst] - Y[:, src]
    if with_M:
        A_eq[:, R:] = -np.eye(n * m)
    else:
        b_eq[:] = region.nominal.ravel()

    lower = np.zeros(d)
    upper = np.full(d, KRCONF.Solver.RATE_UPPER)
    for e in problem.excluded:
        upper[edge_index(m, e)] = 0.0
    for e in problem.required:
        lower[edge_index(m, e)] = KRCONF.Support.REQUIRED_MIN_RATE
    socs = []
    if with_M:
        nominal = region.nominal.ravel()
        lower[R:] = nominal
        upper[R:] = nominal
        free = region.free_indices
        lower[R + free] = -np.inf
        upper[R + free] = np.inf
        if free.size and region.kind == SPHERICAL:
            socs.append(conic.SocConstraint(R + free, nominal[free], None, region.rho))
        elif free.size:
            socs.append(conic.SocConstraint(R + free, nominal[free], region.W, region.level))

    c = np.zeros(d)
    for k, (src, dst) in enumerate(edges):
        c[k] = E[dst, src]
    labels = ['k[{}]'.format(edge_label(e)) for e in edges]
    if with_M:
        labels += ['M[{},{}]'.format(i + 1, j + 1) for i in range(n) for j in range(m)]
    return conic.ConicProgram(c, A_eq, b_eq, lower, upper, socs, labels)


def _decode(problem, v):
    m = problem.complexes.m
    edges = problem.edges
    R = len(edges)
    off = np.zeros((m, m))
    for k, (src, dst) in enumerate(edges):
        off[dst, src] = max(v[k], 0.0)
    kirchhoff = KirchhoffMatrix(off - np.diag(off.sum(axis=0)))
    if problem.region.kind == EXACT:
        M_used = problem.region.nominal
    else:
        M_used = np.asarray(v[R:R + problem.complexes.n * m]).reshape(problem.complexes.n, m)
    return kirchhoff, M_used


def _solve_or_raise(program, tol, what):
    outcome = conic.solve(program, tol)
    if outcome.status == conic.INFEASIBLE:
        raise InfeasibleError('{} is infeasible'.format(what), solver=outcome.stats.get('certificate'))
    if not outcome.optimal:
        raise NumericFailure('{} ended with status {}'.format(what, outcome.status), stats=outcome.stats)
    return outcome


def _maxmin_program(program, indices):
    """
    Same feasible set with extra variables t and slacks s >= 0, v_k - t - s_k = 0 on the given indices; maximize t
    """
    d = program.d
    f = len(indices)
    A_eq = np.zeros((program.A_eq.shape[0] + f, d + 1 + f))
    A_eq[:program.A_eq.shape[0], :d] = program.A_eq
    for row, k in enumerate(indices):
        A_eq[program.A_eq.shape[0] + row, k] = 1.0
        A_eq[program.A_eq.shape[0] + row, d] = -1.0
        A_eq[program.A_eq.shape[0] + row, d + 1 + row] = -1.0
    b_eq = np.concatenate([program.b_eq, np.zeros(f)])
    lower = np.concatenate([program.lower, np.zeros(1 + f)])
    upper = np.concatenate([program.upper, [KRCONF.Solver.RATE_UPPER], np.full(f, np.inf)])
    c = np.zeros(d + 1 + f)
    c[d] = 1.0
    labels = program.labels + ['t'] + ['s{}'.format(i) for i in range(f)]
    return conic.ConicProgram(c, A_eq, b_eq, lower, upper, program.socs, labels)


def dense_realization(problem, tol=KRCONF.Solver.TOL, eps=KRCONF.Support.EPS, dump_path=None):
    """
    Maximal-support realization; every feasible realization of the problem is a subgraph of it.

    :raises InfeasibleError: no realization satisfies the constraints
    :raises NumericFailure: a subproblem could not be decided
    """
    if problem.excluded & problem.required:
        clash = sorted(problem.excluded & problem.required)
        raise InfeasibleError('required edges {} are excluded'.format(clash), what='dense realization')
    m = problem.complexes.m
    candidates = problem.candidate_edges
    found = set()
    solutions = []
    solves = 0
    iterations = 0
    low = min(KRCONF.Support.DEGENERATE_LOW, eps)
    while True:
        remaining = [e for e in candidates if e not in found]
        program = build_program(problem, selector(m, remaining))
        if dump_path and iterations == 0:
            program.dump(dump_path)
        outcome = _solve_or_raise(program, tol, 'dense realization iteration {}'.format(iterations + 1))
        solves += 1
        iterations += 1
        solutions.append(outcome.v_opt)
        added = set()
        for e in remaining:
            value = outcome.v_opt[edge_index(m, e)]
            if value > eps:
                added.add(e)
            elif value >= low:
                single = _solve_or_raise(program.with_objective(_unit(program.d, edge_index(m, e))), tol,
                                         'confirmation of {}'.format(edge_label(e)))
                solves += 1
                logger.warning('edge {} near the support threshold ({:.2e}), confirmation gives {:.2e}'.format(
                    edge_label(e), value, single.v_opt[edge_index(m, e)]))
                if single.v_opt[edge_index(m, e)] > eps:
                    added.add(e)
                    solutions.append(single.v_opt)
        logger.verbose('dense iteration {}: {} new edges'.format(iterations, len(added)))
        if not added:
            break
        found |= added
        if len(found) == len(candidates):
            break

    base = build_program(problem, selector(m, found))
    v = np.mean(solutions, axis=0)
    kirchhoff, M_used = _decode(problem, v)
    if kirchhoff.support(eps) != found:
        indices = [edge_index(m, e) for e in sorted(found)]
        outcome = _solve_or_raise(_maxmin_program(base, indices), tol, 'representative of the dense support')
        solves += 1
        v = outcome.v_opt[:base.d]
        kirchhoff, M_used = _decode(problem, v)
    realization = Realization(problem.complexes, kirchhoff, M_used, eps,
                              stats={'iterations': iterations, 'solves': solves})
    logger.debug('dense realization: {} edges after {} iterations, {} solves'.format(
        realization.edge_count, iterations, solves))
    return realization


def _unit(d, k):
    c = np.zeros(d)
    c[k] = 1.0
    return c


def constrained_dense(problem, extra_exclusions=(), **kwargs):
    return dense_realization(problem.with_exclusions(extra_exclusions), **kwargs)
