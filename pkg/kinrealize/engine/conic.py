#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

"""
Linear and second-order-cone programs behind every realization computation.
Pure LPs go to HiGHS through scipy, programs with cone constraints to Clarabel through cvxpy.
"""

import json
import time
import numpy as np
from scipy.optimize import linprog
import cvxpy as cp
from ..core.config.kr_config import KRCONF
from ..core.utils.log import logger
from ..core.utils.convert import to_jsonable
from .code import ContractViolation, NumericFailure

OPTIMAL = 'optimal'
INFEASIBLE = 'infeasible'
UNBOUNDED = 'unbounded'
NUMERIC_FAILURE = 'numeric-failure'

# cone solutions flagged inaccurate are kept when their measured residuals stay below this
INACCURATE_ACCEPT = 1e-7


class SocConstraint(object):
    """
    ||W (v[indices] - center)||_2 <= radius
    """
    def __init__(self, indices, center, W=None, radius=1.0):
        self.indices = np.asarray(indices, dtype=int)
        self.center = np.asarray(center, dtype=float)
        k = self.indices.shape[0]
        self.W = np.eye(k) if W is None else np.atleast_2d(np.asarray(W, dtype=float))
        self.radius = float(radius)
        if self.center.shape != (k,) or self.W.shape[1] != k:
            raise ContractViolation('cone constraint over {} coordinates has center {} and transform {}'.format(
                k, self.center.shape, self.W.shape))
        if self.radius < 0:
            raise ContractViolation('cone radius must be nonnegative')

    def violation(self, v):
        return max(0.0, float(np.linalg.norm(self.W.dot(v[self.indices] - self.center))) - self.radius)


class ConicProgram(object):
    """
    maximize c^T v  s.t.  A_eq v = b_eq,  lower <= v <= upper,  and every cone constraint
    """
    def __init__(self, c, A_eq=None, b_eq=None, lower=None, upper=None, socs=None, labels=None):
        self.c = np.asarray(c, dtype=float)
        d = self.c.shape[0]
        self.A_eq = np.zeros((0, d)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
        self.b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
        self.lower = np.full(d, -np.inf) if lower is None else np.asarray(lower, dtype=float)
        self.upper = np.full(d, np.inf) if upper is None else np.asarray(upper, dtype=float)
        self.socs = list(socs or [])
        self.labels = list(labels) if labels is not None else ['v{}'.format(i) for i in range(d)]
        if self.A_eq.shape[0] and self.A_eq.shape[1] != d:
            raise ContractViolation('equality matrix has {} columns, program has {} variables'.format(
                self.A_eq.shape[1], d))
        if self.A_eq.shape[0] != self.b_eq.shape[0]:
            raise ContractViolation('equality matrix and right-hand side disagree in length')
        if self.lower.shape != (d,) or self.upper.shape != (d,):
            raise ContractViolation('bounds must have one entry per variable')
        for soc in self.socs:
            if soc.indices.size and (soc.indices.min() < 0 or soc.indices.max() >= d):
                raise ContractViolation('cone constraint references a variable outside [0, {})'.format(d))

    @property
    def d(self):
        return self.c.shape[0]

    @property
    def is_lp(self):
        return not self.socs

    def with_objective(self, c):
        return ConicProgram(c, self.A_eq, self.b_eq, self.lower, self.upper, self.socs, self.labels)

    def to_dict(self):
        return to_jsonable({
            'kind': 'lp' if self.is_lp else 'socp',
            'sense': 'maximize',
            'labels': self.labels,
            'c': self.c,
            'A_eq': self.A_eq,
            'b_eq': self.b_eq,
            'lower': [None if not np.isfinite(x) else x for x in self.lower],
            'upper': [None if not np.isfinite(x) else x for x in self.upper],
            'socs': [{'indices': s.indices, 'center': s.center, 'W': s.W, 'radius': s.radius} for s in self.socs],
        })

    def dump(self, path):
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=1)
        logger.info('program with {} variables dumped to {}'.format(self.d, path))


class SolveOutcome(object):
    def __init__(self, status, v_opt=None, objective=None, stats=None):
        self._status = status
        self._v_opt = None
        if status == OPTIMAL:
            self._v_opt = np.array(v_opt, dtype=float)
            self._v_opt.setflags(write=False)
        self._objective = objective
        self._stats = dict(stats or {})

    @property
    def status(self):
        return self._status

    @property
    def optimal(self):
        return self._status == OPTIMAL

    @property
    def v_opt(self):
        return self._v_opt

    @property
    def objective(self):
        return self._objective

    @property
    def stats(self):
        return self._stats

    def __repr__(self):
        return 'SolveOutcome(status={}, objective={})'.format(self._status, self._objective)


def residuals(program, v):
    eq = float(np.max(np.abs(program.A_eq.dot(v) - program.b_eq), initial=0.0))
    bound = float(max(np.max(program.lower - v, initial=0.0), np.max(v - program.upper, initial=0.0), 0.0))
    cone = float(max([s.violation(v) for s in program.socs] or [0.0]))
    return {'equality': eq, 'bound': bound, 'cone': cone}


def _solve_lp(program, tol):
    bounds = [(None if not np.isfinite(lo) else lo, None if not np.isfinite(hi) else hi)
              for lo, hi in zip(program.lower, program.upper)]
    kwargs = {}
    if program.A_eq.shape[0]:
        kwargs.update(A_eq=program.A_eq, b_eq=program.b_eq)
    res = linprog(-program.c, bounds=bounds, method=KRCONF.Solver.LP_METHOD,
                  options={'primal_feasibility_tolerance': tol, 'dual_feasibility_tolerance': tol}, **kwargs)
    stats = {'solver': 'highs', 'iterations': int(getattr(res, 'nit', 0) or 0), 'message': res.message}
    if res.status == 2:
        return SolveOutcome(INFEASIBLE, stats=dict(stats, certificate='HiGHS reported primal infeasibility'))
    if res.status == 3:
        return SolveOutcome(UNBOUNDED, stats=stats)
    if res.status != 0 or res.x is None:
        return SolveOutcome(NUMERIC_FAILURE, stats=stats)
    v = np.clip(res.x, program.lower, program.upper)
    dual = 0.0
    if program.A_eq.shape[0]:
        dual += float(program.b_eq.dot(res.eqlin.marginals))
    for bound, side in ((program.lower, res.lower), (program.upper, res.upper)):
        finite = np.isfinite(bound)
        dual += float(bound[finite].dot(np.asarray(side.marginals)[finite]))
    objective = float(program.c.dot(v))
    stats['dual_objective'] = -dual
    stats['duality_gap'] = abs(objective + dual)
    return SolveOutcome(OPTIMAL, v, objective, stats)


def _solve_socp(program, tol):
    v = cp.Variable(program.d)
    constraints = []
    if program.A_eq.shape[0]:
        constraints.append(program.A_eq @ v == program.b_eq)
    lo = np.isfinite(program.lower)
    hi = np.isfinite(program.upper)
    if lo.any():
        constraints.append(v[np.flatnonzero(lo)] >= program.lower[lo])
    if hi.any():
        constraints.append(v[np.flatnonzero(hi)] <= program.upper[hi])
    for soc in program.socs:
        constraints.append(cp.SOC(cp.Constant(soc.radius), soc.W @ (v[soc.indices] - soc.center)))
    problem = cp.Problem(cp.Maximize(program.c @ v), constraints)
    try:
        problem.solve(solver=getattr(cp, KRCONF.Solver.SOC_SOLVER), tol_feas=tol, tol_gap_abs=tol, tol_gap_rel=tol)
    except cp.error.SolverError as e:
        logger.warning('cone solver failed: {}'.format(e))
        return SolveOutcome(NUMERIC_FAILURE, stats={'solver': 'clarabel', 'message': str(e)})
    stats = {'solver': 'clarabel', 'iterations': problem.solver_stats.num_iters, 'message': problem.status}
    if problem.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        if problem.status == cp.INFEASIBLE_INACCURATE:
            logger.warning('cone solver returned an inaccurate infeasibility certificate')
        return SolveOutcome(INFEASIBLE, stats=dict(stats, certificate='Clarabel {}'.format(problem.status)))
    if problem.status in (cp.UNBOUNDED, cp.UNBOUNDED_INACCURATE):
        return SolveOutcome(UNBOUNDED, stats=stats)
    if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) or v.value is None:
        return SolveOutcome(NUMERIC_FAILURE, stats=stats)
    x = np.clip(np.asarray(v.value, dtype=float), program.lower, program.upper)
    if problem.status == cp.OPTIMAL_INACCURATE:
        worst = max(residuals(program, x).values())
        if worst > INACCURATE_ACCEPT:
            logger.warning('cone solution inaccurate, residual {:.3e}'.format(worst))
            return SolveOutcome(NUMERIC_FAILURE, stats=stats)
    return SolveOutcome(OPTIMAL, x, float(program.c.dot(x)), stats)


def solve(program, tol=KRCONF.Solver.TOL):
    start = time.monotonic()
    outcome = _solve_lp(program, tol) if program.is_lp else _solve_socp(program, tol)
    outcome.stats['seconds'] = time.monotonic() - start
    if outcome.optimal:
        outcome.stats['residuals'] = residuals(program, outcome.v_opt)
    logger.verbose('solve d={} lp={} -> {} in {:.3f}s'.format(
        program.d, program.is_lp, outcome.status, outcome.stats['seconds']))
    return outcome


def is_feasible(program, tol=KRCONF.Solver.TOL):
    outcome = solve(program.with_objective(np.zeros(program.d)), tol)
    if outcome.status == OPTIMAL:
        return True
    if outcome.status == INFEASIBLE:
        return False
    raise NumericFailure('feasibility check ended with status {}'.format(outcome.status))
