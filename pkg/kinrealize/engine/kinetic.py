#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

"""
Kinetic systems and reaction networks: complexes, Kirchhoff matrices,
monomial evaluation, the kinetic sign condition, Euler simulation and
realization-count metrics.
"""

import math
import numpy as np
from ..core.config.kr_config import KRCONF
from ..core.utils.log import logger
from ..core.utils.convert import complex_formula
from .code import ContractViolation, NotKineticError, DivergenceError


def _frozen(arr, dtype=float):
    arr = np.array(arr, dtype=dtype)
    arr.setflags(write=False)
    return arr


class ComplexMatrix(object):
    """
    The n x m complex composition matrix Y, column j is complex C_j
    """
    def __init__(self, Y, species_names=None, complex_labels=None):
        Y = np.atleast_2d(np.asarray(Y))
        if Y.ndim != 2 or Y.shape[0] < 1 or Y.shape[1] < 1:
            raise ContractViolation('complex matrix must be a non-empty 2-D array, got shape {}'.format(Y.shape))
        if not np.all(np.isfinite(Y.astype(float))) or np.any(Y != np.round(Y)) or np.any(Y < 0):
            raise ContractViolation('complex matrix entries must be nonnegative integers')
        cols = [tuple(c) for c in Y.astype(int).T]
        if len(set(cols)) != len(cols):
            raise ContractViolation('complex matrix has identical columns')
        self._Y = _frozen(Y, dtype=int)
        n, m = self._Y.shape
        if species_names is not None and len(species_names) != n:
            raise ContractViolation('expected {} species names, got {}'.format(n, len(species_names)))
        if complex_labels is not None and len(complex_labels) != m:
            raise ContractViolation('expected {} complex labels, got {}'.format(m, len(complex_labels)))
        self._species_names = list(species_names) if species_names is not None else None
        self._complex_labels = list(complex_labels) if complex_labels is not None else None

    @property
    def Y(self):
        return self._Y

    @property
    def n(self):
        return self._Y.shape[0]

    @property
    def m(self):
        return self._Y.shape[1]

    @property
    def species_names(self):
        return self._species_names or ['X{}'.format(i + 1) for i in range(self.n)]

    @property
    def complex_labels(self):
        return self._complex_labels or ['C{}'.format(j + 1) for j in range(self.m)]

    def formula(self, j):
        return complex_formula(self._Y[:, j], self._species_names)

    def index_of(self, column):
        column = tuple(int(c) for c in column)
        for j in range(self.m):
            if tuple(self._Y[:, j]) == column:
                return j
        return None

    def extended(self, columns):
        """
        A new complex matrix with the given columns appended (columns already present are skipped)
        """
        cols = [list(self._Y[:, j]) for j in range(self.m)]
        labels = list(self.complex_labels)
        for col in columns:
            col = [int(c) for c in col]
            if col not in cols:
                cols.append(col)
                labels.append('C{}'.format(len(cols)))
        return ComplexMatrix(np.array(cols, dtype=int).T, species_names=self._species_names, complex_labels=labels)

    def __eq__(self, other):
        return isinstance(other, ComplexMatrix) and np.array_equal(self._Y, other._Y)

    def __hash__(self):
        return hash(self._Y.tobytes())

    def __repr__(self):
        return 'ComplexMatrix({})'.format(', '.join(self.formula(j) for j in range(self.m)))


class KineticSystem(object):
    def __init__(self, complexes, M, require_kinetic=False):
        M = np.atleast_2d(np.asarray(M, dtype=float))
        if M.shape != (complexes.n, complexes.m):
            raise ContractViolation('coefficient matrix shape {} does not match complexes ({}, {})'.format(
                M.shape, complexes.n, complexes.m))
        if not np.all(np.isfinite(M)):
            raise ContractViolation('coefficient matrix has non-finite entries')
        self._complexes = complexes
        self._M = _frozen(M)
        if require_kinetic:
            ok, violations = is_kinetic(self)
            if not ok:
                raise NotKineticError(violations)

    @property
    def complexes(self):
        return self._complexes

    @property
    def M(self):
        return self._M

    @property
    def n(self):
        return self._complexes.n

    @property
    def m(self):
        return self._complexes.m

    def rhs(self, x):
        return self._M.dot(monomial_eval(self._complexes, x))


class KirchhoffMatrix(object):
    """
    m x m rate matrix, [A]_ji = k_ij is the rate of C_i -> C_j and each column sums to zero
    """
    def __init__(self, A, sum_tol=KRCONF.Support.KIRCHHOFF_SUM_TOL, sign_tol=KRCONF.Support.KIRCHHOFF_SIGN_TOL):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ContractViolation('Kirchhoff matrix must be square, got shape {}'.format(A.shape))
        if not np.all(np.isfinite(A)):
            raise ContractViolation('Kirchhoff matrix has non-finite entries')
        off = A - np.diag(np.diag(A))
        if off.min(initial=0.0) < -sign_tol:
            raise ContractViolation('negative off-diagonal rate {:.3e}'.format(off.min()))
        col_sums = A.sum(axis=0)
        if np.max(np.abs(col_sums), initial=0.0) > sum_tol * max(1.0, np.abs(A).max(initial=0.0)):
            raise ContractViolation('Kirchhoff column sums {} are not zero'.format(col_sums))
        off = np.clip(off, 0.0, None)
        self._A = _frozen(off - np.diag(off.sum(axis=0)))

    @classmethod
    def from_offdiagonal(cls, off):
        off = np.array(off, dtype=float)
        np.fill_diagonal(off, 0.0)
        off = np.where(off < 0, np.where(off < -KRCONF.Support.KIRCHHOFF_SIGN_TOL, off, 0.0), off)
        return cls(off - np.diag(off.sum(axis=0)))

    @classmethod
    def from_edges(cls, m, rates):
        """
        :param rates: mapping {(source, target): rate} with zero-based complex indices
        """
        off = np.zeros((m, m))
        for (src, dst), rate in rates.items():
            if src == dst:
                raise ContractViolation('self-loop {} -> {}'.format(src, dst))
            off[dst, src] = rate
        return cls.from_offdiagonal(off)

    @property
    def A(self):
        return self._A

    @property
    def m(self):
        return self._A.shape[0]

    def rate(self, src, dst):
        return float(self._A[dst, src])

    def support(self, eps=KRCONF.Support.EPS):
        dst, src = np.nonzero(self._A > eps)
        return frozenset((int(s), int(d)) for s, d in zip(src, dst) if s != d)

    def rates(self, eps=KRCONF.Support.EPS):
        return {edge: self.rate(*edge) for edge in sorted(self.support(eps))}


class Trajectory(object):
    def __init__(self, times, states, h=None, clamped_magnitude=0.0):
        times = np.asarray(times, dtype=float)
        states = np.atleast_2d(np.asarray(states, dtype=float))
        if times.ndim != 1 or states.shape[0] != times.shape[0]:
            raise ContractViolation('{} sample times but {} state rows'.format(times.shape[0], states.shape[0]))
        if times.shape[0] >= 2:
            steps = np.diff(times)
            h = float(steps[0]) if h is None else float(h)
            if h <= 0 or np.max(np.abs(steps - h)) > 1e-9 * max(1.0, abs(times[-1])):
                raise ContractViolation('sample times are not uniformly spaced with step {}'.format(h))
        self._times = _frozen(times)
        self._states = _frozen(states)
        self._h = h
        self._clamped_magnitude = float(clamped_magnitude)

    @property
    def times(self):
        return self._times

    @property
    def states(self):
        return self._states

    @property
    def h(self):
        return self._h

    @property
    def n(self):
        return self._states.shape[1]

    @property
    def num_samples(self):
        return self._times.shape[0]

    @property
    def clamped_magnitude(self):
        """
        Largest undershoot below zero removed by clamping during simulation
        """
        return self._clamped_magnitude

    def with_states(self, states):
        return Trajectory(self._times, states, self._h)


class Realization(object):
    def __init__(self, complexes, kirchhoff, M_used, eps=KRCONF.Support.EPS, stats=None):
        self._complexes = complexes
        self.stats = dict(stats or {})
        self._kirchhoff = kirchhoff
        self._M_used = _frozen(M_used)
        self._eps = eps
        self._support = kirchhoff.support(eps)

    @property
    def complexes(self):
        return self._complexes

    @property
    def kirchhoff(self):
        return self._kirchhoff

    @property
    def M_used(self):
        return self._M_used

    @property
    def support(self):
        return self._support

    @property
    def edge_count(self):
        return len(self._support)

    def rate(self, src, dst):
        return self._kirchhoff.rate(src, dst)

    def rates(self):
        return {edge: self.rate(*edge) for edge in sorted(self._support)}

    def residual(self):
        return float(np.max(np.abs(assemble_coefficients(self._complexes, self._kirchhoff) - self._M_used),
                            initial=0.0))


class CanonicalRealization(object):
    """
    Reaction network built directly from the sign pattern of M on a possibly enlarged complex set
    """
    def __init__(self, complexes, kirchhoff, reactions, source_m):
        self._complexes = complexes
        self._kirchhoff = kirchhoff
        self._reactions = list(reactions)
        self._source_m = source_m

    @property
    def complexes(self):
        return self._complexes

    @property
    def kirchhoff(self):
        return self._kirchhoff

    @property
    def reactions(self):
        """
        [(source index, target index, rate), ...] on the enlarged complex set
        """
        return self._reactions

    def coefficients(self):
        """
        Re-assembled coefficient matrix restricted to the original complexes
        """
        full = assemble_coefficients(self._complexes, self._kirchhoff)
        extra = full[:, self._source_m:]
        if extra.size and np.max(np.abs(extra)) > 0:
            logger.warning('canonical realization produced dynamics on product-only complexes')
        return full[:, :self._source_m]


def monomial_eval(complexes, x):
    """
    psi_j(x) = prod_i x_i ** Y_ij with 0 ** 0 = 1; x may be one state (n,) or a batch (N, n)
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.ndim != 2 or X.shape[1] != complexes.n:
        raise ContractViolation('state has {} entries, complexes expect {}'.format(X.shape[-1], complexes.n))
    if np.any(X < 0):
        raise ContractViolation('monomials are evaluated on nonnegative states only')
    psi = np.prod(np.power(X[:, :, None], complexes.Y[None, :, :]), axis=1)
    return psi[0] if single else psi


def is_kinetic(system):
    """
    :return: (True, []) or (False, [(i, j), ...]) listing entries with [M]_ij < 0 and [Y]_ij == 0
    """
    bad = np.argwhere((system.M < 0) & (system.complexes.Y == 0))
    violations = [(int(i), int(j)) for i, j in bad]
    return len(violations) == 0, violations


def assemble_coefficients(complexes, kirchhoff):
    A = kirchhoff.A if isinstance(kirchhoff, KirchhoffMatrix) else np.asarray(kirchhoff, dtype=float)
    if A.shape != (complexes.m, complexes.m):
        raise ContractViolation('Kirchhoff matrix shape {} does not match {} complexes'.format(A.shape, complexes.m))
    return complexes.Y.dot(A)


def canonical_realization(system):
    ok, violations = is_kinetic(system)
    if not ok:
        raise NotKineticError(violations)
    Y = system.complexes.Y
    targets = []
    pending = []
    for i, j in np.argwhere(system.M != 0):
        sign = 1 if system.M[i, j] > 0 else -1
        target = Y[:, j].copy()
        target[i] += sign
        targets.append(target)
        pending.append((int(j), target, abs(float(system.M[i, j]))))
    complexes = system.complexes.extended(targets)
    off = np.zeros((complexes.m, complexes.m))
    reactions = []
    for src, target, rate in pending:
        dst = complexes.index_of(target)
        off[dst, src] += rate
        reactions.append((src, dst, rate))
    kirchhoff = KirchhoffMatrix(off - np.diag(off.sum(axis=0)))
    return CanonicalRealization(complexes, kirchhoff, reactions, system.m)


def simulate(system, x0, T, h):
    """
    Forward Euler from x0 over floor(T/h) steps; states are clamped at zero from below
    """
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (system.n,):
        raise ContractViolation('initial state has shape {}, expected ({},)'.format(x.shape, system.n))
    if h <= 0 or T < h:
        raise ContractViolation('need h > 0 and T >= h, got h={} T={}'.format(h, T))
    if np.any(x < 0):
        raise ContractViolation('initial state must be nonnegative')
    steps = int(math.floor(T / h + 1e-9))
    states = np.empty((steps + 1, system.n))
    states[0] = x
    undershoot = 0.0
    for k in range(1, steps + 1):
        x = x + h * system.rhs(x)
        if not np.all(np.isfinite(x)):
            raise DivergenceError(k)
        low = x.min()
        if low < 0:
            undershoot = max(undershoot, -low)
            x = np.clip(x, 0.0, None)
        states[k] = x
    if undershoot > 0:
        logger.warning('simulation clamped states at zero, largest undershoot {:.3e} (h={})'.format(undershoot, h))
    return Trajectory(h * np.arange(steps + 1), states, h, clamped_magnitude=undershoot)


def r_max(dense_edge_count, min_edges=1):
    """
    Number of edge subsets of the dense realization with at least min_edges edges
    """
    if min_edges < 1 or dense_edge_count < min_edges:
        raise ContractViolation('need dense_edge_count >= min_edges >= 1, got {} and {}'.format(
            dense_edge_count, min_edges))
    return sum(math.comb(dense_edge_count, i) for i in range(min_edges, dense_edge_count + 1))


def info_ratio(realization_count, dense_edge_count, min_edges=1):
    if realization_count < 1:
        raise ContractViolation('realization_count must be at least 1')
    return realization_count / r_max(dense_edge_count, min_edges)


def benchmark_model():
    """
    Five-species, five-complex network used as the reference example, with its true Kirchhoff matrix
    """
    Y = np.array([
        [1, 0, 1, 0, 0],
        [0, 2, 0, 0, 1],
        [0, 0, 1, 0, 0],
        [0, 0, 0, 1, 0],
        [0, 0, 0, 0, 1],
    ])
    A = np.array([
        [-1.1630, 0.0, 0.0, 0.0, 0.8492],
        [0.3386, 0.0, 0.0, 0.0, 0.4290],
        [0.8244, 0.0, -0.7364, 0.5631, 0.0],
        [0.0, 0.0, 0.0, -0.5631, 0.0],
        [0.0, 0.0, 0.7364, 0.0, -1.2782],
    ])
    complexes = ComplexMatrix(Y)
    return complexes, KirchhoffMatrix(A)
