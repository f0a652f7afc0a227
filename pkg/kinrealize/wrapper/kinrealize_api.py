#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

import numpy as np
from ..core.config.kr_config import KRCONF
from ..core.utils.convert import parse_edge
from ..engine import kinetic, realization, enumeration, estimation, fileio, dot, pipeline
from ..engine.code import ContractViolation
from ..engine.decorator import api_log


class KinRealizeAPI(object):
    def __init__(self, model=None, complexes=None, M=None, kirchhoff=None, threads=KRCONF.Enumeration.DEFAULT_THREADS,
                 tol=KRCONF.Solver.TOL, eps=KRCONF.Support.EPS):
        """
        The API wrapper of kinrealize
        Note: complexes are numbered from 1 in edge labels ('C4->C1') and from 0 in edge tuples ((3, 0))

        :param model: path of a model JSON file, or None to pass the model in pieces
        :param complexes: ComplexMatrix or an n x m nonnegative integer array Y, required when model is None
        :param M: n x m coefficient matrix of dx/dt = M psi(x); defaults to Y A_kappa when kirchhoff is given
        :param kirchhoff: optional KirchhoffMatrix or m x m array of a known network
        :param threads: worker threads of the enumeration, default is 1
        :param tol: solver feasibility and optimality tolerance, default is 1e-8
        :param eps: rate above which an edge is counted as present, default is 1e-6
            Note: edges with rates in [eps/10, eps] trigger a confirmation solve
        """
        if model is not None:
            loaded = fileio.load_model(model)
            complexes, M, kirchhoff = loaded.complexes, loaded.M, loaded.kirchhoff
        if complexes is None:
            raise ContractViolation('either a model path or the complexes are required')
        if not isinstance(complexes, kinetic.ComplexMatrix):
            complexes = kinetic.ComplexMatrix(complexes)
        if kirchhoff is not None and not isinstance(kirchhoff, kinetic.KirchhoffMatrix):
            kirchhoff = kinetic.KirchhoffMatrix(kirchhoff)
        if M is None:
            if kirchhoff is None:
                raise ContractViolation('M is required when no Kirchhoff matrix is given')
            M = kinetic.assemble_coefficients(complexes, kirchhoff)
        self._complexes = complexes
        self._system = kinetic.KineticSystem(complexes, M)
        self._kirchhoff = kirchhoff
        self._threads = threads
        self._tol = tol
        self._eps = eps
        self.__attr_alias_map = {
            'dense': self.dense_realization,
            'enumerate': self.enumerate_all,
            'estimate': self.lse_fit,
            'region': self.confidence_region,
        }

    def __getattr__(self, item):
        aliases = self.__dict__.get('_KinRealizeAPI__attr_alias_map', {})
        if item in aliases:
            return aliases[item]
        raise AttributeError('\'{}\' has not attribute \'{}\''.format(self.__class__.__name__, item))

    @classmethod
    def benchmark(cls, **kwargs):
        """
        API instance over the five-complex reference network and its known rates
        """
        complexes, kirchhoff = kinetic.benchmark_model()
        return cls(complexes=complexes, kirchhoff=kirchhoff, **kwargs)

    @property
    def complexes(self):
        """
        ComplexMatrix of the model
        """
        return self._complexes

    @property
    def M(self):
        """
        Coefficient matrix of the model, n x m
        """
        return self._system.M

    @property
    def system(self):
        return self._system

    @property
    def kirchhoff(self):
        """
        Kirchhoff matrix the model was built from, None when the model only carries M
        """
        return self._kirchhoff

    @property
    def threads(self):
        return self._threads

    @threads.setter
    def threads(self, value):
        self._threads = max(1, int(value))

    def _edges(self, items):
        edges = set()
        for item in items or ():
            edges.add(parse_edge(item, self._complexes.complex_labels) if isinstance(item, str) else tuple(item))
        return frozenset(edges)

    def _region(self, region):
        if region is None:
            return realization.UncertaintyRegion.exact(self.M)
        if isinstance(region, (int, float)):
            return realization.UncertaintyRegion.spherical(self.M, region)
        return region

    @api_log
    def is_kinetic(self):
        """
        Check the kinetic sign condition of the model

        :return: tuple((ok, violations)), violations lists the (species, complex) entries that are negative over
            a zero exponent
        """
        return kinetic.is_kinetic(self._system)

    @api_log
    def canonical_realization(self):
        """
        One realization built reaction by reaction from the monomial terms, complexes are added as needed

        :return: CanonicalRealization
        """
        return kinetic.canonical_realization(self._system)

    @api_log
    def simulate(self, x0, T, h):
        """
        Forward Euler simulation of the model
        Note:
            1. States are clamped at zero from below, the largest undershoot is kept in the result

        :param x0: initial state, n nonnegative values
        :param T: final time, T >= h
        :param h: step size, floor(T/h) steps are taken
        :return: Trajectory
        """
        return kinetic.simulate(self._system, x0, T, h)

    @api_log
    def generate_dataset(self, num_experiments, T, h, sigma2, seed, x0_range=KRCONF.Protocol.X0_RANGE):
        """
        Simulated experiments from Latin-hypercube initial states with Gaussian measurement noise

        :param num_experiments: number of initial states
        :param sigma2: measurement noise variance added to every sample of every state
        :param seed: seed of the numpy PCG64 generator
        :return: list of Trajectory
        """
        config = pipeline.ExperimentConfig('<memory>', num_experiments=num_experiments, T=T, h=h, sigma2=sigma2,
                                           seed=seed, x0_range=x0_range)
        model = fileio.ModelFile(self._complexes, self.M, self._kirchhoff)
        return pipeline.generate_dataset(config, model)

    def _data(self, dataset):
        if isinstance(dataset, estimation.RegressionData):
            return dataset
        return estimation.build_regression(dataset, self._complexes, allow_negative=True)

    @api_log
    def lse_fit(self, dataset, zero_mask='model', noise_var=None):
        """
        Least squares estimate of M with a fixed zero pattern

        :param dataset: list of Trajectory or RegressionData
        :param zero_mask: 'model' (zero pattern of the model's M), 'full' (no zeros) or an n x m boolean array
            whose True entries are fixed at zero
        :param noise_var: known state noise variance of the samples, corrects the bias it causes
        :return: EstimationResult
        """
        if isinstance(zero_mask, str):
            zero_mask = None if zero_mask == 'full' else self.M == 0
        return estimation.lse_fit(self._data(dataset), zero_mask, threads=self._threads, noise_var=noise_var)

    @api_log
    def sbl_fit(self, dataset, lam=None, **kwargs):
        """
        Sparse Bayesian learning estimate of M

        :param dataset: list of Trajectory or RegressionData
        :param lam: noise variance, default is estimated per row from a full-support fit
        :param kwargs: tol_gamma, max_iter, eps_gamma, noise_var
        :return: EstimationResult with gamma and the per-row iteration trace
        """
        return estimation.sbl_fit(self._data(dataset), lam, threads=self._threads, **kwargs)

    @api_log
    def confidence_region(self, result, alpha=KRCONF.Protocol.LSE.ALPHA):
        """
        (1 - alpha) chi-square ellipsoid of an estimate

        :return: UncertaintyRegion
        """
        return estimation.confidence_region(result, alpha)

    def problem(self, region=None, excluded=(), required=()):
        """
        :param region: UncertaintyRegion, a sphere radius (float), or None for the model's M exactly
        :param excluded: edges forced absent, as 'C4->C1' labels or zero-based (source, target) tuples
        :param required: edges forced present
        """
        return realization.RealizationProblem(self._complexes, self._region(region), self._edges(excluded),
                                              self._edges(required))

    @api_log
    def dense_realization(self, region=None, excluded=(), required=(), dump_path=None):
        """
        Realization with the maximal number of edges; every other realization is a subgraph of it

        :param dump_path: write the first program to this JSON file
        :return: Realization
        """
        return realization.dense_realization(self.problem(region, excluded, required), tol=self._tol, eps=self._eps,
                                             dump_path=dump_path)

    @api_log
    def enumerate_all(self, region=None, excluded=(), required=(), max_realizations=None, progress=None):
        """
        All structurally different realizations
        Note:
            1. Results are partial (RealizationSet.partial) when max_realizations stops the search

        :param progress: callable(tasks_done, tasks_queued)
        :return: RealizationSet
        """
        return enumeration.enumerate_all(self.problem(region, excluded, required), threads=self._threads,
                                         max_realizations=max_realizations, progress=progress, tol=self._tol,
                                         eps=self._eps)

    @api_log
    def brute_force_enumerate(self, region=None, excluded=(), required=()):
        """
        Subset-by-subset enumeration, refuses dense supports above 20 edges

        :return: RealizationSet
        """
        return enumeration.brute_force_enumerate(self.problem(region, excluded, required), threads=self._threads,
                                                 tol=self._tol, eps=self._eps)

    @api_log
    def exclusion_study(self, candidates, region=None):
        """
        Realization counts with each candidate exclusion set

        :param candidates: list of edge lists
        :return: pandas.DataFrame with columns excluded, dense_edges, count, ratio
        """
        return enumeration.exclusion_study(self.problem(region), [self._edges(c) for c in candidates],
                                           threads=self._threads, tol=self._tol, eps=self._eps)

    def sparse_realizations(self, realization_set):
        return enumeration.sparse_realizations(realization_set)

    def info_ratio(self, realization_set, min_edges=1):
        """
        Share of the edge subsets of the dense realization that are realizations
        """
        return kinetic.info_ratio(realization_set.count, realization_set.dense.edge_count, min_edges)

    def export_dot(self, obj, path):
        """
        :param obj: Realization, SupportEntry or RealizationSet (written as a directory of DOT files)
        :return: list of written paths
        """
        return dot.export_dot(obj, path)

    def save_model(self, path):
        fileio.save_model(path, self._complexes, self.M, self._kirchhoff)

    def true_support(self):
        """
        Edges of the known network, None when the model carries no Kirchhoff matrix
        """
        return None if self._kirchhoff is None else self._kirchhoff.support(self._eps)

    def __repr__(self):
        return 'KinRealizeAPI({}, nonzeros={})'.format(self._complexes, int(np.count_nonzero(self.M)))
