#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.


class KRCONF(object):
    def __init__(self):
        pass

    class Support:
        EPS = 1e-6  # rate coefficient counted as an edge above this
        DEGENERATE_LOW = 1e-7  # rates in [DEGENERATE_LOW, EPS] get a one-edge confirmation solve
        REQUIRED_MIN_RATE = 1e-4
        KIRCHHOFF_SUM_TOL = 1e-10
        KIRCHHOFF_SIGN_TOL = 1e-12
        RESIDUAL_TOL = 1e-6

    class Solver:
        TOL = 1e-8
        RATE_UPPER = 1e4
        LP_METHOD = 'highs'
        SOC_SOLVER = 'CLARABEL'

    class SBL:
        TOL_GAMMA = 1e-6
        MAX_ITER = 50
        EPS_GAMMA = 1e-8
        L1_TOL = 1e-12
        L1_MAX_ITER = 100000

    class Enumeration:
        BRUTE_FORCE_MAX_EDGES = 20
        DEFAULT_THREADS = 1

    class Protocol:
        class LSE:
            NUM_EXPERIMENTS = 50
            T = 10.0
            H = 0.01
            SIGMA2 = 1e-4
            ALPHA = 0.05

        class SBL:
            NUM_EXPERIMENTS = 10
            T = 10.0
            H = 0.1
            SIGMA2 = 1e-4
            ALPHA = 0.05

        X0_RANGE = (0.0, 1.0)
        RNG_ALGORITHM = 'numpy.random.PCG64'

    class Report:
        SCHEMA = 1
        TIMING_KEYS = ('timing',)

    class Csv:
        FLOAT_FORMAT = '%.17g'

    class Dot:
        RATE_FORMAT = '{:.4f}'

    class ExitCode:
        SUCCESS = 0
        OTHER = 1
        INFEASIBLE = 2
        NUMERIC_FAILURE = 3
        CONFIG_ERROR = 4

    class Stage:
        SIMULATE = 'simulate'
        ESTIMATE = 'estimate'
        REGION = 'confidence_region'
        DENSE = 'dense'
        ENUMERATE = 'enumerate'
        EXPORT = 'export'
