#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

import os
import numpy as np
import pytest

from kinrealize.core.utils.log import logger
from kinrealize.engine.kinetic import ComplexMatrix, KineticSystem, KirchhoffMatrix, benchmark_model

HERE = os.path.dirname(os.path.abspath(__file__))
EXAMPLE_DIR = os.path.join(HERE, '..', 'example')
BENCHMARK_JSON = os.path.join(EXAMPLE_DIR, 'data', 'benchmark_model.json')

# (source, target), zero-based
TRUE_EDGES = {
    (0, 1): 0.3386,
    (0, 2): 0.8244,
    (4, 0): 0.8492,
    (4, 1): 0.4290,
    (2, 4): 0.7364,
    (3, 2): 0.5631,
}


def random_kinetic_system(rng, n, m, density=0.5, max_coeff=2):
    """
    Random distinct complexes and a random Kirchhoff matrix; the system M = Y A is kinetic by construction
    """
    while (max_coeff + 1) ** n < m:
        max_coeff += 1
    while True:
        Y = rng.integers(0, max_coeff + 1, size=(n, m))
        if len({tuple(c) for c in Y.T}) == m:
            break
    off = rng.uniform(0.2, 1.5, size=(m, m)) * (rng.random((m, m)) < density)
    np.fill_diagonal(off, 0.0)
    if m > 1 and not off.any():
        off[1, 0] = 1.0
    complexes = ComplexMatrix(Y)
    kirchhoff = KirchhoffMatrix.from_offdiagonal(off)
    return complexes, kirchhoff, complexes.Y.dot(kirchhoff.A)


@pytest.fixture(autouse=True)
def quiet_logger():
    level = logger.level
    logger.setLevel(logger.ERROR)
    yield
    logger.setLevel(level)


@pytest.fixture(scope='session')
def benchmark():
    complexes, kirchhoff = benchmark_model()
    return complexes, kirchhoff, complexes.Y.dot(kirchhoff.A)


@pytest.fixture(scope='session')
def benchmark_system(benchmark):
    complexes, _, M = benchmark
    return KineticSystem(complexes, M)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def model_path():
    return BENCHMARK_JSON


@pytest.fixture
def decay_system():
    return KineticSystem(ComplexMatrix([[1]]), [[-1.0]])
