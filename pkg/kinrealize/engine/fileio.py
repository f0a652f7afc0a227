#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

"""
Model JSON and trajectory CSV files.

Model file:
    {"species": ["X1", ...], "complexes": [[...], ...], "M": [[...], ...], "A_kappa": [[...], ...]}
    complexes lists the columns of Y, A_kappa is optional.
Trajectory file:
    CSV with header t,x1,...,xn and one row per sample, written at round-trip precision.
"""

import os
import json
import numpy as np
import pandas as pd
from ..core.config.kr_config import KRCONF
from ..core.utils.log import logger
from ..core.utils.convert import to_jsonable
from .code import ConfigError, KinRealizeError
from .kinetic import ComplexMatrix, KineticSystem, KirchhoffMatrix, Trajectory


class ModelFile(object):
    def __init__(self, complexes, M, kirchhoff=None, path=None):
        self.complexes = complexes
        self.M = np.asarray(M, dtype=float)
        self.kirchhoff = kirchhoff
        self.path = path

    @property
    def system(self):
        return KineticSystem(self.complexes, self.M)

    @property
    def true_support(self):
        return self.kirchhoff.support() if self.kirchhoff is not None else None


def load_model(path):
    try:
        with open(path) as f:
            raw = json.load(f)
    except (OSError, ValueError) as e:
        raise ConfigError('cannot read model file {}: {}'.format(path, e))
    try:
        columns = np.asarray(raw['complexes'], dtype=float)
        species = raw.get('species')
        complexes = ComplexMatrix(columns.T, species_names=species)
        kirchhoff = KirchhoffMatrix(raw['A_kappa']) if raw.get('A_kappa') is not None else None
        if 'M' in raw:
            M = np.asarray(raw['M'], dtype=float)
        elif kirchhoff is not None:
            M = complexes.Y.dot(kirchhoff.A)
        else:
            raise KeyError('M')
    except KeyError as e:
        raise ConfigError('model file {} lacks the field {}'.format(path, e))
    except (KinRealizeError, ValueError, TypeError) as e:
        raise ConfigError('model file {} is malformed: {}'.format(path, e))
    if M.shape != (complexes.n, complexes.m):
        raise ConfigError('model file {}: M has shape {}, expected ({}, {})'.format(
            path, M.shape, complexes.n, complexes.m))
    if kirchhoff is not None:
        if kirchhoff.m != complexes.m:
            raise ConfigError('model file {}: A_kappa does not match {} complexes'.format(path, complexes.m))
        gap = float(np.max(np.abs(complexes.Y.dot(kirchhoff.A) - M)))
        if gap > KRCONF.Support.RESIDUAL_TOL:
            logger.warning('model file {}: M differs from Y A_kappa by {:.3e}'.format(path, gap))
    logger.verbose('loaded model {} with {} species and {} complexes'.format(path, complexes.n, complexes.m))
    return ModelFile(complexes, M, kirchhoff, path)


def save_model(path, complexes, M, kirchhoff=None):
    data = {
        'species': complexes.species_names,
        'complexes': complexes.Y.T.astype(int),
        'M': np.asarray(M, dtype=float),
    }
    if kirchhoff is not None:
        data['A_kappa'] = kirchhoff.A
    with open(path, 'w') as f:
        json.dump(to_jsonable(data), f, indent=2)


def write_trajectory(path, trajectory):
    columns = ['x{}'.format(i + 1) for i in range(trajectory.n)]
    frame = pd.DataFrame(trajectory.states, columns=columns)
    frame.insert(0, 't', trajectory.times)
    frame.to_csv(path, index=False, float_format=KRCONF.Csv.FLOAT_FORMAT)


def read_trajectory(path):
    if not os.path.exists(path):
        raise ConfigError('trajectory file {} does not exist'.format(path))
    frame = pd.read_csv(path, float_precision='round_trip')
    if not len(frame.columns) or frame.columns[0] != 't':
        raise ConfigError('trajectory file {} must start with a t column'.format(path))
    return Trajectory(frame['t'].to_numpy(dtype=float), frame.iloc[:, 1:].to_numpy(dtype=float))
