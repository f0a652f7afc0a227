#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

from ..core.config.kr_code import KinRealizeCode


class APIState(object):
    NORMAL = 0
    INFEASIBLE = 2  # no realization under the constraints
    NUMERIC_FAILURE = 3  # solver stalled, outcome unknown
    CONFIG_ERROR = 4
    CONTRACT_VIOLATION = 10  # shape/sign/type of an argument
    NOT_KINETIC = 11
    DIVERGENCE = 12  # non-finite simulation state
    RANK_DEFICIENT = 13
    STAGE_FAILED = 14
    LIMIT_REACHED = 15  # search bound exceeded


class KinRealizeError(Exception):
    code = APIState.CONTRACT_VIOLATION

    def __init__(self, msg='', code=None, **details):
        if code is not None:
            self.code = code
        self.details = details
        self._info = KinRealizeCode(self.code)
        super(KinRealizeError, self).__init__(msg or self._info.title)

    @property
    def title(self):
        return self._info.title

    @property
    def description(self):
        return self._info.description

    @property
    def exit_code(self):
        return self._info.exit_code


class ContractViolation(KinRealizeError, ValueError):
    code = APIState.CONTRACT_VIOLATION


class NotKineticError(KinRealizeError):
    code = APIState.NOT_KINETIC

    def __init__(self, violations, msg=''):
        self.violations = list(violations)
        super(NotKineticError, self).__init__(
            msg or 'negative coefficients over zero exponents at {}'.format(self.violations),
            violations=self.violations)


class DivergenceError(KinRealizeError):
    code = APIState.DIVERGENCE

    def __init__(self, step, msg=''):
        self.step = step
        super(DivergenceError, self).__init__(msg or 'non-finite state at step {}'.format(step), step=step)


class InfeasibleError(KinRealizeError):
    code = APIState.INFEASIBLE

    def __init__(self, certificate='no realization exists under these constraints', **details):
        self.certificate = certificate
        super(InfeasibleError, self).__init__(certificate, **details)


class NumericFailure(KinRealizeError):
    code = APIState.NUMERIC_FAILURE


class RankDeficiencyError(KinRealizeError):
    code = APIState.RANK_DEFICIENT

    def __init__(self, collinear, row=None, msg=''):
        self.collinear = list(collinear)
        self.row = row
        super(RankDeficiencyError, self).__init__(
            msg or 'collinear monomials {} in row {}'.format(self.collinear, row), collinear=self.collinear, row=row)


class ConfigError(KinRealizeError):
    code = APIState.CONFIG_ERROR


class LimitReached(KinRealizeError):
    code = APIState.LIMIT_REACHED


class StageError(KinRealizeError):
    code = APIState.STAGE_FAILED

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super(StageError, self).__init__('[{}] {}'.format(stage, cause), stage=stage)

    @property
    def exit_code(self):
        if isinstance(self.cause, KinRealizeError):
            return self.cause.exit_code
        return self._info.exit_code
