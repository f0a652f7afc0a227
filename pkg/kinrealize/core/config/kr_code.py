#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

from .kr_config import KRCONF


ErrorCodeMap = {
    2: {
        'en': {
            'title': 'No Realization Exists',
            'desc': 'The realization program is infeasible under the given region, exclusions and requirements. '
                    'Relax the exclusion set or widen the uncertainty region.',
        },
        'exit': KRCONF.ExitCode.INFEASIBLE,
    },
    3: {
        'en': {
            'title': 'Numeric Failure',
            'desc': 'A solver stalled or returned an inaccurate result. The outcome is unknown, not infeasible. '
                    'Try a different tolerance or rescale the model.',
        },
        'exit': KRCONF.ExitCode.NUMERIC_FAILURE,
    },
    4: {
        'en': {
            'title': 'Configuration Error',
            'desc': 'The configuration file or command line is invalid. Check the named field.',
        },
        'exit': KRCONF.ExitCode.CONFIG_ERROR,
    },
    10: {
        'en': {
            'title': 'Contract Violation',
            'desc': 'An argument has the wrong shape, sign or type for this operation.',
        },
        'exit': KRCONF.ExitCode.OTHER,
    },
    11: {
        'en': {
            'title': 'Not A Kinetic System',
            'desc': 'A negative coefficient sits over a zero exponent, '
                    'so no reaction network can realize the dynamics.',
        },
        'exit': KRCONF.ExitCode.OTHER,
    },
    12: {
        'en': {
            'title': 'Simulation Diverged',
            'desc': 'The forward Euler state became non-finite. Reduce the step size.',
        },
        'exit': KRCONF.ExitCode.NUMERIC_FAILURE,
    },
    13: {
        'en': {
            'title': 'Rank Deficient Regressor',
            'desc': 'The free monomial columns are collinear; the least squares estimate is not unique.',
        },
        'exit': KRCONF.ExitCode.NUMERIC_FAILURE,
    },
    14: {
        'en': {
            'title': 'Stage Failed',
            'desc': 'A pipeline stage raised an error; see the stage tag and the wrapped cause.',
        },
        'exit': KRCONF.ExitCode.OTHER,
    },
    15: {
        'en': {
            'title': 'Limit Reached',
            'desc': 'The dense support has more edges than the brute-force check accepts. '
                    'Use the pruned enumeration or raise the edge limit.',
        },
        'exit': KRCONF.ExitCode.OTHER,
    },
    'other': {
        'en': {
            'title': 'Other Error',
            'desc': 'Unexpected error.',
        },
        'exit': KRCONF.ExitCode.OTHER,
    },
}


class BaseCode(object):
    def __init__(self, code):
        self._code = code
        if code != 0:
            self.info = self._code_map.get(code, self._code_map.get('other'))
        else:
            self.info = {'en': {'title': 'Normal', 'desc': ''}, 'exit': KRCONF.ExitCode.SUCCESS}

    @property
    def code(self):
        return self._code

    @property
    def title(self):
        return self.info['en']['title']

    @property
    def description(self):
        return self.info['en']['desc']

    @property
    def exit_code(self):
        return self.info['exit']


class KinRealizeCode(BaseCode):
    def __init__(self, code):
        self._code_map = ErrorCodeMap
        super(KinRealizeCode, self).__init__(code)
