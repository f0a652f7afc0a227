#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.


import time
import functools
from ..core.utils.log import logger
from .code import KinRealizeError, StageError


def stage(name):
    """
    Tag every error raised inside the wrapped pipeline step with the step name
    """
    def _stage(func):
        @functools.wraps(func)
        def decorator(*args, **kwargs):
            start = time.monotonic()
            logger.info('[{}] started'.format(name))
            try:
                ret = func(*args, **kwargs)
            except StageError:
                raise
            except (KinRealizeError, ArithmeticError, ValueError, OSError) as e:
                logger.error('[{}] failed: {}'.format(name, e))
                raise StageError(name, e) from e
            logger.info('[{}] finished in {:.3f}s'.format(name, time.monotonic() - start))
            return ret
        return decorator
    return _stage


def api_log(func):
    @functools.wraps(func)
    def decorator(self, *args, **kwargs):
        start = time.monotonic()
        ret = func(self, *args, **kwargs)
        logger.debug('{}, elapsed={:.3f}s, args={}, kwargs={}'.format(
            func.__name__, time.monotonic() - start, args, kwargs))
        return ret
    return decorator
