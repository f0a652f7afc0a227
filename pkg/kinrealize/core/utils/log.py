#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

import logging
import functools
import sys
import os

logging.VERBOSE = 5
logging.addLevelName(logging.VERBOSE, 'VERBOSE')

LEVEL_NAMES = ('VERBOSE', 'DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


class Logger(logging.Logger):
    logger_fmt = '{}[%(levelname)s][%(asctime)s][%(filename)s:%(lineno)d] - - %(message)s'
    logger_date_fmt = '%Y-%m-%d %H:%M:%S'
    stream_handler_fmt = logger_fmt.format('[KR]')
    stream_handler_date_fmt = logger_date_fmt
    # stdout carries command results
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setLevel(logging.VERBOSE)
    stream_handler.setFormatter(logging.Formatter(stream_handler_fmt, stream_handler_date_fmt))
    file_handler = None

    logger = logging.Logger(__name__)
    logger.setLevel(logging.VERBOSE)
    logger.addHandler(stream_handler)

    def __new__(cls, *args, **kwargs):
        if not hasattr(cls, 'logger'):
            cls.logger = super(Logger, cls).__new__(cls, *args, **kwargs)
        return cls.logger

logger = Logger(__name__)
logger.setLevel(logging.WARNING)

logger.VERBOSE = logging.VERBOSE
logger.DEBUG = logging.DEBUG
logger.INFO = logging.INFO
logger.WARN = logging.WARN
logger.WARNING = logging.WARNING
logger.ERROR = logging.ERROR
logger.CRITICAL = logging.CRITICAL

logger.verbose = functools.partial(logger.log, logger.VERBOSE)


def set_level(level):
    """
    :param level: one of LEVEL_NAMES (any case) or a logging level number
    """
    if isinstance(level, str):
        name = level.upper()
        if name not in LEVEL_NAMES:
            raise ValueError('unknown log level {}'.format(level))
        level = logging.getLevelName(name)
    logger.setLevel(level)


def log_to_file(path):
    """
    Mirror every record that passes the logger level into path, replacing an earlier log file;
    None stops the mirroring

    :return: the attached handler or None
    """
    if Logger.file_handler is not None:
        logger.removeHandler(Logger.file_handler)
        Logger.file_handler.close()
        Logger.file_handler = None
    if path is None:
        return None
    folder = os.path.dirname(os.path.abspath(path))
    if not os.path.exists(folder):
        os.makedirs(folder)
    handler = logging.FileHandler(path, encoding='utf-8')
    handler.setLevel(logging.VERBOSE)
    handler.setFormatter(logging.Formatter(Logger.stream_handler_fmt, Logger.stream_handler_date_fmt))
    logger.addHandler(handler)
    Logger.file_handler = handler
    return handler


def pretty_print(*args, sep=' ', end='\n', file=None):
    msg = ''
    for arg in args:
        msg += str(arg) + sep
    msg = msg.rstrip(sep)
    print(msg, end=end, file=file)
