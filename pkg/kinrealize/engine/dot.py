#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

import os
import pydot
from ..core.config.kr_config import KRCONF
from ..core.utils.log import logger
from .code import ContractViolation
from .enumeration import RealizationSet, SupportEntry
from .kinetic import Realization


def _quoted(text):
    return '"{}"'.format(text)


def realization_graph(realization, name='realization'):
    """
    Reaction graph: one node per complex labeled by its formula, one edge per reaction labeled by its rate
    """
    complexes = realization.complexes
    graph = pydot.Dot(name, graph_type='digraph')
    for j in range(complexes.m):
        graph.add_node(pydot.Node('C{}'.format(j + 1), label=_quoted(complexes.formula(j))))
    for (src, dst), rate in sorted(realization.rates().items()):
        graph.add_edge(pydot.Edge('C{}'.format(src + 1), 'C{}'.format(dst + 1),
                                  label=_quoted(KRCONF.Dot.RATE_FORMAT.format(rate))))
    return graph


def _write(graph, path):
    try:
        with open(path, 'w') as f:
            f.write(graph.to_string())
    except OSError as e:
        raise ContractViolation('cannot write {}: {}'.format(path, e))
    return path


def export_dot(obj, path):
    """
    Write one DOT file for a realization, or a directory of DOT files for a realization set

    :return: list of written paths
    """
    if isinstance(obj, SupportEntry):
        obj = obj.realization
    if isinstance(obj, Realization):
        return [_write(realization_graph(obj), path)]
    if not isinstance(obj, RealizationSet):
        raise ContractViolation('cannot export {} as DOT'.format(type(obj).__name__))
    os.makedirs(path, exist_ok=True)
    written = [_write(realization_graph(obj.dense, 'dense'), os.path.join(path, 'dense.dot'))]
    width = max(3, len(str(obj.count)))
    for k, entry in enumerate(obj.supports):
        name = 'realization_{}'.format(str(k + 1).zfill(width))
        written.append(_write(realization_graph(entry.realization, name), os.path.join(path, name + '.dot')))
    logger.info('wrote {} DOT files to {}'.format(len(written), path))
    return written
