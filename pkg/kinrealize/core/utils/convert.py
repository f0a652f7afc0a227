#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

import math
import numpy as np


def complex_formula(column, species_names=None):
    """
    Render a complex composition column as a formula, e.g. (1, 0, 1) -> 'X1+X3', (0, 2) -> '2X2'
    """
    terms = []
    for i, coeff in enumerate(column):
        coeff = int(coeff)
        if coeff == 0:
            continue
        name = species_names[i] if species_names else 'X{}'.format(i + 1)
        terms.append(name if coeff == 1 else '{}{}'.format(coeff, name))
    return '+'.join(terms) if terms else '0'


def edge_label(edge, complex_labels=None):
    """
    Render an ordered complex pair (source, target), zero-based, as 'C1->C2'
    """
    src, dst = edge
    if complex_labels:
        return '{}->{}'.format(complex_labels[src], complex_labels[dst])
    return 'C{}->C{}'.format(src + 1, dst + 1)


def parse_edge(text, complex_labels=None):
    """
    Inverse of edge_label; accepts 'C4->C1', 'C4 -> C1' and '4,1' (one-based)
    """
    text = text.replace(' ', '')
    if '->' in text:
        src, dst = text.split('->')
    else:
        src, dst = text.split(',')
    if complex_labels and src in complex_labels and dst in complex_labels:
        return complex_labels.index(src), complex_labels.index(dst)
    return int(src.lstrip('Cc')) - 1, int(dst.lstrip('Cc')) - 1


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in items]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        if math.isnan(obj) or math.isinf(obj):
            return None
        return obj
    return obj
