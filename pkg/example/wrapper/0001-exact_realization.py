#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

"""
Description: Dense realization and enumeration of the reference network with exactly known coefficients
    Note: Y is invertible here, so the known network is the only realization
"""

import os
import sys

sys.path.append(os.path.join(os.path.dirname(__file__), '../..'))

from kinrealize.wrapper import KinRealizeAPI


api = KinRealizeAPI.benchmark()

print('=' * 50)
print('kinetic:', api.is_kinetic())
dense = api.dense_realization()
print('dense edges:', dense.edge_count)
for edge, rate in dense.rates().items():
    print('  C{}->C{}: {:.4f}'.format(edge[0] + 1, edge[1] + 1, rate))

rset = api.enumerate_all()
print('realizations:', rset.count)
