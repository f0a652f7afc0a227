#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

"""
Description: Realizations of every coefficient matrix within a ball around the reference M
"""

import os
import sys

sys.path.append(os.path.join(os.path.dirname(__file__), '../..'))

from kinrealize.wrapper import KinRealizeAPI


api = KinRealizeAPI.benchmark(threads=2)

for rho in (0.0, 0.05, 0.2):
    rset = api.enumerate_all(region=rho)
    print('rho={:<5} dense={} count={} r_max={} ratio={:.4f}'.format(
        rho, rset.dense.edge_count, rset.count, rset.r_max, api.info_ratio(rset)))
