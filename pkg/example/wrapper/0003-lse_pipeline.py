#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

"""
Description: Estimate M by least squares from noisy simulated experiments, then count the realizations
    of the 95% confidence region
"""

import os
import sys

sys.path.append(os.path.join(os.path.dirname(__file__), '../..'))

from kinrealize.wrapper import KinRealizeAPI


seed = int(sys.argv[1]) if len(sys.argv) >= 2 else 2024

api = KinRealizeAPI.benchmark(threads=4)
dataset = api.generate_dataset(num_experiments=50, T=10.0, h=0.01, sigma2=1e-4, seed=seed)
result = api.lse_fit(dataset, noise_var=1e-4)
region = api.confidence_region(result, alpha=0.05)

dense = api.dense_realization(region)
print('dense edges:', dense.edge_count)
rset = api.enumerate_all(region)
print('realizations:', rset.count, 'r_max:', rset.r_max, 'ratio: {:.4f}'.format(api.info_ratio(rset)))
print('sparsest:', [sorted(s.edges) for s in api.sparse_realizations(rset)])
api.export_dot(dense, 'dense_lse.dot')
