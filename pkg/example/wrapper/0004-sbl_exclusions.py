#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

"""
Description: Sparse Bayesian learning from 10 experiments, and the effect of ruling out single reactions
"""

import os
import sys

sys.path.append(os.path.join(os.path.dirname(__file__), '../..'))

from kinrealize.core.utils.convert import edge_label
from kinrealize.wrapper import KinRealizeAPI


seed = int(sys.argv[1]) if len(sys.argv) >= 2 else 2024

api = KinRealizeAPI.benchmark(threads=4)
dataset = api.generate_dataset(num_experiments=10, T=10.0, h=0.1, sigma2=1e-4, seed=seed)
result = api.sbl_fit(dataset, noise_var=1e-4)
print('recovered pattern matches:', ((result.M_hat != 0) == (api.M != 0)).all())

region = api.confidence_region(result)
dense = api.dense_realization(region)
dense_labels = {edge_label(e) for e in dense.support}
candidates = [[]] + [[label] for label in ('C4->C1', 'C3->C1', 'C3->C2') if label in dense_labels]
table = api.exclusion_study(candidates, region)
print(table.to_string(index=False))
