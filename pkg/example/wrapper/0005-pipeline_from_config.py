#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

"""
Description: Run a whole pipeline from a configuration file, the same as `kinrealize pipeline --config ...`
"""

import os
import sys

sys.path.append(os.path.join(os.path.dirname(__file__), '../..'))

from kinrealize.engine import ExperimentConfig, run_pipeline


path = sys.argv[1] if len(sys.argv) >= 2 else os.path.join(os.path.dirname(__file__), '../config/exact.json')
config = ExperimentConfig.from_file(path)
report = run_pipeline(config)
print('dense edges:', report['dense']['edge_count'])
print('realizations:', report['count'])
print('report:', os.path.join(config.out, 'report.json'))
