#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

import os
from setuptools import setup, find_packages

main_ns = {}
ver_path = os.path.join('kinrealize', 'version.py')
with open(os.path.join(os.getcwd(), ver_path)) as ver_file:
    exec(ver_file.read(), main_ns)

version = main_ns['__version__']

with open(os.path.join(os.getcwd(), 'README.md')) as f:
    long_description = f.read()

with open(os.path.join(os.getcwd(), 'requirements.txt')) as f:
    requirements = [line for line in f.read().splitlines() if line and not line.startswith('#')]

setup(
    name='kinrealize',
    version=version,
    author='kinrealize developers',
    description='Reaction network realizations of kinetic models identified from data',
    packages=find_packages(exclude=('test_files', 'example')),
    install_requires=requirements,
    extras_require={'test': ['pytest>=7.0']},
    python_requires='>=3.8',
    entry_points={'console_scripts': ['kinrealize=kinrealize.tools.cli:main']},
    long_description=long_description,
    long_description_content_type='text/markdown',
    license='BSD',
    zip_safe=False
)
