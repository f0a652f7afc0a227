#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

"""
kinrealize command line

    kinrealize pipeline --config example/config/lse_benchmark.toml --seed 7 --threads 4
    kinrealize dense --model example/data/benchmark_model.json --method exact
    kinrealize sweep --config example/config/lse_sweep.toml --jobs 8
"""

import os
import json
import argparse
from tqdm import tqdm
from ..core.config.kr_config import KRCONF
from ..core.utils.log import logger, log_to_file, set_level, pretty_print
from ..core.utils.convert import edge_label, to_jsonable
from ..engine import pipeline, enumeration
from ..engine.code import ConfigError, KinRealizeError
from ..engine.dot import export_dot
from ..engine.fileio import load_model
from ..engine.realization import dense_realization
from ..version import __version__


def _global_flags(parser):
    parser.add_argument('--config', help='experiment configuration (.toml or .json)')
    parser.add_argument('--model', help='model JSON, overrides the configuration')
    parser.add_argument('--method', choices=pipeline.METHODS, help='estimator, or exact to skip estimation')
    parser.add_argument('--seed', type=int, help='seed of every stochastic step')
    parser.add_argument('--sigma2', type=float, help='measurement noise variance')
    parser.add_argument('--alpha', type=float, help='significance level of the confidence region')
    parser.add_argument('--out', help='output directory')
    parser.add_argument('--threads', type=int, help='enumeration worker threads')
    parser.add_argument('--max-realizations', type=int, help='stop the enumeration after this many realizations')
    parser.add_argument('--dump-program', help='write the first realization program to this JSON file')
    parser.add_argument('--log-level', default=None, help='VERBOSE, DEBUG, INFO, WARNING or ERROR')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v for INFO, -vv for DEBUG')
    parser.add_argument('--log-file', help='also write the log records to this file')
    parser.add_argument('--progress', action='store_true', help='show progress bars')


def build_parser():
    parser = argparse.ArgumentParser(prog='kinrealize', description='Reaction network realizations of kinetic '
                                                                    'models estimated from data')
    parser.add_argument('--version', action='version', version=__version__)
    sub = parser.add_subparsers(dest='command', required=True)
    commands = {
        'simulate': 'generate noisy experiments and their manifest',
        'estimate': 'estimate M and its confidence region',
        'dense': 'compute the dense realization',
        'enumerate': 'list every structurally different realization',
        'pipeline': 'estimate, realize, enumerate and export',
        'sweep': 'run the pipeline over a range of noise levels',
        'export-dot': 'write DOT files of the realizations in a report',
    }
    parsers = {}
    for name, text in commands.items():
        parsers[name] = sub.add_parser(name, help=text, description=text)
        _global_flags(parsers[name])
    parsers['enumerate'].add_argument('--brute-force', action='store_true',
                                      help='test every edge subset of the dense realization instead')
    parsers['pipeline'].add_argument('--dot-all', action='store_true', help='also write every realization as DOT')
    parsers['sweep'].add_argument('--jobs', type=int, default=1, help='sweep points run in parallel')
    parsers['export-dot'].add_argument('report', help='report.json written by the pipeline')
    parsers['export-dot'].add_argument('--all', action='store_true', help='also write every listed realization')
    return parser


def load_config(args):
    if args.config:
        config = pipeline.ExperimentConfig.from_file(args.config)
    elif args.model:
        config = pipeline.ExperimentConfig(args.model)
    else:
        raise ConfigError('either --config or --model is required')
    config.override(model=args.model, method=args.method, seed=args.seed, sigma2=args.sigma2, alpha=args.alpha,
                    out=args.out, threads=args.threads, max_realizations=args.max_realizations,
                    dump_program=args.dump_program, dot_all=getattr(args, 'dot_all', None) or None)
    return config


class _Progress(object):
    def __init__(self, enabled, desc):
        self._bar = tqdm(desc=desc, total=1, disable=not enabled)

    def __call__(self, done, queued):
        self._bar.total = done + queued
        self._bar.n = done
        self._bar.refresh()

    def close(self):
        self._bar.close()


def _write_json(path, data):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w') as f:
        json.dump(to_jsonable(data), f, indent=2)
    return path


def cmd_simulate(args, config):
    path = pipeline.generate_data(config)
    pretty_print('manifest:', path)


def cmd_estimate(args, config):
    if config.method == 'exact':
        raise ConfigError('estimate needs the LSE or SBL method')
    model = load_model(config.model)
    region, result = pipeline.estimate_region(config, model)
    summary = pipeline.estimate_summary(result)
    summary['region'] = pipeline.region_summary(region)
    path = _write_json(os.path.join(config.out, 'estimate.json'), summary)
    pretty_print('M_hat ({}):'.format(result.method))
    for row in result.M_hat:
        pretty_print(*['{:+.4f}'.format(v) for v in row])
    pretty_print('written:', path)


def cmd_dense(args, config):
    model = load_model(config.model)
    region, _ = pipeline.estimate_region(config, model)
    dense = dense_realization(pipeline.build_problem(config, model, region), dump_path=config.dump_program)
    pretty_print('dense realization, {} edges'.format(dense.edge_count))
    for edge, rate in dense.rates().items():
        pretty_print('  {:<10} {}'.format(edge_label(edge), KRCONF.Dot.RATE_FORMAT.format(rate)))
    os.makedirs(config.out, exist_ok=True)
    export_dot(dense, os.path.join(config.out, 'dense.dot'))


def cmd_enumerate(args, config):
    model = load_model(config.model)
    region, _ = pipeline.estimate_region(config, model)
    problem = pipeline.build_problem(config, model, region)
    if args.brute_force:
        rset = enumeration.brute_force_enumerate(problem, threads=config.threads)
    else:
        progress = _Progress(args.progress, 'enumerate')
        try:
            rset = enumeration.enumerate_all(problem, threads=config.threads,
                                             max_realizations=config.max_realizations, progress=progress)
        finally:
            progress.close()
    pretty_print('{} realizations, dense support {} edges, r_max {}{}'.format(
        rset.count, rset.dense.edge_count, rset.r_max, ' (partial)' if rset.partial else ''))
    for entry in rset.supports:
        pretty_print('  ' + ' '.join(edge_label(e) for e in sorted(entry.edges)))
    _write_json(os.path.join(config.out, 'realizations.json'), {
        'count': rset.count,
        'partial': rset.partial,
        'r_max': rset.r_max,
        'supports': [sorted(edge_label(e) for e in s.edges) for s in rset.supports],
    })


def cmd_pipeline(args, config):
    progress = _Progress(args.progress, 'enumerate')
    try:
        report = pipeline.run_pipeline(config, progress=progress)
    finally:
        progress.close()
    pretty_print('dense edges: {}'.format(report['dense']['edge_count']))
    pretty_print('realizations: {} of r_max {} (ratio {:.4f}){}'.format(
        report['count'], report['r_max'], report['info_ratio'], ' partial' if report['partial'] else ''))
    pretty_print('sparsest: {} edges, {} supports'.format(report['sparse']['edge_count'], report['sparse']['count']))
    if 'true_pattern' in report:
        pretty_print('known network is a realization: {}'.format(report['true_pattern']['is_realization']))
    pretty_print('report:', os.path.join(config.out, 'report.json'))


def cmd_sweep(args, config):
    if config.sweep is None:
        logger.warning('no noise sweep configured, running the single level sigma2={}'.format(config.sigma2))
    pipeline.run_sweep(config, n_jobs=args.jobs, progress=args.progress)


def cmd_export_dot(args, config):
    with open(args.report) as f:
        report = json.load(f)
    model = load_model(config.model)
    dense, others = pipeline.realizations_from_report(report, model.complexes)
    os.makedirs(config.out, exist_ok=True)
    export_dot(dense, os.path.join(config.out, 'dense.dot'))
    if args.all:
        width = max(3, len(str(len(others))))
        for k, realization in enumerate(others):
            export_dot(realization, os.path.join(config.out, 'realization_{}.dot'.format(str(k + 1).zfill(width))))
    pretty_print('DOT files written to', config.out)


COMMANDS = {
    'simulate': cmd_simulate,
    'estimate': cmd_estimate,
    'dense': cmd_dense,
    'enumerate': cmd_enumerate,
    'pipeline': cmd_pipeline,
    'sweep': cmd_sweep,
    'export-dot': cmd_export_dot,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.log_level:
            try:
                set_level(args.log_level)
            except (TypeError, ValueError):
                raise ConfigError('unknown log level {}'.format(args.log_level))
        elif args.verbose:
            set_level(logger.INFO if args.verbose == 1 else logger.DEBUG)
        if args.log_file:
            log_to_file(args.log_file)
        config = load_config(args)
        COMMANDS[args.command](args, config)
    except KinRealizeError as e:
        logger.error('{}: {}'.format(e.title, e))
        return e.exit_code
    except Exception as e:
        logger.exception('unexpected error: {}'.format(e))
        return KRCONF.ExitCode.OTHER
    finally:
        if args.log_file:
            log_to_file(None)
    return KRCONF.ExitCode.SUCCESS


if __name__ == '__main__':
    raise SystemExit(main())
