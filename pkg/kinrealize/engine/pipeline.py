#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

"""
End-to-end runs: data generation, estimation, confidence region, dense realization,
enumeration and exports, plus noise sweeps over many such runs.
"""

import os
import sys
import json
import time
import numpy as np
import pandas as pd
from scipy.stats import qmc
from joblib import Parallel, delayed
from tqdm import tqdm
from ..core.config.kr_config import KRCONF
from ..core.utils.log import logger, pretty_print
from ..core.utils.convert import edge_label, parse_edge, to_jsonable
from .code import ConfigError, InfeasibleError, KinRealizeError
from .decorator import stage
from .dot import export_dot
from .enumeration import enumerate_all, sparse_realizations
from .estimation import build_regression, confidence_region, lse_fit, sbl_fit
from .fileio import load_model, read_trajectory, write_trajectory
from .kinetic import KirchhoffMatrix, Realization, assemble_coefficients, info_ratio, simulate
from .realization import RealizationProblem, UncertaintyRegion, dense_realization

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

METHODS = ('LSE', 'SBL', 'exact')


def _section(raw, name):
    value = raw.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError('[{}] must be a table'.format(name))
    return value


class ExperimentConfig(object):
    """
    Run-time configuration of a pipeline or sweep, read from TOML or JSON

    Layout (all sections optional except the model):
        model = "benchmark_model.json"
        out = "out"
        alpha = 0.05
        exclusions = ["C4->C1"]
        required = []
        [protocol]   num_experiments, T, h, x0_range, seed
        [noise]      sigma2, or sweep = {lo, hi, count}
        [estimator]  method (LSE | SBL | exact), mask ("model" | "full" | n x m 0/1 list), lambda,
                     correct_noise (remove the bias of state noise with the known sigma2, default true)
        [enumeration] threads, max_realizations, exclusion_sets = [["C4->C1"], ...]
        [output]     dot_all, dump_program, data (manifest of an existing dataset)
    """
    def __init__(self, model, out='out', alpha=KRCONF.Protocol.LSE.ALPHA, exclusions=(), required=(),
                 num_experiments=KRCONF.Protocol.LSE.NUM_EXPERIMENTS, T=KRCONF.Protocol.LSE.T,
                 h=KRCONF.Protocol.LSE.H, x0_range=KRCONF.Protocol.X0_RANGE, seed=None,
                 sigma2=KRCONF.Protocol.LSE.SIGMA2, sweep=None, method='LSE', mask='model', lam=None,
                 threads=KRCONF.Enumeration.DEFAULT_THREADS, max_realizations=None, exclusion_sets=(),
                 dot_all=False, dump_program=None, data=None, correct_noise=True):
        self.model = model
        self.out = out
        self.alpha = alpha
        self.exclusions = list(exclusions)
        self.required = list(required)
        self.num_experiments = num_experiments
        self.T = T
        self.h = h
        self.x0_range = tuple(x0_range)
        self.seed = seed
        self.sigma2 = sigma2
        self.sweep = dict(sweep) if sweep else None
        self.method = method
        self.mask = mask
        self.lam = lam
        self.threads = threads
        self.max_realizations = max_realizations
        self.exclusion_sets = [list(s) for s in exclusion_sets]
        self.dot_all = dot_all
        self.dump_program = dump_program
        self.data = data
        self.correct_noise = correct_noise
        self.validate()

    @classmethod
    def from_dict(cls, raw, base_dir='.'):
        if 'model' not in raw:
            raise ConfigError('configuration lacks the model path')
        protocol = _section(raw, 'protocol')
        noise = _section(raw, 'noise')
        estimator = _section(raw, 'estimator')
        enumeration = _section(raw, 'enumeration')
        output = _section(raw, 'output')

        def path(value):
            if not value:
                return None
            return value if os.path.isabs(value) else os.path.normpath(os.path.join(base_dir, value))

        method = estimator.get('method', 'LSE')
        defaults = KRCONF.Protocol.SBL if method == 'SBL' else KRCONF.Protocol.LSE
        try:
            return cls(
                model=path(raw['model']),
                out=path(raw.get('out', 'out')),
                alpha=float(raw.get('alpha', defaults.ALPHA)),
                exclusions=raw.get('exclusions', []),
                required=raw.get('required', []),
                num_experiments=int(protocol.get('num_experiments', defaults.NUM_EXPERIMENTS)),
                T=float(protocol.get('T', defaults.T)),
                h=float(protocol.get('h', defaults.H)),
                x0_range=protocol.get('x0_range', KRCONF.Protocol.X0_RANGE),
                seed=protocol.get('seed'),
                sigma2=float(noise.get('sigma2', defaults.SIGMA2)),
                sweep=noise.get('sweep'),
                method=method,
                mask=estimator.get('mask', 'model'),
                lam=estimator.get('lambda'),
                threads=int(enumeration.get('threads', KRCONF.Enumeration.DEFAULT_THREADS)),
                max_realizations=enumeration.get('max_realizations'),
                exclusion_sets=enumeration.get('exclusion_sets', []),
                dot_all=bool(output.get('dot_all', False)),
                dump_program=path(output.get('dump_program')),
                data=path(output.get('data')),
                correct_noise=bool(estimator.get('correct_noise', True)),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError('invalid configuration value: {}'.format(e))

    @classmethod
    def from_file(cls, path):
        try:
            if path.endswith('.toml'):
                with open(path, 'rb') as f:
                    raw = tomllib.load(f)
            else:
                with open(path) as f:
                    raw = json.load(f)
        except (OSError, ValueError) as e:
            raise ConfigError('cannot read configuration {}: {}'.format(path, e))
        return cls.from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))

    def override(self, **kwargs):
        """
        Apply command-line values; None leaves the file value in place
        """
        for key, value in kwargs.items():
            if value is None:
                continue
            if not hasattr(self, key):
                raise ConfigError('unknown configuration field {}'.format(key))
            setattr(self, key, value)
        self.validate()
        return self

    def validate(self):
        if not self.model:
            raise ConfigError('configuration lacks the model path')
        if self.method not in METHODS:
            raise ConfigError('estimator method must be one of {}, got {}'.format(METHODS, self.method))
        if not (self.T > self.h > 0):
            raise ConfigError('protocol needs T > h > 0, got T={} h={}'.format(self.T, self.h))
        if self.num_experiments < 1:
            raise ConfigError('protocol needs at least one experiment')
        lo, hi = self.x0_range
        if not 0 <= lo < hi:
            raise ConfigError('x0_range must satisfy 0 <= lo < hi, got {}'.format(self.x0_range))
        if not 0 < self.alpha < 1:
            raise ConfigError('alpha must lie in (0, 1), got {}'.format(self.alpha))
        if self.sigma2 < 0:
            raise ConfigError('sigma2 must be nonnegative')
        if self.seed is not None and (not isinstance(self.seed, (int, np.integer)) or self.seed < 0):
            raise ConfigError('seed must be a nonnegative integer, got {}'.format(self.seed))
        if self.sweep is not None:
            try:
                lo, hi, count = float(self.sweep['lo']), float(self.sweep['hi']), int(self.sweep['count'])
            except (KeyError, TypeError, ValueError):
                raise ConfigError('noise sweep needs numeric lo, hi and count')
            if not (0 < lo <= hi) or count < 1:
                raise ConfigError('noise sweep needs 0 < lo <= hi and count >= 1')
        if self.lam is not None and float(self.lam) <= 0:
            raise ConfigError('lambda must be positive')
        if self.threads < 1:
            raise ConfigError('threads must be at least 1')
        if self.max_realizations is not None and int(self.max_realizations) < 1:
            raise ConfigError('max_realizations must be at least 1')
        for text in self.exclusions + self.required + [e for s in self.exclusion_sets for e in s]:
            try:
                parse_edge(text)
            except ValueError:
                raise ConfigError('cannot parse edge {!r}'.format(text))

    def require_seed(self):
        if self.seed is None:
            raise ConfigError('a seed is required for data generation (--seed or protocol.seed)')
        return int(self.seed)

    def sweep_values(self):
        if self.sweep is None:
            return np.array([self.sigma2])
        return np.logspace(np.log10(float(self.sweep['lo'])), np.log10(float(self.sweep['hi'])),
                           int(self.sweep['count']))

    def to_dict(self):
        return to_jsonable({k: v for k, v in vars(self).items()})


def _edges(texts, complexes):
    return frozenset(parse_edge(t, complexes.complex_labels) for t in texts)


def latin_hypercube(count, dim, lo, hi, rng):
    """
    One point per stratum and dimension, strata permuted independently per dimension
    """
    sample = qmc.LatinHypercube(d=dim, seed=rng).random(count)
    return qmc.scale(sample, np.full(dim, lo), np.full(dim, hi))


def generate_dataset(config, model, sigma2=None):
    """
    Simulated experiments from Latin-hypercube initial states with additive Gaussian measurement noise
    """
    sigma2 = config.sigma2 if sigma2 is None else sigma2
    rng = np.random.default_rng(config.require_seed())
    lo, hi = config.x0_range
    x0s = latin_hypercube(config.num_experiments, model.complexes.n, lo, hi, rng)
    system = model.system
    dataset = []
    for k, x0 in enumerate(x0s):
        traj = simulate(system, x0, config.T, config.h)
        if sigma2 > 0:
            traj = traj.with_states(traj.states + rng.normal(0.0, np.sqrt(sigma2), traj.states.shape))
        dataset.append(traj)
    logger.verbose('generated {} experiments with noise variance {}'.format(len(dataset), sigma2))
    return dataset


def generate_data(config, sigma2=None):
    """
    Write one trajectory CSV per experiment and a manifest recording the seed and the protocol

    :return: manifest path
    """
    model = load_model(config.model)
    sigma2 = config.sigma2 if sigma2 is None else sigma2
    dataset = generate_dataset(config, model, sigma2)
    folder = os.path.join(config.out, 'data')
    os.makedirs(folder, exist_ok=True)
    files = []
    for k, traj in enumerate(dataset):
        name = 'experiment_{:03d}.csv'.format(k + 1)
        write_trajectory(os.path.join(folder, name), traj)
        files.append(name)
    manifest = {
        'schema': KRCONF.Report.SCHEMA,
        'model': config.model,
        'seed': config.seed,
        'rng': KRCONF.Protocol.RNG_ALGORITHM,
        'sampling': 'latin-hypercube',
        'protocol': {'num_experiments': config.num_experiments, 'T': config.T, 'h': config.h,
                     'x0_range': list(config.x0_range)},
        'sigma2': sigma2,
        'files': files,
    }
    path = os.path.join(folder, 'manifest.json')
    with open(path, 'w') as f:
        json.dump(to_jsonable(manifest), f, indent=2)
    logger.info('wrote {} experiments and {}'.format(len(files), path))
    return path


def load_dataset(manifest_path):
    try:
        with open(manifest_path) as f:
            manifest = json.load(f)
    except (OSError, ValueError) as e:
        raise ConfigError('cannot read manifest {}: {}'.format(manifest_path, e))
    folder = os.path.dirname(os.path.abspath(manifest_path))
    return [read_trajectory(os.path.join(folder, name)) for name in manifest.get('files', [])], manifest


def zero_mask(config, model):
    if config.mask == 'full':
        return None
    if config.mask == 'model':
        return model.M == 0
    mask = np.asarray(config.mask, dtype=bool)
    if mask.shape != model.M.shape:
        raise ConfigError('estimator mask has shape {}, model M is {}'.format(mask.shape, model.M.shape))
    return mask


@stage(KRCONF.Stage.SIMULATE)
def _simulate_stage(config, model, sigma2):
    """
    :return: (dataset, noise variance of its samples)
    """
    if config.data:
        dataset, manifest = load_dataset(config.data)
        logger.info('read {} experiments listed in {}'.format(len(dataset), config.data))
        recorded = manifest.get('sigma2')
        if recorded is None:
            logger.warning('manifest {} records no noise variance, using sigma2={}'.format(config.data, sigma2))
            return dataset, sigma2
        return dataset, float(recorded)
    return generate_dataset(config, model, sigma2), sigma2


@stage(KRCONF.Stage.ESTIMATE)
def _estimate_stage(config, model, dataset, sigma2):
    data = build_regression(dataset, model.complexes, allow_negative=True)
    noise_var = sigma2 if config.correct_noise else None
    if config.method == 'SBL':
        return sbl_fit(data, config.lam, noise_var=noise_var)
    return lse_fit(data, zero_mask(config, model), noise_var=noise_var)


@stage(KRCONF.Stage.REGION)
def _region_stage(result, alpha):
    return confidence_region(result, alpha)


@stage(KRCONF.Stage.DENSE)
def _dense_stage(problem, dump_path):
    return dense_realization(problem, dump_path=dump_path)


@stage(KRCONF.Stage.ENUMERATE)
def _enumerate_stage(problem, threads, max_realizations, progress):
    return enumerate_all(problem, threads=threads, max_realizations=max_realizations, progress=progress)


@stage(KRCONF.Stage.EXPORT)
def _export_stage(config, out, rset):
    dot_dir = os.path.join(out, 'dot')
    os.makedirs(dot_dir, exist_ok=True)
    written = export_dot(rset.dense, os.path.join(dot_dir, 'dense.dot'))
    if config.dot_all:
        written += export_dot(rset, os.path.join(dot_dir, 'realizations'))
    return written


def estimate_region(config, model, sigma2=None, dataset=None):
    """
    Confidence region of the estimate from the configured data, or the model's M in exact mode

    :param sigma2: state noise variance of the data, defaults to the configured one
    :return: (UncertaintyRegion, EstimationResult or None)
    """
    if config.method == 'exact':
        return UncertaintyRegion.exact(model.M), None
    sigma2 = config.sigma2 if sigma2 is None else sigma2
    if dataset is None:
        dataset, sigma2 = _simulate_stage(config, model, sigma2)
    result = _estimate_stage(config, model, dataset, sigma2)
    return _region_stage(result, config.alpha), result


def _edge_rows(realization):
    return [{'edge': edge_label(e), 'source': e[0] + 1, 'target': e[1] + 1, 'rate': r}
            for e, r in realization.rates().items()]


def estimate_summary(result):
    summary = {
        'method': result.method,
        'M_hat': result.M_hat,
        'support': result.support.astype(int),
        'standard_errors': result.standard_errors(),
        'sigma2_rows': result.sigma2,
        'covariance_trace': [float(np.trace(c)) if c.size else 0.0 for c in result.covariances],
        'converged': result.converged,
    }
    if result.gamma is not None:
        summary['gamma'] = result.gamma
        summary['iterations'] = [len(t) for t in result.trace]
    return summary


def region_summary(region):
    axes = region.semi_axes()
    return {
        'kind': region.kind,
        'free': int(region.free_indices.size),
        'semi_axis_min': float(axes.min()) if axes.size else 0.0,
        'semi_axis_max': float(axes.max()) if axes.size else 0.0,
    }


def build_problem(config, model, region):
    return RealizationProblem(model.complexes, region, _edges(config.exclusions, model.complexes),
                              _edges(config.required, model.complexes))


def exclusion_column(edges):
    return 'count_excl_' + '+'.join(edges)


def _count_with(problem, extra, threads, max_realizations):
    try:
        return enumerate_all(problem.with_exclusions(extra), threads=threads, max_realizations=max_realizations).count
    except InfeasibleError:
        return 0


def run_pipeline(config, sigma2=None, dataset=None, out=None, progress=None, write=True):
    """
    estimate -> confidence region -> dense realization -> enumeration -> exports

    :param dataset: trajectories to estimate from; None generates or reads them per the configuration
    :param progress: callable(tasks_done, tasks_queued) forwarded to the enumeration
    :return: report dict, also written to <out>/report.json when write is set
    """
    sigma2 = config.sigma2 if sigma2 is None else sigma2
    out = config.out if out is None else out
    model = load_model(config.model)
    timing = {}
    report = {
        'schema': KRCONF.Report.SCHEMA,
        'model': config.model,
        'method': config.method,
        'sigma2': sigma2 if config.method != 'exact' else 0.0,
        'alpha': config.alpha,
        'seed': config.seed,
        'exclusions': sorted(edge_label(e) for e in _edges(config.exclusions, model.complexes)),
        'required': sorted(edge_label(e) for e in _edges(config.required, model.complexes)),
    }
    start = time.monotonic()
    region, result = estimate_region(config, model, sigma2, dataset)
    timing['estimate'] = time.monotonic() - start
    if result is not None:
        report['estimate'] = estimate_summary(result)
    report['region'] = region_summary(region)

    problem = build_problem(config, model, region)
    start = time.monotonic()
    dense = _dense_stage(problem, config.dump_program)
    timing['dense'] = time.monotonic() - start
    start = time.monotonic()
    rset = _enumerate_stage(problem, config.threads, config.max_realizations, progress)
    timing['enumerate'] = time.monotonic() - start
    timing['solves'] = rset.stats.get('solves', 0)

    sparse = sparse_realizations(rset)
    report['dense'] = {'edge_count': dense.edge_count, 'edges': _edge_rows(dense)}
    report['count'] = rset.count
    report['r_max'] = rset.r_max
    report['info_ratio'] = info_ratio(rset.count, dense.edge_count) if dense.edge_count else 1.0
    report['partial'] = rset.partial
    report['sparse'] = {
        'edge_count': len(sparse[0]) if sparse else 0,
        'count': len(sparse),
        'supports': [sorted(edge_label(e) for e in s.edges) for s in sparse],
    }
    report['realizations'] = [{'edge_count': len(s), 'edges': _edge_rows(s.realization)} for s in rset.supports]
    if config.exclusion_sets:
        report['exclusion_counts'] = {
            exclusion_column(s): _count_with(problem, _edges(s, model.complexes), config.threads,
                                             config.max_realizations)
            for s in config.exclusion_sets
        }
    if model.kirchhoff is not None:
        truth = model.true_support
        check = {
            'edges': sorted(edge_label(e) for e in truth),
            'in_dense': truth <= dense.support,
            'is_realization': truth in rset.support_sets,
        }
        if result is not None:
            check['pattern_match'] = bool(np.array_equal(result.M_hat != 0, model.M != 0))
        report['true_pattern'] = check
    report['timing'] = timing
    if write:
        start = time.monotonic()
        os.makedirs(out, exist_ok=True)
        _export_stage(config, out, rset)
        timing['export'] = time.monotonic() - start
        with open(os.path.join(out, 'report.json'), 'w') as f:
            json.dump(to_jsonable(report), f, indent=2)
    logger.info('pipeline: dense {} edges, {} realizations, ratio {:.4f}'.format(
        dense.edge_count, rset.count, report['info_ratio']))
    return report


def _sweep_point(config, k, sigma2):
    row = {'sigma2': sigma2}
    try:
        out = os.path.join(config.out, 'sweep', 'point_{:03d}'.format(k + 1))
        report = run_pipeline(config, sigma2=sigma2, out=out)
        row.update(dense_edges=report['dense']['edge_count'], count=report['count'], ratio=report['info_ratio'],
                   r_max=report['r_max'])
        row.update(report.get('exclusion_counts', {}))
    except KinRealizeError as e:
        logger.error('sweep point sigma2={:.4g} failed: {}'.format(sigma2, e))
        row['error'] = str(e)
    return row


def saturation_summary(table):
    """
    First noise level whose count reaches the combinatorial bound, and the number of count decreases
    """
    done = table.dropna(subset=['count'])
    saturated = done[done['count'] >= done['r_max']]
    return {
        'points': int(len(table)),
        'failed': int(len(table) - len(done)),
        'saturated_from': float(saturated['sigma2'].iloc[0]) if len(saturated) else None,
        'max_count': int(done['count'].max()) if len(done) else None,
        'decreases': int(np.sum(np.diff(done['count'].to_numpy()) < 0)),
    }


def run_sweep(config, n_jobs=1, progress=False):
    """
    Full pipeline per noise level, tabulated in <out>/sweep.csv as sigma2,dense_edges,count,ratio
    followed by one count column per configured exclusion set

    :return: (pandas.DataFrame, saturation summary dict)
    """
    values = config.sweep_values()
    tasks = (delayed(_sweep_point)(config, k, float(s)) for k, s in enumerate(values))
    rows = list(tqdm(Parallel(n_jobs=n_jobs, return_as='generator')(tasks), total=len(values),
                     desc='sweep', disable=not progress))
    columns = ['sigma2', 'dense_edges', 'count', 'ratio'] + [exclusion_column(s) for s in config.exclusion_sets]
    table = pd.DataFrame(rows)
    for column in columns + ['r_max']:
        if column not in table:
            table[column] = np.nan
    if 'error' in table:
        columns.append('error')
    os.makedirs(config.out, exist_ok=True)
    path = os.path.join(config.out, 'sweep.csv')
    table[columns].to_csv(path, index=False, float_format=KRCONF.Csv.FLOAT_FORMAT)
    summary = saturation_summary(table)
    pretty_print('sweep: {} points, {} failed, max count {}, saturated from sigma2={}, {} decreases'.format(
        summary['points'], summary['failed'], summary['max_count'], summary['saturated_from'], summary['decreases']))
    logger.info('sweep table written to {}'.format(path))
    return table[columns], summary


def realizations_from_report(report, complexes):
    """
    Rebuild the dense realization and every listed realization from the edge rates of a report
    """
    def rebuild(rows):
        rates = {(row['source'] - 1, row['target'] - 1): row['rate'] for row in rows}
        kirchhoff = KirchhoffMatrix.from_edges(complexes.m, rates)
        return Realization(complexes, kirchhoff, assemble_coefficients(complexes, kirchhoff))

    try:
        dense = rebuild(report['dense']['edges'])
        others = [rebuild(entry['edges']) for entry in report.get('realizations', [])]
    except (KeyError, TypeError) as e:
        raise ConfigError('report lacks realization edges: {}'.format(e))
    return dense, others
