#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

import os
import json
import numpy as np
import pandas as pd
import pytest

from kinrealize.core.config.kr_config import KRCONF
from kinrealize.engine import pipeline
from kinrealize.engine.code import ConfigError, StageError
from kinrealize.engine.dot import export_dot, realization_graph
from kinrealize.engine.enumeration import brute_force_enumerate, enumerate_all
from kinrealize.engine.fileio import load_model, read_trajectory, save_model
from kinrealize.engine.kinetic import KirchhoffMatrix, Realization, simulate
from kinrealize.engine.realization import RealizationProblem, UncertaintyRegion
from conftest import TRUE_EDGES


def _exact_config(model_path, out, **kwargs):
    return pipeline.ExperimentConfig(model_path, out=str(out), method='exact', **kwargs)


def _small_protocol(model_path, out, **kwargs):
    options = dict(num_experiments=3, T=1.0, h=0.1, seed=11, sigma2=0.0)
    options.update(kwargs)
    return pipeline.ExperimentConfig(model_path, out=str(out), **options)


def _without_timing(report):
    return {k: v for k, v in report.items() if k not in KRCONF.Report.TIMING_KEYS}


class TestConfig(object):
    @pytest.mark.parametrize('kwargs', [
        dict(T=0.01, h=0.01),
        dict(method='MLE'),
        dict(seed=-1),
        dict(alpha=1.5),
        dict(sweep={'lo': 1.0, 'hi': 0.1, 'count': 3}),
        dict(sweep={'lo': 1e-4}),
        dict(x0_range=(1.0, 0.0)),
        dict(exclusions=['C1=>C2']),
        dict(threads=0),
    ])
    def test_invalid(self, model_path, kwargs):
        with pytest.raises(ConfigError) as info:
            pipeline.ExperimentConfig(model_path, **kwargs)
        assert info.value.exit_code == 4

    def test_toml_paths_are_relative_to_the_file(self, tmp_path):
        path = tmp_path / 'run.toml'
        path.write_text('model = "model.json"\nout = "results"\n\n[protocol]\nseed = 5\nh = 0.1\n\n'
                        '[estimator]\nmethod = "SBL"\n\n[enumeration]\nexclusion_sets = [["C4->C1"]]\n')
        config = pipeline.ExperimentConfig.from_file(str(path))
        assert config.model == os.path.join(str(tmp_path), 'model.json')
        assert config.out == os.path.join(str(tmp_path), 'results')
        assert config.method == 'SBL'
        assert config.num_experiments == KRCONF.Protocol.SBL.NUM_EXPERIMENTS
        assert config.exclusion_sets == [['C4->C1']]
        assert config.seed == 5

    def test_json_file(self, tmp_path, model_path):
        path = tmp_path / 'run.json'
        path.write_text(json.dumps({'model': model_path, 'noise': {'sweep': {'lo': 1e-4, 'hi': 1e-2, 'count': 3}}}))
        config = pipeline.ExperimentConfig.from_file(str(path))
        assert np.allclose(config.sweep_values(), [1e-4, 1e-3, 1e-2])

    def test_missing_model(self):
        with pytest.raises(ConfigError):
            pipeline.ExperimentConfig.from_dict({'out': 'x'})

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(ConfigError):
            pipeline.ExperimentConfig.from_file(str(tmp_path / 'absent.toml'))

    def test_override(self, model_path):
        config = pipeline.ExperimentConfig(model_path, seed=1)
        config.override(seed=9, out=None)
        assert config.seed == 9
        assert config.out == 'out'
        with pytest.raises(ConfigError):
            config.override(colour='red')

    def test_seed_required(self, model_path):
        with pytest.raises(ConfigError):
            pipeline.ExperimentConfig(model_path).require_seed()

    def test_zero_mask(self, model_path):
        model = load_model(model_path)
        assert np.array_equal(pipeline.zero_mask(pipeline.ExperimentConfig(model_path), model), model.M == 0)
        assert pipeline.zero_mask(pipeline.ExperimentConfig(model_path, mask='full'), model) is None
        with pytest.raises(ConfigError):
            pipeline.zero_mask(pipeline.ExperimentConfig(model_path, mask=[[0, 1]]), model)


class TestData(object):
    def test_latin_hypercube_strata(self):
        points = pipeline.latin_hypercube(10, 3, 0.0, 1.0, np.random.default_rng(1))
        for dim in range(3):
            assert sorted(np.floor(points[:, dim] * 10).astype(int)) == list(range(10))

    def test_noiseless_files_equal_simulation(self, tmp_path, model_path):
        config = _small_protocol(model_path, tmp_path)
        manifest_path = pipeline.generate_data(config)
        with open(manifest_path) as f:
            manifest = json.load(f)
        assert manifest['seed'] == 11
        assert manifest['files'] == ['experiment_001.csv', 'experiment_002.csv', 'experiment_003.csv']
        model = load_model(model_path)
        x0s = pipeline.latin_hypercube(3, 5, 0.0, 1.0, np.random.default_rng(11))
        for name, x0 in zip(manifest['files'], x0s):
            traj = read_trajectory(os.path.join(os.path.dirname(manifest_path), name))
            assert traj.num_samples == 11
            assert np.array_equal(traj.states, simulate(model.system, x0, 1.0, 0.1).states)

    def test_same_seed_same_bytes(self, tmp_path, model_path):
        contents = []
        for run in ('a', 'b'):
            config = _small_protocol(model_path, tmp_path / run, sigma2=1e-3)
            pipeline.generate_data(config)
            with open(str(tmp_path / run / 'data' / 'experiment_002.csv'), 'rb') as f:
                contents.append(f.read())
        assert contents[0] == contents[1]

    def test_manifest_round_trip(self, tmp_path, model_path):
        config = _small_protocol(model_path, tmp_path, sigma2=1e-4, num_experiments=5, T=2.0, h=0.05)
        model = load_model(model_path)
        memory = pipeline.estimate_region(config, model)[1]
        config.data = pipeline.generate_data(config)
        files = pipeline.estimate_region(config, model)[1]
        assert np.array_equal(memory.M_hat, files.M_hat)

    def test_manifest_noise_level(self, tmp_path, model_path):
        config = _small_protocol(model_path, tmp_path, sigma2=1e-3, num_experiments=5, T=2.0, h=0.05)
        model = load_model(model_path)
        memory = pipeline.estimate_region(config, model)[1]
        config.data = pipeline.generate_data(config)
        config.sigma2 = 0.0
        files = pipeline.estimate_region(config, model)[1]
        assert np.array_equal(memory.M_hat, files.M_hat)
        config.correct_noise = False
        plain = pipeline.estimate_region(config, model)[1]
        assert not np.array_equal(plain.M_hat, files.M_hat)

    def test_correct_noise_from_file(self, tmp_path):
        path = tmp_path / 'run.json'
        path.write_text(json.dumps({'model': 'model.json', 'estimator': {'correct_noise': False}}))
        assert not pipeline.ExperimentConfig.from_file(str(path)).correct_noise
        path.write_text(json.dumps({'model': 'model.json'}))
        assert pipeline.ExperimentConfig.from_file(str(path)).correct_noise

    def test_noise_changes_samples(self, model_path):
        model = load_model(model_path)
        config = _small_protocol(model_path, 'unused')
        clean = pipeline.generate_dataset(config, model)
        noisy = pipeline.generate_dataset(config, model, sigma2=1e-2)
        assert np.all(clean[0].states != noisy[0].states)


class TestExactPipeline(object):
    def test_report(self, tmp_path, model_path):
        report = pipeline.run_pipeline(_exact_config(model_path, tmp_path, dot_all=True))
        assert report['schema'] == 1
        assert report['dense']['edge_count'] == 6
        assert report['count'] == 1
        assert report['r_max'] == 63
        assert report['info_ratio'] == pytest.approx(1 / 63)
        assert report['sparse']['edge_count'] == 6
        assert report['true_pattern']['is_realization']
        assert 'estimate' not in report
        rates = {(row['source'] - 1, row['target'] - 1): row['rate'] for row in report['dense']['edges']}
        assert rates == pytest.approx(TRUE_EDGES, abs=1e-6)
        assert os.path.exists(str(tmp_path / 'report.json'))
        assert os.path.exists(str(tmp_path / 'dot' / 'dense.dot'))
        assert os.path.exists(str(tmp_path / 'dot' / 'realizations' / 'realization_001.dot'))

    def test_deterministic(self, tmp_path, model_path):
        reports, dots = [], []
        for run in ('a', 'b'):
            reports.append(_without_timing(pipeline.run_pipeline(_exact_config(model_path, tmp_path / run))))
            with open(str(tmp_path / run / 'dot' / 'dense.dot'), 'rb') as f:
                dots.append(f.read())
        reports[0].pop('model')
        reports[1].pop('model')
        assert reports[0] == reports[1]
        assert dots[0] == dots[1]

    def test_infeasible_stage(self, tmp_path, model_path):
        config = _exact_config(model_path, tmp_path, exclusions=['C1->C2'])
        with pytest.raises(StageError) as info:
            pipeline.run_pipeline(config)
        assert info.value.stage == KRCONF.Stage.DENSE
        assert info.value.exit_code == 2

    def test_exclusion_counts(self, tmp_path, model_path):
        config = _exact_config(model_path, tmp_path, exclusion_sets=[['C4->C3']])
        report = pipeline.run_pipeline(config, write=False)
        assert report['exclusion_counts'] == {'count_excl_C4->C3': 0}
        assert not os.path.exists(str(tmp_path / 'report.json'))

    def test_single_point_sweep(self, tmp_path, model_path):
        config = _exact_config(model_path, tmp_path)
        table, summary = pipeline.run_sweep(config)
        assert list(table.columns) == ['sigma2', 'dense_edges', 'count', 'ratio']
        assert table['count'].tolist() == [1]
        report = pipeline.run_pipeline(config, write=False)
        assert table['ratio'][0] == report['info_ratio']
        assert summary['points'] == 1
        assert summary['failed'] == 0
        frame = pd.read_csv(str(tmp_path / 'sweep.csv'))
        assert frame['dense_edges'].tolist() == [6]

    def test_report_rebuild(self, tmp_path, model_path):
        report = pipeline.run_pipeline(_exact_config(model_path, tmp_path))
        model = load_model(model_path)
        dense, others = pipeline.realizations_from_report(report, model.complexes)
        assert dense.support == frozenset(TRUE_EDGES)
        assert len(others) == 1
        with pytest.raises(ConfigError):
            pipeline.realizations_from_report({}, model.complexes)


class TestSaturation(object):
    def test_summary(self):
        table = pd.DataFrame({'sigma2': [1e-3, 1e-2, 1e-1, 1.0], 'count': [3, 7, np.nan, 6],
                              'r_max': [7, 7, np.nan, 7]})
        summary = pipeline.saturation_summary(table)
        assert summary['saturated_from'] == 1e-2
        assert summary['failed'] == 1
        assert summary['max_count'] == 7
        assert summary['decreases'] == 1


class TestDot(object):
    def test_benchmark_graph(self, benchmark):
        complexes, kirchhoff, M = benchmark
        graph = realization_graph(Realization(complexes, kirchhoff, M))
        assert len(graph.get_nodes()) == 5
        edges = graph.get_edges()
        assert len(edges) == 6
        first = edges[0]
        assert (first.get_source(), first.get_destination()) == ('C1', 'C2')
        assert first.get_label().strip('"') == '0.3386'
        assert graph.get_node('C3')[0].get_label().strip('"') == 'X1+X3'

    def test_empty_realization(self, benchmark):
        complexes = benchmark[0]
        empty = Realization(complexes, KirchhoffMatrix(np.zeros((5, 5))), np.zeros((5, 5)))
        graph = realization_graph(empty)
        assert len(graph.get_nodes()) == 5
        assert graph.get_edges() == []

    def test_realization_set_directory(self, tmp_path, benchmark):
        complexes, _, M = benchmark
        rset = enumerate_all(RealizationProblem(complexes, UncertaintyRegion.exact(M)))
        written = export_dot(rset, str(tmp_path / 'dots'))
        assert [os.path.basename(p) for p in written] == ['dense.dot', 'realization_001.dot']
        with open(written[0]) as f:
            text = f.read()
        assert 'C1 -> C2' in text
        assert '0.3386' in text

    def test_unwritable(self, tmp_path, benchmark):
        complexes, kirchhoff, M = benchmark
        from kinrealize.engine.code import ContractViolation
        with pytest.raises(ContractViolation):
            export_dot(Realization(complexes, kirchhoff, M), str(tmp_path / 'missing' / 'x.dot'))


class TestModelFile(object):
    def test_round_trip(self, tmp_path, benchmark):
        complexes, kirchhoff, M = benchmark
        path = str(tmp_path / 'model.json')
        save_model(path, complexes, M, kirchhoff)
        model = load_model(path)
        assert np.allclose(model.M, M)
        assert model.true_support == frozenset(TRUE_EDGES)
        assert model.complexes == complexes

    def test_malformed(self, tmp_path):
        path = tmp_path / 'bad.json'
        path.write_text(json.dumps({'complexes': [[1, 0], [1, 0]], 'M': [[0.0, 0.0]]}))
        with pytest.raises(ConfigError):
            load_model(str(path))
        path.write_text('{"species": []}')
        with pytest.raises(ConfigError):
            load_model(str(path))


@pytest.mark.slow
class TestAcceptance(object):
    def test_lse_protocol(self, tmp_path, model_path):
        config = pipeline.ExperimentConfig(model_path, out=str(tmp_path), seed=2024, threads=4)
        report = pipeline.run_pipeline(config)
        assert report['true_pattern']['in_dense']
        assert 8 <= report['dense']['edge_count'] <= 10
        assert 40 <= report['count'] <= 80

    def test_lse_saturation(self, tmp_path, model_path):
        config = pipeline.ExperimentConfig(model_path, out=str(tmp_path), seed=2024, threads=4,
                                           sweep={'lo': 1e-4, 'hi': 10.0, 'count': 20})
        table, _ = pipeline.run_sweep(config, n_jobs=4)
        assert table['count'].max() <= 511
        assert table['count'].iloc[-1] == 511

    def test_sbl_pattern(self, tmp_path, model_path):
        model = load_model(model_path)
        for sigma2 in (1e-4, 1e-3, 1e-2, 1e-1):
            hits = 0
            for seed in range(5):
                config = pipeline.ExperimentConfig(model_path, out=str(tmp_path), seed=seed, method='SBL',
                                                   num_experiments=10, h=0.1, sigma2=sigma2)
                result = pipeline.estimate_region(config, model)[1]
                hits += np.array_equal(result.M_hat != 0, model.M != 0)
            assert hits >= 4

    def test_lse_enumeration_matches_brute_force(self, tmp_path, model_path):
        config = pipeline.ExperimentConfig(model_path, out=str(tmp_path), seed=2024, threads=4)
        model = load_model(model_path)
        region, result = pipeline.estimate_region(config, model)
        assert region.contains(model.M)
        problem = pipeline.build_problem(config, model, region)
        fast = enumerate_all(problem, threads=4)
        assert fast.support_sets == brute_force_enumerate(problem, threads=4).support_sets

    def test_sbl_exclusion_counts(self, tmp_path, model_path):
        sets = [['C4->C1'], ['C3->C1'], ['C3->C2']]
        rows = []
        for seed in range(5):
            config = pipeline.ExperimentConfig(model_path, out=str(tmp_path), seed=seed, method='SBL',
                                               num_experiments=10, h=0.1, sigma2=1e-4, threads=4,
                                               exclusion_sets=sets)
            report = pipeline.run_pipeline(config, write=False)
            rows.append([report['count']] + [report['exclusion_counts'][pipeline.exclusion_column(s)] for s in sets])
        medians = np.median(np.array(rows), axis=0)
        assert np.all(np.abs(medians - [11, 5, 7, 7]) <= 2)
