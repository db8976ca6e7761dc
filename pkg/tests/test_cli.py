"""End-to-end tests of the command-line interface."""

import json

import pytest

import main


def run(capsys, tmp_path, *argv):
    code = main.main(list(argv) + ['--log-dir', str(tmp_path / 'logs'), '--quiet'])
    return code, capsys.readouterr().out


def test_model_describe(capsys, tmp_path, write_model, sbm_config):
    code, out = run(capsys, tmp_path, 'model', 'describe', str(write_model(sbm_config)))
    assert code == main.EXIT_OK
    document = json.loads(out)
    assert document['alphas'] == pytest.approx([100.0, 25.0])
    assert document['c'] == pytest.approx(100.0)
    assert set(document['meta']) == {'version', 'seed', 'config_hash', 'command'}


def test_config_hash_tracks_model_content(capsys, tmp_path, write_model, sbm_config, two_value_config):
    hashes = []
    for config, name in ((sbm_config, 'a.json'), (sbm_config, 'b.json'), (two_value_config, 'c.json')):
        _, out = run(capsys, tmp_path, 'model', 'describe', str(write_model(config, name)))
        hashes.append(json.loads(out)['meta']['config_hash'])
    assert hashes[0] == hashes[1]
    assert hashes[0] != hashes[2]


def test_run_log_written(capsys, tmp_path, write_model, sbm_config):
    run(capsys, tmp_path, 'model', 'describe', str(write_model(sbm_config)))
    logs = list((tmp_path / 'logs').glob('spectra_model_describe_*.json'))
    assert len(logs) == 1
    assert 'session' in json.loads(logs[0].read_text())


def test_invalid_model_is_a_usage_error(capsys, tmp_path, write_model):
    path = write_model({'n': 10, 'atoms': [{'k': [1], 'weight': 0.9}]})
    code, _ = run(capsys, tmp_path, 'model', 'describe', str(path))
    assert code == main.EXIT_USAGE
    record = json.loads(next((tmp_path / 'logs').glob('spectra_model_describe_*.json')).read_text())
    assert record['error']['type'] == 'WeightSum'


def test_missing_model_file(capsys, tmp_path):
    code, _ = run(capsys, tmp_path, 'model', 'describe', str(tmp_path / 'absent.json'))
    assert code == main.EXIT_USAGE


def test_unknown_subcommand(capsys, tmp_path):
    assert main.main(['frobnicate']) == main.EXIT_USAGE


def test_oracle_constants(capsys, tmp_path):
    code, out = run(capsys, tmp_path, 'oracle', 'constants', '--kappa', '60')
    assert code == main.EXIT_OK
    document = json.loads(out)
    assert document['x'] == pytest.approx(7.058, abs=5e-4)
    assert document['y'] == pytest.approx(0.723, abs=5e-4)
    assert document['band_edge'] == pytest.approx(20.58, abs=0.01)
    assert document['theta_star'] == pytest.approx(32.2, abs=0.05)


def test_oracle_density_csv(capsys, tmp_path):
    code, out = run(capsys, tmp_path, 'oracle', 'density', '--kind', 'semicircle', '--c', '100', '--points', '5')
    assert code == main.EXIT_OK
    lines = out.splitlines()
    assert lines[0].startswith('# ')
    assert lines[1] == 'x,rho'
    assert len(lines) == 7


def test_oracle_density_needs_parameters(capsys, tmp_path):
    code, _ = run(capsys, tmp_path, 'oracle', 'density', '--kind', 'semicircle')
    assert code == main.EXIT_USAGE


def test_sample_then_eigenvalues(capsys, tmp_path, write_model, sbm_config):
    model_file = str(write_model(dict(sbm_config, n=300)))
    graph_file = tmp_path / 'graph.csv'
    code, _ = run(capsys, tmp_path, 'sample', model_file, '--seed', '4', '--out', str(graph_file))
    assert code == main.EXIT_OK
    assert graph_file.exists()
    assert (tmp_path / 'graph.csv.json').exists()
    assert (tmp_path / 'graph.csv.meta.json').exists()

    eig_file = tmp_path / 'eig.json'
    code, _ = run(capsys, tmp_path, 'empirical', 'eig', str(graph_file), '--mode', 'topk:2',
                  '--format', 'json', '--out', str(eig_file))
    assert code == main.EXIT_OK
    eigenvalues = json.loads(eig_file.read_text())['eigenvalues']
    assert len(eigenvalues) == 2
    assert eigenvalues[0] > eigenvalues[1]
    assert json.loads((tmp_path / 'eig.json.meta.json').read_text())['command'] == 'empirical eig'


def test_sample_needs_out(capsys, tmp_path, write_model, sbm_config):
    code, _ = run(capsys, tmp_path, 'sample', str(write_model(sbm_config)))
    assert code == main.EXIT_USAGE


def test_detect_on_sampled_graph(capsys, tmp_path, write_model):
    config = {'n': 400, 'two_community': {'kappas': [{'kappa': 100, 'weight': 1}], 'theta': 80}}
    graph_file = tmp_path / 'graph.csv'
    run(capsys, tmp_path, 'sample', str(write_model(config)), '--out', str(graph_file))
    code, out = run(capsys, tmp_path, 'empirical', 'detect', str(graph_file))
    assert code == main.EXIT_OK
    assert json.loads(out)['accuracy'] > 0.8


def test_theory_outliers(capsys, tmp_path, write_model, sbm_config):
    code, out = run(capsys, tmp_path, 'theory', 'outliers', str(write_model(sbm_config)), '--threads', '2')
    assert code == main.EXIT_OK
    document = json.loads(out)
    assert [entry['z'] for entry in document['outliers']] == pytest.approx([101.0, 29.0], rel=1e-8)


def test_theory_threshold_sweep_csv(capsys, tmp_path, write_model, sbm_config):
    code, out = run(capsys, tmp_path, 'theory', 'threshold', str(write_model(sbm_config)),
                    '--sweep', '20:40:3', '--threads', '2')
    assert code == main.EXIT_OK
    lines = out.splitlines()
    assert lines[1] == 'theta,alpha2,visible'
    assert [line.split(',')[2] for line in lines[2:]] == ['false', 'false', 'true']


def test_threshold_needs_two_community_file(capsys, tmp_path, write_model):
    path = write_model({'n': 10, 'atoms': [{'k': [100], 'weight': 1.0}]})
    code, _ = run(capsys, tmp_path, 'theory', 'threshold', str(path))
    assert code == main.EXIT_USAGE


def test_interlace(capsys, tmp_path, write_model, two_value_config):
    code, out = run(capsys, tmp_path, 'empirical', 'interlace', str(write_model(two_value_config)), '--seed', '3')
    assert code == main.EXIT_OK
    assert json.loads(out)['holds'] is True


def test_bad_solver_flags(capsys, tmp_path, write_model, sbm_config):
    code, _ = run(capsys, tmp_path, 'theory', 'band', str(write_model(sbm_config)), '--tol', '0')
    assert code == main.EXIT_USAGE


@pytest.mark.slow
def test_reproduce_figure(capsys, tmp_path, write_model, two_value_config):
    out_dir = tmp_path / 'figure'
    code, _ = run(capsys, tmp_path, 'reproduce-figure', str(write_model(two_value_config)),
                  '--n', '4000', '--seed', '1', '--out-dir', str(out_dir))
    assert code == main.EXIT_OK
    for name in ('density.csv', 'outliers.json', 'eigenvalues.csv', 'histogram.csv', 'comparison.json'):
        assert (out_dir / name).exists()
        assert (out_dir / (name + '.meta.json')).exists()
    comparison = json.loads((out_dir / 'comparison.json').read_text())
    assert comparison['passed']
    assert comparison['l1_distance'] <= 0.05
