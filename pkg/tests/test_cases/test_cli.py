"""
Command-line interface test cases
Exit codes: 0 success, 1 usage or configuration error, 2 data error
"""
from pathlib import Path

import pandas as pd
import pytest

from chem.realism import build_registry
from harness.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from harness.outputs import STEPS_FILE
from tests.test_cases.test_report import steps_table
from utils.data_reader import DataReader
from utils.logger import get_logger

logger = get_logger(__name__)

SMALL_RUN_YAML = """
run:
  steps: 2
  evolution:
    parents_per_step: 2
    attempts_per_parent: 5
"""

SMALL_SWEEP_YAML = SMALL_RUN_YAML + """
experiment:
  seeds: [0, 1]
  include_baseline: true
  grid:
    context_diameters: [2]
    eps_floors: [0.2]
    schedules:
      - kind: constant
"""


def write_text(path, text):
    path.write_text(text, encoding='utf-8')
    return path


@pytest.mark.cli
class TestBuildRef:
    """build-ref subcommand test suite"""

    @pytest.mark.smoke
    def test_build_from_sample_corpus(self, corpus_path, tmp_path, capsys):
        logger.info("Starting test: test_build_from_sample_corpus")
        output = tmp_path / 'ref.swreg'
        text = tmp_path / 'ref.txt'
        argv = ['build-ref', '--input', str(corpus_path), '--output', str(output), '--text', str(text)]
        assert main(argv) == EXIT_OK
        assert output.is_file()
        assert text.read_text(encoding='utf-8').startswith('# molecules ')
        assert 'radius 2:' in capsys.readouterr().out

    def test_rebuild_gives_identical_bytes(self, corpus_path, tmp_path):
        first, second = tmp_path / 'a.swreg', tmp_path / 'b.swreg'
        assert main(['build-ref', '--input', str(corpus_path), '--output', str(first)]) == EXIT_OK
        assert main(['build-ref', '--input', str(corpus_path), '--output', str(second)]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

    @pytest.mark.regression
    def test_empty_corpus(self, tmp_path):
        logger.info("Starting test: test_empty_corpus")
        corpus = write_text(tmp_path / 'empty.smi', '')
        output = tmp_path / 'ref.swreg'
        assert main(['build-ref', '--input', str(corpus), '--output', str(output)]) == EXIT_DATA
        assert not output.exists()

    def test_mostly_unparseable_corpus(self, tmp_path):
        corpus = write_text(tmp_path / 'bad.smi', 'CCO\nC1CC\nC((C\n')
        output = tmp_path / 'ref.swreg'
        assert main(['build-ref', '--input', str(corpus), '--output', str(output)]) == EXIT_DATA
        assert not output.exists()

    def test_missing_corpus(self, tmp_path):
        assert main(['build-ref', '--input', str(tmp_path / 'none.smi'),
                     '--output', str(tmp_path / 'ref.swreg')]) == EXIT_DATA

    def test_unsupported_diameter(self, corpus_path, tmp_path):
        assert main(['build-ref', '--input', str(corpus_path), '--output', str(tmp_path / 'r.swreg'),
                     '--max-diameter', '6']) == EXIT_USAGE


@pytest.mark.cli
class TestRunCommand:
    """run subcommand test suite"""

    @pytest.mark.smoke
    def test_single_step(self, registry_file, output_dir, capsys):
        logger.info("Starting test: test_single_step")
        code = main(['run', '--registry', str(registry_file), '--output', str(output_dir),
                     '--steps', '1', '--seed', '3'])
        assert code == EXIT_OK
        out = capsys.readouterr().out.splitlines()
        run_dir = output_dir / Path(out[0]).name
        assert run_dir.name.endswith('-seed3')
        steps = DataReader.read_csv(run_dir / STEPS_FILE)
        assert len(steps) == 1
        assert out[1].startswith('realism: ')

    @pytest.mark.regression
    def test_same_seed_identical_files(self, registry_file, tmp_path, capsys):
        logger.info("Starting test: test_same_seed_identical_files")
        config = write_text(tmp_path / 'small.yaml', SMALL_RUN_YAML)
        dirs = []
        for name in ('first', 'second'):
            output = tmp_path / name
            assert main(['run', '--config', str(config), '--registry', str(registry_file),
                         '--output', str(output)]) == EXIT_OK
            dirs.append(next(output.iterdir()))
        capsys.readouterr()
        assert dirs[0].name == dirs[1].name
        for file_name in ('steps.csv', 'arms.csv', 'policy.tsv', 'population.smi', 'summary.json', 'config.yaml'):
            assert (dirs[0] / file_name).read_bytes() == (dirs[1] / file_name).read_bytes(), file_name

    def test_overrides_change_digest(self, registry_file, tmp_path, capsys):
        config = write_text(tmp_path / 'small.yaml', SMALL_RUN_YAML)
        base = ['run', '--config', str(config), '--registry', str(registry_file)]
        assert main(base + ['--output', str(tmp_path / 'a')]) == EXIT_OK
        assert main(base + ['--output', str(tmp_path / 'b'), '--mode', 'uniform']) == EXIT_OK
        capsys.readouterr()
        assert next((tmp_path / 'a').iterdir()).name != next((tmp_path / 'b').iterdir()).name

    def test_unknown_config_field(self, registry_file, tmp_path):
        config = write_text(tmp_path / 'bad.yaml', 'run:\n  stepz: 3\n')
        assert main(['run', '--config', str(config), '--registry', str(registry_file),
                     '--output', str(tmp_path)]) == EXIT_USAGE

    def test_malformed_yaml(self, registry_file, tmp_path):
        config = write_text(tmp_path / 'bad.yaml', 'run: [unclosed\n')
        assert main(['run', '--config', str(config), '--registry', str(registry_file),
                     '--output', str(tmp_path)]) == EXIT_USAGE

    def test_missing_registry(self, tmp_path):
        assert main(['run', '--registry', str(tmp_path / 'none.swreg'), '--output', str(tmp_path),
                     '--steps', '1']) == EXIT_DATA

    def test_registry_without_filter_coverage(self, tmp_path):
        small = build_registry(['CCO'], max_diameter=2).save(tmp_path / 'small.swreg')
        assert main(['run', '--registry', str(small), '--output', str(tmp_path), '--steps', '1']) == EXIT_DATA

    def test_unparseable_start(self, registry_file, tmp_path):
        config = write_text(tmp_path / 'bad.yaml', 'run:\n  init_smiles: C1CC\n  steps: 1\n')
        assert main(['run', '--config', str(config), '--registry', str(registry_file),
                     '--output', str(tmp_path)]) == EXIT_DATA


@pytest.mark.cli
class TestSweepAndReport:
    """sweep and report subcommand test suite"""

    def test_sweep(self, registry_file, tmp_path, capsys):
        logger.info("Starting test: test_sweep")
        config = write_text(tmp_path / 'sweep.yaml', SMALL_SWEEP_YAML)
        output = tmp_path / 'sweep'
        assert main(['sweep', '--config', str(config), '--registry', str(registry_file),
                     '--output', str(output), '--jobs', '1']) == EXIT_OK
        capsys.readouterr()
        table = pd.read_csv(output / 'table.csv')
        assert list(table['method']) == ['baseline', 'policy-ECFP2']
        assert (table['runs'] == 2).all()
        assert len(pd.read_csv(output / 'runs.csv')) == 4

    def test_sweep_grid_type_error(self, registry_file, tmp_path):
        config = write_text(tmp_path / 'sweep.yaml', 'experiment:\n  grid:\n    context_diameters: 2\n')
        assert main(['sweep', '--config', str(config), '--registry', str(registry_file),
                     '--output', str(tmp_path / 'sweep')]) == EXIT_USAGE

    def test_sweep_non_numeric_eps(self, registry_file, tmp_path):
        config = write_text(tmp_path / 'sweep.yaml', 'experiment:\n  grid:\n    eps_floors: [abc]\n')
        assert main(['sweep', '--config', str(config), '--registry', str(registry_file),
                     '--output', str(tmp_path / 'sweep')]) == EXIT_USAGE

    @pytest.mark.smoke
    def test_report(self, tmp_path, capsys):
        logger.info("Starting test: test_report")
        run_dirs = []
        for seed in range(2):
            run_dir = tmp_path / f"abc-seed{seed}"
            DataReader.write_csv(steps_table([10] * 500, [5 + seed] * 500), run_dir / STEPS_FILE)
            run_dirs.append(str(run_dir))
        output = tmp_path / 'window.csv'
        assert main(['report', *run_dirs, '--window', '10', '--output', str(output)]) == EXIT_OK
        capsys.readouterr()
        series = pd.read_csv(output)
        assert len(series) == 491
        assert series['realism_mean'].iloc[0] == pytest.approx(0.55)

    def test_report_window_too_long(self, tmp_path):
        run_dir = tmp_path / 'abc-seed0'
        DataReader.write_csv(steps_table([1] * 5, [1] * 5), run_dir / STEPS_FILE)
        assert main(['report', str(run_dir), '--window', '6', '--output', str(tmp_path / 'w.csv')]) == EXIT_DATA

    def test_report_missing_directory(self, tmp_path):
        assert main(['report', str(tmp_path / 'nothing'), '--output', str(tmp_path / 'w.csv')]) == EXIT_DATA


@pytest.mark.cli
@pytest.mark.parametrize("argv", [
    [],
    ['bogus'],
    ['run', '--mode', 'greedy'],
    ['run', '--context-diameter', '4'],
    ['run', '--steps', 'many'],
    ['sweep'],
    ['report'],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert 'error:' in capsys.readouterr().err
