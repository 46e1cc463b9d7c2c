"""
Run and experiment configuration test cases
"""
import pytest

from chem.molgraph import Element, MutationKind
from config.config import Config
from config.run_config import (
    ConfigError, ExperimentSpec, RunConfig, SelectionMode, apply_overrides, experiment_from_dict, load_experiment,
    load_run_config, run_config_from_dict,
)
from search.policy import EpsilonSchedule, ScheduleKind
from utils.logger import get_logger

logger = get_logger(__name__)


class TestRunConfig:
    """RunConfig loading and validation test suite"""

    @pytest.mark.smoke
    def test_default_file_matches_defaults(self):
        logger.info("Starting test: test_default_file_matches_defaults")
        cfg = load_run_config(Config.CONFIGS_DIR / 'run_default.yaml')
        assert cfg == RunConfig()
        assert cfg.digest() == RunConfig().digest()

    def test_baseline_file(self):
        cfg = load_run_config(Config.CONFIGS_DIR / 'run_baseline.yaml')
        assert cfg.selection_mode is SelectionMode.UNIFORM
        assert cfg.method_label() == 'baseline'

    def test_empty_section_gives_defaults(self):
        assert run_config_from_dict(None) == RunConfig()

    def test_partial_nested_section(self):
        cfg = run_config_from_dict({
            'mutation': {'actions': ['ChB', 'AddA', 'AddA'], 'candidates': ['C', 'O']},
            'policy': {'context_diameter': 0, 'schedule': {'kind': 'greedy', 'lambda': 0.01}},
        })
        assert cfg.actions == (MutationKind.AddA, MutationKind.ChB)
        assert cfg.candidates == (Element.C, Element.O)
        assert cfg.schedule == EpsilonSchedule(ScheduleKind.GREEDY, lam=0.01)
        assert cfg.method_label() == 'policy-ECFP0'

    def test_integer_accepted_for_float_field(self):
        cfg = run_config_from_dict({'policy': {'schedule': {'eps_floor': 0, 'kind': 'constant'}}})
        assert cfg.schedule.eps_floor == 0.0

    @pytest.mark.regression
    @pytest.mark.parametrize("data, path", [
        ({'steps': 0}, 'run.steps'),
        ({'steps': 'ten'}, 'run.steps'),
        ({'seed': True}, 'run.seed'),
        ({'colour': 'blue'}, 'run.colour'),
        ({'mutation': {'bogus': 1}}, 'run.mutation.bogus'),
        ({'mutation': {'candidates': ['C', 'Xe']}}, 'run.mutation.candidates[1]'),
        ({'mutation': {'actions': ['Swap']}}, 'run.mutation.actions[0]'),
        ({'mutation': {'actions': []}}, 'run.mutation.actions'),
        ({'selection_mode': 'random'}, 'run.selection_mode'),
        ({'policy': {'context_diameter': 4}}, 'run.policy.context_diameter'),
        ({'policy': {'p_min': 1.5}}, 'run.policy.p_min'),
        ({'policy': {'schedule': {'kind': 'cosine'}}}, 'run.policy.schedule.kind'),
        ({'policy': {'schedule': {'eps_floor': 0.5, 'eps0': 0.3}}}, 'run.policy.schedule.eps_floor'),
        ({'policy': {'schedule': {'alpha': 0}}}, 'run.policy.schedule.alpha'),
        ({'filter': {'diameters': [0, 6]}}, 'run.filter.diameters[1]'),
        ({'evolution': 'many'}, 'run.evolution'),
    ])
    def test_field_path_in_errors(self, data, path):
        with pytest.raises(ConfigError) as excinfo:
            run_config_from_dict(data)
        assert excinfo.value.path == path
        assert str(excinfo.value).startswith(f"{path}: ")

    def test_top_level_must_be_run(self, tmp_path):
        path = tmp_path / 'bad.yaml'
        path.write_text('runs:\n  steps: 5\n', encoding='utf-8')
        with pytest.raises(ConfigError, match='runs: unknown field'):
            load_run_config(path)

    def test_digest(self):
        digest = RunConfig().digest()
        assert len(digest) == 12
        int(digest, 16)
        assert RunConfig(seed=1).digest() != digest
        assert RunConfig(steps=10).digest() != digest

    def test_to_dict_round_trip(self):
        cfg = RunConfig(seed=4, steps=20, context_diameter=0, strict_improvement=True)
        assert run_config_from_dict(cfg.to_dict()) == cfg

    def test_overrides(self):
        cfg = apply_overrides(RunConfig(), {'seed': 7, 'steps': None, 'selection_mode': 'uniform',
                                            'eps_floor': 0.3, 'schedule_kind': 'constant'})
        assert cfg.seed == 7
        assert cfg.steps == 500
        assert cfg.selection_mode is SelectionMode.UNIFORM
        assert cfg.schedule == EpsilonSchedule(ScheduleKind.CONSTANT, eps_floor=0.3)

    def test_override_violating_schedule(self):
        with pytest.raises(ConfigError):
            apply_overrides(RunConfig(), {'eps_floor': 1.5})


class TestExperimentSpec:
    """ExperimentSpec test suite"""

    @pytest.mark.smoke
    def test_full_grid(self):
        logger.info("Starting test: test_full_grid")
        spec = load_experiment(Config.CONFIGS_DIR / 'sweep_table.yaml')
        configs = spec.configurations()
        assert spec.seeds == tuple(range(10))
        assert len(configs) == 1 + 2 * 3 * (1 + 3 + 4)
        assert configs[0].selection_mode is SelectionMode.UNIFORM
        assert len({cfg.digest() for cfg in configs}) == len(configs)
        assert all(cfg.seed == 0 and cfg.steps == 500 for cfg in configs)

    def test_quick_grid(self):
        spec = load_experiment(Config.CONFIGS_DIR / 'sweep_quick.yaml')
        labels = {cfg.schedule.label() for cfg in spec.configurations()[1:]}
        assert labels == {'power_law(alpha=0.35)'}
        assert len(spec.configurations()) == 7

    def test_schedule_values_land_in_their_parameter(self):
        spec = experiment_from_dict({'experiment': {'runs': 1, 'include_baseline': False, 'grid': {
            'context_diameters': [2], 'eps_floors': [0.2],
            'schedules': [{'kind': 'greedy', 'lambdas': [0.01]}, {'kind': 'power_law', 'alphas': [0.3]}],
        }}})
        greedy, power = spec.configurations()
        assert greedy.schedule.lam == 0.01 and greedy.schedule.kind is ScheduleKind.GREEDY
        assert power.schedule.alpha == 0.3 and power.schedule.eps_floor == 0.2

    def test_seed_count_must_match_runs(self):
        with pytest.raises(ConfigError, match='experiment.seeds'):
            experiment_from_dict({'experiment': {'runs': 3, 'seeds': [1, 2]}})

    def test_explicit_seeds_set_run_count(self):
        spec = experiment_from_dict({'experiment': {'seeds': [5, 6]}})
        assert spec.runs == 2

    @pytest.mark.parametrize("grid, path", [
        ({'context_diameters': [4]}, 'experiment.grid.context_diameters[0]'),
        ({'eps_floors': [1.5]}, 'experiment.grid.eps_floors[0]'),
        ({'schedules': [{'kind': 'cosine'}]}, 'experiment.grid.schedules[0].kind'),
        ({'schedules': []}, 'experiment.grid.schedules'),
        ({'context_diameters': 2}, 'experiment.grid.context_diameters'),
        ({'context_diameters': [0, 'two']}, 'experiment.grid.context_diameters[1]'),
        ({'eps_floors': ['abc']}, 'experiment.grid.eps_floors[0]'),
        ({'eps_floors': [True]}, 'experiment.grid.eps_floors[0]'),
        ({'schedules': [{'kind': 'power_law', 'alphas': 0.3}]}, 'experiment.grid.schedules[0].alphas'),
        ({'schedules': [{'kind': 'greedy', 'lambdas': ['fast']}]}, 'experiment.grid.schedules[0].lambdas[0]'),
    ])
    def test_grid_errors(self, grid, path):
        with pytest.raises(ConfigError) as excinfo:
            experiment_from_dict({'experiment': {'grid': grid}})
        assert excinfo.value.path == path

    def test_default_spec(self):
        spec = ExperimentSpec()
        assert len(spec.configurations()) == 7
