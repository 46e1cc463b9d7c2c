"""
Run and experiment configuration
YAML-backed schema with field-path validation messages; defaults reproduce the reference protocol
"""
from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Optional

from chem.fingerprint import SUPPORTED_DIAMETERS
from chem.molgraph import DEFAULT_CANDIDATES, DEFAULT_MAX_HEAVY, Element, MutationKind
from chem.realism import DEFAULT_FILTER_DIAMETERS
from search.policy import DEFAULT_P_MIN, EpsilonSchedule, PolicyContractError, ScheduleKind
from utils.data_reader import DataReader

ASPIRIN = 'CC(=O)Oc1ccccc1C(=O)O'


class ConfigError(ValueError):
    """Schema violation; the message starts with the dotted field path"""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class SelectionMode(str, enum.Enum):
    UNIFORM = 'uniform'
    POLICY = 'policy'


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    steps: int = 500
    selection_mode: SelectionMode = SelectionMode.POLICY
    init_smiles: str = ASPIRIN
    actions: tuple = tuple(MutationKind)
    candidates: tuple = DEFAULT_CANDIDATES
    max_heavy: int = DEFAULT_MAX_HEAVY
    allow_bond_deletion: bool = False
    parents_per_step: int = 10
    attempts_per_parent: int = 50
    strict_improvement: bool = False
    require_novelty: bool = True
    context_diameter: int = 2
    p_min: float = DEFAULT_P_MIN
    invert_exploration: bool = False
    schedule: EpsilonSchedule = field(default_factory=EpsilonSchedule)
    filter_diameters: tuple = DEFAULT_FILTER_DIAMETERS

    def __post_init__(self):
        if self.steps <= 0:
            raise ConfigError('run.steps', 'must be > 0')
        if self.parents_per_step < 1:
            raise ConfigError('run.evolution.parents_per_step', 'must be >= 1')
        if self.attempts_per_parent < 1:
            raise ConfigError('run.evolution.attempts_per_parent', 'must be >= 1')
        if self.max_heavy < 1:
            raise ConfigError('run.mutation.max_heavy', 'must be >= 1')
        if not self.actions:
            raise ConfigError('run.mutation.actions', 'must name at least one action')
        if MutationKind.AddA in self.actions and not self.candidates:
            raise ConfigError('run.mutation.candidates', 'must be non-empty when AddA is enabled')
        if self.context_diameter not in (0, 2):
            raise ConfigError('run.policy.context_diameter', 'must be 0 or 2')
        if not 0 < self.p_min < 1:
            raise ConfigError('run.policy.p_min', 'must lie in (0, 1)')
        if not self.filter_diameters or any(d not in SUPPORTED_DIAMETERS for d in self.filter_diameters):
            raise ConfigError('run.filter.diameters', f"must be a non-empty subset of {SUPPORTED_DIAMETERS}")

    def to_dict(self) -> dict:
        """Nested, YAML-shaped view (the digest is computed over this)"""
        return {
            'seed': self.seed,
            'steps': self.steps,
            'selection_mode': self.selection_mode.value,
            'init_smiles': self.init_smiles,
            'mutation': {
                'actions': [a.name for a in self.actions],
                'candidates': [e.symbol for e in self.candidates],
                'max_heavy': self.max_heavy,
                'allow_bond_deletion': self.allow_bond_deletion,
            },
            'evolution': {
                'parents_per_step': self.parents_per_step,
                'attempts_per_parent': self.attempts_per_parent,
                'strict_improvement': self.strict_improvement,
                'require_novelty': self.require_novelty,
            },
            'policy': {
                'context_diameter': self.context_diameter,
                'p_min': self.p_min,
                'invert_exploration': self.invert_exploration,
                'schedule': {
                    'kind': self.schedule.kind.value,
                    'eps_floor': self.schedule.eps_floor,
                    'eps0': self.schedule.eps0,
                    'lambda': self.schedule.lam,
                    'alpha': self.schedule.alpha,
                },
            },
            'filter': {'diameters': list(self.filter_diameters)},
        }

    def digest(self) -> str:
        """Short content hash of the configuration, seed included"""
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(text.encode('utf-8')).hexdigest()[:12]

    def replace(self, **changes) -> 'RunConfig':
        return dataclasses.replace(self, **changes)

    def method_label(self) -> str:
        if self.selection_mode is SelectionMode.UNIFORM:
            return 'baseline'
        return f"policy-ECFP{self.context_diameter}"


# Schema helpers

def _expect_mapping(value, path) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected a mapping, got {type(value).__name__}")
    return value


def _reject_unknown(section: dict, allowed: set, path: str):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key, 'unknown field')


def _typed(section: dict, key: str, kind, path: str, default):
    if key not in section:
        return default
    value = section[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is int and isinstance(value, bool):
        raise ConfigError(f"{path}.{key}", 'expected an integer')
    if not isinstance(value, kind):
        raise ConfigError(f"{path}.{key}", f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _enum_list(values, parse, path):
    if not isinstance(values, list) or not values:
        raise ConfigError(path, 'expected a non-empty list')
    parsed = []
    for i, value in enumerate(values):
        try:
            parsed.append(parse(value))
        except (ValueError, TypeError) as e:
            raise ConfigError(f"{path}[{i}]", str(e)) from None
    return tuple(parsed)


def _number_list(section: dict, key: str, kind, path: str, default) -> tuple:
    if key not in section:
        return tuple(default)
    values = section[key]
    if not isinstance(values, list) or not values:
        raise ConfigError(f"{path}.{key}", 'expected a non-empty list')
    for i, value in enumerate(values):
        if isinstance(value, bool) or not isinstance(value, (int, float) if kind is float else int):
            raise ConfigError(f"{path}.{key}[{i}]", f"expected {kind.__name__}, got {type(value).__name__}")
    return tuple(kind(value) for value in values)


def _schedule_from(section: dict, path: str, base: EpsilonSchedule) -> EpsilonSchedule:
    _reject_unknown(section, {'kind', 'eps_floor', 'eps0', 'lambda', 'alpha'}, path)
    kind = _typed(section, 'kind', str, path, base.kind.value)
    try:
        kind = ScheduleKind(kind)
    except ValueError:
        raise ConfigError(f"{path}.kind", f"must be one of {[k.value for k in ScheduleKind]}") from None
    eps_floor = _typed(section, 'eps_floor', float, path, base.eps_floor)
    eps0 = _typed(section, 'eps0', float, path, base.eps0)
    lam = _typed(section, 'lambda', float, path, base.lam)
    alpha = _typed(section, 'alpha', float, path, base.alpha)
    if lam <= 0:
        raise ConfigError(f"{path}.lambda", 'must be > 0')
    if alpha <= 0:
        raise ConfigError(f"{path}.alpha", 'must be > 0')
    if not 0 <= eps_floor <= eps0 <= 1:
        raise ConfigError(f"{path}.eps_floor", 'requires 0 <= eps_floor <= eps0 <= 1')
    try:
        return EpsilonSchedule(kind, eps_floor, eps0, lam, alpha)
    except PolicyContractError as e:
        raise ConfigError(path, str(e)) from None


def run_config_from_dict(data: Optional[dict], path: str = 'run', base: Optional[RunConfig] = None) -> RunConfig:
    """
    Build a RunConfig from the nested ``run`` mapping

    Args:
        data: Mapping as loaded from YAML (may be partial)
        path: Field path prefix used in error messages
        base: Defaults for missing fields

    Raises:
        ConfigError: Unknown fields, wrong types or invalid values
    """
    base = base or RunConfig()
    data = _expect_mapping(data, path)
    _reject_unknown(data, {'seed', 'steps', 'selection_mode', 'init_smiles', 'mutation', 'evolution',
                           'policy', 'filter'}, path)

    mutation = _expect_mapping(data.get('mutation'), f"{path}.mutation")
    _reject_unknown(mutation, {'actions', 'candidates', 'max_heavy', 'allow_bond_deletion'}, f"{path}.mutation")
    evolution = _expect_mapping(data.get('evolution'), f"{path}.evolution")
    _reject_unknown(evolution, {'parents_per_step', 'attempts_per_parent', 'strict_improvement',
                                'require_novelty'}, f"{path}.evolution")
    policy = _expect_mapping(data.get('policy'), f"{path}.policy")
    _reject_unknown(policy, {'context_diameter', 'p_min', 'invert_exploration', 'schedule'}, f"{path}.policy")
    filters = _expect_mapping(data.get('filter'), f"{path}.filter")
    _reject_unknown(filters, {'diameters'}, f"{path}.filter")

    mode = _typed(data, 'selection_mode', str, path, base.selection_mode.value)
    try:
        mode = SelectionMode(mode)
    except ValueError:
        raise ConfigError(f"{path}.selection_mode", "must be 'uniform' or 'policy'") from None

    actions = base.actions
    if 'actions' in mutation:
        actions = _enum_list(mutation['actions'], MutationKind.parse, f"{path}.mutation.actions")
    candidates = base.candidates
    if 'candidates' in mutation:
        candidates = _enum_list(mutation['candidates'], Element.from_symbol, f"{path}.mutation.candidates")
    diameters = base.filter_diameters
    if 'diameters' in filters:
        diameters = filters['diameters']
        if not isinstance(diameters, list) or not diameters:
            raise ConfigError(f"{path}.filter.diameters", 'expected a non-empty list')
        for i, d in enumerate(diameters):
            if d not in SUPPORTED_DIAMETERS:
                raise ConfigError(f"{path}.filter.diameters[{i}]", f"must be one of {SUPPORTED_DIAMETERS}")
        diameters = tuple(sorted(set(diameters)))

    schedule = _schedule_from(_expect_mapping(policy.get('schedule'), f"{path}.policy.schedule"),
                              f"{path}.policy.schedule", base.schedule)

    return RunConfig(
        seed=_typed(data, 'seed', int, path, base.seed),
        steps=_typed(data, 'steps', int, path, base.steps),
        selection_mode=mode,
        init_smiles=_typed(data, 'init_smiles', str, path, base.init_smiles),
        actions=tuple(sorted(set(actions))),
        candidates=candidates,
        max_heavy=_typed(mutation, 'max_heavy', int, f"{path}.mutation", base.max_heavy),
        allow_bond_deletion=_typed(mutation, 'allow_bond_deletion', bool, f"{path}.mutation",
                                   base.allow_bond_deletion),
        parents_per_step=_typed(evolution, 'parents_per_step', int, f"{path}.evolution", base.parents_per_step),
        attempts_per_parent=_typed(evolution, 'attempts_per_parent', int, f"{path}.evolution",
                                   base.attempts_per_parent),
        strict_improvement=_typed(evolution, 'strict_improvement', bool, f"{path}.evolution",
                                  base.strict_improvement),
        require_novelty=_typed(evolution, 'require_novelty', bool, f"{path}.evolution", base.require_novelty),
        context_diameter=_typed(policy, 'context_diameter', int, f"{path}.policy", base.context_diameter),
        p_min=_typed(policy, 'p_min', float, f"{path}.policy", base.p_min),
        invert_exploration=_typed(policy, 'invert_exploration', bool, f"{path}.policy", base.invert_exploration),
        schedule=schedule,
        filter_diameters=diameters,
    )


def load_run_config(path) -> RunConfig:
    """Read a YAML file with a top-level ``run`` section"""
    data = _expect_mapping(DataReader.read_yaml(path), '')
    _reject_unknown(data, {'run'}, '')
    return run_config_from_dict(data.get('run'))


# Experiments

@dataclass(frozen=True)
class ExperimentSpec:
    """
    Grid of policy configurations sharing one base run configuration

    Every grid point (and the baseline, when included) is run once per seed.
    """

    base: RunConfig = field(default_factory=RunConfig)
    runs: int = 10
    seeds: tuple = tuple(range(10))
    context_diameters: tuple = (0, 2)
    eps_floors: tuple = (0.1, 0.2, 0.3)
    schedules: tuple = (('power_law', (0.35,)),)
    include_baseline: bool = True
    n_jobs: Optional[int] = None

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError('experiment.runs', 'must be >= 1')
        if len(self.seeds) != self.runs:
            raise ConfigError('experiment.seeds', f"expected {self.runs} seeds, got {len(self.seeds)}")

    def configurations(self) -> list[RunConfig]:
        """Seed-free configurations (seed 0 placeholder) in a stable order, baseline first"""
        configs = []
        if self.include_baseline:
            configs.append(self.base.replace(selection_mode=SelectionMode.UNIFORM, seed=0))
        for diameter in self.context_diameters:
            for eps in self.eps_floors:
                for kind, values in self.schedules:
                    kind = ScheduleKind(kind)
                    for value in values or (None,):
                        schedule = EpsilonSchedule(
                            kind, eps, self.base.schedule.eps0,
                            value if kind is ScheduleKind.GREEDY else self.base.schedule.lam,
                            value if kind is ScheduleKind.POWER_LAW else self.base.schedule.alpha,
                        )
                        configs.append(self.base.replace(selection_mode=SelectionMode.POLICY, seed=0,
                                                         context_diameter=diameter, schedule=schedule))
        return configs


def _schedule_grid(entries, path) -> tuple:
    if not isinstance(entries, list) or not entries:
        raise ConfigError(path, 'expected a non-empty list')
    grid = []
    for i, entry in enumerate(entries):
        entry = _expect_mapping(entry, f"{path}[{i}]")
        _reject_unknown(entry, {'kind', 'lambdas', 'alphas'}, f"{path}[{i}]")
        kind = entry.get('kind')
        try:
            kind = ScheduleKind(kind)
        except ValueError:
            raise ConfigError(f"{path}[{i}].kind", f"must be one of {[k.value for k in ScheduleKind]}") from None
        values = ()
        if kind is ScheduleKind.GREEDY:
            values = _number_list(entry, 'lambdas', float, f"{path}[{i}]", [0.1])
        elif kind is ScheduleKind.POWER_LAW:
            values = _number_list(entry, 'alphas', float, f"{path}[{i}]", [0.35])
        if any(v <= 0 for v in values):
            raise ConfigError(f"{path}[{i}]", 'lambdas and alphas must be > 0')
        grid.append((kind.value, values))
    return tuple(grid)


def experiment_from_dict(data: dict) -> ExperimentSpec:
    """
    Build an ExperimentSpec from a mapping with ``run`` and ``experiment`` sections

    Raises:
        ConfigError: Schema violations with field paths
    """
    data = _expect_mapping(data, '')
    _reject_unknown(data, {'run', 'experiment'}, '')
    base = run_config_from_dict(data.get('run'))
    section = _expect_mapping(data.get('experiment'), 'experiment')
    _reject_unknown(section, {'runs', 'seeds', 'base_seed', 'include_baseline', 'n_jobs', 'grid'}, 'experiment')

    runs = _typed(section, 'runs', int, 'experiment', 10)
    if 'seeds' in section:
        seeds = section['seeds']
        if not isinstance(seeds, list) or not all(isinstance(s, int) for s in seeds):
            raise ConfigError('experiment.seeds', 'expected a list of integers')
        seeds = tuple(seeds)
        if 'runs' not in section:
            runs = len(seeds)
    else:
        base_seed = _typed(section, 'base_seed', int, 'experiment', 0)
        seeds = tuple(base_seed + i for i in range(runs))

    grid = _expect_mapping(section.get('grid'), 'experiment.grid')
    _reject_unknown(grid, {'context_diameters', 'eps_floors', 'schedules'}, 'experiment.grid')
    diameters = _number_list(grid, 'context_diameters', int, 'experiment.grid', [0, 2])
    for i, d in enumerate(diameters):
        if d not in (0, 2):
            raise ConfigError(f"experiment.grid.context_diameters[{i}]", 'must be 0 or 2')
    eps_floors = _number_list(grid, 'eps_floors', float, 'experiment.grid', [0.1, 0.2, 0.3])
    for i, eps in enumerate(eps_floors):
        if not 0 <= eps <= base.schedule.eps0:
            raise ConfigError(f"experiment.grid.eps_floors[{i}]", 'must lie in [0, eps0]')
    schedules = (('power_law', (0.35,)),)
    if 'schedules' in grid:
        schedules = _schedule_grid(grid['schedules'], 'experiment.grid.schedules')

    return ExperimentSpec(
        base=base,
        runs=runs,
        seeds=seeds,
        context_diameters=diameters,
        eps_floors=eps_floors,
        schedules=schedules,
        include_baseline=_typed(section, 'include_baseline', bool, 'experiment', True),
        n_jobs=_typed(section, 'n_jobs', int, 'experiment', None),
    )


def load_experiment(path) -> ExperimentSpec:
    return experiment_from_dict(DataReader.read_yaml(path))


def apply_overrides(cfg: RunConfig, overrides: dict[str, Any]) -> RunConfig:
    """
    Apply command-line overrides (None values ignored)

    Recognised keys: seed, steps, selection_mode, context_diameter, eps_floor, schedule_kind
    """
    changes = {}
    for key in ('seed', 'steps', 'context_diameter'):
        if overrides.get(key) is not None:
            changes[key] = overrides[key]
    if overrides.get('selection_mode') is not None:
        changes['selection_mode'] = SelectionMode(overrides['selection_mode'])
    schedule = cfg.schedule
    try:
        if overrides.get('schedule_kind') is not None:
            schedule = dataclasses.replace(schedule, kind=ScheduleKind(overrides['schedule_kind']))
        if overrides.get('eps_floor') is not None:
            schedule = dataclasses.replace(schedule, eps_floor=overrides['eps_floor'])
    except PolicyContractError as e:
        raise ConfigError('run.policy.schedule', str(e)) from None
    if schedule is not cfg.schedule:
        changes['schedule'] = schedule
    return cfg.replace(**changes)
