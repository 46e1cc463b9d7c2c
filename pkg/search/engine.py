"""
Evolutionary search over molecular graphs
Each step mutates the best population members one action at a time, keeps realistic and novel
improvers, and (in policy mode) feeds the realism verdict back to the mutation policy
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from chem.molgraph import MolecularGraph, Mutation, apply_mutation, arm_count, enumerate_valid_mutations
from chem.realism import ReferenceRegistry, passes_filter, silly_score
from chem.smiles import SmilesError, canonical_key, parse, write_canonical
from config.run_config import RunConfig, SelectionMode
from search.policy import PolicyTable, SelectionOutcome, context_keys, record, select

logger = logging.getLogger(__name__)


class StartupError(ValueError):
    """Run cannot start, e.g. the initial SMILES does not parse"""


@dataclass(frozen=True)
class Individual:
    graph: MolecularGraph
    key: str
    of_score: float
    birth: int


@dataclass
class Population:
    """Members in insertion order plus the archive of every key ever inserted"""

    members: list = field(default_factory=list)
    archive: set = field(default_factory=set)

    def add(self, individual: Individual) -> bool:
        if individual.key in self.archive:
            return False
        self.members.append(individual)
        self.archive.add(individual.key)
        return True

    def best(self, count: int) -> list[Individual]:
        """Top members by score; ties keep the oldest first"""
        return sorted(self.members, key=lambda ind: (-ind.of_score, ind.birth))[:count]

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class StepRecord:
    step: int
    generated: int = 0
    passed_sw: int = 0
    novel: int = 0
    inserted: int = 0
    parents: int = 0
    awake: int = 0
    sleeping: int = 0
    explored: int = 0


@dataclass
class _ParentView:
    valid: list
    arms: int
    keys: Optional[list] = None


@dataclass
class _Mutant:
    graph: MolecularGraph
    key: str
    passed: bool
    score: Optional[float] = None


def objective(graph: MolecularGraph, reg: ReferenceRegistry, cfg: RunConfig) -> float:
    """Realism objective, maximised: 1 - silly score over the configured filter diameters"""
    return 1.0 - silly_score(graph, reg, cfg.filter_diameters).value


@dataclass
class RunResult:
    records: list
    population: Population
    table: PolicyTable

    @property
    def realism(self) -> float:
        generated = sum(r.generated for r in self.records)
        return sum(r.passed_sw for r in self.records) / generated if generated else 0.0

    @property
    def novelty(self) -> float:
        generated = sum(r.generated for r in self.records)
        return sum(r.novel for r in self.records) / generated if generated else 0.0


class EvolutionEngine:
    """
    One run: owns the population, the policy table and the single seeded random source

    Args:
        cfg: Run configuration
        reg: Shared read-only reference registry
        realism_filter: Replacement for the registry filter (test doubles)
    """

    def __init__(self, cfg: RunConfig, reg: ReferenceRegistry,
                 realism_filter: Optional[Callable[[MolecularGraph], bool]] = None):
        self.cfg = cfg
        self.reg = reg
        self.rng = np.random.default_rng(cfg.seed)
        self.table = PolicyTable(cfg.p_min, cfg.context_diameter)
        self.population = Population()
        self.records: list[StepRecord] = []
        self._filter = realism_filter or (lambda g: passes_filter(g, reg, cfg.filter_diameters))
        self._parents: dict[str, _ParentView] = {}
        self._mutants: dict[tuple[str, Mutation], _Mutant] = {}
        self._t = 0

        try:
            seed_graph = parse(cfg.init_smiles)
        except SmilesError as e:
            raise StartupError(f"init_smiles '{cfg.init_smiles}' cannot be parsed: {e}") from e
        self.population.add(Individual(seed_graph, canonical_key(seed_graph), self._score(seed_graph), 0))

    def _score(self, graph: MolecularGraph) -> float:
        return objective(graph, self.reg, self.cfg)

    def _view(self, parent: Individual) -> _ParentView:
        view = self._parents.get(parent.key)
        if view is None:
            view = _ParentView(
                enumerate_valid_mutations(parent.graph, self.cfg.actions, self.cfg.candidates, self.cfg.max_heavy,
                                          self.cfg.allow_bond_deletion),
                arm_count(parent.graph, self.cfg.actions, self.cfg.candidates, self.cfg.allow_bond_deletion),
            )
            self._parents[parent.key] = view
        if self.cfg.selection_mode is SelectionMode.POLICY and view.keys is None and view.valid:
            view.keys = context_keys(view.valid, parent.graph, self.cfg.context_diameter)
        return view

    def _mutant(self, parent: Individual, m: Mutation) -> _Mutant:
        cached = self._mutants.get((parent.key, m))
        if cached is None:
            graph = apply_mutation(parent.graph, m, self.cfg.candidates, self.cfg.max_heavy,
                                   self.cfg.allow_bond_deletion)
            cached = _Mutant(graph, canonical_key(graph), bool(self._filter(graph)))
            self._mutants[(parent.key, m)] = cached
        return cached

    def search_neighbour(self, parent: Individual) -> Optional[tuple[MolecularGraph, SelectionOutcome]]:
        """
        Draw one mutation for the parent and apply it

        Returns:
            tuple: (mutant graph, selection outcome), or None when the parent has no valid mutation
        """
        view = self._view(parent)
        if not view.valid:
            return None
        if self.cfg.selection_mode is SelectionMode.POLICY:
            outcome = select(view.valid, parent.graph, self.table, self.cfg.schedule, self._t, self.rng,
                             keys=view.keys, invert_exploration=self.cfg.invert_exploration)
        else:
            index = int(self.rng.integers(len(view.valid)))
            outcome = SelectionOutcome(view.valid[index], None, True)
        return self._mutant(parent, outcome.mutation).graph, outcome

    def _accepts(self, parent: Individual, mutant: _Mutant, score: float) -> bool:
        if not mutant.passed:
            return False
        if self.cfg.require_novelty and mutant.key in self.population.archive:
            return False
        if self.cfg.strict_improvement:
            return score > parent.of_score
        return score >= parent.of_score

    def step(self) -> StepRecord:
        """Process the best members once; returns the step's counters"""
        if not self.population.members:
            raise StartupError('population is empty')
        parents = self.population.best(self.cfg.parents_per_step)
        counts = dict(generated=0, passed_sw=0, novel=0, inserted=0, awake=0, sleeping=0, explored=0)
        policy_mode = self.cfg.selection_mode is SelectionMode.POLICY

        for parent in parents:
            view = self._view(parent)
            counts['awake'] += len(view.valid)
            counts['sleeping'] += view.arms - len(view.valid)
            for _ in range(self.cfg.attempts_per_parent):
                drawn = self.search_neighbour(parent)
                if drawn is None:
                    break
                _, outcome = drawn
                mutant = self._mutant(parent, outcome.mutation)
                counts['generated'] += 1
                counts['explored'] += int(outcome.explored and policy_mode)
                if mutant.passed:
                    counts['passed_sw'] += 1
                if mutant.key not in self.population.archive:
                    counts['novel'] += 1
                if policy_mode:
                    record(self.table, outcome.key, int(mutant.passed))

                if mutant.passed and mutant.score is None:
                    mutant.score = self._score(mutant.graph)
                score = mutant.score if mutant.passed else 0.0
                if self._accepts(parent, mutant, score):
                    child = Individual(mutant.graph, mutant.key, score, len(self.population))
                    if self.population.add(child):
                        counts['inserted'] += 1
                    break

        summary = StepRecord(self._t, parents=len(parents), **counts)
        self.records.append(summary)
        logger.debug(f"step {summary.step}: generated={summary.generated} passed={summary.passed_sw} "
                     f"novel={summary.novel} inserted={summary.inserted}")
        self._t += 1
        return summary

    def run(self) -> RunResult:
        for _ in range(self.cfg.steps):
            self.step()
        result = RunResult(self.records, self.population, self.table)
        logger.info(f"Run finished: seed={self.cfg.seed} steps={self.cfg.steps} "
                    f"realism={result.realism:.4f} novelty={result.novelty:.4f} "
                    f"population={len(self.population)}")
        return result


def run(cfg: RunConfig, reg: ReferenceRegistry) -> RunResult:
    """
    Execute cfg.steps steps deterministically under cfg.seed

    Raises:
        StartupError: init_smiles cannot be parsed
    """
    logger.info(f"Run starting: digest={cfg.digest()} seed={cfg.seed} mode={cfg.selection_mode.value}")
    return EvolutionEngine(cfg, reg).run()


def population_lines(population: Population) -> list[str]:
    """SMILES<TAB>of_score lines in insertion order"""
    return [f"{write_canonical(ind.graph)}\t{ind.of_score:.6f}" for ind in population.members]
