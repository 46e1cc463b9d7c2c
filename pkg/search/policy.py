"""
Context-aware mutation selection
Probability matching over sleeping arms: success statistics per (action, atom environment, option),
floored and normalised into roulette weights, with an epsilon schedule for uniform exploration
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from chem.fingerprint import FingerprintSet, ecfp
from chem.molgraph import MolecularGraph, Mutation, MutationKind
from chem.smiles import canonical_ranks

DEFAULT_P_MIN = 0.05


class PolicyContractError(ValueError):
    """Precondition of a policy operation violated"""


class ContextKey(NamedTuple):
    action: MutationKind
    env_id: int
    option: Optional[int]

    @property
    def option_index(self) -> int:
        return 0 if self.option is None else self.option


@dataclass
class ContextStats:
    n_uses: int = 0
    n_success: int = 0


@dataclass
class PolicyTable:
    """Success counters keyed by context; one table per run, single writer"""

    p_min: float = DEFAULT_P_MIN
    context_diameter: int = 2
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.p_min < 1:
            raise PolicyContractError(f"p_min must lie in (0, 1), got {self.p_min}")
        if self.context_diameter not in (0, 2):
            raise PolicyContractError(f"context_diameter must be 0 or 2, got {self.context_diameter}")

    def get(self, key: ContextKey) -> ContextStats:
        return self.stats.get(key) or ContextStats()

    def rates(self, keys: Sequence[ContextKey]) -> np.ndarray:
        return np.array([success_rate(self.get(key)) for key in keys], dtype=float)

    def total_uses(self) -> int:
        return sum(s.n_uses for s in self.stats.values())

    def snapshot(self) -> dict:
        """Read-only copy of the counters, safe to export at a step boundary"""
        return {key: ContextStats(s.n_uses, s.n_success) for key, s in self.stats.items()}

    def rows(self, listing: Optional[Sequence[int]] = None) -> list[dict]:
        """
        Tabular dump: action, env_id, option, n_uses, n_success, rate and the diagnostic idx

        Args:
            listing: Frozen registry listing at the context radius; idx is left blank when omitted or
                when the environment is not listed
        """
        positions = {value: i + 1 for i, value in enumerate(listing or ())}
        size = len(positions)
        rows = []
        for key in sorted(self.stats, key=lambda k: (k.action, k.env_id, k.option_index)):
            s = self.stats[key]
            pos = positions.get(key.env_id)
            rows.append({
                'action': key.action.name,
                'env_id': str(key.env_id),
                'option': '' if key.option is None else key.option,
                'n_uses': s.n_uses,
                'n_success': s.n_success,
                'rate': success_rate(s),
                'idx': '' if pos is None else encode_index(pos, key.option_index, size),
            })
        return rows


class ScheduleKind(str, enum.Enum):
    CONSTANT = 'constant'
    GREEDY = 'greedy'
    POWER_LAW = 'power_law'


@dataclass(frozen=True)
class EpsilonSchedule:
    """Exploration rate over steps: constant, exponential decay (greedy) or power-law decay"""

    kind: ScheduleKind = ScheduleKind.POWER_LAW
    eps_floor: float = 0.1
    eps0: float = 1.0
    lam: float = 0.1
    alpha: float = 0.35

    def __post_init__(self):
        object.__setattr__(self, 'kind', ScheduleKind(self.kind))
        if not 0 <= self.eps_floor <= self.eps0 <= 1:
            raise PolicyContractError(
                f"Schedule requires 0 <= eps_floor <= eps0 <= 1, got {self.eps_floor}, {self.eps0}"
            )
        if self.lam <= 0 or self.alpha <= 0:
            raise PolicyContractError('Schedule lambda and alpha must be positive')

    def label(self) -> str:
        if self.kind is ScheduleKind.GREEDY:
            return f"greedy(lambda={self.lam:g})"
        if self.kind is ScheduleKind.POWER_LAW:
            return f"power_law(alpha={self.alpha:g})"
        return 'constant'


@dataclass(frozen=True)
class SelectionOutcome:
    mutation: Mutation
    key: Optional[ContextKey]
    explored: bool
    weight_used: Optional[float] = None


def success_rate(s: ContextStats) -> float:
    """n_success / n_uses, 0 for an unseen context"""
    return s.n_success / s.n_uses if s.n_uses > 0 else 0.0


def weights(rates: Sequence[float], p_min: float) -> np.ndarray:
    """
    Floor each rate at p_min and normalise to a probability vector

    Raises:
        PolicyContractError: Empty rate list or non-positive p_min
    """
    if len(rates) == 0:
        raise PolicyContractError('weights requires at least one rate')
    if p_min <= 0:
        raise PolicyContractError(f"p_min must be positive, got {p_min}")
    floored = np.maximum(p_min, np.asarray(rates, dtype=float))
    return floored / floored.sum()


def epsilon_at(sch: EpsilonSchedule, t: int) -> float:
    """Exploration rate at step t (t >= 0)"""
    if t < 0:
        raise PolicyContractError(f"step index must be >= 0, got {t}")
    if sch.kind is ScheduleKind.CONSTANT:
        return sch.eps_floor
    if sch.kind is ScheduleKind.GREEDY:
        return max(sch.eps_floor, sch.eps0 * math.exp(-sch.lam * t))
    return max(sch.eps_floor, sch.eps0 / (1 + t) ** sch.alpha)


def context_key(m: Mutation, fp: FingerprintSet, radius: int,
                ranks: Optional[Sequence[int]] = None) -> ContextKey:
    """
    Context of a mutation: the focal atom's identifier plus the option index

    The ChB focal atom is the endpoint with the smaller canonical rank.
    """
    if m.kind is MutationKind.ChB:
        other, target = m.option
        focal = m.position
        if ranks is not None and ranks[other] < ranks[m.position]:
            focal = other
        return ContextKey(m.kind, fp.atom_id(focal, radius), target)
    option = m.option if m.kind is MutationKind.AddA else None
    return ContextKey(m.kind, fp.atom_id(m.position, radius), option)


def context_keys(valid: Sequence[Mutation], graph: MolecularGraph, context_diameter: int) -> list[ContextKey]:
    fp = ecfp(graph, context_diameter)
    ranks = canonical_ranks(graph) if any(m.kind is MutationKind.ChB for m in valid) else None
    return [context_key(m, fp, context_diameter // 2, ranks) for m in valid]


def select(valid: Sequence[Mutation], graph: MolecularGraph, table: PolicyTable, sch: EpsilonSchedule,
           t: int, rng: np.random.Generator, keys: Optional[Sequence[ContextKey]] = None,
           invert_exploration: bool = False) -> SelectionOutcome:
    """
    Pick one awake mutation and count the use of its context

    Draw order: one uniform u; exploring (u < epsilon) draws one integer, exploiting draws one
    uniform for the roulette wheel. ``invert_exploration`` explores when u > epsilon instead.

    Args:
        valid: Non-empty list of mutations valid on ``graph``
        graph: Graph the mutations were enumerated on
        table: Policy table (n_uses of the chosen key is incremented)
        sch: Exploration schedule
        t: Step index
        rng: Seeded random source
        keys: Precomputed context keys aligned with ``valid``

    Returns:
        SelectionOutcome: Chosen mutation and its context

    Raises:
        PolicyContractError: Empty valid list
    """
    if not valid:
        raise PolicyContractError('select requires at least one valid mutation')
    if keys is None:
        keys = context_keys(valid, graph, table.context_diameter)

    eps = epsilon_at(sch, t)
    u = rng.random()
    explore = u > eps if invert_exploration else u < eps
    if explore:
        index = int(rng.integers(len(valid)))
        weight = None
    else:
        w = weights(table.rates(keys), table.p_min)
        cumulative = np.cumsum(w)
        index = min(int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side='right')),
                    len(valid) - 1)
        weight = float(w[index])

    key = keys[index]
    stats = table.stats.setdefault(key, ContextStats())
    stats.n_uses += 1
    return SelectionOutcome(valid[index], key, explore, weight)


def record(table: PolicyTable, key: ContextKey, reward: int) -> PolicyTable:
    """
    Add the observed reward to the context's success counter

    Raises:
        PolicyContractError: Reward outside {0, 1} or a reward without a matching use
    """
    if reward not in (0, 1):
        raise PolicyContractError(f"reward must be 0 or 1, got {reward}")
    stats = table.stats.get(key)
    if stats is None or stats.n_success + reward > stats.n_uses:
        raise PolicyContractError(f"reward recorded for {key} without a matching selection")
    stats.n_success += int(reward)
    return table


def encode_index(pos: int, option_idx: int, size: int) -> int:
    """
    Integer context index: pos + option_idx * (size + 1)

    Args:
        pos: 1-based position of the identifier in a frozen listing of ``size`` entries
        option_idx: 0-based option index

    Raises:
        IndexError: pos outside 1..size or negative option index
    """
    if not 1 <= pos <= size:
        raise IndexError(f"position {pos} outside 1..{size}")
    if option_idx < 0:
        raise IndexError(f"option index must be >= 0, got {option_idx}")
    return pos + option_idx * (size + 1)


def decode_index(idx: int, size: int) -> tuple[int, int]:
    """Inverse of encode_index: (pos, option_idx)"""
    pos = idx % (size + 1)
    if idx <= 0 or pos == 0:
        raise IndexError(f"{idx} is not a valid context index for a listing of {size}")
    return pos, idx // (size + 1)
