"""
Molecular graph data model
Heavy-atom graphs with implicit hydrogens, valence bookkeeping and the three elementary mutations
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import networkx as nx


class Element(enum.Enum):
    """Closed heavy-atom set: (symbol, atomic number, default valence)"""

    C = ('C', 6, 4)
    N = ('N', 7, 3)
    O = ('O', 8, 2)
    F = ('F', 9, 1)
    P = ('P', 15, 3)
    S = ('S', 16, 2)
    Cl = ('Cl', 17, 1)
    Br = ('Br', 35, 1)

    @property
    def symbol(self) -> str:
        return self.value[0]

    @property
    def atomic_number(self) -> int:
        return self.value[1]

    @property
    def max_valence(self) -> int:
        return self.value[2]

    @classmethod
    def from_symbol(cls, symbol: str) -> 'Element':
        """
        Look up an element by its symbol

        Args:
            symbol: Atomic symbol, case-sensitive ('Cl', not 'CL')

        Returns:
            Element: Matching element

        Raises:
            ValueError: Symbol outside the supported heavy-atom set
        """
        try:
            return cls[symbol]
        except KeyError:
            raise ValueError(f"Unsupported element: {symbol}. Supported: "
                             f"{', '.join(e.symbol for e in cls)}") from None


class MutationKind(enum.IntEnum):
    """Elementary actions; the integer value fixes the enumeration order"""

    AddA = 0
    RmA = 1
    ChB = 2

    @classmethod
    def parse(cls, name: str) -> 'MutationKind':
        try:
            return cls[name]
        except KeyError:
            raise ValueError(f"Unknown action: {name}. Supported: AddA, RmA, ChB") from None


ALL_ACTIONS = frozenset(MutationKind)
DEFAULT_CANDIDATES = (Element.C, Element.N, Element.O, Element.F)
DEFAULT_MAX_HEAVY = 38


class InvalidMutationError(ValueError):
    """Raised when a mutation is applied to a graph on which it is not valid"""


@dataclass(frozen=True)
class Atom:
    element: Element
    formal_charge: int = 0

    @property
    def max_valence(self) -> int:
        """Charge-adjusted valence: charge shifts group 15-17 atoms, carbon loses one bond per unit"""
        base = self.element.max_valence
        if self.formal_charge == 0:
            return base
        if self.element is Element.C:
            return base - abs(self.formal_charge)
        return max(0, base + self.formal_charge)


@dataclass(frozen=True)
class Bond:
    u: int
    v: int
    order: int

    def __post_init__(self):
        if self.u == self.v:
            raise ValueError(f"Bond endpoints must be distinct: {self.u}")
        if self.order not in (1, 2, 3):
            raise ValueError(f"Bond order must be 1, 2 or 3, got {self.order}")
        if self.u > self.v:
            low, high = self.v, self.u
            object.__setattr__(self, 'u', low)
            object.__setattr__(self, 'v', high)

    @property
    def endpoints(self) -> tuple[int, int]:
        return self.u, self.v


@dataclass(frozen=True)
class MolecularGraph:
    """
    Immutable heavy-atom graph

    Vertices are positions 0..n-1 in ``atoms``; bonds are kept sorted by endpoints.
    Construction only checks structural sanity; chemical invariants are checked by ``validate``.
    """

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, 'atoms', tuple(self.atoms))
        ordered = tuple(sorted(self.bonds, key=lambda b: (b.u, b.v)))
        object.__setattr__(self, 'bonds', ordered)
        n = len(self.atoms)
        seen = set()
        for bond in ordered:
            if bond.v >= n or bond.u < 0:
                raise IndexError(f"Bond {bond.endpoints} references a vertex outside 0..{n - 1}")
            if bond.endpoints in seen:
                raise ValueError(f"Duplicate bond between {bond.u} and {bond.v}")
            seen.add(bond.endpoints)

    @classmethod
    def build(cls, elements: Sequence, bonds: Iterable[tuple[int, int, int]] = (),
              charges: Optional[Sequence[int]] = None) -> 'MolecularGraph':
        """
        Convenience constructor from symbols and (u, v, order) triples

        Args:
            elements: Element members or symbols
            bonds: Iterable of (u, v, order)
            charges: Optional formal charges aligned with elements

        Returns:
            MolecularGraph: New graph (not validated)
        """
        charges = charges or [0] * len(elements)
        atoms = tuple(
            Atom(e if isinstance(e, Element) else Element.from_symbol(e), q)
            for e, q in zip(elements, charges)
        )
        return cls(atoms, tuple(Bond(u, v, o) for u, v, o in bonds))

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def heavy_count(self) -> int:
        return len(self.atoms)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per vertex, sorted (neighbour, order) pairs"""
        table = [[] for _ in self.atoms]
        for bond in self.bonds:
            table[bond.u].append((bond.v, bond.order))
            table[bond.v].append((bond.u, bond.order))
        return tuple(tuple(sorted(row)) for row in table)

    @cached_property
    def bond_orders(self) -> dict[tuple[int, int], int]:
        return {bond.endpoints: bond.order for bond in self.bonds}

    @cached_property
    def nx_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(len(self.atoms)))
        graph.add_edges_from((b.u, b.v, {'order': b.order}) for b in self.bonds)
        return graph

    def bond_order(self, u: int, v: int) -> int:
        """Order of the bond between u and v, 0 when they are not bonded"""
        key = (u, v) if u < v else (v, u)
        return self.bond_orders.get(key, 0)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def valence_used(self, v: int) -> int:
        return sum(order for _, order in self.adjacency[v])

    def validate(self):
        """
        Check every chemical invariant

        Raises:
            ValueError: Empty graph, over-valent atom or disconnected graph
        """
        problems = invariant_violations(self)
        if problems:
            raise ValueError('; '.join(problems))


@dataclass(frozen=True, order=True)
class Mutation:
    """
    One elementary action

    ``option`` is the candidate index for AddA, ``(other endpoint, target order)`` for ChB and None for RmA.
    Field order gives the (kind, position, option) enumeration order.
    """

    kind: MutationKind
    position: int
    option: Optional[object] = None

    def __post_init__(self):
        if self.kind is MutationKind.RmA and self.option is not None:
            raise ValueError('RmA takes no option')
        if self.kind is MutationKind.AddA and not isinstance(self.option, int):
            raise ValueError('AddA option must be a candidate index')
        if self.kind is MutationKind.ChB:
            if not (isinstance(self.option, tuple) and len(self.option) == 2):
                raise ValueError('ChB option must be (other endpoint, target order)')

    def __str__(self):
        if self.option is None:
            return f"{self.kind.name}({self.position})"
        return f"{self.kind.name}({self.position}, {self.option})"


def free_valence(graph: MolecularGraph, v: int) -> int:
    """
    Remaining valence of a vertex, equal to its implicit hydrogen count

    Raises:
        IndexError: v is not a vertex of the graph
    """
    if not 0 <= v < len(graph.atoms):
        raise IndexError(f"Vertex {v} out of range 0..{len(graph.atoms) - 1}")
    return graph.atoms[v].max_valence - graph.valence_used(v)


def is_connected(graph: MolecularGraph) -> bool:
    """True iff every vertex is reachable from vertex 0"""
    if not graph.atoms:
        return False
    return nx.is_connected(graph.nx_graph)


def invariant_violations(graph: MolecularGraph) -> list[str]:
    problems = []
    if not graph.atoms:
        return ['graph has no heavy atoms']
    for v in range(len(graph.atoms)):
        if free_valence(graph, v) < 0:
            problems.append(f"vertex {v} ({graph.atoms[v].element.symbol}) exceeds its valence")
    if not is_connected(graph):
        problems.append('graph is disconnected')
    return problems


def _check_actions(actions) -> frozenset:
    return frozenset(a if isinstance(a, MutationKind) else MutationKind.parse(a) for a in actions)


def enumerate_valid_mutations(graph: MolecularGraph, actions: Iterable = ALL_ACTIONS,
                              candidates: Sequence[Element] = DEFAULT_CANDIDATES,
                              max_heavy: int = DEFAULT_MAX_HEAVY,
                              allow_bond_deletion: bool = False) -> list[Mutation]:
    """
    List every mutation whose application keeps the graph valid

    Args:
        graph: Valid molecular graph
        actions: Subset of MutationKind (or names)
        candidates: Ordered atom set for AddA
        max_heavy: Heavy-atom ceiling for AddA
        allow_bond_deletion: Also offer ChB to order 0 on ring (non-bridge) bonds

    Returns:
        list: Mutations sorted by (kind, position, option)
    """
    actions = _check_actions(actions)
    if MutationKind.AddA in actions and not candidates:
        raise ValueError('AddA requires a non-empty candidate atom set')

    n = len(graph.atoms)
    free = [free_valence(graph, v) for v in range(n)]
    valid: list[Mutation] = []

    if MutationKind.AddA in actions and n < max_heavy:
        for v in range(n):
            if free[v] >= 1:
                valid.extend(Mutation(MutationKind.AddA, v, i) for i in range(len(candidates)))

    if MutationKind.RmA in actions and n > 1:
        cut_vertices = set(nx.articulation_points(graph.nx_graph))
        valid.extend(Mutation(MutationKind.RmA, v) for v in range(n) if v not in cut_vertices)

    if MutationKind.ChB in actions:
        bridges = set()
        if allow_bond_deletion:
            bridges = {tuple(sorted(edge)) for edge in nx.bridges(graph.nx_graph)}
        for u in range(n):
            for v in range(u + 1, n):
                current = graph.bond_order(u, v)
                for target in _bond_targets(current, free[u], free[v]):
                    valid.append(Mutation(MutationKind.ChB, u, (v, target)))
                if allow_bond_deletion and current and (u, v) not in bridges:
                    valid.append(Mutation(MutationKind.ChB, u, (v, 0)))

    valid.sort()
    return valid


def arm_count(graph: MolecularGraph, actions: Iterable = ALL_ACTIONS,
              candidates: Sequence[Element] = DEFAULT_CANDIDATES,
              allow_bond_deletion: bool = False) -> int:
    """
    Size of the full (kind, position, option) space on this graph, valid or not

    AddA contributes n * |candidates|, RmA n, ChB three target orders per atom pair less the current
    order of bonded pairs, plus deletion of each bond when enabled. Mutations outside
    ``enumerate_valid_mutations`` are the sleeping arms of the graph.
    """
    actions = _check_actions(actions)
    n = len(graph.atoms)
    bonded = len(graph.bonds)
    total = 0
    if MutationKind.AddA in actions:
        total += n * len(candidates)
    if MutationKind.RmA in actions:
        total += n
    if MutationKind.ChB in actions:
        total += 3 * n * (n - 1) // 2 - bonded
        if allow_bond_deletion:
            total += bonded
    return total


def _bond_targets(current: int, free_u: int, free_v: int) -> list[int]:
    targets = []
    for target in (1, 2, 3):
        if target == current:
            continue
        raise_by = target - current
        if raise_by > 0 and (free_u < raise_by or free_v < raise_by):
            continue
        targets.append(target)
    return targets


def is_valid_mutation(graph: MolecularGraph, m: Mutation,
                      candidates: Sequence[Element] = DEFAULT_CANDIDATES,
                      max_heavy: int = DEFAULT_MAX_HEAVY,
                      allow_bond_deletion: bool = False) -> bool:
    """Check a single mutation with the same rules as enumerate_valid_mutations"""
    n = len(graph.atoms)
    if not 0 <= m.position < n:
        return False
    if m.kind is MutationKind.AddA:
        return (0 <= m.option < len(candidates) and n < max_heavy
                and free_valence(graph, m.position) >= 1)
    if m.kind is MutationKind.RmA:
        if n <= 1:
            return False
        remaining = graph.nx_graph.subgraph(v for v in range(n) if v != m.position)
        return nx.is_connected(remaining)
    other, target = m.option
    if not (m.position < other < n):
        return False
    current = graph.bond_order(m.position, other)
    if target == 0:
        if not (allow_bond_deletion and current):
            return False
        trimmed = graph.nx_graph.copy()
        trimmed.remove_edge(m.position, other)
        return nx.is_connected(trimmed)
    return target in _bond_targets(current, free_valence(graph, m.position), free_valence(graph, other))


def apply_mutation(graph: MolecularGraph, m: Mutation,
                   candidates: Sequence[Element] = DEFAULT_CANDIDATES,
                   max_heavy: int = DEFAULT_MAX_HEAVY,
                   allow_bond_deletion: bool = False) -> MolecularGraph:
    """
    Apply one valid mutation and return the mutant; the input graph is unchanged

    Raises:
        InvalidMutationError: m is not valid on this graph
    """
    if not is_valid_mutation(graph, m, candidates, max_heavy, allow_bond_deletion):
        raise InvalidMutationError(f"{m} is not valid on a graph with {len(graph)} heavy atoms")

    if m.kind is MutationKind.AddA:
        w = len(graph.atoms)
        atoms = graph.atoms + (Atom(candidates[m.option]),)
        return MolecularGraph(atoms, graph.bonds + (Bond(m.position, w, 1),))

    if m.kind is MutationKind.RmA:
        gone = m.position
        atoms = graph.atoms[:gone] + graph.atoms[gone + 1:]
        shift = lambda x: x - 1 if x > gone else x  # noqa: E731
        bonds = tuple(Bond(shift(b.u), shift(b.v), b.order) for b in graph.bonds if gone not in b.endpoints)
        return MolecularGraph(atoms, bonds)

    other, target = m.option
    pair = (m.position, other)
    bonds = [b for b in graph.bonds if b.endpoints != pair]
    if target:
        bonds.append(Bond(m.position, other, target))
    return MolecularGraph(graph.atoms, tuple(bonds))
