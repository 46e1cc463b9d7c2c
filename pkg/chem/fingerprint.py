"""
Extended-connectivity fingerprints
Atom-centred identifiers built by iterative neighbour hashing, plus optional folding
"""
from __future__ import annotations

from dataclasses import dataclass
from hashlib import blake2b
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from chem.molgraph import MolecularGraph, free_valence

SUPPORTED_DIAMETERS = (0, 2, 4)
FOLD_LENGTHS = (1024, 2048)


class FingerprintConfigError(ValueError):
    """Unsupported diameter or fold length"""


class EcfpIdentifier(NamedTuple):
    id: int
    radius: int


def _encode(values: Iterable[int]) -> bytes:
    return b''.join(int(value).to_bytes(9, 'little', signed=True) for value in values)


def hash64(values: Iterable[int]) -> int:
    """
    Fixed 64-bit hash of an integer sequence

    BLAKE2b with an 8-byte digest over 9-byte little-endian two's-complement words, so results
    do not depend on the process, platform or byte order.
    """
    return int.from_bytes(blake2b(_encode(values), digest_size=8).digest(), 'little')


def radius_of(diameter: int) -> int:
    if diameter not in SUPPORTED_DIAMETERS:
        raise FingerprintConfigError(f"Unsupported ECFP diameter: {diameter}. Supported: {SUPPORTED_DIAMETERS}")
    return diameter // 2


def atom_invariant(graph: MolecularGraph, v: int) -> tuple[int, int, int, int]:
    """(atomic number, formal charge, heavy degree, implicit hydrogen count)"""
    atom = graph.atoms[v]
    return atom.element.atomic_number, atom.formal_charge, graph.degree(v), free_valence(graph, v)


def initial_invariants(graph: MolecularGraph) -> dict[int, int]:
    """Radius-0 identifier of every vertex"""
    return {v: hash64(atom_invariant(graph, v)) for v in range(len(graph.atoms))}


@dataclass(frozen=True)
class FingerprintSet:
    """
    Identifiers of every atom at every radius up to ``max_radius``

    ``per_radius[r][v]`` is the identifier of vertex v at radius r; each radius row is a multiset with
    exactly one entry per heavy atom.
    """

    per_radius: tuple[tuple[int, ...], ...]

    @property
    def max_radius(self) -> int:
        return len(self.per_radius) - 1

    def atom_id(self, v: int, radius: int) -> int:
        return self.per_radius[radius][v]

    def identifiers(self, radii: Iterable[int] = None) -> Iterator[EcfpIdentifier]:
        radii = range(len(self.per_radius)) if radii is None else radii
        for r in radii:
            for value in self.per_radius[r]:
                yield EcfpIdentifier(value, r)

    def distinct(self, radius: int) -> frozenset:
        return frozenset(self.per_radius[radius])


def ecfp(graph: MolecularGraph, diameter: int = 4) -> FingerprintSet:
    """
    Compute identifiers for radii 0..diameter/2

    id(v, r) = hash64(r, id(v, r-1), (order, id(u, r-1)) pairs of the neighbours sorted ascending)

    Args:
        graph: Valid molecular graph
        diameter: 0, 2 or 4

    Returns:
        FingerprintSet: Per-radius identifier rows
    """
    max_radius = radius_of(diameter)
    current = [hash64(atom_invariant(graph, v)) for v in range(len(graph.atoms))]
    rows = [tuple(current)]
    for r in range(1, max_radius + 1):
        previous = current
        current = []
        for v, neighbours in enumerate(graph.adjacency):
            pairs = sorted((order, previous[u]) for u, order in neighbours)
            flat = [r, previous[v], len(pairs)]
            for order, value in pairs:
                flat.extend((order, value))
            current.append(hash64(flat))
        rows.append(tuple(current))
    return FingerprintSet(tuple(rows))


@dataclass(frozen=True, eq=False)
class FoldedVector:
    bits: np.ndarray
    length: int

    def popcount(self) -> int:
        return int(self.bits.sum())

    def on_bits(self) -> list[int]:
        return np.flatnonzero(self.bits).tolist()


def fold(fp: FingerprintSet, length: int = 2048) -> FoldedVector:
    """
    Fold every identifier at every radius into a presence bit vector

    Raises:
        FingerprintConfigError: length is not 1024 or 2048
    """
    if length not in FOLD_LENGTHS:
        raise FingerprintConfigError(f"Unsupported fold length: {length}. Supported: {FOLD_LENGTHS}")
    bits = np.zeros(length, dtype=bool)
    positions = [identifier.id % length for identifier in fp.identifiers()]
    if positions:
        bits[np.asarray(positions, dtype=np.int64)] = True
    return FoldedVector(bits, length)
