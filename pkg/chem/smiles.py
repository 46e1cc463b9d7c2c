"""
SMILES reading and canonical writing
Supports the organic subset, aromatic c/n/o/s, charged bracket atoms, branches and ring closures
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Optional

import networkx as nx

from chem.molgraph import Atom, Bond, Element, MolecularGraph, free_valence

logger = logging.getLogger(__name__)

ORGANIC_TWO = ('Cl', 'Br')
ORGANIC_ONE = 'CNOFPS'
AROMATIC = {'c': Element.C, 'n': Element.N, 'o': Element.O, 's': Element.S}
BOND_SYMBOLS = {'-': 1, '=': 2, '#': 3}
ORDER_SYMBOLS = {1: '', 2: '=', 3: '#'}

BRACKET_PATTERN = re.compile(
    r'(?P<symbol>Cl|Br|[CNOFPS]|[cnos])(?P<hydrogens>H\d?)?(?P<charge>\+\+|--|[+-]\d?)?$'
)


class SmilesError(ValueError):
    """Base class for SMILES reading failures"""


class SmilesSyntaxError(SmilesError):
    """Malformed or unsupported SMILES text"""

    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class KekulizationError(SmilesError):
    """Aromatic subgraph admits no alternating single/double assignment"""


class ValenceError(SmilesError):
    """An atom carries more bonds than its valence allows, or an inconsistent hydrogen count"""


class FragmentError(SmilesError):
    """Input describes more than one molecule"""


@dataclass
class _ParsedAtom:
    element: Element
    aromatic: bool
    charge: int = 0
    hydrogens: Optional[int] = None


@dataclass
class _ParseState:
    atoms: list = field(default_factory=list)
    bonds: dict = field(default_factory=dict)  # (u, v) -> order, 'aromatic' for implicit aromatic bonds
    previous: Optional[int] = None
    pending_bond: Optional[str] = None
    branches: list = field(default_factory=list)
    rings: dict = field(default_factory=dict)  # digit -> (atom, bond symbol, position)


def _charge_value(text: Optional[str]) -> int:
    if not text:
        return 0
    if text in ('++', '--'):
        return 2 if text == '++' else -2
    magnitude = int(text[1:]) if len(text) > 1 else 1
    return magnitude if text[0] == '+' else -magnitude


def _read_bracket(text: str, start: int) -> tuple[_ParsedAtom, int]:
    end = text.find(']', start)
    if end < 0:
        raise SmilesSyntaxError("unclosed bracket atom", start)
    body = text[start + 1:end]
    if body[:1].isdigit():
        raise SmilesSyntaxError(f"isotopes are not supported: [{body}]", start)
    if '@' in body:
        raise SmilesSyntaxError(f"stereo markers are not supported: [{body}]", start)
    match = BRACKET_PATTERN.match(body)
    if not match:
        raise SmilesSyntaxError(f"unsupported bracket atom [{body}]", start)
    symbol = match.group('symbol')
    hydrogens = match.group('hydrogens')
    count = 0
    if hydrogens:
        count = int(hydrogens[1:]) if len(hydrogens) > 1 else 1
    aromatic = symbol in AROMATIC
    element = AROMATIC[symbol] if aromatic else Element.from_symbol(symbol)
    atom = _ParsedAtom(element, aromatic, _charge_value(match.group('charge')), count)
    return atom, end + 1


def _add_bond(state: _ParseState, u: int, v: int, symbol: Optional[str], position: int):
    key = (u, v) if u < v else (v, u)
    if u == v or key in state.bonds:
        raise SmilesSyntaxError(f"duplicate bond between atoms {u} and {v}", position)
    if symbol is not None:
        state.bonds[key] = BOND_SYMBOLS[symbol]
    elif state.atoms[u].aromatic and state.atoms[v].aromatic:
        state.bonds[key] = 'aromatic'
    else:
        state.bonds[key] = 1


def _attach_atom(state: _ParseState, atom: _ParsedAtom, position: int):
    index = len(state.atoms)
    state.atoms.append(atom)
    if state.previous is not None:
        _add_bond(state, state.previous, index, state.pending_bond, position)
    elif state.pending_bond is not None:
        raise SmilesSyntaxError("bond symbol without a preceding atom", position)
    state.previous = index
    state.pending_bond = None


def _ring_closure(state: _ParseState, digit: int, position: int):
    if state.previous is None:
        raise SmilesSyntaxError("ring closure before any atom", position)
    if digit not in state.rings:
        state.rings[digit] = (state.previous, state.pending_bond, position)
        state.pending_bond = None
        return
    other, opening_symbol, _ = state.rings.pop(digit)
    symbol = state.pending_bond
    if opening_symbol and symbol and opening_symbol != symbol:
        raise SmilesSyntaxError(f"conflicting bond symbols on ring closure {digit}", position)
    _add_bond(state, other, state.previous, symbol or opening_symbol, position)
    state.pending_bond = None


def _tokenize_into(text: str, state: _ParseState):
    i = 0
    while i < len(text):
        char = text[i]
        if text.startswith(ORGANIC_TWO, i):
            _attach_atom(state, _ParsedAtom(Element.from_symbol(text[i:i + 2]), False), i)
            i += 2
        elif char in ORGANIC_ONE:
            _attach_atom(state, _ParsedAtom(Element.from_symbol(char), False), i)
            i += 1
        elif char in AROMATIC:
            _attach_atom(state, _ParsedAtom(AROMATIC[char], True), i)
            i += 1
        elif char == '[':
            atom, i_next = _read_bracket(text, i)
            _attach_atom(state, atom, i)
            i = i_next
        elif char in BOND_SYMBOLS:
            if state.pending_bond is not None:
                raise SmilesSyntaxError("two consecutive bond symbols", i)
            state.pending_bond = char
            i += 1
        elif char == '(':
            if state.previous is None:
                raise SmilesSyntaxError("branch opened before any atom", i)
            state.branches.append(state.previous)
            i += 1
        elif char == ')':
            if not state.branches:
                raise SmilesSyntaxError("unbalanced closing parenthesis", i)
            if state.pending_bond is not None:
                raise SmilesSyntaxError("dangling bond symbol", i)
            state.previous = state.branches.pop()
            i += 1
        elif char.isdigit():
            _ring_closure(state, int(char), i)
            i += 1
        elif char == '%':
            digits = text[i + 1:i + 3]
            if len(digits) != 2 or not digits.isdigit():
                raise SmilesSyntaxError("'%' must be followed by two digits", i)
            _ring_closure(state, int(digits), i)
            i += 3
        elif char == '.':
            raise FragmentError(f"multi-fragment input is not supported (position {i})")
        elif char in '/\\':
            raise SmilesSyntaxError("stereo bond markers are not supported", i)
        else:
            raise SmilesSyntaxError(f"unexpected character '{char}'", i)

    if state.pending_bond is not None:
        raise SmilesSyntaxError("dangling bond symbol", len(text))
    if state.branches:
        raise SmilesSyntaxError("unclosed branch", len(text))
    if state.rings:
        digit, (_, _, position) = next(iter(state.rings.items()))
        raise SmilesSyntaxError(f"unclosed ring {digit}", position)


def _kekulize(atoms: list[_ParsedAtom], bonds: dict) -> dict:
    """Resolve aromatic bonds to integer orders by perfect matching on the atoms that need a double bond"""
    aromatic_edges = [key for key, order in bonds.items() if order == 'aromatic']
    if not aromatic_edges:
        return bonds

    skeleton = nx.Graph()
    skeleton.add_nodes_from(range(len(atoms)))
    skeleton.add_edges_from(bonds)
    for u, v in nx.bridges(skeleton):
        key = (u, v) if u < v else (v, u)
        if bonds[key] == 'aromatic':
            bonds[key] = 1

    single_sum = [0] * len(atoms)
    for (u, v), order in bonds.items():
        value = 1 if order == 'aromatic' else order
        single_sum[u] += value
        single_sum[v] += value

    needs_double = set()
    for index, atom in enumerate(atoms):
        if not atom.aromatic:
            continue
        valence = Atom(atom.element, atom.charge).max_valence
        spare = valence - single_sum[index] - (atom.hydrogens or 0)
        if spare >= 1:
            needs_double.add(index)

    candidates = nx.Graph()
    candidates.add_nodes_from(needs_double)
    candidates.add_edges_from(
        (u, v) for (u, v), order in bonds.items()
        if order == 'aromatic' and u in needs_double and v in needs_double
    )
    matching = nx.max_weight_matching(candidates, maxcardinality=True)
    matched = {node for edge in matching for node in edge}
    if matched != needs_double:
        unmatched = sorted(needs_double - matched)
        raise KekulizationError(f"cannot kekulize aromatic system; unmatched atoms {unmatched}")

    doubles = {tuple(sorted(edge)) for edge in matching}
    return {
        key: (2 if key in doubles else 1) if order == 'aromatic' else order
        for key, order in bonds.items()
    }


def parse(smiles: str) -> MolecularGraph:
    """
    Read a SMILES string into a kekulized MolecularGraph

    Args:
        smiles: SMILES text in the supported subset

    Returns:
        MolecularGraph: Connected graph with implicit hydrogens

    Raises:
        SmilesSyntaxError: Malformed or unsupported text (position-annotated)
        KekulizationError: Aromatic system without a valid Kekulé form
        ValenceError: Over-valent atom or bracket hydrogen count inconsistent with valence
        FragmentError: More than one molecule
    """
    text = smiles.strip()
    if not text:
        raise SmilesSyntaxError("empty SMILES", 0)
    state = _ParseState()
    _tokenize_into(text, state)
    if not state.atoms:
        raise SmilesSyntaxError("no atoms", 0)

    orders = _kekulize(state.atoms, state.bonds)
    graph = MolecularGraph(
        tuple(Atom(a.element, a.charge) for a in state.atoms),
        tuple(Bond(u, v, order) for (u, v), order in orders.items()),
    )
    for index, atom in enumerate(state.atoms):
        spare = free_valence(graph, index)
        if spare < 0:
            raise ValenceError(f"atom {index} ({atom.element.symbol}) exceeds its valence in '{text}'")
        if atom.hydrogens is not None and atom.hydrogens != spare:
            raise ValenceError(
                f"bracket atom {index} declares {atom.hydrogens} hydrogens but its valence implies {spare}"
            )
    return graph


def iter_smiles_lines(lines: Iterable[str]) -> Iterator[tuple[int, str]]:
    """
    Yield (line number, SMILES) from a corpus, skipping blanks and '#' comments

    Only the first whitespace-separated token of a line is taken, so "SMILES name" lines work.
    """
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        yield number, stripped.split()[0]


# Canonical labelling

def _dense(values: list) -> list[int]:
    ranking = {value: rank for rank, value in enumerate(sorted(set(values)))}
    return [ranking[value] for value in values]


def _seed_labels(graph: MolecularGraph) -> list[int]:
    return _dense([
        (atom.element.atomic_number, atom.formal_charge, graph.degree(v), graph.valence_used(v))
        for v, atom in enumerate(graph.atoms)
    ])


def _refine(graph: MolecularGraph, labels: list[int]) -> list[int]:
    classes = len(set(labels))
    while True:
        signatures = [
            (labels[v], tuple(sorted((order, labels[u]) for u, order in graph.adjacency[v])))
            for v in range(len(labels))
        ]
        refined = _dense(signatures)
        refined_classes = len(set(refined))
        if refined_classes == classes:
            return refined
        labels, classes = refined, refined_classes


def _are_twins(graph: MolecularGraph, u: int, w: int) -> bool:
    """Swapping u and w is an automorphism when their labelled neighbourhoods coincide"""
    if graph.atoms[u] != graph.atoms[w]:
        return False
    around_u = {x: order for x, order in graph.adjacency[u] if x != w}
    around_w = {x: order for x, order in graph.adjacency[w] if x != u}
    return around_u == around_w


def _atom_text(graph: MolecularGraph, v: int) -> str:
    atom = graph.atoms[v]
    if atom.formal_charge == 0:
        return atom.element.symbol
    hydrogens = free_valence(graph, v)
    h_text = '' if hydrogens == 0 else ('H' if hydrogens == 1 else f'H{hydrogens}')
    sign = '+' if atom.formal_charge > 0 else '-'
    magnitude = abs(atom.formal_charge)
    return f"[{atom.element.symbol}{h_text}{sign}{magnitude if magnitude > 1 else ''}]"


def _ring_label(digit: int) -> str:
    return str(digit) if digit < 10 else f"%{digit}"


def _write(graph: MolecularGraph, ranks: list[int]) -> str:
    n = len(graph.atoms)
    by_rank = lambda v: ranks[v]  # noqa: E731
    visited = [False] * n
    children: list[list[int]] = [[] for _ in range(n)]
    ring_partners: list[list[int]] = [[] for _ in range(n)]

    def walk(v: int, parent: int):
        visited[v] = True
        for u in sorted((u for u, _ in graph.adjacency[v]), key=by_rank):
            if u == parent:
                continue
            if visited[u]:
                if v not in ring_partners[u]:
                    ring_partners[u].append(v)
                    ring_partners[v].append(u)
            else:
                children[v].append(u)
                walk(u, v)

    start = min(range(n), key=by_rank)
    walk(start, -1)

    open_rings: dict[frozenset, int] = {}
    free_digits: list[int] = []
    next_digit = [1]

    def take_digit() -> int:
        if free_digits:
            free_digits.sort()
            return free_digits.pop(0)
        digit = next_digit[0]
        next_digit[0] += 1
        return digit

    def emit(v: int) -> str:
        parts = [_atom_text(graph, v)]
        partners = sorted(ring_partners[v], key=by_rank)
        closing = [u for u in partners if frozenset((u, v)) in open_rings]
        opening = [u for u in partners if frozenset((u, v)) not in open_rings]
        for u in closing:
            digit = open_rings.pop(frozenset((u, v)))
            parts.append(_ring_label(digit))
            free_digits.append(digit)
        for u in opening:
            digit = take_digit()
            open_rings[frozenset((u, v))] = digit
            parts.append(ORDER_SYMBOLS[graph.bond_order(u, v)] + _ring_label(digit))
        for i, child in enumerate(children[v]):
            branch = ORDER_SYMBOLS[graph.bond_order(v, child)] + emit(child)
            parts.append(branch if i == len(children[v]) - 1 else f"({branch})")
        return ''.join(parts)

    return emit(start)


@lru_cache(maxsize=16384)
def canonical_form(graph: MolecularGraph) -> tuple[str, tuple[int, ...]]:
    """
    Canonical SMILES together with the total vertex ranking that produced it

    Ranks come from iterative neighbourhood refinement seeded by (atomic number, charge, degree,
    bond-order sum). Remaining ties are broken by individualising each member of the first tied
    cell in turn (twins skipped) and keeping the lexicographically smallest string.
    """
    if not graph.atoms:
        raise ValueError('cannot canonicalize an empty graph')

    best: list = [None, None]

    def search(labels: list[int]):
        labels = _refine(graph, labels)
        counts: dict[int, int] = {}
        for label in labels:
            counts[label] = counts.get(label, 0) + 1
        tied = [label for label, count in counts.items() if count > 1]
        if not tied:
            text = _write(graph, labels)
            if best[0] is None or text < best[0]:
                best[0], best[1] = text, tuple(labels)
            return
        cell_label = min(tied)
        tried: list[int] = []
        for v in range(len(labels)):
            if labels[v] != cell_label or any(_are_twins(graph, v, w) for w in tried):
                continue
            tried.append(v)
            search(_dense([(label, 0 if u == v else 1) for u, label in enumerate(labels)]))

    search(_seed_labels(graph))
    return best[0], best[1]


def write_canonical(graph: MolecularGraph) -> str:
    """Deterministic, relabeling-invariant SMILES of a valid graph"""
    return canonical_form(graph)[0]


def canonical_key(graph: MolecularGraph) -> str:
    """Novelty key: equal exactly for isomorphic graphs"""
    return canonical_form(graph)[0]


def canonical_ranks(graph: MolecularGraph) -> tuple[int, ...]:
    """Per-vertex canonical rank (0 = first atom written)"""
    return canonical_form(graph)[1]
