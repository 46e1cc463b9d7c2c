"""
Reference environment registry and the Silly Walks realism score
A molecule is "silly" in proportion to its atom environments never seen in a reference corpus
"""
from __future__ import annotations

import hashlib
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from chem.fingerprint import SUPPORTED_DIAMETERS, ecfp, radius_of
from chem.molgraph import MolecularGraph
from chem.smiles import SmilesError, iter_smiles_lines, parse

logger = logging.getLogger(__name__)

DEFAULT_FILTER_DIAMETERS = (0, 2, 4)
UNPARSEABLE_WARN_RATIO = 0.1

MAGIC = b'SWREG'
FORMAT_VERSION = 1
_HEADER = struct.Struct('<5sHBQ32s')


class RegistryBuildError(ValueError):
    """Corpus could not produce a registry"""


class RegistryConfigError(ValueError):
    """Score requested for a diameter the registry does not cover"""


class RegistryFormatError(ValueError):
    """Registry file is truncated, foreign or of an unknown version"""


@dataclass(frozen=True)
class ReferenceRegistry:
    """
    Identifier sets per radius, observed in a reference corpus

    ``sets[r]`` holds raw 64-bit identifiers for r in 0..max_diameter/2.
    """

    sets: dict
    corpus_digest: str
    molecule_count: int
    max_diameter: int
    skipped_count: int = field(default=0, compare=False)

    @property
    def max_radius(self) -> int:
        return self.max_diameter // 2

    def covers(self, diameter: int) -> bool:
        return diameter in SUPPORTED_DIAMETERS and diameter <= self.max_diameter

    def listing(self, radius: int) -> tuple[int, ...]:
        """Frozen ascending listing of the identifiers at one radius"""
        return tuple(sorted(self.sets.get(radius, ())))

    def set_sizes(self) -> dict[int, int]:
        return {radius: len(ids) for radius, ids in sorted(self.sets.items())}

    def save(self, path) -> Path:
        """
        Write the versioned binary registry file

        Layout: header (magic, version, max_diameter, molecule_count, sha256 digest) then, per radius,
        a uint64 count followed by the ascending little-endian uint64 identifiers.
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'wb') as handle:
            handle.write(_HEADER.pack(MAGIC, FORMAT_VERSION, self.max_diameter, self.molecule_count,
                                      bytes.fromhex(self.corpus_digest)))
            for radius in range(self.max_radius + 1):
                ids = np.asarray(self.listing(radius), dtype='<u8')
                handle.write(struct.pack('<Q', len(ids)))
                handle.write(ids.tobytes())
        logger.info(f"Registry written: {path}")
        return path

    @classmethod
    def load(cls, path) -> 'ReferenceRegistry':
        """
        Read a registry written by ``save``

        Raises:
            RegistryFormatError: Bad magic, unknown version or truncated content
        """
        path = Path(path)
        data = path.read_bytes()
        if len(data) < _HEADER.size:
            raise RegistryFormatError(f"Registry file too short: {path}")
        magic, version, max_diameter, count, digest = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise RegistryFormatError(f"Not a registry file: {path}")
        if version != FORMAT_VERSION:
            raise RegistryFormatError(f"Unsupported registry version {version} in {path}")
        offset = _HEADER.size
        sets = {}
        for radius in range(max_diameter // 2 + 1):
            if offset + 8 > len(data):
                raise RegistryFormatError(f"Truncated registry file: {path}")
            (size,) = struct.unpack_from('<Q', data, offset)
            offset += 8
            end = offset + 8 * size
            if end > len(data):
                raise RegistryFormatError(f"Truncated registry file: {path}")
            ids = np.frombuffer(data[offset:end], dtype='<u8')
            sets[radius] = frozenset(int(value) for value in ids)
            offset = end
        logger.info(f"Registry loaded: {path} ({count} molecules)")
        return cls(sets, digest.hex(), count, max_diameter)

    def export_text(self, path) -> Path:
        """Decimal identifiers, one per line, grouped under '# radius r' headers"""
        path = Path(path)
        lines = [f"# molecules {self.molecule_count}", f"# digest {self.corpus_digest}"]
        for radius in range(self.max_radius + 1):
            lines.append(f"# radius {radius}")
            lines.extend(str(value) for value in self.listing(radius))
        path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
        return path


@dataclass(frozen=True)
class SillyScore:
    silly_count: int
    total_count: int
    value: float = field(init=False)

    def __post_init__(self):
        if self.total_count <= 0:
            raise ValueError('total_count must be positive')
        object.__setattr__(self, 'value', self.silly_count / self.total_count)


def build_registry(corpus: Iterable[str], max_diameter: int = 4) -> ReferenceRegistry:
    """
    Collect every identifier of every parseable corpus molecule

    Args:
        corpus: Lines of a SMILES-per-line corpus ('#' comments and blanks ignored)
        max_diameter: Largest ECFP diameter to record (0, 2 or 4)

    Returns:
        ReferenceRegistry: Registry with ``skipped_count`` unparseable lines

    Raises:
        RegistryBuildError: No parseable molecule
    """
    max_radius = radius_of(max_diameter)
    digest = hashlib.sha256()
    sets: dict[int, set] = {radius: set() for radius in range(max_radius + 1)}
    parsed = skipped = 0

    def hashed_lines():
        for line in corpus:
            text = line.rstrip('\r\n')
            digest.update(text.encode('utf-8') + b'\n')
            yield text

    for number, smiles in iter_smiles_lines(hashed_lines()):
        try:
            graph = parse(smiles)
        except SmilesError as e:
            skipped += 1
            logger.debug(f"Skipping corpus line {number}: {e}")
            continue
        fp = ecfp(graph, max_diameter)
        for radius in range(max_radius + 1):
            sets[radius].update(fp.per_radius[radius])
        parsed += 1

    if parsed == 0:
        raise RegistryBuildError(f"Corpus yielded no parseable molecule ({skipped} lines skipped)")
    if skipped > UNPARSEABLE_WARN_RATIO * (parsed + skipped):
        logger.warning(f"{skipped} of {parsed + skipped} corpus lines could not be parsed")

    registry = ReferenceRegistry(
        {radius: frozenset(ids) for radius, ids in sets.items()},
        digest.hexdigest(), parsed, max_diameter, skipped,
    )
    logger.info(f"Registry built from {parsed} molecules, set sizes {registry.set_sizes()}")
    return registry


def build_registry_from_file(path, max_diameter: int = 4) -> ReferenceRegistry:
    """
    Build a registry from a UTF-8 SMILES file

    Raises:
        RegistryBuildError: File missing, unreadable or without parseable molecules
    """
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            return build_registry(handle, max_diameter)
    except (OSError, UnicodeDecodeError) as e:
        raise RegistryBuildError(f"Cannot read corpus {path}: {e}") from e


def _radii_for(reg: ReferenceRegistry, diameters: Sequence[int]) -> list[int]:
    if not diameters:
        raise RegistryConfigError('At least one filter diameter is required')
    radii = []
    for diameter in diameters:
        if not reg.covers(diameter):
            raise RegistryConfigError(
                f"Diameter {diameter} not covered by registry (max diameter {reg.max_diameter})"
            )
        radii.append(diameter // 2)
    return sorted(set(radii))


def silly_score(graph: MolecularGraph, reg: ReferenceRegistry,
                diameters: Sequence[int] = DEFAULT_FILTER_DIAMETERS) -> SillyScore:
    """
    Proportion of the molecule's (atom, radius) identifiers absent from the registry

    Raises:
        RegistryConfigError: A requested diameter exceeds the registry coverage
    """
    radii = _radii_for(reg, diameters)
    fp = ecfp(graph, 2 * radii[-1])
    silly = total = 0
    for radius in radii:
        known = reg.sets.get(radius, frozenset())
        row = fp.per_radius[radius]
        total += len(row)
        silly += sum(1 for value in row if value not in known)
    return SillyScore(silly, total)


def passes_filter(graph: MolecularGraph, reg: ReferenceRegistry,
                  diameters: Sequence[int] = DEFAULT_FILTER_DIAMETERS) -> bool:
    """True iff the molecule has no silly environment"""
    return silly_score(graph, reg, diameters).silly_count == 0


def unparseable_ratio(reg: ReferenceRegistry) -> Optional[float]:
    seen = reg.molecule_count + reg.skipped_count
    return reg.skipped_count / seen if seen else None
