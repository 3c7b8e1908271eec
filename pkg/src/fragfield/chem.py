"""Molecular data model: atoms, fragmented systems and the fragmented-XYZ format.

Coordinates are stored in Bohr; every energy in the package is in Hartree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations
from pathlib import Path

import numpy as np

BOHR_ANGSTROM = 0.52917721092
"""Bohr radius in Angstrom (CODATA 2010)."""

ANGSTROM_TO_BOHR = 1.0 / BOHR_ANGSTROM
HARTREE_KCALMOL = 627.5094740631

ELEMENTS = ("H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne")
ATOMIC_NUMBER = {sym: z for z, sym in enumerate(ELEMENTS, start=1)}


class GeometryParseError(ValueError):
    """Raised for a malformed fragmented-XYZ document."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Atom:
    element: str
    Z: int
    position: np.ndarray  # Bohr

    def __post_init__(self):
        if self.Z < 1 or ATOMIC_NUMBER.get(self.element) != self.Z:
            raise ValueError(f"inconsistent element/charge: {self.element!r}, Z={self.Z}")
        pos = np.asarray(self.position, dtype=float).reshape(3)
        pos.setflags(write=False)
        object.__setattr__(self, "position", pos)

    @classmethod
    def from_angstrom(cls, element: str, xyz) -> "Atom":
        if element not in ATOMIC_NUMBER:
            raise ValueError(f"unknown element {element!r}")
        return cls(element, ATOMIC_NUMBER[element], np.asarray(xyz, dtype=float) * ANGSTROM_TO_BOHR)

    @property
    def position_angstrom(self) -> np.ndarray:
        return self.position * BOHR_ANGSTROM


@dataclass(frozen=True)
class FragmentedSystem:
    """Atoms plus a 1-based fragment assignment; immutable once built."""

    atoms: tuple[Atom, ...]
    fragment_of: tuple[int, ...]
    charges: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "fragment_of", tuple(int(f) for f in self.fragment_of))
        if len(self.atoms) != len(self.fragment_of):
            raise ValueError("every atom needs exactly one fragment id")
        ids = sorted(set(self.fragment_of))
        if ids != list(range(1, len(ids) + 1)):
            raise ValueError(f"fragment ids must cover 1..N_f contiguously, got {ids}")
        if not self.charges:
            object.__setattr__(self, "charges", (0,) * len(ids))
        if len(self.charges) != len(ids):
            raise ValueError("one net charge per fragment required")
        for frag in self.fragments:
            if self.n_electrons(frag) % 2:
                raise ValueError(f"fragment {frag} has an odd electron count (closed shell required)")

    @property
    def n_fragments(self) -> int:
        return len(self.charges)

    @property
    def fragments(self) -> range:
        return range(1, self.n_fragments + 1)

    @property
    def coords(self) -> np.ndarray:
        return np.array([a.position for a in self.atoms])

    @property
    def nuclear_charges(self) -> np.ndarray:
        return np.array([a.Z for a in self.atoms], dtype=float)

    def atoms_of(self, *frags: int) -> list[int]:
        wanted = set(frags)
        return [i for i, f in enumerate(self.fragment_of) if f in wanted]

    def n_electrons(self, *frags: int) -> int:
        frags = frags or tuple(self.fragments)
        nuc = sum(self.atoms[i].Z for i in self.atoms_of(*frags))
        return nuc - sum(self.charges[f - 1] for f in frags)

    def nuclear_repulsion(self, atom_idx=None, other=None) -> float:
        """Internuclear repulsion within `atom_idx`, or between `atom_idx` and `other`."""
        idx = range(len(self.atoms)) if atom_idx is None else list(atom_idx)
        Z = self.nuclear_charges
        R = self.coords
        e = 0.0
        if other is None:
            for a, b in combinations(idx, 2):
                e += Z[a] * Z[b] / np.linalg.norm(R[a] - R[b])
        else:
            for a in idx:
                for b in other:
                    e += Z[a] * Z[b] / np.linalg.norm(R[a] - R[b])
        return e

    def translated(self, shift_bohr) -> "FragmentedSystem":
        shift = np.asarray(shift_bohr, dtype=float)
        atoms = [Atom(a.element, a.Z, a.position + shift) for a in self.atoms]
        return FragmentedSystem(atoms, self.fragment_of, self.charges)

    def transformed(self, rotation) -> "FragmentedSystem":
        rot = np.asarray(rotation, dtype=float)
        atoms = [Atom(a.element, a.Z, rot @ a.position) for a in self.atoms]
        return FragmentedSystem(atoms, self.fragment_of, self.charges)

    def to_xyz(self) -> str:
        lines = [f"{len(self.atoms)} {self.n_fragments}"]
        for atom, frag in zip(self.atoms, self.fragment_of):
            x, y, z = atom.position_angstrom
            lines.append(f"{atom.element:<2s} {frag:3d} {x:20.12f} {y:20.12f} {z:20.12f}")
        return "\n".join(lines) + "\n"


def parse_geometry(text: str) -> FragmentedSystem:
    """Parse a fragmented-XYZ document.

    The first non-comment line is ``natoms nfragments``; each following line is
    ``element frag_id x y z`` with coordinates in Angstrom. Blank lines and lines
    starting with ``#`` are ignored.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped and not stripped.startswith("#"):
            rows.append((lineno, stripped.split()))
    if not rows:
        raise GeometryParseError("empty document")

    lineno, header = rows[0]
    if len(header) != 2:
        raise GeometryParseError("header must be 'natoms nfragments'", lineno)
    try:
        natoms, nfrag = int(header[0]), int(header[1])
    except ValueError:
        raise GeometryParseError("header must contain two integers", lineno) from None
    if natoms < 1 or nfrag < 1:
        raise GeometryParseError("atom and fragment counts must be positive", lineno)

    body = rows[1:]
    if len(body) != natoms:
        where = body[natoms][0] if len(body) > natoms else None
        raise GeometryParseError(f"expected {natoms} atom lines, found {len(body)}", where)

    atoms, frags = [], []
    for lineno, fields in body:
        if len(fields) != 5:
            raise GeometryParseError("atom line must be 'element frag_id x y z'", lineno)
        symbol = fields[0].capitalize()
        if symbol not in ATOMIC_NUMBER:
            raise GeometryParseError(f"unknown element {fields[0]!r}", lineno)
        try:
            frag = int(fields[1])
            xyz = [float(v) for v in fields[2:]]
        except ValueError:
            raise GeometryParseError("non-numeric fragment id or coordinate", lineno) from None
        if not 1 <= frag <= nfrag:
            raise GeometryParseError(f"fragment id {frag} outside 1..{nfrag}", lineno)
        atoms.append(Atom.from_angstrom(symbol, xyz))
        frags.append(frag)

    present = sorted(set(frags))
    if present != list(range(1, nfrag + 1)):
        missing = sorted(set(range(1, nfrag + 1)) - set(present))
        raise GeometryParseError(f"fragment ids not contiguous; missing {missing}", rows[0][0])
    try:
        return FragmentedSystem(atoms, frags)
    except ValueError as exc:
        raise GeometryParseError(str(exc), rows[0][0]) from None


def load_geometry(path) -> FragmentedSystem:
    return parse_geometry(Path(path).read_text())


def bundled_geometry(name: str) -> FragmentedSystem:
    """Load one of the bundled geometries: ``fh3`` or ``fh2_h2o``."""
    ref = resources.files("fragfield.data").joinpath(f"{name}.xyz")
    return parse_geometry(ref.read_text())


def fragment_pairs(system: FragmentedSystem) -> list[tuple[int, int]]:
    """Dimers (I, J) with I > J, ordered lexicographically by (J, I)."""
    n = system.n_fragments if isinstance(system, FragmentedSystem) else int(system)
    return [(i, j) for j in range(1, n + 1) for i in range(j + 1, n + 1)]


def unit_label(unit) -> str:
    """'1' for a monomer, '21' for the dimer (2, 1)."""
    if isinstance(unit, int):
        return str(unit)
    return "".join(str(u) for u in unit)


def parse_unit(label: str, n_fragments: int):
    """Inverse of :func:`unit_label` for systems with fewer than 10 fragments."""
    if not label.isdigit() or len(label) not in (1, 2):
        raise ValueError(f"unit id must be a monomer ('1') or dimer ('21'), got {label!r}")
    ids = [int(c) for c in label]
    if any(not 1 <= i <= n_fragments for i in ids):
        raise ValueError(f"unknown unit {label!r} for {n_fragments} fragments")
    if len(ids) == 1:
        return ids[0]
    i, j = ids
    if i <= j:
        raise ValueError(f"dimer labels are written with I > J, got {label!r}")
    return (i, j)
