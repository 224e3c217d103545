"""Hückel matrices from conjugation graphs, qubit padding and the molecule corpus.

Energies are expressed relative to the Coulomb integral alpha, in units of
the resonance integral beta. A heteroatom with Coulomb correction ``h``
contributes ``h`` on the diagonal; a bond with resonance correction ``k``
contributes ``k`` off the diagonal.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CONNECTIVITY = "connectivity"
SOLVER = "solver"


class MoleculeError(ValueError):
    """Invalid molecule description."""


class MoleculeFileError(MoleculeError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Atom:
    id: int
    h: float = 0.0


@dataclass(frozen=True)
class Bond:
    i: int
    j: int
    k: float = 1.0


@dataclass(frozen=True)
class MoleculeSpec:
    name: str
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...] = ()

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def validate(self) -> None:
        if not self.atoms:
            raise MoleculeError(f"{self.name}: a molecule needs at least one atom")
        ids = sorted(a.id for a in self.atoms)
        if ids != list(range(len(ids))):
            raise MoleculeError(f"{self.name}: atom ids must be 0..{len(ids) - 1} without gaps, got {ids}")
        seen = set()
        for b in self.bonds:
            if b.i not in range(len(ids)) or b.j not in range(len(ids)):
                raise MoleculeError(f"{self.name}: bond {b.i}-{b.j} references an unknown atom")
            if b.i == b.j:
                raise MoleculeError(f"{self.name}: self-bond on atom {b.i}")
            if not b.k > 0:
                raise MoleculeError(f"{self.name}: bond {b.i}-{b.j} has non-positive k={b.k}")
            pair = frozenset((b.i, b.j))
            if pair in seen:
                raise MoleculeError(f"{self.name}: duplicate bond {b.i}-{b.j}")
            seen.add(pair)


@dataclass(frozen=True)
class HuckelMatrix:
    """Real symmetric Hückel matrix, possibly padded to a power of two.

    Rows and columns ``n_real..dim-1`` are dummy (all zero) padding.
    """

    entries: np.ndarray
    n_real: int
    sign_mode: str = CONNECTIVITY
    name: str = ""

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.float64)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def dummy_indices(self) -> frozenset[int]:
        return frozenset(range(self.n_real, self.dim))

    @property
    def n_qubits(self) -> int:
        n = int(round(math.log2(self.dim)))
        if 1 << n != self.dim:
            raise ValueError(f"dimension {self.dim} is not a power of two")
        return n

    @property
    def is_padded(self) -> bool:
        return self.dim >= 2 and self.dim & (self.dim - 1) == 0


def build_huckel(spec: MoleculeSpec) -> HuckelMatrix:
    """Unpadded M x M connectivity matrix (the beta-multiplying part)."""
    spec.validate()
    m = spec.n_atoms
    a = np.zeros((m, m))
    for atom in spec.atoms:
        a[atom.id, atom.id] = atom.h
    for b in spec.bonds:
        a[b.i, b.j] = a[b.j, b.i] = b.k
    return HuckelMatrix(a, m, CONNECTIVITY, spec.name)


def qubits_for(n_centers: int) -> int:
    return max(1, math.ceil(math.log2(n_centers))) if n_centers > 1 else 1


def pad_to_qubits(hm: HuckelMatrix) -> HuckelMatrix:
    """Append zero rows/columns up to the next power of two (at least 2)."""
    dim = 1 << qubits_for(hm.dim)
    out = np.zeros((dim, dim))
    out[: hm.dim, : hm.dim] = hm.entries
    return HuckelMatrix(out, hm.n_real, hm.sign_mode, hm.name)


def to_solver_sign(hm: HuckelMatrix) -> HuckelMatrix:
    """Negate a connectivity-mode matrix so ascending eigenvalues run bonding first."""
    if hm.sign_mode != CONNECTIVITY:
        raise ValueError(f"{hm.name or 'matrix'} is already in {hm.sign_mode} sign mode")
    return HuckelMatrix(-hm.entries + 0.0, hm.n_real, SOLVER, hm.name)


def padded_solver_matrix(spec: MoleculeSpec) -> HuckelMatrix:
    return to_solver_sign(pad_to_qubits(build_huckel(spec)))


# ------------------------------------------------------------------ corpus

def _chain(n, name, cyclic=False):
    bonds = [Bond(i, i + 1) for i in range(n - 1)]
    if cyclic:
        bonds.append(Bond(0, n - 1))
    return MoleculeSpec(name, tuple(Atom(i) for i in range(n)), tuple(bonds))


def _acrolein():
    atoms = (Atom(0), Atom(1), Atom(2), Atom(3, h=1.0))
    bonds = (Bond(0, 1, 1.1), Bond(1, 2, 0.9), Bond(2, 3, 1.1))
    return MoleculeSpec("C3H4O", atoms, bonds)


def _furan():
    # parameters read back from the published three-qubit Pauli sum:
    # oxygen (atom 0) h=2, C-O k=0.8, C=C k=1.1, C-C k=0.9
    atoms = (Atom(0, h=2.0),) + tuple(Atom(i) for i in range(1, 5))
    bonds = (Bond(0, 1, 0.8), Bond(1, 2, 1.1), Bond(2, 3, 0.9), Bond(3, 4, 1.1), Bond(0, 4, 0.8))
    return MoleculeSpec("C4H4O", atoms, bonds)


def _pyrene():
    # periphery 1,2,3,3a,4,5,5a,6,7,8,8a,9,10,10a -> 0..13; 10b -> 14, 10c -> 15
    bonds = [Bond(i, i + 1) for i in range(13)] + [Bond(0, 13)]
    bonds += [Bond(3, 14), Bond(13, 14), Bond(14, 15), Bond(6, 15), Bond(10, 15)]
    return MoleculeSpec("C16H10", tuple(Atom(i) for i in range(16)), tuple(bonds))


def _truncated_icosahedron() -> np.ndarray:
    phi = (1 + 5 ** 0.5) / 2
    seeds = [(0.0, 1.0, 3 * phi), (1.0, 2 + phi, 2 * phi), (phi, 2.0, 2 * phi + 1)]
    pts = set()
    for s in seeds:
        for r in range(3):  # cyclic (even) permutations
            v = s[r:] + s[:r]
            for signs in itertools.product((1, -1), repeat=3):
                pts.add(tuple(round(x * g, 12) + 0.0 for x, g in zip(v, signs)))
    return np.array(sorted(pts))


def generate_c60() -> MoleculeSpec:
    """Buckminsterfullerene with a fixed pentagon-first spiral numbering.

    Atoms 0-4 are one pentagon. Each further atom is an unnumbered neighbour
    of the most recently numbered atom that still has one; when two are
    available the branch is chosen with a fixed handedness relative to the
    pentagon's walking direction. All such walks are related by the
    icosahedral symmetry, so the numbering is unique up to automorphism.
    """
    xyz = _truncated_icosahedron()
    dist = np.linalg.norm(xyz[:, None] - xyz[None], axis=2)
    adj = np.abs(dist - 2.0) < 1e-6
    nbrs = [list(np.nonzero(row)[0]) for row in adj]

    def turn(at, came_from, to):
        return np.linalg.det(np.array([xyz[at], xyz[came_from] - xyz[at], xyz[to] - xyz[at]]))

    ring = _pentagon_through(0, nbrs)
    if turn(ring[0], ring[1], ring[2]) < 0:
        ring = [ring[0]] + ring[1:][::-1]
    order = list(ring)
    parent = {x: ring[i - 1] for i, x in enumerate(ring)}
    placed = set(order)
    while len(order) < 60:
        at = next(x for x in reversed(order) if any(y not in placed for y in nbrs[x]))
        free = sorted((y for y in nbrs[at] if y not in placed), key=lambda y: turn(at, parent[at], y))
        nxt = free[0]
        order.append(nxt)
        placed.add(nxt)
        parent[nxt] = at
    index = {v: i for i, v in enumerate(order)}
    bonds = sorted(
        (min(index[a], index[b]), max(index[a], index[b]))
        for a in range(60) for b in nbrs[a] if a < b
    )
    return MoleculeSpec("C60", tuple(Atom(i) for i in range(60)), tuple(Bond(i, j) for i, j in bonds))


def _pentagon_through(v, nbrs):
    for a, b in itertools.combinations(nbrs[v], 2):
        # a pentagon v-a-x-y-b-v
        for x in nbrs[a]:
            if x == v:
                continue
            for y in nbrs[x]:
                if y in (v, a) or b not in nbrs[y]:
                    continue
                return [v, a, x, y, b]
    raise RuntimeError("no pentagon found")


_CORPUS_BUILDERS = {
    "C2H4": lambda: _chain(2, "C2H4"),
    "C3H4": lambda: _chain(3, "C3H4", cyclic=True),
    "C4H4": lambda: _chain(4, "C4H4", cyclic=True),
    "C4H6": lambda: _chain(4, "C4H6"),
    "C3H4O": _acrolein,
    "C4H4O": _furan,
    "C6H6": lambda: _chain(6, "C6H6", cyclic=True),
    "C8H10": lambda: _chain(8, "C8H10"),
    "C16H10": _pyrene,
    "C60": generate_c60,
}


def builtin_corpus() -> list[MoleculeSpec]:
    return [build() for build in _CORPUS_BUILDERS.values()]


def corpus_names() -> list[str]:
    return list(_CORPUS_BUILDERS)


def lookup(name: str) -> MoleculeSpec:
    try:
        return _CORPUS_BUILDERS[name]()
    except KeyError:
        raise MoleculeError(f"unknown molecule {name!r}; built-ins are {', '.join(_CORPUS_BUILDERS)}") from None


# ------------------------------------------------------------- file format

def parse_molecule(text: str, default_name: str = "molecule") -> MoleculeSpec:
    """Parse the line-oriented molecule format.

    ::

        molecule acrolein
        atom 0
        atom 3 h=1.0
        bond 0 1 k=1.1
    """
    name = default_name
    atoms: dict[int, Atom] = {}
    bonds: list[Bond] = []
    seen_bonds: dict[frozenset, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, *args = line.split()
        try:
            if word == "molecule":
                if len(args) != 1:
                    raise MoleculeFileError(lineno, "expected 'molecule <name>'")
                name = args[0]
            elif word == "atom":
                if not 1 <= len(args) <= 2:
                    raise MoleculeFileError(lineno, "expected 'atom <id> [h=<real>]'")
                aid = int(args[0])
                h = _keyword(args[1:], "h", 0.0, lineno)
                if aid in atoms:
                    raise MoleculeFileError(lineno, f"duplicate atom {aid}")
                atoms[aid] = Atom(aid, h)
            elif word == "bond":
                if not 2 <= len(args) <= 3:
                    raise MoleculeFileError(lineno, "expected 'bond <i> <j> [k=<real>]'")
                i, j = int(args[0]), int(args[1])
                k = _keyword(args[2:], "k", 1.0, lineno)
                if i == j:
                    raise MoleculeFileError(lineno, f"self-bond on atom {i}")
                if k <= 0:
                    raise MoleculeFileError(lineno, f"bond {i}-{j} has non-positive k={k}")
                pair = frozenset((i, j))
                if pair in seen_bonds:
                    raise MoleculeFileError(lineno, f"duplicate bond {i}-{j} (first on line {seen_bonds[pair]})")
                seen_bonds[pair] = lineno
                bonds.append(Bond(i, j, k))
            else:
                raise MoleculeFileError(lineno, f"unknown directive {word!r}")
        except ValueError as exc:
            if isinstance(exc, MoleculeFileError):
                raise
            raise MoleculeFileError(lineno, str(exc)) from None
    for b in bonds:
        for a in (b.i, b.j):
            if a not in atoms:
                raise MoleculeFileError(seen_bonds[frozenset((b.i, b.j))], f"bond {b.i}-{b.j} references unknown atom {a}")
    spec = MoleculeSpec(name, tuple(atoms[i] for i in sorted(atoms)), tuple(bonds))
    spec.validate()
    return spec


def _keyword(args, key, default, lineno):
    if not args:
        return default
    k, sep, v = args[0].partition("=")
    if not sep or k != key:
        raise MoleculeFileError(lineno, f"expected {key}=<real>, got {args[0]!r}")
    try:
        return float(v)
    except ValueError:
        raise MoleculeFileError(lineno, f"bad number {v!r}") from None


def load_molecule(path: str | Path) -> MoleculeSpec:
    p = Path(path)
    return parse_molecule(p.read_text(), default_name=p.stem)


def format_molecule(spec: MoleculeSpec) -> str:
    lines = [f"molecule {spec.name}"]
    lines += [f"atom {a.id}" + (f" h={a.h!r}" if a.h else "") for a in spec.atoms]
    lines += [f"bond {b.i} {b.j}" + (f" k={b.k!r}" if b.k != 1.0 else "") for b in spec.bonds]
    return "\n".join(lines) + "\n"
