import numpy as np
import pytest

from huckel_vqd import molgraph as G
from huckel_vqd.molgraph import Atom, Bond, MoleculeError, MoleculeFileError, MoleculeSpec


def test_corpus_builds_and_is_symmetric():
    for spec in G.builtin_corpus():
        hm = G.build_huckel(spec)
        assert np.array_equal(hm.entries, hm.entries.T)
        assert hm.n_real == spec.n_atoms


@pytest.mark.parametrize("name,atoms,qubits", [
    ("C2H4", 2, 1), ("C3H4", 3, 2), ("C4H4", 4, 2), ("C4H6", 4, 2), ("C3H4O", 4, 2),
    ("C4H4O", 5, 3), ("C6H6", 6, 3), ("C8H10", 8, 3), ("C16H10", 16, 4), ("C60", 60, 6),
])
def test_qubit_counts(name, atoms, qubits):
    hm = G.padded_solver_matrix(G.lookup(name))
    assert hm.n_real == atoms
    assert hm.n_qubits == qubits
    assert hm.dummy_indices == frozenset(range(atoms, 1 << qubits))


def test_padding_rows_are_zero():
    hm = G.pad_to_qubits(G.build_huckel(G.lookup("C3H4O")))
    assert hm.dim == 4
    hm = G.pad_to_qubits(G.build_huckel(G.lookup("C4H4O")))
    assert hm.dim == 8
    assert not hm.entries[5:].any() and not hm.entries[:, 5:].any()


def test_single_atom_pads_to_two():
    spec = MoleculeSpec("X", (Atom(0, 0.5),))
    hm = G.pad_to_qubits(G.build_huckel(spec))
    assert hm.dim == 2 and hm.n_qubits == 1
    assert hm.entries[0, 0] == 0.5


def test_solver_sign_negates_once():
    hm = G.build_huckel(G.lookup("C3H4O"))
    s = G.to_solver_sign(hm)
    assert np.array_equal(s.entries, -hm.entries)
    assert s.sign_mode == G.SOLVER
    with pytest.raises(ValueError):
        G.to_solver_sign(s)


def test_heteroatom_parameters_land_in_matrix():
    hm = G.build_huckel(G.lookup("C3H4O"))
    assert hm.entries.diagonal().tolist() == [0.0, 0.0, 0.0, 1.0]
    assert [hm.entries[i, i + 1] for i in range(3)] == [1.1, 0.9, 1.1]


def test_c60_graph():
    a = G.build_huckel(G.generate_c60()).entries
    assert a.shape == (60, 60)
    assert np.all(a.sum(axis=1) == 3)
    assert a.sum() / 2 == 90
    # truncated icosahedron spectrum: top eigenvalue 3, 15 distinct levels
    w = np.linalg.eigvalsh(a)
    assert w[-1] == pytest.approx(3.0)
    assert len(np.unique(np.round(w, 8))) == 15


@pytest.mark.parametrize("bad", [
    MoleculeSpec("empty", ()),
    MoleculeSpec("gap", (Atom(0), Atom(2))),
    MoleculeSpec("selfbond", (Atom(0), Atom(1)), (Bond(0, 0),)),
    MoleculeSpec("dup", (Atom(0), Atom(1)), (Bond(0, 1), Bond(1, 0))),
    MoleculeSpec("unknown", (Atom(0), Atom(1)), (Bond(0, 5),)),
    MoleculeSpec("negk", (Atom(0), Atom(1)), (Bond(0, 1, -1.0),)),
])
def test_invalid_specs(bad):
    with pytest.raises(MoleculeError):
        G.build_huckel(bad)


def test_file_roundtrip(tmp_path):
    for spec in G.builtin_corpus():
        p = tmp_path / f"{spec.name}.mol"
        p.write_text(G.format_molecule(spec))
        back = G.load_molecule(p)
        assert np.array_equal(G.build_huckel(back).entries, G.build_huckel(spec).entries)
        assert back.name == spec.name


@pytest.mark.parametrize("text,line", [
    ("atom 0\natom 0\n", 2),
    ("atom 0\natom 1\nbond 0 1\nbond 1 0\n", 4),
    ("atom 0\nbond 0 0\n", 2),
    ("atom 0\natom 1\nbond 0 1 k=-2\n", 3),
    ("atom 0\natom 1\nbond 0 1 q=2\n", 3),
    ("atom 0\nwibble\n", 2),
    ("atom 0 h=abc\n", 1),
    ("atom 0\nbond 0 3\n", 2),
])
def test_file_errors_carry_line(text, line):
    with pytest.raises(MoleculeFileError) as info:
        G.parse_molecule(text)
    assert info.value.lineno == line


def test_unknown_builtin_lists_corpus():
    with pytest.raises(MoleculeError, match="C6H6"):
        G.lookup("C7H7")
