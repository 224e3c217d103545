import numpy as np
import pytest
from hypothesis import given, strategies as st

from huckel_vqd import molgraph as G
from huckel_vqd import pauli as P


def test_masks_and_letter_order():
    # leftmost letter acts on the highest qubit
    assert P.masks("XI") == (2, 0, 0)
    assert P.masks("IZ") == (0, 1, 0)
    assert P.masks("YY") == (3, 3, 2)
    assert P.string_from_masks(2, 1, 2) == "XZ"
    assert np.array_equal(P.string_matrix("XI"), np.kron([[0, 1], [1, 0]], np.eye(2)))


def test_string_matrices_are_orthogonal():
    strings = P.all_strings(2)
    mats = [P.string_matrix(p) for p in strings]
    gram = np.array([[np.trace(a.conj().T @ b).real for b in mats] for a in mats])
    assert np.allclose(gram, 4 * np.eye(16))


def test_terms_sorted_and_validated():
    s = P.PauliSum(((1.0, "ZX"), (2.0, "IX"), (-1.0, "XY")), 2)
    assert s.strings == ["IX", "XY", "ZX"]
    with pytest.raises(P.PauliError):
        P.PauliSum(((1.0, "IX"), (1.0, "IX")), 2)
    with pytest.raises(P.PauliError):
        P.PauliSum(((1.0, "IQ"),), 2)
    with pytest.raises(P.PauliError):
        P.PauliSum(((1.0, "IXI"),), 2)


def test_text_roundtrip():
    h = P.frobenius_decompose(G.pad_to_qubits(G.build_huckel(G.lookup("C4H4O"))))
    back = P.PauliSum.from_text(h.to_text())
    assert back.strings == h.strings
    assert np.allclose(back.coeffs, h.coeffs, atol=1e-12)
    with pytest.raises(P.PauliError):
        P.PauliSum.from_text("0.5 IX extra\n")


def test_negation():
    h = P.frobenius_decompose(G.pad_to_qubits(G.build_huckel(G.lookup("C3H4O"))))
    assert np.allclose(P.reconstruct(-h), -P.reconstruct(h))


def test_non_power_of_two_rejected():
    with pytest.raises(ValueError):
        P.frobenius_decompose(np.zeros((3, 3)))


def test_threshold_drops_tiny_terms():
    a = np.diag([1e-12, 0.0])
    assert len(P.frobenius_decompose(a)) == 0
    assert len(P.frobenius_decompose(a, threshold=0.0)) > 0


@given(st.integers(0, 2**32 - 1))
def test_roundtrip_random_8x8(seed):
    a = np.random.default_rng(seed).normal(size=(8, 8))
    a = (a + a.T) / 2
    assert np.max(np.abs(P.reconstruct(P.frobenius_decompose(a)) - a)) <= 1e-10


def test_fit_agrees_with_frobenius_on_small_case():
    a = G.pad_to_qubits(G.build_huckel(G.lookup("C4H6")))
    fit = P.fit_decompose(a)
    ref = P.frobenius_decompose(a)
    assert set(ref.strings) <= set(fit.as_dict())
    for p, c in fit.as_dict().items():
        assert abs(c - ref.as_dict().get(p, 0.0)) <= 1e-3


def test_fit_reports_nonconvergence():
    a = G.pad_to_qubits(G.build_huckel(G.lookup("C4H6")))
    with pytest.raises(P.FitConvergenceError):
        P.fit_decompose(a, P.FitConfig(learning_rate=1e-6, max_iter=5, rel_tol=0.0))
