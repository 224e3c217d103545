"""Exact classical reference: cyclic Jacobi diagonalisation and eigenspace checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEGENERACY_TOL = 1e-6


@dataclass(frozen=True)
class EigenSystem:
    values: np.ndarray   # ascending
    vectors: np.ndarray  # columns, orthonormal

    def eigenspace(self, value: float, tol: float = DEGENERACY_TOL) -> np.ndarray:
        return self.vectors[:, np.abs(self.values - value) <= tol]


def eig_sym(a, tol: float = 1e-12, max_sweeps: int = 100) -> EigenSystem:
    """Cyclic Jacobi rotations until the off-diagonal Frobenius norm < tol.

    Vectors get a fixed sign: the largest-magnitude component is positive
    (first such index on ties).
    """
    a = np.array(getattr(a, "entries", a), dtype=np.float64)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if n and np.max(np.abs(a - a.T)) > 1e-9:
        raise ValueError("matrix is not symmetric")
    v = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
    else:
        raise RuntimeError(f"Jacobi did not converge in {max_sweeps} sweeps")
    order = np.argsort(np.diag(a), kind="stable")
    values = np.diag(a)[order].copy()
    vectors = v[:, order]
    for k in range(n):
        col = vectors[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            vectors[:, k] = -col
    return EigenSystem(values, vectors)


def subspace_overlap(vec, eig: EigenSystem, value: float, tol: float = DEGENERACY_TOL) -> float:
    """Squared norm of the projection of ``vec`` onto the eigenspace at ``value``."""
    basis = eig.eigenspace(value, tol)
    if basis.shape[1] == 0:
        raise ValueError(f"no eigenvalue within {tol} of {value}")
    proj = basis.T @ np.asarray(vec, dtype=np.float64)
    return float(min(1.0, proj @ proj))


def filtered_values(eig: EigenSystem, dummy_indices, threshold: float = 0.5) -> np.ndarray:
    """Eigenvalues whose eigenvectors carry at most ``threshold`` weight on dummy rows."""
    dummy = sorted(dummy_indices)
    if not dummy:
        return eig.values.copy()
    weight = np.sum(eig.vectors[dummy, :] ** 2, axis=0)
    return eig.values[weight <= threshold]
