"""Pauli strings, Pauli sums, and the two matrix-to-qubit transformations.

A Pauli string is written as its letters, e.g. ``"ZIX"``; the leftmost
letter acts on the highest-order bit of the basis index. Strings are
handled through their (x-mask, z-mask) form: ``P|j> = i**ny (-1)**|j & z| |j ^ x>``
where ``ny`` counts the Y letters.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .molgraph import HuckelMatrix

DROP_THRESHOLD = 1e-10
LETTERS = "IXYZ"

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class PauliError(ValueError):
    pass


class FitConvergenceError(RuntimeError):
    def __init__(self, epsilon: float, iterations: int):
        super().__init__(f"fit did not converge after {iterations} iterations (epsilon={epsilon:.3e})")
        self.epsilon = epsilon
        self.iterations = iterations


def check_string(p: str) -> str:
    if not p or any(c not in LETTERS for c in p):
        raise PauliError(f"invalid Pauli string {p!r}")
    return p


def masks(p: str) -> tuple[int, int, int]:
    """(x-mask, z-mask, number of Y letters) of a Pauli string."""
    x = z = ny = 0
    n = len(p)
    for pos, c in enumerate(p):
        bit = 1 << (n - 1 - pos)
        if c in "XY":
            x |= bit
        if c in "ZY":
            z |= bit
        ny += c == "Y"
    return x, z, ny


def string_from_masks(x: int, z: int, n: int) -> str:
    return "".join(_letter((x >> b) & 1, (z >> b) & 1) for b in range(n - 1, -1, -1))


def _letter(xb, zb):
    return ("I", "Z", "X", "Y")[(xb << 1) | zb]


def string_matrix(p: str) -> np.ndarray:
    """Dense 2^N x 2^N matrix of a Pauli string (Kronecker product)."""
    out = np.ones((1, 1), dtype=complex)
    for c in check_string(p):
        out = np.kron(out, _SINGLE[c])
    return out


@dataclass(frozen=True)
class PauliSum:
    """Real-weighted sum of Pauli strings in lexicographic (I<X<Y<Z) order."""

    terms: tuple[tuple[float, str], ...]
    n_qubits: int

    def __post_init__(self):
        seen = set()
        for c, p in self.terms:
            check_string(p)
            if len(p) != self.n_qubits:
                raise PauliError(f"string {p!r} does not have {self.n_qubits} letters")
            if p in seen:
                raise PauliError(f"duplicate string {p!r}")
            seen.add(p)
        object.__setattr__(self, "terms", tuple(sorted(((float(c), p) for c, p in self.terms), key=lambda t: t[1])))

    @classmethod
    def from_dict(cls, coeffs: dict[str, float], n_qubits: int | None = None, threshold: float = DROP_THRESHOLD):
        if n_qubits is None:
            if not coeffs:
                raise PauliError("cannot infer qubit count of an empty sum")
            n_qubits = len(next(iter(coeffs)))
        return cls(tuple((c, p) for p, c in coeffs.items() if abs(c) > threshold), n_qubits)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __neg__(self):
        return PauliSum(tuple((-c, p) for c, p in self.terms), self.n_qubits)

    def as_dict(self) -> dict[str, float]:
        return {p: c for c, p in self.terms}

    @property
    def strings(self) -> list[str]:
        return [p for _, p in self.terms]

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms], dtype=np.float64)

    def mask_arrays(self):
        m = np.array([masks(p) for _, p in self.terms], dtype=np.int64).reshape(-1, 3)
        return (np.ascontiguousarray(m[:, 0]), np.ascontiguousarray(m[:, 1]),
                np.ascontiguousarray(m[:, 2]))

    def to_text(self) -> str:
        return "".join(f"{format_coeff(c)} {p}\n" for c, p in self.terms)

    @classmethod
    def from_text(cls, text: str, n_qubits: int | None = None) -> "PauliSum":
        terms = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise PauliError(f"line {lineno}: expected '<coeff> <string>'")
            try:
                c = float(parts[0])
            except ValueError:
                raise PauliError(f"line {lineno}: bad coefficient {parts[0]!r}") from None
            terms.append((c, check_string(parts[1])))
        if n_qubits is None:
            if not terms:
                raise PauliError("empty Pauli sum needs an explicit qubit count")
            n_qubits = len(terms[0][1])
        return cls(tuple(terms), n_qubits)


def format_coeff(c: float) -> str:
    s = f"{c:.10g}"
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _matrix_of(h) -> np.ndarray:
    a = h.entries if isinstance(h, HuckelMatrix) else np.asarray(h, dtype=np.float64)
    dim = a.shape[0]
    if a.ndim != 2 or a.shape[1] != dim or dim < 2 or dim & (dim - 1):
        raise PauliError(f"matrix shape {a.shape} is not 2^N x 2^N")
    if np.max(np.abs(a - a.T)) > 1e-9:
        raise PauliError("matrix is not symmetric")
    return a


def _parity_table(dim: int) -> np.ndarray:
    j = np.arange(dim)
    pc = np.zeros((dim, dim), dtype=np.int64)
    both = j[:, None] & j[None, :]
    while np.any(both):
        pc ^= both & 1
        both = both >> 1
    return 1.0 - 2.0 * pc


def frobenius_decompose(h, threshold: float = DROP_THRESHOLD) -> PauliSum:
    """Project a real symmetric 2^N x 2^N matrix onto the Pauli basis.

    Each coefficient is ``tr(P H) / 2^N``. Only one entry per row of a Pauli
    matrix is nonzero, so for a fixed x-mask the traces for all z-masks are a
    single signed-sum transform of the gathered entries ``H[j, j ^ x]``.
    """
    a = _matrix_of(h)
    dim = a.shape[0]
    n = dim.bit_length() - 1
    signs = _parity_table(dim)  # signs[z, j] = (-1)^{|j & z|}
    j = np.arange(dim)
    coeffs = {}
    for x in range(dim):
        traces = signs @ a[j, j ^ x]
        for z in range(dim):
            t = traces[z]
            ny = bin(x & z).count("1")
            if ny % 2:
                continue  # i * real trace: vanishes for symmetric input
            c = t / dim if ny % 4 == 0 else -t / dim
            if abs(c) > threshold:
                coeffs[string_from_masks(x, z, n)] = c
    return PauliSum.from_dict(coeffs, n, threshold)


def reconstruct(s: PauliSum) -> np.ndarray:
    """Dense real matrix of a Pauli sum."""
    dim = 1 << s.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    j = np.arange(dim)
    signs = _parity_table(dim)
    for c, p in s.terms:
        x, z, ny = masks(p)
        out[j ^ x, j] += c * (1j ** ny) * signs[z]
    if dim and np.max(np.abs(out.imag)) > 1e-12:
        raise PauliError("Pauli sum is not a real matrix")
    return out.real.copy()


@dataclass(frozen=True)
class FitConfig:
    learning_rate: float = 0.1
    max_iter: int = 1_000_000
    tol: float = 1e-12
    rel_tol: float = 1e-14


def all_strings(n: int) -> list[str]:
    return ["".join(t) for t in itertools.product(LETTERS, repeat=n)]


def fit_decompose(h, config: FitConfig = FitConfig(), threshold: float = DROP_THRESHOLD) -> PauliSum:
    """Fit all 4^N Pauli coefficients by gradient descent on the mean squared
    element error, starting from zero.
    """
    a = _matrix_of(h)
    dim = a.shape[0]
    n = dim.bit_length() - 1
    strings = all_strings(n)
    basis = np.stack([string_matrix(p) for p in strings])
    k = a.size
    coef = np.zeros(len(strings))
    eps_prev = None
    for it in range(1, config.max_iter + 1):
        pred = np.tensordot(coef, basis, axes=1)
        resid = pred - a
        eps = float(np.sum(np.abs(resid) ** 2) / k)
        if eps < config.tol:
            break
        if eps_prev is not None and eps_prev - eps < config.rel_tol * eps_prev:
            break
        eps_prev = eps
        grad = (2.0 / k) * np.real(np.einsum("aij,ij->a", basis.conj(), resid))
        coef -= config.learning_rate * grad
    else:
        raise FitConvergenceError(eps, config.max_iter)
    return PauliSum.from_dict(dict(zip(strings, coef)), n, threshold)
