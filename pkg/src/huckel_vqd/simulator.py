"""Statevector engine for the layered RY/CZ ansatz.

Qubit ``q`` is bit ``q`` of the basis index, so a Pauli string's rightmost
letter acts on qubit 0. Noisy estimates come from per-shot trajectories
with stochastic Pauli insertion after every gate and classical readout
flips; all randomness is drawn from a counter-based hash keyed by
(seed, stream, shot), so results do not depend on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .pauli import PauliSum

OP_H, OP_RY, OP_CZ, OP_SDG = 0, 1, 2, 3

DEFAULT_REPS = {1: 2, 2: 4, 3: 6, 6: 9}
ENTANGLERS = ("full", "linear")


def default_reps(n_qubits: int, noisy: bool = False) -> int:
    """Repetition blocks for ``n_qubits``.

    Noisy circuits use the shallowest ansatz with at least 2^n - 1
    parameters: past that point extra blocks add gate errors but no reach.
    """
    reps = DEFAULT_REPS.get(n_qubits, 2 * n_qubits)
    if noisy:
        reps = min(reps, max(1, -(-((1 << n_qubits) - 1) // n_qubits) - 1))
    return reps


@dataclass(frozen=True)
class AnsatzSpec:
    """Hadamard layer, then ``reps`` x (RY layer, CZ layer), then a final RY layer.

    The CZ layer couples every qubit pair (``full``) or neighbours only
    (``linear``). RY/CZ-chain states span a manifold of dimension
    n(n+1)/2 at most, short of the 2^n - 1 needed for arbitrary real
    vectors once n >= 3, so ``full`` is the default.
    """

    n_qubits: int
    reps: int
    entangler: str = "full"

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if self.entangler not in ENTANGLERS:
            raise ValueError(f"unknown entangler {self.entangler!r}; choose from {', '.join(ENTANGLERS)}")

    @classmethod
    def default(cls, n_qubits: int, entangler: str = "full", noisy: bool = False) -> "AnsatzSpec":
        return cls(n_qubits, default_reps(n_qubits, noisy), entangler)

    @property
    def cz_pairs(self) -> list[tuple[int, int]]:
        n = self.n_qubits
        if self.entangler == "linear":
            return [(q, q + 1) for q in range(n - 1)]
        return [(a, b) for a in range(n) for b in range(a + 1, n)]

    @property
    def signs(self) -> np.ndarray:
        """Diagonal of one entangling layer."""
        j = np.arange(self.dim)
        out = np.ones(self.dim)
        for a, b in self.cz_pairs:
            out[((j >> a) & (j >> b) & 1) == 1] *= -1.0
        return out

    @property
    def n_params(self) -> int:
        return self.n_qubits * (self.reps + 1)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def check_theta(self, theta) -> np.ndarray:
        theta = np.ascontiguousarray(theta, dtype=np.float64).ravel()
        if theta.shape[0] != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {theta.shape[0]}")
        return theta


@dataclass(frozen=True)
class NoiseConfig:
    p1: float = 0.001
    p2: float = 0.01
    p_readout: float = 0.02
    shots: int = 8192
    seed: int = 0

    def __post_init__(self):
        for name in ("p1", "p2", "p_readout"):
            p = getattr(self, name)
            if not 0.0 <= p < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {p}")
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def noiseless(self) -> bool:
        return self.p1 == 0.0 and self.p2 == 0.0 and self.p_readout == 0.0


# ------------------------------------------------------------ exact states

def prepare(ansatz: AnsatzSpec, theta) -> np.ndarray:
    """Complex statevector U(theta)|0...0>."""
    theta = ansatz.check_theta(theta)
    return prepare_real(ansatz, theta).astype(np.complex128)


def prepare_real(ansatz: AnsatzSpec, theta) -> np.ndarray:
    theta = ansatz.check_theta(theta)
    return np.asarray(kernels.prepare_real(ansatz.n_qubits, ansatz.reps, theta, ansatz.signs))


def expectation(state, h: PauliSum) -> float:
    """sum_a c_a <psi|P_a|psi>, one term at a time."""
    psi = np.ascontiguousarray(state, dtype=np.complex128)
    if psi.shape[0] != 1 << h.n_qubits:
        raise ValueError(f"state of length {psi.shape[0]} does not match {h.n_qubits} qubits")
    if len(h) == 0:
        return 0.0
    x, z, ny = h.mask_arrays()
    vals = np.asarray(kernels.pauli_terms(psi, x, z, ny))
    coeffs = h.coeffs
    ident = (x == 0) & (z == 0)
    vals[ident] = np.vdot(psi, psi)
    total = complex(np.sum(coeffs * vals))
    if abs(total.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary part {total.imag:.3e}")
    return float(total.real)


def overlap_sq(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"state shapes differ: {a.shape} vs {b.shape}")
    return float(min(1.0, abs(np.vdot(a, b)) ** 2))


# -------------------------------------------------------------- gate lists

def ansatz_ops(ansatz: AnsatzSpec, theta) -> tuple[np.ndarray, np.ndarray]:
    """Gate list as (op, q0, q1) rows plus one angle per row."""
    theta = ansatz.check_theta(theta)
    n = ansatz.n_qubits
    ops, ang = [], []
    for q in range(n):
        ops.append((OP_H, q, q))
        ang.append(0.0)
    for layer in range(ansatz.reps + 1):
        for q in range(n):
            ops.append((OP_RY, q, q))
            ang.append(theta[layer * n + q])
        if layer < ansatz.reps:
            for a, b in ansatz.cz_pairs:
                ops.append((OP_CZ, a, b))
                ang.append(0.0)
    return np.array(ops, dtype=np.int32).reshape(-1, 3), np.array(ang, dtype=np.float64)


def inverse_ops(ops: np.ndarray, angles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Adjoint circuit; H and CZ are self-inverse, RY(t)^-1 = RY(-t)."""
    if np.any(ops[:, 0] == OP_SDG):
        raise ValueError("inverse of S-dagger is not representable")
    return ops[::-1].copy(), -angles[::-1].copy()


def basis_rotation(p: str) -> tuple[np.ndarray, np.ndarray, int]:
    """Gates mapping the eigenbasis of ``p`` onto Z, plus the measured-bit mask.

    X: H. Y: S-dagger then H.
    """
    n = len(p)
    ops, mask = [], 0
    for pos, c in enumerate(p):
        q = n - 1 - pos
        if c == "I":
            continue
        mask |= 1 << q
        if c == "Y":
            ops.append((OP_SDG, q, q))
        if c in "XY":
            ops.append((OP_H, q, q))
    return np.array(ops, dtype=np.int32).reshape(-1, 3), np.zeros(len(ops)), mask


def _run(n, ops, angles, mask, noise: NoiseConfig, stream: int, zero_prob: bool) -> int:
    return int(kernels.sample_circuit(
        n, np.ascontiguousarray(ops, dtype=np.int32), np.ascontiguousarray(angles, dtype=np.float64),
        int(mask), noise.p1, noise.p2, noise.p_readout, int(noise.shots),
        int(noise.seed), int(stream) & (2**64 - 1), 1 if zero_prob else 0))


def readout_factor(p: str, p_readout: float) -> float:
    """Shrink of a Pauli expectation under independent symmetric readout flips."""
    return (1.0 - 2.0 * p_readout) ** (len(p) - p.count("I"))


def sampled_expectation(ansatz: AnsatzSpec, theta, h: PauliSum, noise: NoiseConfig,
                        mitigate_readout: bool = False) -> float:
    """Shot estimate of <H> under the noise model. Term ``t`` uses random stream ``t``.

    With ``mitigate_readout`` each measured parity is divided by its
    :func:`readout_factor`, which removes the readout bias in expectation
    (gate noise is left as is).
    """
    if h.n_qubits != ansatz.n_qubits:
        raise ValueError("Hamiltonian and ansatz qubit counts differ")
    if mitigate_readout and noise.p_readout >= 0.5:
        raise ValueError("readout mitigation needs p_readout < 0.5")
    ops, ang = ansatz_ops(ansatz, theta)
    total = 0.0
    for t, (c, p) in enumerate(h.terms):
        if set(p) == {"I"}:
            total += c
            continue
        rops, rang, mask = basis_rotation(p)
        parity = _run(ansatz.n_qubits, np.concatenate([ops, rops]), np.concatenate([ang, rang]),
                      mask, noise, t, False) / noise.shots
        if mitigate_readout:
            parity /= readout_factor(p, noise.p_readout)
        total += c * parity
    return total


def sampled_overlap_sq(ansatz: AnsatzSpec, theta_k, theta_j, noise: NoiseConfig, stream: int = 0) -> float:
    """Compute-uncompute estimate of |<psi(theta_j)|psi(theta_k)>|^2 from all-zero readouts."""
    ops_k, ang_k = ansatz_ops(ansatz, theta_k)
    ops_j, ang_j = inverse_ops(*ansatz_ops(ansatz, theta_j))
    zeros = _run(ansatz.n_qubits, np.concatenate([ops_k, ops_j]), np.concatenate([ang_k, ang_j]),
                 0, noise, stream, True)
    return zeros / noise.shots


def circuit_depth(ansatz: AnsatzSpec) -> int:
    """Layer count when gates on disjoint qubits share a layer (as soon as possible)."""
    ops, _ = ansatz_ops(ansatz, np.zeros(ansatz.n_params))
    level = [0] * ansatz.n_qubits
    for op, q0, q1 in ops:
        qs = {int(q0), int(q1)}
        d = 1 + max(level[q] for q in qs)
        for q in qs:
            level[q] = d
    return max(level)


def gate_counts(ansatz: AnsatzSpec) -> dict[str, int]:
    n, r = ansatz.n_qubits, ansatz.reps
    return {"h": n, "ry": n * (r + 1), "cz": len(ansatz.cz_pairs) * r}
