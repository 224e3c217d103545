"""VQE, VQD and symmetric VQD spectra, spurious-state handling and error metrics.

Level ``k`` of VQD minimises

    F(theta) = <psi(theta)|H|psi(theta)> + sum_j gamma |<psi(theta)|psi_j>|^2

over the states ``psi_j`` found before it. In the ideal setting all states
are real, so F equals <psi| H + sum_j gamma psi_j psi_j^T |psi> and is
evaluated with one dense matrix and an adjoint gradient sweep. In the noisy
setting both the energy and the overlaps are shot estimates.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import simulator as sim
from ._backend import kernels
from .molgraph import HuckelMatrix
from .optim import NonFiniteObjective, OptimizerConfig, multistart
from .oracle import eig_sym, filtered_values
from .pauli import PauliSum, frobenius_decompose, reconstruct

SPURIOUS_WEIGHT = 0.5
# shot-estimated overlaps of equal states come out below 1, so the
# deflation weight gets extra headroom in the noisy setting
NOISY_GAMMA_FACTOR = 2.0
SPSA_EVALS = 1000  # per restart and level
MODES = ("ideal", "noisy")
SPURIOUS_MODES = ("filter", "penalty")


class SolverError(RuntimeError):
    pass


@dataclass
class Level:
    energy: float
    theta: np.ndarray
    eigvec: np.ndarray
    source: str = "lower_half"
    discovery: int = 0  # position within its deflation sequence
    spurious: bool = False
    dummy_weight: float = 0.0


@dataclass
class SpectrumResult:
    levels: list
    gamma: float
    n_evals: int = 0
    failed_level: Optional[int] = None
    failure: str = ""

    def __post_init__(self):
        self.levels.sort(key=lambda lv: lv.energy)

    @property
    def energies(self) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels])

    @property
    def physical(self) -> list:
        return [lv for lv in self.levels if not lv.spurious]

    @property
    def physical_energies(self) -> np.ndarray:
        return np.array([lv.energy for lv in self.physical])

    @property
    def n_spurious(self) -> int:
        return sum(lv.spurious for lv in self.levels)

    @property
    def ok(self) -> bool:
        return self.failed_level is None

    def max_cross_overlap(self) -> float:
        v = np.array([lv.eigvec for lv in self.levels])
        if len(v) < 2:
            return 0.0
        g = (v @ v.T) ** 2
        np.fill_diagonal(g, 0.0)
        return float(g.max())


@dataclass
class SolverConfig:
    """Everything a variational solve needs besides the Hamiltonian."""

    ansatz: sim.AnsatzSpec
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    mode: str = "ideal"
    noise: sim.NoiseConfig = field(default_factory=sim.NoiseConfig)
    restarts: int = 5
    seed: int = 0
    gamma: Optional[float] = None  # None: spectral-width rule
    mitigate_readout: bool = True  # noisy mode only

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError("gamma must be > 0")

    @classmethod
    def default(cls, n_qubits: int, mode: str = "ideal", seed: int = 0, **kw) -> "SolverConfig":
        """L-BFGS-B on the full-depth ansatz (ideal) or SPSA on the shallow one (noisy)."""
        noisy = mode == "noisy"
        kw.setdefault("ansatz", sim.AnsatzSpec.default(n_qubits, noisy=noisy))
        kw.setdefault("optimizer", default_optimizer(mode, seed))
        if noisy:
            kw.setdefault("noise", sim.NoiseConfig(seed=seed))
        return cls(mode=mode, seed=seed, **kw)

    def resolve_gamma(self, h: PauliSum) -> float:
        if self.gamma is not None:
            return self.gamma
        g = width_gamma(h)
        return NOISY_GAMMA_FACTOR * g if self.mode == "noisy" else g


def default_optimizer(mode: str = "ideal", seed: int = 0) -> OptimizerConfig:
    if mode == "noisy":
        return OptimizerConfig("spsa", max_evals=SPSA_EVALS, seed=seed)
    return OptimizerConfig("quasi_newton", seed=seed)


# ------------------------------------------------------------------ gamma

def compute_gamma(h: PauliSum) -> float:
    """Sum of squared Pauli coefficients of the observable."""
    if len(h) == 0:
        raise ValueError("gamma is undefined for an empty Pauli sum")
    return float(np.sum(h.coeffs ** 2))


def gershgorin_bounds(a) -> tuple[float, float]:
    a = np.asarray(a, dtype=np.float64)
    d = np.diag(a)
    r = np.sum(np.abs(a), axis=1) - np.abs(d)
    return float(np.min(d - r)), float(np.max(d + r))


def width_gamma(h: PauliSum) -> float:
    """Gershgorin spectral width plus one.

    Any gamma above E_max - E_k makes each found state a non-minimum of the
    deflated operator, so this choice is safe for every level.
    """
    if len(h) == 0:
        return 1.0
    lo, hi = gershgorin_bounds(reconstruct(h))
    return hi - lo + 1.0


# ------------------------------------------------------- state inspection

def extract_eigvec(ansatz: sim.AnsatzSpec, theta) -> np.ndarray:
    psi = sim.prepare(ansatz, theta)
    if np.max(np.abs(psi.imag)) > 1e-8:
        raise SolverError("ansatz state has a non-negligible imaginary part")
    v = psi.real.copy()
    return v / np.linalg.norm(v)


def dummy_weight(vec, dummy_indices) -> float:
    idx = sorted(dummy_indices)
    return float(np.sum(np.asarray(vec)[idx] ** 2)) if idx else 0.0


def classify_spurious(levels: Sequence[Level], dummy_indices) -> list[bool]:
    """Flag levels whose eigenvector weight on padded rows exceeds one half."""
    flags = []
    for lv in levels:
        lv.dummy_weight = dummy_weight(lv.eigvec, dummy_indices)
        lv.spurious = lv.dummy_weight > SPURIOUS_WEIGHT
        flags.append(lv.spurious)
    return flags


# ------------------------------------------------------------- objectives

class _IdealObjective:
    def __init__(self, ansatz, matrix):
        self.n, self.reps, self.signs = ansatz.n_qubits, ansatz.reps, ansatz.signs
        self.m = np.ascontiguousarray(matrix, dtype=np.float64)

    def __call__(self, theta):
        theta = np.ascontiguousarray(theta, dtype=np.float64)
        return kernels.energy(self.n, self.reps, theta, self.signs, self.m)

    def value_and_grad(self, theta):
        theta = np.ascontiguousarray(theta, dtype=np.float64)
        return kernels.energy_grad(self.n, self.reps, theta, self.signs, self.m)


def _point_seed(seed: int, tag: int, theta) -> int:
    # noise realisation depends on the evaluated point only, not on call order
    h = hashlib.blake2b(digest_size=8)
    h.update(int(seed).to_bytes(8, "little"))
    h.update(int(tag).to_bytes(8, "little"))
    h.update(np.ascontiguousarray(theta, dtype=np.float64).tobytes())
    return int.from_bytes(h.digest(), "little")


class _NoisyObjective:
    def __init__(self, ansatz, h, noise, found, gamma, tag, mitigate):
        self.ansatz, self.h, self.noise = ansatz, h, noise
        self.found, self.gamma, self.tag, self.mitigate = list(found), gamma, tag, mitigate

    def __call__(self, theta):
        nz = replace(self.noise, seed=_point_seed(self.noise.seed, self.tag, theta))
        f = sim.sampled_expectation(self.ansatz, theta, self.h, nz, self.mitigate)
        for j, tj in enumerate(self.found):
            f += self.gamma * sim.sampled_overlap_sq(self.ansatz, theta, tj, nz, stream=len(self.h) + j)
        return f


# ---------------------------------------------------------------- solvers

def _check(h: PauliSum, cfg: SolverConfig):
    if h.n_qubits != cfg.ansatz.n_qubits:
        raise ValueError(f"Hamiltonian has {h.n_qubits} qubits, ansatz has {cfg.ansatz.n_qubits}")


def _solve_level(h, cfg, found_thetas, found_vecs, gamma, seed, tag):
    """Minimise the deflated cost; returns (theta, reported energy, n_evals)."""
    a = cfg.ansatz
    if cfg.mode == "ideal":
        m = reconstruct(h) if len(h) else np.zeros((a.dim, a.dim))
        for v in found_vecs:
            m = m + gamma * np.outer(v, v)
        obj = _IdealObjective(a, m)
        vg = obj.value_and_grad if cfg.optimizer.gradient_mode == "parameter_shift" else None
        res = multistart(obj, a.n_params, cfg.optimizer, cfg.restarts, seed, vg)
        energy = sim.expectation(sim.prepare(a, res.theta), h) if len(h) else 0.0
    else:
        obj = _NoisyObjective(a, h, cfg.noise, found_thetas, gamma, tag, cfg.mitigate_readout)
        res = multistart(obj, a.n_params, cfg.optimizer, cfg.restarts, seed)
        # fresh shots at the optimum: the best-seen value is biased low
        fresh = replace(cfg.noise, seed=_point_seed(cfg.noise.seed, tag + (1 << 32), res.theta))
        energy = sim.sampled_expectation(a, res.theta, h, fresh, cfg.mitigate_readout) if len(h) else 0.0
    return res.theta, float(energy), res.n_evals


def _level_seed(seed: int, tag: int) -> int:
    return int(np.random.SeedSequence([seed, tag]).generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def _deflation_sweep(h, n_levels, cfg, gamma, source, tag0):
    levels, n_evals = [], 0
    thetas, vecs = [], []
    for k in range(n_levels):
        tag = tag0 + k
        try:
            theta, e, ne = _solve_level(h, cfg, thetas, vecs, gamma, _level_seed(cfg.seed, tag), tag)
        except (NonFiniteObjective, SolverError, FloatingPointError) as exc:
            return levels, n_evals, k, str(exc)
        n_evals += ne
        v = extract_eigvec(cfg.ansatz, theta)
        thetas.append(theta)
        vecs.append(v)
        levels.append(Level(e, theta, v, source, k))
    return levels, n_evals, None, ""


def vqe_ground(h: PauliSum, cfg: SolverConfig) -> tuple[float, np.ndarray]:
    res = vqd_spectrum(h, 1, cfg)
    if not res.ok:
        raise SolverError(res.failure)
    lv = res.levels[0]
    return lv.energy, lv.theta


def vqd_spectrum(h: PauliSum, n_levels: int, cfg: SolverConfig, dummy_indices=(),
                 gamma: Optional[float] = None) -> SpectrumResult:
    """Sequential deflation for the lowest ``n_levels`` eigenvalues of ``h``."""
    _check(h, cfg)
    if not 1 <= n_levels <= cfg.ansatz.dim:
        raise ValueError(f"n_levels must be in [1, {cfg.ansatz.dim}], got {n_levels}")
    g = gamma if gamma is not None else cfg.resolve_gamma(h)
    levels, n_evals, failed, msg = _deflation_sweep(h, n_levels, cfg, g, "lower_half", 0)
    classify_spurious(levels, dummy_indices)
    return SpectrumResult(levels, g, n_evals, failed, msg)


def symvqd_spectrum(h: PauliSum, cfg: SolverConfig, dummy_indices=(),
                    gamma: Optional[float] = None) -> SpectrumResult:
    """Lower half of the spectrum from ``h``, upper half from the ground states of ``-h``."""
    _check(h, cfg)
    n = cfg.ansatz.dim
    g = gamma if gamma is not None else cfg.resolve_gamma(h)
    lower, ev_lo, fail_lo, msg_lo = _deflation_sweep(h, math.ceil(n / 2), cfg, g, "lower_half", 0)
    upper, ev_hi, fail_hi, msg_hi = _deflation_sweep(-h, n // 2, cfg, g, "upper_half", 1 << 16)
    for lv in upper:
        lv.energy = -lv.energy
    levels = lower + upper
    classify_spurious(levels, dummy_indices)
    failed, msg = None, ""
    if fail_lo is not None:
        failed, msg = fail_lo, msg_lo
    elif fail_hi is not None:
        failed, msg = n - 1 - fail_hi, msg_hi
    return SpectrumResult(levels, g, ev_lo + ev_hi, failed, msg)


# ------------------------------------------------- molecule-level entry

def penalized_matrix(hm: HuckelMatrix) -> np.ndarray:
    """Solver matrix with dummy diagonal raised above every physical level."""
    a = hm.entries.copy()
    if hm.dummy_indices:
        c = gershgorin_bounds(a)[1] + 1.0
        for d in hm.dummy_indices:
            a[d, d] += c
    return a


def solve_matrix(hm: HuckelMatrix, cfg: SolverConfig, algorithm: str = "vqd",
                 spurious: str = "filter", n_levels: Optional[int] = None,
                 decompose: Callable = frobenius_decompose) -> SpectrumResult:
    """Run ``algorithm`` (vqe, vqd, symvqd) on a padded solver-mode matrix.

    ``spurious="penalty"`` shifts the dummy block to the top of the
    spectrum and solves only for the ``M`` physical levels.
    """
    if hm.sign_mode != "solver":
        raise ValueError("solve_matrix expects a solver-mode matrix")
    if spurious not in SPURIOUS_MODES:
        raise ValueError(f"unknown spurious mode {spurious!r}")
    if spurious == "penalty":
        if algorithm == "symvqd":
            raise ValueError("penalty mode moves dummy states to the top; use filter mode with symvqd")
        h = decompose(penalized_matrix(hm))
        default_levels = hm.n_real
    else:
        h = decompose(hm)
        default_levels = hm.dim
    if algorithm == "vqe":
        return vqd_spectrum(h, 1, cfg, hm.dummy_indices)
    if algorithm == "vqd":
        return vqd_spectrum(h, n_levels or default_levels, cfg, hm.dummy_indices)
    if algorithm == "symvqd":
        return symvqd_spectrum(h, cfg, hm.dummy_indices)
    raise ValueError(f"unknown algorithm {algorithm!r}")


# ---------------------------------------------------------------- metrics

@dataclass(frozen=True)
class ErrorMetrics:
    avg_error: float           # signed-relative average, as in the optimizer study
    per_level: np.ndarray      # |E_vqd - E_exact|
    mean_abs: float
    relative: np.ndarray       # |E_vqd - E_exact| / |E_exact|, absolute where E_exact ~ 0


def avg_error(result, exact) -> ErrorMetrics:
    """Compare physical levels (ascending) with exact ones of the same count.

    ``avg_error = |sum_k (|E_k^exact| - |E_k|) / |E_k^exact|| / n`` over levels
    with ``|E_k^exact| >= 1e-9``.
    """
    got = np.sort(result.physical_energies if isinstance(result, SpectrumResult)
                  else np.asarray(result, dtype=np.float64))
    exact = np.sort(np.asarray(exact, dtype=np.float64))
    if got.shape != exact.shape:
        raise ValueError(f"level count mismatch: {got.shape[0]} vs {exact.shape[0]}")
    diff = np.abs(got - exact)
    keep = np.abs(exact) >= 1e-9
    avg = 0.0
    if np.any(keep):
        avg = abs(np.sum((np.abs(exact[keep]) - np.abs(got[keep])) / np.abs(exact[keep]))) / int(keep.sum())
    rel = np.where(keep, diff / np.where(keep, np.abs(exact), 1.0), diff)
    return ErrorMetrics(float(avg), diff, float(diff.mean()) if diff.size else 0.0, rel)


def exact_levels(hm: HuckelMatrix):
    """Oracle eigenvalues of a solver matrix, spurious ones filtered out."""
    return filtered_values(eig_sym(hm.entries), hm.dummy_indices, SPURIOUS_WEIGHT)

