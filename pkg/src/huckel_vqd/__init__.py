"""Hückel MO theory on a simulated variational quantum eigensolver."""

from ._backend import NAME as BACKEND
from .molgraph import (HuckelMatrix, MoleculeSpec, build_huckel, generate_c60, load_molecule, lookup,
                       pad_to_qubits, padded_solver_matrix, to_solver_sign)
from .optim import OptimizerConfig, minimize, multistart
from .oracle import eig_sym, subspace_overlap
from .pauli import PauliSum, fit_decompose, frobenius_decompose, reconstruct
from .simulator import AnsatzSpec, NoiseConfig
from .solver import (SolverConfig, SpectrumResult, avg_error, exact_levels, solve_matrix, symvqd_spectrum,
                     vqd_spectrum, vqe_ground)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "HuckelMatrix", "MoleculeSpec", "build_huckel", "generate_c60", "load_molecule", "lookup",
    "pad_to_qubits", "padded_solver_matrix", "to_solver_sign", "OptimizerConfig", "minimize", "multistart",
    "eig_sym", "subspace_overlap", "PauliSum", "fit_decompose", "frobenius_decompose", "reconstruct",
    "AnsatzSpec", "NoiseConfig", "SolverConfig", "SpectrumResult", "avg_error", "exact_levels",
    "solve_matrix", "symvqd_spectrum", "vqd_spectrum", "vqe_ground",
]
