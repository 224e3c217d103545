import numpy as np
import pytest

from huckel_vqd import _pykernels, molgraph as G, pauli as P
from huckel_vqd import simulator as sim
from huckel_vqd._backend import compiled_kernels

needs_compiled = pytest.mark.skipif(compiled_kernels is None, reason="compiled kernels not built")


def _dense_ansatz(a: sim.AnsatzSpec, theta):
    """Reference state from explicit 2^n x 2^n gate matrices."""
    n = a.n_qubits
    hgate = np.array([[1, 1], [1, -1]]) / np.sqrt(2)

    def on(q, g):
        out = np.eye(1)
        for k in reversed(range(n)):
            out = np.kron(out, g if k == q else np.eye(2))
        return out

    def ry(t):
        c, s = np.cos(t / 2), np.sin(t / 2)
        return np.array([[c, -s], [s, c]])

    psi = np.zeros(a.dim)
    psi[0] = 1
    for q in range(n):
        psi = on(q, hgate) @ psi
    j = np.arange(a.dim)
    for layer in range(a.reps + 1):
        for q in range(n):
            psi = on(q, ry(theta[layer * n + q])) @ psi
        if layer < a.reps:
            for x, y in a.cz_pairs:
                psi = np.where((j >> x) & (j >> y) & 1, -psi, psi)
    return psi


@pytest.mark.parametrize("n,reps,ent", [(1, 2, "full"), (2, 4, "full"), (3, 2, "linear"), (3, 3, "full")])
def test_statevector_matches_dense(n, reps, ent, rng):
    a = sim.AnsatzSpec(n, reps, ent)
    th = rng.uniform(-np.pi, np.pi, a.n_params)
    assert np.allclose(sim.prepare_real(a, th), _dense_ansatz(a, th), atol=1e-12)
    assert np.linalg.norm(sim.prepare(a, th)) == pytest.approx(1.0)


def test_zero_angles_give_uniform_state():
    a = sim.AnsatzSpec(2, 1)
    assert np.allclose(np.abs(sim.prepare_real(a, np.zeros(a.n_params))), 0.5)


def test_expectation_matches_dense(rng):
    hm = G.padded_solver_matrix(G.lookup("C4H4O"))
    h = P.frobenius_decompose(hm)
    a = sim.AnsatzSpec(3, 2)
    psi = sim.prepare(a, rng.uniform(-3, 3, a.n_params))
    assert sim.expectation(psi, h) == pytest.approx(np.real(psi.conj() @ hm.entries @ psi), abs=1e-12)
    with pytest.raises(ValueError):
        sim.expectation(psi[:4], h)


def test_cz_pairs_and_counts():
    assert sim.AnsatzSpec(3, 1, "linear").cz_pairs == [(0, 1), (1, 2)]
    assert sim.AnsatzSpec(3, 1).cz_pairs == [(0, 1), (0, 2), (1, 2)]
    assert sim.gate_counts(sim.AnsatzSpec(3, 2)) == {"h": 3, "ry": 9, "cz": 6}
    assert sim.circuit_depth(sim.AnsatzSpec(1, 2)) == 4
    assert sim.circuit_depth(sim.AnsatzSpec(2, 1)) == 4


def test_validation():
    with pytest.raises(ValueError):
        sim.AnsatzSpec(0, 1)
    with pytest.raises(ValueError):
        sim.AnsatzSpec(2, 0)
    with pytest.raises(ValueError):
        sim.AnsatzSpec(2, 1, "ring")
    with pytest.raises(ValueError):
        sim.AnsatzSpec(2, 1).check_theta(np.zeros(3))
    with pytest.raises(ValueError):
        sim.NoiseConfig(p1=1.0)
    with pytest.raises(ValueError):
        sim.NoiseConfig(shots=0)


def test_default_reps():
    assert [sim.default_reps(n) for n in (1, 2, 3, 6)] == [2, 4, 6, 9]
    assert [sim.default_reps(n, noisy=True) for n in (1, 2, 3, 6)] == [1, 1, 2, 9]
    for n in (1, 2, 3):
        a = sim.AnsatzSpec.default(n, noisy=True)
        assert a.n_params >= a.dim - 1


def test_noiseless_sampling_is_unbiased(rng):
    h = P.frobenius_decompose(G.padded_solver_matrix(G.lookup("C3H4O")))
    a = sim.AnsatzSpec(2, 2)
    th = rng.uniform(-3, 3, a.n_params)
    exact = sim.expectation(sim.prepare(a, th), h)
    nz = sim.NoiseConfig(0.0, 0.0, 0.0, shots=200_000, seed=3)
    # each term has variance <= c^2 / shots
    sd = np.sqrt(np.sum(h.coeffs ** 2) / nz.shots)
    assert abs(sim.sampled_expectation(a, th, h, nz) - exact) < 5 * sd


def test_sampled_overlap_noiseless(rng):
    a = sim.AnsatzSpec(2, 1)
    t1, t2 = rng.uniform(-3, 3, (2, a.n_params))
    exact = sim.overlap_sq(sim.prepare(a, t1), sim.prepare(a, t2))
    nz = sim.NoiseConfig(0.0, 0.0, 0.0, shots=100_000, seed=1)
    assert sim.sampled_overlap_sq(a, t1, t2, nz) == pytest.approx(exact, abs=0.01)
    assert sim.sampled_overlap_sq(a, t1, t1, nz) == 1.0


def test_noise_is_reproducible_and_seeded(rng):
    h = P.frobenius_decompose(G.padded_solver_matrix(G.lookup("C4H6")))
    a = sim.AnsatzSpec(2, 1)
    th = rng.uniform(-3, 3, a.n_params)
    nz = sim.NoiseConfig(seed=11)
    e1 = sim.sampled_expectation(a, th, h, nz)
    assert sim.sampled_expectation(a, th, h, nz) == e1
    assert sim.sampled_expectation(a, th, h, sim.NoiseConfig(seed=12)) != e1


def test_readout_noise_shrinks_parity():
    # |00> measured in Z: parity expectation (1 - 2p) per flipped bit
    h = P.PauliSum(((1.0, "ZZ"),), 2)
    a = sim.AnsatzSpec(2, 1)
    th = np.array([-np.pi / 2] * 2 + [0.0, 0.0])  # RY(-pi/2) H |0> = |0>
    assert np.allclose(sim.prepare_real(a, th), [1, 0, 0, 0], atol=1e-12)
    nz = sim.NoiseConfig(0.0, 0.0, 0.1, shots=400_000, seed=5)
    assert sim.sampled_expectation(a, th, h, nz) == pytest.approx(0.8 ** 2, abs=0.01)


def test_readout_mitigation_removes_bias():
    h = P.PauliSum(((1.0, "ZZ"), (0.5, "IZ")), 2)
    a = sim.AnsatzSpec(2, 1)
    th = np.array([-np.pi / 2] * 2 + [0.0, 0.0])
    nz = sim.NoiseConfig(0.0, 0.0, 0.1, shots=400_000, seed=5)
    assert sim.readout_factor("ZZ", 0.1) == pytest.approx(0.64)
    assert sim.readout_factor("IZ", 0.1) == pytest.approx(0.8)
    assert sim.sampled_expectation(a, th, h, nz, mitigate_readout=True) == pytest.approx(1.5, abs=0.01)
    with pytest.raises(ValueError):
        sim.sampled_expectation(a, th, h, sim.NoiseConfig(p_readout=0.5), mitigate_readout=True)


def test_depolarising_noise_shrinks_expectation(rng):
    h = P.frobenius_decompose(G.padded_solver_matrix(G.lookup("C4H6")))
    a = sim.AnsatzSpec(2, 4)
    th = rng.uniform(-3, 3, a.n_params)
    exact = sim.expectation(sim.prepare(a, th), h)
    noisy = sim.sampled_expectation(a, th, h, sim.NoiseConfig(0.05, 0.2, 0.0, shots=100_000))
    assert abs(noisy) < abs(exact)


def test_basis_rotation():
    ops, ang, mask = sim.basis_rotation("YIX")
    assert mask == 0b101
    assert ops[:, 0].tolist() == [sim.OP_SDG, sim.OP_H, sim.OP_H]
    assert ops[:, 1].tolist() == [2, 2, 0]


def test_inverse_ops_undo_ansatz(rng):
    a = sim.AnsatzSpec(3, 2)
    ops, ang = sim.ansatz_ops(a, rng.uniform(-3, 3, a.n_params))
    iops, iang = sim.inverse_ops(ops, ang)
    assert np.array_equal(iops, ops[::-1]) and np.allclose(iang, -ang[::-1])


# ---------------------------------------------------------- backend twins

@needs_compiled
@pytest.mark.parametrize("n,reps", [(1, 2), (2, 4), (3, 6)])
def test_backends_agree_on_energy_and_gradient(n, reps, rng):
    a = sim.AnsatzSpec(n, reps)
    m = rng.normal(size=(a.dim, a.dim))
    m = (m + m.T) / 2
    th = rng.uniform(-3, 3, a.n_params)
    for mod in (compiled_kernels, _pykernels):
        assert np.allclose(mod.prepare_real(n, reps, th, a.signs), _dense_ansatz(a, th), atol=1e-12)
    ec = compiled_kernels.energy(n, reps, th, a.signs, m)
    ep = _pykernels.energy(n, reps, th, a.signs, m)
    assert ec == pytest.approx(ep, abs=1e-12)
    (vc, gc), (vp, gp) = (compiled_kernels.energy_grad(n, reps, th, a.signs, m),
                          _pykernels.energy_grad(n, reps, th, a.signs, m))
    assert vc == pytest.approx(vp, abs=1e-12)
    assert np.allclose(gc, gp, atol=1e-11)


@needs_compiled
def test_backends_sample_identically(rng):
    a = sim.AnsatzSpec(2, 1)
    ops, ang = sim.ansatz_ops(a, rng.uniform(-3, 3, a.n_params))
    rops, rang, mask = sim.basis_rotation("YX")
    ops, ang = np.concatenate([ops, rops]), np.concatenate([ang, rang])
    for zero in (0, 1):
        args = (2, ops, ang, mask, 0.01, 0.05, 0.02, 4096, 7, 3, zero)
        assert compiled_kernels.sample_circuit(*args) == _pykernels.sample_circuit(*args)


@needs_compiled
def test_backends_pauli_terms(rng):
    h = P.frobenius_decompose(G.padded_solver_matrix(G.lookup("C6H6")))
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    x, z, ny = h.mask_arrays()
    assert np.allclose(compiled_kernels.pauli_terms(psi, x, z, ny), _pykernels.pauli_terms(psi, x, z, ny))


def test_env_forces_python_backend():
    import os
    import subprocess
    import sys
    env = dict(os.environ, HUCKEL_VQD_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "import huckel_vqd; print(huckel_vqd.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout
    assert out.strip() == "python"
