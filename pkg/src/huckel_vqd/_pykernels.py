"""Pure-numpy fallback for the compiled kernels in ``_kernels.pyx``.

Same signatures, same gate arithmetic; the sampling path consumes the same
counter-based draws so seeded results match the compiled backend.
"""

import numpy as np

OP_H, OP_RY, OP_CZ, OP_SDG = 0, 1, 2, 3
INV_SQRT2 = 0.7071067811865475244

_M64 = (1 << 64) - 1
_C0 = np.uint64(0x9E3779B97F4A7C15)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)


def _mix(x):
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + _C0
        z = (z ^ (z >> np.uint64(30))) * _C1
        z = (z ^ (z >> np.uint64(27))) * _C2
    return z ^ (z >> np.uint64(31))


def _key(seed, stream):
    with np.errstate(over="ignore"):
        return _mix(_mix(np.uint64(seed & _M64)) + np.uint64(stream & _M64))


def _draw(key, shot, k):
    with np.errstate(over="ignore"):
        h = _mix(_mix(key + np.asarray(shot, dtype=np.uint64)) + np.asarray(k, dtype=np.uint64))
    return (h >> np.uint64(11)).astype(np.float64) * 1.1102230246251565e-16


def uniform(seed, stream, shot, k):
    return float(_draw(_key(seed, stream), shot, k))


def _pair_view(psi, n, q):
    return psi.reshape(1 << (n - 1 - q), 2, 1 << q)


def _h(psi, n, q):
    v = _pair_view(psi, n, q)
    a = v[:, 0, :].copy()
    b = v[:, 1, :].copy()
    v[:, 0, :] = (a + b) * INV_SQRT2
    v[:, 1, :] = (a - b) * INV_SQRT2


def _ry(psi, n, q, c, s):
    v = _pair_view(psi, n, q)
    a = v[:, 0, :].copy()
    b = v[:, 1, :].copy()
    v[:, 0, :] = c * a - s * b
    v[:, 1, :] = s * a + c * b


def _cz_mask(n, q0, q1):
    m = (1 << q0) | (1 << q1)
    idx = np.arange(1 << n)
    return (idx & m) == m


def _forward(n, reps, theta, signs):
    psi = np.zeros(1 << n)
    psi[0] = 1.0
    for q in range(n):
        _h(psi, n, q)
    for layer in range(reps + 1):
        for q in range(n):
            half = 0.5 * theta[layer * n + q]
            _ry(psi, n, q, np.cos(half), np.sin(half))
        if layer < reps:
            psi *= signs
    return psi


def prepare_real(n, reps, theta, signs):
    return _forward(n, reps, np.asarray(theta, dtype=np.float64), np.asarray(signs, dtype=np.float64))


def energy(n, reps, theta, signs, M):
    psi = _forward(n, reps, np.asarray(theta, dtype=np.float64), np.asarray(signs, dtype=np.float64))
    return float(psi @ (M @ psi))


def energy_grad(n, reps, theta, signs, M):
    theta = np.asarray(theta, dtype=np.float64)
    signs = np.asarray(signs, dtype=np.float64)
    phi = _forward(n, reps, theta, signs)
    lam = M @ phi
    e = float(phi @ lam)
    grad = np.zeros(n * (reps + 1))
    for layer in range(reps, -1, -1):
        if layer < reps:
            phi *= signs
            lam *= signs
        for q in range(n - 1, -1, -1):
            idx = layer * n + q
            c = np.cos(0.5 * theta[idx])
            s = np.sin(0.5 * theta[idx])
            _ry(phi, n, q, c, -s)
            pv = _pair_view(phi, n, q)
            lv = _pair_view(lam, n, q)
            a, b = pv[:, 0, :], pv[:, 1, :]
            grad[idx] = np.sum(lv[:, 0, :] * (-s * a - c * b) + lv[:, 1, :] * (c * a - s * b))
            _ry(lam, n, q, c, -s)
    return e, grad


def _parity_signs(dim, z):
    idx = np.arange(dim, dtype=np.int64) & z
    bits = np.zeros(dim, dtype=np.int64)
    while np.any(idx):
        bits ^= idx & 1
        idx >>= 1
    return 1.0 - 2.0 * bits


_PHASE = (1.0, 1j, -1.0, -1j)


def pauli_terms(psi, xmask, zmask, ny):
    psi = np.asarray(psi, dtype=np.complex128)
    dim = psi.shape[0]
    j = np.arange(dim, dtype=np.int64)
    out = np.empty(len(xmask), dtype=np.complex128)
    for t, (x, z, y) in enumerate(zip(xmask, zmask, ny)):
        amp = np.conj(psi[j ^ x]) * psi
        out[t] = _PHASE[int(y) % 4] * np.sum(_parity_signs(dim, int(z)) * amp)
    return out


# ---------------------------------------------------------------- sampling

def _c_gate(psi, n, op, q0, q1, ang):
    if op == OP_H:
        _h(psi, n, q0)
    elif op == OP_RY:
        _ry(psi, n, q0, np.cos(0.5 * ang), np.sin(0.5 * ang))
    elif op == OP_CZ:
        m = _cz_mask(n, q0, q1)
        psi[m] = -psi[m]
    else:
        v = _pair_view(psi, n, q0)
        one = v[:, 1, :]
        v[:, 1, :] = one.imag - 1j * one.real


def _c_pauli(psi, n, q, p):
    v = _pair_view(psi, n, q)
    if p in (2, 3):
        v[:, 1, :] = -v[:, 1, :]
    if p in (1, 2):
        a = v[:, 0, :].copy()
        v[:, 0, :] = v[:, 1, :]
        v[:, 1, :] = a


def _c_error(psi, n, op, q0, q1, u):
    if op == OP_CZ:
        k = min(1 + int(u * 15.0), 15)
        _c_pauli(psi, n, q0, k & 3)
        _c_pauli(psi, n, q1, k >> 2)
    else:
        k = min(1 + int(u * 3.0), 3)
        _c_pauli(psi, n, q0, k)


def _pick(cdf, u):
    return min(int(np.searchsorted(cdf, u, side="right")), cdf.shape[0] - 1)


def _cum(psi):
    # sequential running sum, matching the compiled loop
    return np.cumsum(psi.real * psi.real + psi.imag * psi.imag)


def sample_circuit(n, ops, angles, mask, p1, p2, p_readout, shots, seed, stream, zero_prob):
    ops = np.asarray(ops, dtype=np.int32).reshape(-1, 3)
    angles = np.asarray(angles, dtype=np.float64)
    dim = 1 << n
    nops = ops.shape[0]
    pe = np.where(ops[:, 0] == OP_CZ, p2, p1).astype(np.float64) if nops else np.zeros(0)
    pclean = 1.0
    for p in pe:
        pclean = pclean * (1.0 - p)

    def run(err_at=None):
        psi = np.zeros(dim, dtype=np.complex128)
        psi[0] = 1.0
        for g in range(nops):
            op, q0, q1 = (int(v) for v in ops[g])
            _c_gate(psi, n, op, q0, q1, angles[g])
            if err_at is not None:
                err_at(psi, g, op, q0, q1)
        return psi

    ccdf = _cum(run())
    key = _key(seed, stream)
    shot_ids = np.arange(shots, dtype=np.uint64)
    u0 = _draw(key, shot_ids, 0)
    uout = _draw(key, shot_ids, nops + 2)
    outcomes = np.empty(shots, dtype=np.int64)
    clean = u0 < pclean
    outcomes[clean] = np.minimum(
        np.searchsorted(ccdf, uout[clean] * ccdf[-1], side="right"), dim - 1)
    for s in np.nonzero(~clean)[0]:
        v = u0[s] - pclean
        surv = 1.0
        h = nops - 1
        for g in range(nops):
            pg = surv * pe[g]
            if v < pg:
                h = g
                break
            v = v - pg
            surv = surv * (1.0 - pe[g])

        def err_at(psi, g, op, q0, q1, s=s, h=h):
            if g == h:
                _c_error(psi, n, op, q0, q1, float(_draw(key, s, 1)))
            elif g > h:
                w = float(_draw(key, s, g + 2))
                if w < pe[g]:
                    _c_error(psi, n, op, q0, q1, w / pe[g])

        cdf = _cum(run(err_at))
        outcomes[s] = _pick(cdf, uout[s] * cdf[-1])
    bits = outcomes.copy()
    for q in range(n):
        flip = _draw(key, shot_ids, nops + 3 + q) < p_readout
        bits[flip] ^= 1 << q
    if zero_prob:
        return int(np.count_nonzero(bits == 0))
    par = np.zeros(shots, dtype=np.int64)
    masked = bits & int(mask)
    while np.any(masked):
        par ^= masked & 1
        masked >>= 1
    return int(np.sum(1 - 2 * par))
