# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled statevector kernels.

Every function here has a numpy twin in ``_pykernels`` with the same
signature and the same floating-point operation order, so the two backends
agree to roundoff (and bit-for-bit on the sampling paths).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free

cnp.import_array()

# gate opcodes shared with the Python side
DEF OP_H = 0
DEF OP_RY = 1
DEF OP_CZ = 2
DEF OP_SDG = 3

cdef double INV_SQRT2 = 0.7071067811865475244


# ---------------------------------------------------------------- hashing

cdef inline uint64_t _mix(uint64_t x) noexcept nogil:
    cdef uint64_t z = x + <uint64_t>0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline uint64_t _key(uint64_t seed, uint64_t stream) noexcept nogil:
    return _mix(_mix(seed) + stream)


cdef inline double _draw(uint64_t key, uint64_t shot, uint64_t k) noexcept nogil:
    cdef uint64_t h = _mix(_mix(key + shot) + k)
    return <double>(h >> 11) * 1.1102230246251565e-16


def uniform(uint64_t seed, uint64_t stream, uint64_t shot, uint64_t k):
    """Counter-based uniform draw in [0, 1) keyed by (seed, stream, shot, k)."""
    return _draw(_key(seed, stream), shot, k)


# ------------------------------------------------------- real ansatz path

cdef inline void _h(double* psi, Py_ssize_t dim, int q) noexcept nogil:
    cdef Py_ssize_t m = (<Py_ssize_t>1) << q
    cdef Py_ssize_t i
    cdef double a, b
    for i in range(dim):
        if i & m:
            continue
        a = psi[i]
        b = psi[i | m]
        psi[i] = (a + b) * INV_SQRT2
        psi[i | m] = (a - b) * INV_SQRT2


cdef inline void _ry(double* psi, Py_ssize_t dim, int q, double c, double s) noexcept nogil:
    cdef Py_ssize_t m = (<Py_ssize_t>1) << q
    cdef Py_ssize_t i
    cdef double a, b
    for i in range(dim):
        if i & m:
            continue
        a = psi[i]
        b = psi[i | m]
        psi[i] = c * a - s * b
        psi[i | m] = s * a + c * b


cdef inline void _entangle(double* psi, const double* signs, Py_ssize_t dim) noexcept nogil:
    # a layer of commuting CZ gates is a diagonal of +-1
    cdef Py_ssize_t i
    for i in range(dim):
        psi[i] = signs[i] * psi[i]


cdef void _forward(double* psi, int n, int reps, const double* theta, const double* signs) noexcept nogil:
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef Py_ssize_t i
    cdef int layer, q
    cdef double half
    for i in range(dim):
        psi[i] = 0.0
    psi[0] = 1.0
    for q in range(n):
        _h(psi, dim, q)
    for layer in range(reps + 1):
        for q in range(n):
            half = 0.5 * theta[layer * n + q]
            _ry(psi, dim, q, cos(half), sin(half))
        if layer < reps:
            _entangle(psi, signs, dim)


def prepare_real(int n, int reps, const double[::1] theta, const double[::1] signs):
    """Real amplitudes of the H / (RY, CZ layer) x reps / RY ansatz.

    ``signs`` is the diagonal of one entangling layer.
    """
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    out = np.empty(dim, dtype=np.float64)
    cdef double[::1] psi = out
    with nogil:
        _forward(&psi[0], n, reps, &theta[0], &signs[0])
    return out


cdef double _quad(const double* psi, const double* M, double* lam, Py_ssize_t dim) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double acc, e = 0.0
    for i in range(dim):
        acc = 0.0
        for j in range(dim):
            acc = acc + M[i * dim + j] * psi[j]
        lam[i] = acc
        e = e + psi[i] * acc
    return e


def energy(int n, int reps, const double[::1] theta, const double[::1] signs,
           const double[:, ::1] M):
    """<psi(theta)| M |psi(theta)> for a dense real symmetric M."""
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef double e
    cdef double* psi = <double*>malloc(2 * dim * sizeof(double))
    if psi == NULL:
        raise MemoryError()
    with nogil:
        _forward(psi, n, reps, &theta[0], &signs[0])
        e = _quad(psi, &M[0, 0], psi + dim, dim)
    free(psi)
    return e


def energy_grad(int n, int reps, const double[::1] theta, const double[::1] signs,
                const double[:, ::1] M):
    """Energy and its shift-rule gradient, evaluated by one backward sweep.

    For RY-generated parameters the +/- pi/2 shift difference equals the
    analytic derivative 2 <lam| dU_k |phi_{k-1}>, which is what the sweep
    accumulates.
    """
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef Py_ssize_t npar = n * (reps + 1)
    grad_arr = np.zeros(npar, dtype=np.float64)
    cdef double[::1] grad = grad_arr
    cdef double e
    cdef double* buf = <double*>malloc(2 * dim * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double* phi = buf
    cdef double* lam = buf + dim
    cdef int layer, q
    cdef Py_ssize_t i, m, idx
    cdef double c, s, a, b, g
    with nogil:
        _forward(phi, n, reps, &theta[0], &signs[0])
        e = _quad(phi, &M[0, 0], lam, dim)
        for layer in range(reps, -1, -1):
            if layer < reps:
                _entangle(phi, &signs[0], dim)
                _entangle(lam, &signs[0], dim)
            for q in range(n - 1, -1, -1):
                idx = layer * n + q
                c = cos(0.5 * theta[idx])
                s = sin(0.5 * theta[idx])
                _ry(phi, dim, q, c, -s)
                m = (<Py_ssize_t>1) << q
                g = 0.0
                for i in range(dim):
                    if i & m:
                        continue
                    a = phi[i]
                    b = phi[i | m]
                    g = g + lam[i] * (-s * a - c * b) + lam[i | m] * (c * a - s * b)
                grad[idx] = g
                _ry(lam, dim, q, c, -s)
    free(buf)
    return e, grad_arr


# ------------------------------------------------------ Pauli expectation

cdef inline int _popcount(uint64_t x) noexcept nogil:
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


def pauli_terms(const double complex[::1] psi, const int64_t[::1] xmask,
                const int64_t[::1] zmask, const int64_t[::1] ny):
    """Per-term <psi|P|psi> for strings given as (x-mask, z-mask, #Y)."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t nt = xmask.shape[0]
    out = np.empty(nt, dtype=np.complex128)
    cdef double complex[::1] res = out
    cdef Py_ssize_t t, j
    cdef double re, im, sgn
    cdef double complex ph, amp
    cdef uint64_t x, z
    for t in range(nt):
        x = <uint64_t>xmask[t]
        z = <uint64_t>zmask[t]
        re = 0.0
        im = 0.0
        for j in range(dim):
            # P|j> = i^ny (-1)^{|j&z|} |j^x>, so <psi|P|psi> = sum_j conj(psi[j^x]) psi[j] (+-)
            sgn = -1.0 if (_popcount(j & z) & 1) else 1.0
            amp = psi[j ^ x].conjugate() * psi[j]
            re = re + sgn * amp.real
            im = im + sgn * amp.imag
        ph = 1.0
        if ny[t] % 4 == 1:
            ph = 1j
        elif ny[t] % 4 == 2:
            ph = -1.0
        elif ny[t] % 4 == 3:
            ph = -1j
        res[t] = ph * (re + 1j * im)
    return out


# ---------------------------------------------------- noisy trajectories

cdef inline void _c_h(double* re, double* im, Py_ssize_t dim, int q) noexcept nogil:
    cdef Py_ssize_t m = (<Py_ssize_t>1) << q
    cdef Py_ssize_t i
    cdef double ar, ai, br, bi
    for i in range(dim):
        if i & m:
            continue
        ar = re[i]; ai = im[i]; br = re[i | m]; bi = im[i | m]
        re[i] = (ar + br) * INV_SQRT2
        im[i] = (ai + bi) * INV_SQRT2
        re[i | m] = (ar - br) * INV_SQRT2
        im[i | m] = (ai - bi) * INV_SQRT2


cdef inline void _c_ry(double* re, double* im, Py_ssize_t dim, int q, double c, double s) noexcept nogil:
    cdef Py_ssize_t m = (<Py_ssize_t>1) << q
    cdef Py_ssize_t i
    cdef double ar, ai, br, bi
    for i in range(dim):
        if i & m:
            continue
        ar = re[i]; ai = im[i]; br = re[i | m]; bi = im[i | m]
        re[i] = c * ar - s * br
        im[i] = c * ai - s * bi
        re[i | m] = s * ar + c * br
        im[i | m] = s * ai + c * bi


cdef inline void _c_cz(double* re, double* im, Py_ssize_t dim, int q0, int q1) noexcept nogil:
    cdef Py_ssize_t m = ((<Py_ssize_t>1) << q0) | ((<Py_ssize_t>1) << q1)
    cdef Py_ssize_t i
    for i in range(dim):
        if (i & m) == m:
            re[i] = -re[i]
            im[i] = -im[i]


cdef inline void _c_sdg(double* re, double* im, Py_ssize_t dim, int q) noexcept nogil:
    # S^dagger: |1> -> -i |1>
    cdef Py_ssize_t m = (<Py_ssize_t>1) << q
    cdef Py_ssize_t i
    cdef double t
    for i in range(dim):
        if i & m:
            t = re[i]
            re[i] = im[i]
            im[i] = -t


cdef inline void _c_pauli(double* re, double* im, Py_ssize_t dim, int q, int p) noexcept nogil:
    # p: 1=X, 2=Y, 3=Z; Y applied as X.Z (global phase i dropped)
    cdef Py_ssize_t m = (<Py_ssize_t>1) << q
    cdef Py_ssize_t i
    cdef double t
    if p == 3 or p == 2:
        for i in range(dim):
            if i & m:
                re[i] = -re[i]
                im[i] = -im[i]
    if p == 1 or p == 2:
        for i in range(dim):
            if i & m:
                continue
            t = re[i]; re[i] = re[i | m]; re[i | m] = t
            t = im[i]; im[i] = im[i | m]; im[i | m] = t


cdef void _c_gate(double* re, double* im, Py_ssize_t dim, int op, int q0, int q1, double ang) noexcept nogil:
    if op == OP_H:
        _c_h(re, im, dim, q0)
    elif op == OP_RY:
        _c_ry(re, im, dim, q0, cos(0.5 * ang), sin(0.5 * ang))
    elif op == OP_CZ:
        _c_cz(re, im, dim, q0, q1)
    else:
        _c_sdg(re, im, dim, q0)


cdef void _c_error(double* re, double* im, Py_ssize_t dim, int op, int q0, int q1, double u) noexcept nogil:
    # u uniform in [0, 1) selects the Pauli among 3 (1q) or 15 (2q)
    cdef int k
    if op == OP_CZ:
        k = 1 + <int>(u * 15.0)
        if k > 15:
            k = 15
        _c_pauli(re, im, dim, q0, k & 3)
        _c_pauli(re, im, dim, q1, k >> 2)
    else:
        k = 1 + <int>(u * 3.0)
        if k > 3:
            k = 3
        _c_pauli(re, im, dim, q0, k)


cdef Py_ssize_t _pick(const double* cdf, Py_ssize_t dim, double u) noexcept nogil:
    cdef Py_ssize_t i = 0
    while i < dim - 1 and u >= cdf[i]:
        i += 1
    return i


def sample_circuit(int n, const int[:, ::1] ops, const double[::1] angles,
                   int64_t mask, double p1, double p2, double p_readout,
                   int64_t shots, uint64_t seed, uint64_t stream, int zero_prob):
    """Shot-sampled statistic of a circuit under stochastic Pauli noise.

    Returns the summed +/-1 parity over ``mask`` bits, or (``zero_prob``)
    the number of shots whose readout is all zeros.
    """
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef Py_ssize_t nops = ops.shape[0]
    cdef Py_ssize_t g, i, h
    cdef int64_t s, total = 0
    cdef uint64_t key = _key(seed, stream)
    cdef uint64_t bits
    cdef double u, v, acc, pclean, pg, surv
    cdef int q
    cdef double* pe = <double*>malloc(nops * sizeof(double))
    cdef double* cre = <double*>malloc(dim * sizeof(double))
    cdef double* cim = <double*>malloc(dim * sizeof(double))
    cdef double* ccdf = <double*>malloc(dim * sizeof(double))
    cdef double* re = <double*>malloc(dim * sizeof(double))
    cdef double* im = <double*>malloc(dim * sizeof(double))
    cdef double* cdf = <double*>malloc(dim * sizeof(double))
    if (pe == NULL or cre == NULL or cim == NULL or ccdf == NULL or re == NULL
            or im == NULL or cdf == NULL):
        raise MemoryError()
    with nogil:
        pclean = 1.0
        for g in range(nops):
            pe[g] = p2 if ops[g, 0] == OP_CZ else p1
            pclean = pclean * (1.0 - pe[g])
        for i in range(dim):
            cre[i] = 0.0
            cim[i] = 0.0
        cre[0] = 1.0
        for g in range(nops):
            _c_gate(cre, cim, dim, ops[g, 0], ops[g, 1], ops[g, 2], angles[g])
        acc = 0.0
        for i in range(dim):
            acc = acc + (cre[i] * cre[i] + cim[i] * cim[i])
            ccdf[i] = acc
        for s in range(shots):
            u = _draw(key, <uint64_t>s, 0)
            if u < pclean:
                i = _pick(ccdf, dim, _draw(key, <uint64_t>s, nops + 2) * ccdf[dim - 1])
            else:
                # first faulty gate from the conditional distribution, then
                # independent faults on the remaining gates
                v = u - pclean
                surv = 1.0
                h = nops - 1
                for g in range(nops):
                    pg = surv * pe[g]
                    if v < pg:
                        h = g
                        break
                    v = v - pg
                    surv = surv * (1.0 - pe[g])
                for i in range(dim):
                    re[i] = 0.0
                    im[i] = 0.0
                re[0] = 1.0
                for g in range(nops):
                    _c_gate(re, im, dim, ops[g, 0], ops[g, 1], ops[g, 2], angles[g])
                    if g == h:
                        _c_error(re, im, dim, ops[g, 0], ops[g, 1], ops[g, 2],
                                 _draw(key, <uint64_t>s, 1))
                    elif g > h:
                        v = _draw(key, <uint64_t>s, g + 2)
                        if v < pe[g]:
                            _c_error(re, im, dim, ops[g, 0], ops[g, 1], ops[g, 2], v / pe[g])
                acc = 0.0
                for i in range(dim):
                    acc = acc + (re[i] * re[i] + im[i] * im[i])
                    cdf[i] = acc
                i = _pick(cdf, dim, _draw(key, <uint64_t>s, nops + 2) * cdf[dim - 1])
            bits = <uint64_t>i
            for q in range(n):
                if _draw(key, <uint64_t>s, nops + 3 + q) < p_readout:
                    bits = bits ^ ((<uint64_t>1) << q)
            if zero_prob:
                if bits == 0:
                    total += 1
            else:
                total += -1 if (_popcount(bits & <uint64_t>mask) & 1) else 1
    free(pe); free(cre); free(cim); free(ccdf); free(re); free(im); free(cdf)
    return total
