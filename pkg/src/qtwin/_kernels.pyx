# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""In-place superoperator kernels on a row-major density matrix.

The matrix is handled through its real view (re, im interleaved) so the same
code serves complex128 and complex64 storage; accumulation is always double.
Local index of a 2-qubit block: 2*bit(qa) + bit(qb). Vectorised block index:
row_local * d + col_local.
"""

import numpy as np

ctypedef fused real_t:
    float
    double


cdef inline Py_ssize_t _insert_zero(Py_ssize_t x, int pos) nogil:
    cdef Py_ssize_t low = x & ((<Py_ssize_t>1 << pos) - 1)
    return ((x >> pos) << (pos + 1)) | low


cdef void _apply_1q(real_t[:, ::1] rho, const double[::1] sr, const double[::1] si,
                    int q) noexcept nogil:
    cdef Py_ssize_t n = rho.shape[0]
    cdef Py_ssize_t half = n >> 1
    cdef Py_ssize_t m = <Py_ssize_t>1 << q
    cdef Py_ssize_t a, b, r0, c0, k, l
    cdef Py_ssize_t rows[2]
    cdef Py_ssize_t cols[2]
    cdef double vr[4]
    cdef double vi[4]
    cdef double accr, acci
    for a in range(half):
        r0 = _insert_zero(a, q)
        rows[0] = r0
        rows[1] = r0 | m
        for b in range(half):
            c0 = _insert_zero(b, q)
            cols[0] = 2 * c0
            cols[1] = 2 * (c0 | m)
            for k in range(4):
                vr[k] = rho[rows[k >> 1], cols[k & 1]]
                vi[k] = rho[rows[k >> 1], cols[k & 1] + 1]
            for k in range(4):
                accr = 0.0
                acci = 0.0
                for l in range(4):
                    accr = accr + sr[4 * k + l] * vr[l] - si[4 * k + l] * vi[l]
                    acci = acci + sr[4 * k + l] * vi[l] + si[4 * k + l] * vr[l]
                rho[rows[k >> 1], cols[k & 1]] = <real_t>accr
                rho[rows[k >> 1], cols[k & 1] + 1] = <real_t>acci


cdef void _apply_2q(real_t[:, ::1] rho, const double[::1] str_, const double[::1] sti,
                    int qa, int qb) noexcept nogil:
    # str_/sti hold the superoperator transposed: element [l, k] at 16*l + k
    cdef Py_ssize_t n = rho.shape[0]
    cdef Py_ssize_t quarter = n >> 2
    cdef int lo = qa if qa < qb else qb
    cdef int hi = qb if qa < qb else qa
    cdef Py_ssize_t off[4]
    cdef Py_ssize_t rows[4]
    cdef Py_ssize_t cols[4]
    cdef double vr[16]
    cdef double vi[16]
    cdef double accr[16]
    cdef double acci[16]
    cdef double xr, xi
    cdef Py_ssize_t a, b, r0, c0, i, j, k, l
    off[0] = 0
    off[1] = <Py_ssize_t>1 << qb
    off[2] = <Py_ssize_t>1 << qa
    off[3] = off[1] | off[2]
    for a in range(quarter):
        r0 = _insert_zero(_insert_zero(a, lo), hi)
        for i in range(4):
            rows[i] = r0 | off[i]
        for b in range(quarter):
            c0 = _insert_zero(_insert_zero(b, lo), hi)
            for j in range(4):
                cols[j] = 2 * (c0 | off[j])
            for i in range(4):
                for j in range(4):
                    vr[4 * i + j] = rho[rows[i], cols[j]]
                    vi[4 * i + j] = rho[rows[i], cols[j] + 1]
            for k in range(16):
                accr[k] = 0.0
                acci[k] = 0.0
            for l in range(16):
                xr = vr[l]
                xi = vi[l]
                for k in range(16):
                    accr[k] = accr[k] + str_[16 * l + k] * xr - sti[16 * l + k] * xi
                    acci[k] = acci[k] + str_[16 * l + k] * xi + sti[16 * l + k] * xr
            for k in range(16):
                rho[rows[k >> 2], cols[k & 3]] = <real_t>accr[k]
                rho[rows[k >> 2], cols[k & 3] + 1] = <real_t>acci[k]


def _real_view(rho):
    if not isinstance(rho, np.ndarray) or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be a square ndarray")
    if not rho.flags.c_contiguous:
        raise ValueError("density matrix must be C-contiguous")
    if rho.dtype == np.complex128:
        return rho.view(np.float64)
    if rho.dtype == np.complex64:
        return rho.view(np.float32)
    raise TypeError(f"unsupported dtype {rho.dtype}")


def _check_qubits(rho, qubits):
    n = rho.shape[0].bit_length() - 1
    if rho.shape[0] != 1 << n:
        raise ValueError("density matrix size must be a power of two")
    for q in qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n} qubits")
    if len(set(qubits)) != len(qubits):
        raise ValueError("qubits must be distinct")


def superop_1q(rho, superop, int q):
    """rho <- S acting on qubit q, in place."""
    s = np.asarray(superop, dtype=np.complex128).reshape(16)
    cdef const double[::1] sr = np.ascontiguousarray(s.real)
    cdef const double[::1] si = np.ascontiguousarray(s.imag)
    view = _real_view(rho)
    _check_qubits(rho, (q,))
    cdef double[:, ::1] vd
    cdef float[:, ::1] vf
    if view.dtype == np.float64:
        vd = view
        with nogil:
            _apply_1q(vd, sr, si, q)
    else:
        vf = view
        with nogil:
            _apply_1q(vf, sr, si, q)
    return rho


def superop_2q(rho, superop, int qa, int qb):
    """rho <- S acting on qubits (qa, qb), qa being the high local bit; in place."""
    s = np.asarray(superop, dtype=np.complex128).reshape(16, 16).T.reshape(256)
    cdef const double[::1] sr = np.ascontiguousarray(s.real)
    cdef const double[::1] si = np.ascontiguousarray(s.imag)
    view = _real_view(rho)
    _check_qubits(rho, (qa, qb))
    cdef double[:, ::1] vd
    cdef float[:, ::1] vf
    if view.dtype == np.float64:
        vd = view
        with nogil:
            _apply_2q(vd, sr, si, qa, qb)
    else:
        vf = view
        with nogil:
            _apply_2q(vf, sr, si, qa, qb)
    return rho
