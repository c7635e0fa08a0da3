"""Pure-numpy versions of the superoperator kernels (same contract as ``_kernels``)."""

from __future__ import annotations

import numpy as np


def _check(rho: np.ndarray) -> int:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be a square ndarray")
    if not rho.flags.c_contiguous:
        raise ValueError("density matrix must be C-contiguous")
    if rho.dtype not in (np.complex64, np.complex128):
        raise TypeError(f"unsupported dtype {rho.dtype}")
    return rho.shape[0].bit_length() - 1


def _apply(rho: np.ndarray, superop: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
    n = _check(rho)
    if rho.shape[0] != 1 << n:
        raise ValueError("density matrix size must be a power of two")
    for q in qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n} qubits")
    if len(set(qubits)) != len(qubits):
        raise ValueError("qubits must be distinct")
    k = len(qubits)
    t = rho.reshape((2,) * (2 * n))
    # row bit of qubit q sits on axis n-1-q, column bit on axis 2n-1-q
    axes = [n - 1 - q for q in qubits] + [2 * n - 1 - q for q in qubits]
    s = np.asarray(superop, dtype=np.complex128).reshape((2,) * (4 * k))
    out = np.tensordot(s, t, axes=(list(range(2 * k, 4 * k)), axes))
    out = np.moveaxis(out, list(range(2 * k)), axes)
    rho[...] = out.reshape(rho.shape)
    return rho


def superop_1q(rho: np.ndarray, superop: np.ndarray, q: int) -> np.ndarray:
    return _apply(rho, superop, (q,))


def superop_2q(rho: np.ndarray, superop: np.ndarray, qa: int, qb: int) -> np.ndarray:
    return _apply(rho, superop, (qa, qb))
