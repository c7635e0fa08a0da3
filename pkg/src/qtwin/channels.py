"""Kraus channels for relaxation, dephasing and depolarization, plus readout noise.

All durations passed here share one unit (the engine uses nanoseconds).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ValidationError

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SX, SY, SZ)


@dataclass(frozen=True)
class KrausChannel:
    """CPTP map on one or two qubits given by Kraus matrices of shape (k, d, d)."""

    kraus_ops: np.ndarray
    name: str = ""

    def __post_init__(self) -> None:
        ops = np.array(self.kraus_ops, dtype=complex)
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2] or ops.shape[1] not in (2, 4):
            raise ValidationError(f"Kraus operators must be 2x2 or 4x4, got shape {ops.shape}")
        ops.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def dim(self) -> int:
        return self.kraus_ops.shape[1]

    @property
    def num_qubits(self) -> int:
        return 1 if self.dim == 2 else 2

    def completeness_error(self) -> float:
        """max |sum_i K_i^dag K_i - I| elementwise."""
        s = np.einsum("kji,kjl->il", self.kraus_ops.conj(), self.kraus_ops)
        return float(np.max(np.abs(s - np.eye(self.dim))))

    def is_cptp(self, atol: float = 1e-12) -> bool:
        return self.completeness_error() <= atol

    def superoperator(self) -> np.ndarray:
        """Row-major vectorised action: vec(K rho K^dag) = S vec(rho)."""
        return np.einsum("kij,kab->iajb", self.kraus_ops, self.kraus_ops.conj()).reshape(
            self.dim**2, self.dim**2)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Action on a bare d x d matrix."""
        return np.einsum("kij,jl,kml->im", self.kraus_ops, rho, self.kraus_ops.conj())

    def then(self, other: KrausChannel) -> KrausChannel:
        """Channel applying ``self`` first and ``other`` second."""
        ops = [b @ a for a in self.kraus_ops for b in other.kraus_ops]
        return KrausChannel(np.array(ops), f"{other.name}.{self.name}")


def _check_duration(t: float, timescale: float, what: str) -> None:
    if t < 0:
        raise ValidationError(f"negative duration {t!r} for {what}")
    if not timescale > 0:
        raise ValidationError(f"{what} timescale must be positive, got {timescale!r}")


def decay_probability(t: float, timescale: float) -> float:
    """1 - exp(-t / timescale); zero for an infinite timescale."""
    if math.isinf(timescale):
        return 0.0
    return -math.expm1(-t / timescale)


def relaxation_channel(t: float, t1: float) -> KrausChannel:
    """Amplitude damping toward |0> with p_r = 1 - exp(-t/T1)."""
    _check_duration(t, t1, "relaxation")
    p = decay_probability(t, t1)
    k0 = np.array([[1, 0], [0, math.sqrt(1 - p)]], dtype=complex)
    k1 = np.array([[0, math.sqrt(p)], [0, 0]], dtype=complex)
    return KrausChannel(np.array([k0, k1]), "relax")


def dephasing_channel(t: float, t_dephase: float) -> KrausChannel:
    """Phase flip with p_d = 1 - exp(-t/T); coherences scale by 1 - 2 p_d."""
    _check_duration(t, t_dephase, "dephasing")
    p = decay_probability(t, t_dephase)
    return KrausChannel(np.array([math.sqrt(1 - p) * I2, math.sqrt(p) * SZ]), "dephase")


def _check_p(p: float) -> None:
    if not 0 <= p <= 1:
        raise ValidationError(f"depolarizing probability must lie in [0, 1], got {p!r}")


def depolarizing_channel_1q(p: float) -> KrausChannel:
    _check_p(p)
    w = math.sqrt(p / 3)
    return KrausChannel(np.array([math.sqrt(1 - p) * I2, w * SX, w * SY, w * SZ]), "depol1")


def depolarizing_channel_2q(p: float) -> KrausChannel:
    """Identity with weight 1-p plus the 15 non-identity Pauli products at p/15 each."""
    _check_p(p)
    w = math.sqrt(p / 15)
    ops = [math.sqrt(1 - p) * np.eye(4, dtype=complex)]
    for a, b in itertools.product(range(4), repeat=2):
        if (a, b) != (0, 0):
            ops.append(w * np.kron(PAULIS[a], PAULIS[b]))
    return KrausChannel(np.array(ops), "depol2")


def depolarizing_channel(p: float, num_qubits: int) -> KrausChannel:
    return depolarizing_channel_1q(p) if num_qubits == 1 else depolarizing_channel_2q(p)


def fidelity_to_pdep(f: float, dim: int) -> float:
    """Pauli weight p whose uniform Pauli channel has average gate fidelity ``f``.

    Process fidelity of that channel is 1 - p, and F_avg = (d F_pro + 1)/(d + 1),
    so p = (d + 1)(1 - f)/d: 3(1-f)/2 for one qubit, 5(1-f)/4 for two.
    """
    if dim not in (2, 4):
        raise ValidationError(f"dim must be 2 or 4, got {dim!r}")
    if not 0 < f <= 1:
        raise ValidationError(f"fidelity must lie in (0, 1], got {f!r}")
    p = (dim + 1) * (1 - f) / dim
    if p > 1:
        raise ValidationError(f"fidelity {f} is below what a depolarizing channel can reach")
    return p


# --- readout -----------------------------------------------------------------


@dataclass(frozen=True)
class ReadoutModel:
    """Per-bit (eps0, eps1); bit k of an outcome index uses ``errors[k]``.

    The POVM element for outcome 0 is diag(1 - eps0, eps1).
    """

    errors: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        errs = tuple((float(a), float(b)) for a, b in self.errors)
        for e0, e1 in errs:
            if not (0 <= e0 < 1 and 0 <= e1 < 1):
                raise ValidationError(f"readout errors must lie in [0, 1), got {(e0, e1)}")
        object.__setattr__(self, "errors", errs)

    @property
    def num_bits(self) -> int:
        return len(self.errors)

    def povm(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        e0, e1 = self.errors[k]
        e = np.diag([1 - e0, e1])
        return e, np.eye(2) - e

    def confusion_matrix(self, k: int) -> np.ndarray:
        """Column-stochastic: entry [read, true]."""
        e0, e1 = self.errors[k]
        return np.array([[1 - e0, e1], [e0, 1 - e1]])

    def is_trivial(self) -> bool:
        return all(e == (0.0, 0.0) for e in self.errors)


def _apply_confusion(model: ReadoutModel, probs: np.ndarray) -> np.ndarray:
    m = model.num_bits
    if probs.shape != (2**m,):
        raise ValidationError(f"distribution over {m} bits must have {2**m} entries")
    t = probs.reshape((2,) * m) if m else probs
    for k in range(m):
        axis = m - 1 - k  # bit k is the (m-1-k)-th axis in C order
        t = np.moveaxis(np.tensordot(model.confusion_matrix(k), t, axes=([1], [axis])), 0, axis)
    return t.reshape(-1)


def readout_confusion(model: ReadoutModel, probs, atol: float = 1e-9):
    """Push an outcome distribution through the per-bit confusion matrices.

    ``probs`` is either an array indexed by outcome integer or a mapping from
    bitstrings (most significant bit first) to probabilities; the result has
    the same form.
    """
    if isinstance(probs, Mapping):
        m = model.num_bits
        vec = np.zeros(2**m)
        for key, v in probs.items():
            if len(key) != m:
                raise ValidationError(f"bitstring {key!r} does not have {m} bits")
            vec[int(key, 2)] += v
        out = readout_confusion(model, vec, atol)
        return {format(i, f"0{m}b"): float(v) for i, v in enumerate(out) if v != 0.0}
    vec = np.asarray(probs, dtype=float)
    total = float(vec.sum())
    if abs(total - 1) > atol or np.any(vec < -atol):
        raise ValidationError(f"input distribution is not normalised (sum {total!r})")
    return _apply_confusion(model, vec)
