"""Exact density-matrix simulation of scheduled noisy circuits.

``simulate`` turns a native circuit plus calibration into a list of local
superoperators (gate, depolarization, idle relaxation/dephasing), fuses
everything that touches the same one or two qubits into as few blocks as
possible, and streams the blocks through the in-place kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .calibration import CalibrationData
from .channels import (KrausChannel, ReadoutModel, dephasing_channel, depolarizing_channel,
                       fidelity_to_pdep, readout_confusion, relaxation_channel)
from .circuit import Circuit, Gate, gate_matrix
from .compiler import RoutedCircuit, native_gateset
from .errors import ResourceCapError, ValidationError
from .schedule import gate_duration, schedule_asap

MODES = ("paper", "unm_style", "noiseless")
DEFAULT_MAX_QUBITS = 15
NOISELESS_FLOOR = 1e-15
_DTYPES = {"double": np.complex128, "single": np.complex64}


class DensityMatrix:
    """A 2**n x 2**n density matrix; qubit 0 is the least significant index bit.

    Kernels update ``data`` in place, so an instance is owned by one run.
    """

    def __init__(self, data: np.ndarray):
        data = np.ascontiguousarray(data)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] & (data.shape[0] - 1):
            raise ValidationError(f"density matrix must be square with power-of-two size, "
                                  f"got {data.shape}")
        if data.dtype not in (np.complex64, np.complex128):
            data = data.astype(np.complex128)
        self.data = data

    @property
    def num_qubits(self) -> int:
        return self.data.shape[0].bit_length() - 1

    def copy(self) -> DensityMatrix:
        return DensityMatrix(self.data.copy())

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def purity(self) -> float:
        d = self.data.astype(np.complex128, copy=False)
        return float(np.vdot(d, d).real)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def probabilities(self) -> np.ndarray:
        return np.real(np.diagonal(self.data)).astype(np.float64)

    def check(self, atol: float = 1e-10) -> None:
        tr = self.trace()
        if abs(tr - 1) > atol:
            raise ValidationError(f"trace drifted to {tr}")
        herm = self.hermiticity_error()
        if herm > atol:
            raise ValidationError(f"hermiticity violated by {herm}")

    def reduced(self, keep: Sequence[int]) -> np.ndarray:
        """Partial trace onto ``keep``; the first listed qubit is the most significant bit."""
        n = self.num_qubits
        t = self.data.reshape((2,) * (2 * n))
        keep = list(keep)
        gone = [q for q in range(n) if q not in keep]
        letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
        rows = [letters[i] for i in range(n)]
        cols = [letters[n + i] for i in range(n)]
        for q in gone:
            cols[n - 1 - q] = rows[n - 1 - q]
        out_r = "".join(rows[n - 1 - q] for q in keep)
        out_c = "".join(cols[n - 1 - q] for q in keep)
        k = len(keep)
        return np.einsum("".join(rows) + "".join(cols) + "->" + out_r + out_c, t).reshape(
            2**k, 2**k)


def required_bytes(num_qubits: int, precision: str = "double") -> int:
    itemsize = np.dtype(_DTYPES[precision]).itemsize
    return int(4**num_qubits * itemsize * kernels.WORKSPACE_FACTOR)


def _available_bytes() -> int:
    import psutil

    return int(psutil.virtual_memory().available)


def check_resources(num_qubits: int, precision: str = "double",
                    max_qubits: int = DEFAULT_MAX_QUBITS, check_memory: bool = True) -> None:
    if precision not in _DTYPES:
        raise ValidationError(f"precision must be 'double' or 'single', got {precision!r}")
    if num_qubits > max_qubits:
        raise ResourceCapError(f"{num_qubits} qubits exceeds the cap of {max_qubits}; "
                               "raise max_qubits to override")
    if check_memory:
        need, have = required_bytes(num_qubits, precision), _available_bytes()
        if need > 0.9 * have:
            raise ResourceCapError(
                f"{num_qubits}-qubit {precision}-precision density matrix needs "
                f"{need / 2**30:.2f} GiB but only {have / 2**30:.2f} GiB is available")


def init_ground(n: int, max_qubits: int = DEFAULT_MAX_QUBITS, precision: str = "double",
                check_memory: bool = True) -> DensityMatrix:
    if n < 1:
        raise ValidationError("need at least one qubit")
    check_resources(n, precision, max_qubits, check_memory)
    data = np.zeros((2**n, 2**n), dtype=_DTYPES[precision])
    data[0, 0] = 1
    return DensityMatrix(data)


# --- superoperator algebra ---------------------------------------------------


def unitary_superop(u: np.ndarray) -> np.ndarray:
    return np.kron(u, u.conj())


def _embed_1q(s1: np.ndarray, slot: int) -> np.ndarray:
    """Lift a 1-qubit superoperator to slot 0 (high bit) or 1 (low bit) of a pair."""
    t = s1.reshape(2, 2, 2, 2)
    eye = np.eye(2)
    if slot == 0:
        big = np.einsum("ijkl,mn,op->imjoknlp", t, eye, eye)
    else:
        big = np.einsum("ijkl,mn,op->miojnkpl", t, eye, eye)
    return big.reshape(16, 16)


def _swap_slots(s2: np.ndarray) -> np.ndarray:
    return s2.reshape((2,) * 8).transpose(1, 0, 3, 2, 5, 4, 7, 6).reshape(16, 16)


def apply_superop(rho: DensityMatrix, s: np.ndarray, qubits: Sequence[int]) -> DensityMatrix:
    n = rho.num_qubits
    if any(not 0 <= q < n for q in qubits) or len(set(qubits)) != len(qubits):
        raise ValidationError(f"invalid target qubits {tuple(qubits)} for {n} qubits")
    if len(qubits) == 1 and s.shape == (4, 4):
        kernels.superop_1q(rho.data, s, qubits[0])
    elif len(qubits) == 2 and s.shape == (16, 16):
        kernels.superop_2q(rho.data, s, qubits[0], qubits[1])
    else:
        raise ValidationError(f"superoperator of shape {s.shape} does not fit {len(qubits)} qubit(s)")
    return rho


def apply_unitary(rho: DensityMatrix, u: np.ndarray, qubits: Sequence[int]) -> DensityMatrix:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2 ** len(qubits),) * 2:
        raise ValidationError(f"{u.shape} matrix does not act on {len(qubits)} qubit(s)")
    return apply_superop(rho, unitary_superop(u), qubits)


def apply_channel(rho: DensityMatrix, ch: KrausChannel, qubits: Sequence[int]) -> DensityMatrix:
    if ch.num_qubits != len(qubits):
        raise ValidationError(f"{ch.num_qubits}-qubit channel applied to {len(qubits)} qubit(s)")
    return apply_superop(rho, ch.superoperator(), qubits)


@dataclass
class Block:
    qubits: tuple[int, ...]
    superop: np.ndarray
    parts: int = 1


class Fuser:
    """Greedy fusion of a stream of 1- and 2-qubit superoperators.

    Pending 1-qubit maps wait until a 2-qubit block claims their qubit; a block
    stays open (absorbing later maps on its qubits) until another block needs
    one of them. Emission order respects every qubit's operation order.
    """

    def __init__(self) -> None:
        self.pending: dict[int, np.ndarray] = {}
        self.open: dict[int, Block] = {}
        self.out: list[Block] = []

    def _close(self, q: int) -> None:
        blk = self.open.get(q)
        if blk is not None:
            for p in blk.qubits:
                del self.open[p]
            self.out.append(blk)

    def add(self, qubits: tuple[int, ...], s: np.ndarray) -> None:
        if len(qubits) == 1:
            (q,) = qubits
            blk = self.open.get(q)
            if blk is not None:
                blk.superop = _embed_1q(s, blk.qubits.index(q)) @ blk.superop
                blk.parts += 1
            else:
                prev = self.pending.get(q)
                self.pending[q] = s if prev is None else s @ prev
            return
        a, b = qubits
        blk = self.open.get(a)
        if blk is not None and blk is self.open.get(b):
            if blk.qubits != (a, b):
                s = _swap_slots(s)
            blk.superop = s @ blk.superop
            blk.parts += 1
            return
        self._close(a)
        self._close(b)
        pre = np.eye(16, dtype=complex)
        for slot, q in enumerate((a, b)):
            p = self.pending.pop(q, None)
            if p is not None:
                pre = _embed_1q(p, slot) @ pre
        blk = Block((a, b), s @ pre)
        self.open[a] = self.open[b] = blk

    def finish(self) -> list[Block]:
        for q in list(self.open):
            self._close(q)
        for q, s in sorted(self.pending.items()):
            self.out.append(Block((q,), s))
        self.pending.clear()
        out, self.out = self.out, []
        return out


# --- noise program -----------------------------------------------------------


@dataclass
class NoiseOp:
    qubits: tuple[int, ...]  # physical labels
    superop: np.ndarray
    label: str


def _depol_superop(g: Gate, cal: CalibrationData) -> np.ndarray:
    if g.arity == 1:
        f = cal.qubit(g.qubits[0]).fidelity_1q
    else:
        f = cal.pair(*g.qubits).fidelity_2q
    p = fidelity_to_pdep(f, 2**g.arity)
    return depolarizing_channel(p, g.arity).superoperator()


def _idle_superop(q: int, t_ns: float, cal: CalibrationData, dephasing: str) -> np.ndarray:
    rec = cal.qubit(q)
    t_deph = rec.t2 if dephasing == "t2" else rec.t_phi
    relax = relaxation_channel(t_ns, rec.t1 * 1e3).superoperator()
    deph = dephasing_channel(t_ns, t_deph * 1e3).superoperator()
    return deph @ relax


def _check_native(c: Circuit, cal: CalibrationData) -> None:
    native = native_gateset(cal.gateset)
    for g in c.gates:
        if g.is_unitary and g.name not in native:
            raise ValidationError(f"gate {g.name!r} is not native to the {cal.gateset} gateset")


def _check_coverage(c: Circuit, cal: CalibrationData) -> None:
    for q in c.active_qubits:
        if q not in cal.qubits:
            raise ValidationError(f"missing calibration for qubit {q}")
    for g in c.gates:
        if g.is_unitary and g.arity == 2 and tuple(sorted(g.qubits)) not in cal.pairs:
            raise ValidationError(f"missing calibration for qubit pair {tuple(sorted(g.qubits))}")


def noise_program(c: Circuit, cal: CalibrationData | None, mode: str = "paper",
                  dephasing: str = "t2", trailing_idle: bool = True) -> list[NoiseOp]:
    """The ordered list of local maps that ``simulate`` applies."""
    if mode not in MODES:
        raise ValidationError(f"unknown mode {mode!r}; expected one of {MODES}")
    if dephasing not in ("t2", "tphi"):
        raise ValidationError(f"dephasing timescale must be 't2' or 'tphi', got {dephasing!r}")
    ops: list[NoiseOp] = []
    if mode == "noiseless":
        for g in c.gates:
            if g.is_unitary:
                ops.append(NoiseOp(g.qubits, unitary_superop(gate_matrix(g)), g.name))
        return ops
    if cal is None:
        raise ValidationError(f"mode {mode!r} needs calibration data")
    _check_coverage(c, cal)
    _check_native(c, cal)
    if mode == "unm_style":
        for g in c.gates:
            if not g.is_unitary:
                continue
            ops.append(NoiseOp(g.qubits, unitary_superop(gate_matrix(g)), g.name))
            ops.append(NoiseOp(g.qubits, _depol_superop(g, cal), "depol"))
            dur = gate_duration(g, cal)
            for q in g.qubits:
                ops.append(NoiseOp((q,), _idle_superop(q, dur, cal, dephasing), "relax+dephase"))
        return ops
    sched = schedule_asap(c, cal)
    events = []
    for iv, g in sched.gate_intervals():
        events.append(((iv.start, iv.end, iv.gate_index), "gate", g))
    for q, iv in sched.idle_intervals():
        if not trailing_idle and iv.end == sched.total_duration and iv is sched.timelines[q][-1]:
            continue
        events.append(((iv.start, iv.end, math.inf), "idle", (q, iv.length)))
    events.sort(key=lambda e: e[0])
    for _, kind, item in events:
        if kind == "gate":
            ops.append(NoiseOp(item.qubits, unitary_superop(gate_matrix(item)), item.name))
            ops.append(NoiseOp(item.qubits, _depol_superop(item, cal), "depol"))
        else:
            q, length = item
            ops.append(NoiseOp((q,), _idle_superop(q, length, cal, dephasing), "relax+dephase"))
    return ops


# --- outcomes ----------------------------------------------------------------


@dataclass
class OutcomeDistribution:
    """Probabilities per bitstring (classical bit 0 printed last)."""

    probabilities: dict[str, float]
    num_bits: int
    shots: int | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        total = sum(self.probabilities.values())
        if abs(total - 1) > 1e-9:
            raise ValidationError(f"outcome probabilities sum to {total!r}")
        if any(v < 0 for v in self.probabilities.values()):
            raise ValidationError("negative outcome probability")

    def __getitem__(self, key: str) -> float:
        return self.probabilities.get(key, 0.0)

    def vector(self) -> np.ndarray:
        v = np.zeros(2**self.num_bits)
        for k, p in self.probabilities.items():
            v[int(k, 2)] = p
        return v

    @classmethod
    def from_vector(cls, v: np.ndarray, num_bits: int, **kw) -> OutcomeDistribution:
        return cls({format(i, f"0{num_bits}b"): float(p) for i, p in enumerate(v) if p > 0},
                   num_bits, **kw)


def _measurement_plan(c: Circuit, local: dict[int, int]) -> tuple[list[tuple[int, int]], int]:
    """[(local qubit, clbit)] sorted by clbit, and the bitstring width."""
    mm = c.measure_map
    if mm:
        return sorted(((local[q], b) for q, b in mm.items()), key=lambda x: x[1]), c.num_clbits
    return [(local[q], i) for i, q in enumerate(c.active_qubits)], len(c.active_qubits)


def _marginal(probs: np.ndarray, n: int, plan: list[tuple[int, int]]) -> np.ndarray:
    """Distribution over the planned qubits; bit j <-> plan[j]."""
    t = probs.reshape((2,) * n)
    keep_axes = [n - 1 - lq for lq, _ in plan]
    drop = tuple(ax for ax in range(n) if ax not in keep_axes)
    t = t.sum(axis=drop) if drop else t
    # remaining axes are in increasing axis order; reorder so plan[-1] is the first axis
    remaining = sorted(keep_axes)
    order = [remaining.index(keep_axes[j]) for j in reversed(range(len(plan)))]
    return np.transpose(t, order).reshape(-1) if plan else np.ones(1)


def simulate(circuit: Circuit | RoutedCircuit, cal: CalibrationData | None = None,
             mode: str = "paper", *, dephasing: str = "t2", trailing_idle: bool = True,
             precision: str = "double", max_qubits: int = DEFAULT_MAX_QUBITS,
             check_memory: bool = True, debug: bool = False, fuse: bool = True,
             return_state: bool = False):
    """Outcome distribution of a native circuit under the chosen noise placement.

    ``paper``: gate unitary then depolarization on every gate, relaxation then
    dephasing on every idle interval of the ASAP schedule, readout confusion at
    the end. ``unm_style``: depolarization then relaxation/dephasing for the
    gate duration after every gate, no idle channels. ``noiseless``: unitaries
    and projective readout. Only active qubits are simulated.
    """
    c = circuit.circuit if isinstance(circuit, RoutedCircuit) else circuit
    ops = noise_program(c, cal, mode, dephasing, trailing_idle)
    qubits = c.active_qubits or (0,)
    local = {q: i for i, q in enumerate(qubits)}
    n = len(qubits)
    rho = init_ground(n, max_qubits=max_qubits, precision=precision, check_memory=check_memory)
    if fuse:
        fuser = Fuser()
        for op in ops:
            fuser.add(tuple(local[q] for q in op.qubits), op.superop)
        blocks = fuser.finish()
    else:
        blocks = [Block(tuple(local[q] for q in op.qubits), op.superop) for op in ops]
    for blk in blocks:
        apply_superop(rho, blk.superop, blk.qubits)
        if debug:
            rho.check()
    plan, width = _measurement_plan(c, local)
    probs = _marginal(rho.probabilities(), n, plan)
    probs = np.where(probs < 0, 0.0, probs)
    if mode == "noiseless":
        # pure-state roundoff: amplitudes that should cancel leave ~1e-33 residues
        probs = np.where(probs < NOISELESS_FLOOR, 0.0, probs)
    else:
        phys = {v: k for k, v in local.items()}
        model = ReadoutModel(tuple((cal.qubit(phys[lq]).eps_meas_0, cal.qubit(phys[lq]).eps_meas_1)
                                   for lq, _ in plan))
        probs = readout_confusion(model, probs / probs.sum(), atol=1e-6)
    full = np.zeros(2**width)
    idx = np.zeros(2 ** len(plan), dtype=np.int64)
    for j, (_, b) in enumerate(plan):
        idx |= ((np.arange(2 ** len(plan)) >> j) & 1) << b
    full[idx] = probs
    meta = {"mode": mode, "dephasing": dephasing, "trailing_idle": trailing_idle,
            "precision": precision, "qubits": list(qubits), "blocks": len(blocks),
            "operations": len(ops), "kernel": kernels.BACKEND}
    dist = OutcomeDistribution.from_vector(full / full.sum(), width, metadata=meta)
    return (dist, rho) if return_state else dist


def scale_counts(dist: OutcomeDistribution, shots: int) -> dict[str, float]:
    """Deterministic counts: probability times shots, unrounded."""
    return {k: p * shots for k, p in dist.probabilities.items()}


def sample(dist: OutcomeDistribution, shots: int, seed: int | np.random.Generator | None = 0
           ) -> dict[str, int]:
    """Multinomial draw of ``shots`` outcomes; deterministic for a fixed seed."""
    if shots < 1:
        raise ValidationError("shots must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    keys = sorted(dist.probabilities)
    p = np.array([dist.probabilities[k] for k in keys])
    draws = rng.multinomial(shots, p / p.sum())
    return {k: int(v) for k, v in zip(keys, draws) if v}
