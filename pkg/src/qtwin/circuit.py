"""Circuit intermediate representation and gate algebra.

Qubit 0 is the least significant bit of every basis-state index and of every
printed bitstring.  Two-qubit gate matrices use the textbook ordering in
which the *first* operand is the most significant bit of the local 4x4 index,
so ``cx(control, target)`` is ``[[1,0,0,0],[0,1,0,0],[0,0,0,1],[0,0,1,0]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ResourceCapError, ValidationError

# name -> (arity, number of angle parameters); arity None means "any"
GATE_SPECS: dict[str, tuple[int | None, int]] = {
    "prx": (1, 2),
    "cz": (2, 0),
    "h": (1, 0),
    "x": (1, 0),
    "y": (1, 0),
    "z": (1, 0),
    "rz": (1, 1),
    "cx": (2, 0),
    "u1": (1, 1),
    "u2": (1, 2),
    "u3": (1, 3),
    "swap": (2, 0),
    "measure": (1, 0),
    "barrier": (None, 0),
}

DIRECTIVES = frozenset({"measure", "barrier"})


@dataclass(frozen=True)
class Gate:
    """One operation. ``clbit`` is only meaningful for ``measure``."""

    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    clbit: int | None = None

    def __post_init__(self) -> None:
        if self.name not in GATE_SPECS:
            raise ValidationError(f"unknown gate kind {self.name!r}")
        arity, nparams = GATE_SPECS[self.name]
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if arity is not None and len(self.qubits) != arity:
            raise ValidationError(
                f"{self.name} acts on {arity} qubit(s), got {len(self.qubits)}"
            )
        if not self.qubits:
            raise ValidationError(f"{self.name} needs at least one qubit")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValidationError(f"duplicate qubit operand in {self.name} {self.qubits}")
        if len(self.params) != nparams:
            raise ValidationError(
                f"{self.name} takes {nparams} parameter(s), got {len(self.params)}"
            )
        if not all(math.isfinite(p) for p in self.params):
            raise ValidationError(f"non-finite angle in {self.name}{self.params}")
        if self.name == "measure":
            if self.clbit is None:
                object.__setattr__(self, "clbit", self.qubits[0])
        elif self.clbit is not None:
            raise ValidationError("only measure gates carry a classical bit")

    @property
    def arity(self) -> int:
        return len(self.qubits)

    @property
    def is_unitary(self) -> bool:
        return self.name not in DIRECTIVES

    def remap(self, mapping: Sequence[int] | dict[int, int]) -> Gate:
        return Gate(self.name, tuple(mapping[q] for q in self.qubits), self.params, self.clbit)

    def __str__(self) -> str:
        p = "(" + ",".join(f"{v:.6g}" for v in self.params) + ")" if self.params else ""
        return f"{self.name}{p} {','.join(map(str, self.qubits))}"


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()
    num_clbits: int | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise ValidationError("a circuit needs at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.num_clbits is None:
            object.__setattr__(self, "num_clbits", self.num_qubits)
        measured: set[int] = set()
        used_clbits: set[int] = set()
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.num_qubits:
                    raise ValidationError(
                        f"{g.name} references qubit {q} outside register of size {self.num_qubits}"
                    )
            if g.name == "measure":
                if not 0 <= g.clbit < self.num_clbits:
                    raise ValidationError(
                        f"classical bit {g.clbit} outside register of size {self.num_clbits}"
                    )
                if g.clbit in used_clbits:
                    raise ValidationError(f"classical bit {g.clbit} written twice")
                used_clbits.add(g.clbit)
                if g.qubits[0] in measured:
                    raise ValidationError(f"qubit {g.qubits[0]} measured twice")
                measured.add(g.qubits[0])
            elif g.name != "barrier":
                hit = measured.intersection(g.qubits)
                if hit:
                    raise ValidationError(f"gate {g} follows the measurement of qubit {min(hit)}")

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def measure_map(self) -> dict[int, int]:
        """qubit -> classical bit for every measured qubit."""
        return {g.qubits[0]: g.clbit for g in self.gates if g.name == "measure"}

    @property
    def measured_qubits(self) -> tuple[int, ...]:
        return tuple(sorted(self.measure_map))

    @property
    def active_qubits(self) -> tuple[int, ...]:
        """Qubits touched by a unitary gate or a measurement."""
        used = {q for g in self.gates if g.name != "barrier" for q in g.qubits}
        return tuple(sorted(used))

    def unitary_gates(self) -> list[Gate]:
        return [g for g in self.gates if g.is_unitary]

    def without_measurements(self) -> Circuit:
        return Circuit(self.num_qubits, [g for g in self.gates if g.name != "measure"],
                       self.num_clbits, self.name)

    def append(self, gates: Iterable[Gate]) -> Circuit:
        return Circuit(self.num_qubits, self.gates + tuple(gates), self.num_clbits, self.name)

    def compact(self) -> tuple[Circuit, tuple[int, ...]]:
        """Drop unused qubits. Returns the circuit on 0..k-1 and the kept qubit labels."""
        keep = self.active_qubits or (0,)
        index = {q: i for i, q in enumerate(keep)}
        gates = []
        for g in self.gates:
            if g.name == "barrier":
                qs = tuple(index[q] for q in g.qubits if q in index)
                if qs:
                    gates.append(Gate("barrier", qs))
            else:
                gates.append(g.remap(index))
        return Circuit(len(keep), gates, self.num_clbits, self.name), keep


# --- gate matrices -----------------------------------------------------------

_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
    "cx": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "swap": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def prx_matrix(theta: float, phi: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [[c, -1j * np.exp(-1j * phi) * s], [-1j * np.exp(1j * phi) * s, c]], dtype=complex
    )


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]],
        dtype=complex,
    )


def gate_matrix(kind: str | Gate, params: Sequence[float] = ()) -> np.ndarray:
    """Exact unitary of a gate kind. Accepts a :class:`Gate` or a name plus params."""
    if isinstance(kind, Gate):
        kind, params = kind.name, kind.params
    if kind in DIRECTIVES:
        raise ValidationError(f"{kind} has no matrix")
    if kind in _FIXED:
        return _FIXED[kind].copy()
    if kind == "prx":
        return prx_matrix(*params)
    if kind == "rz":
        (theta,) = params
        return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    if kind == "u1":
        (lam,) = params
        return np.diag([1.0, np.exp(1j * lam)]).astype(complex)
    if kind == "u2":
        return u3_matrix(math.pi / 2, *params)
    if kind == "u3":
        return u3_matrix(*params)
    raise ValidationError(f"unknown gate kind {kind!r}")


def apply_to_states(states: np.ndarray, matrix: np.ndarray, qubits: Sequence[int],
                    num_qubits: int) -> np.ndarray:
    """Apply a k-qubit matrix to a batch of state vectors of shape (batch, 2**n)."""
    k = len(qubits)
    batch = states.shape[0]
    t = states.reshape((batch,) + (2,) * num_qubits)
    # axis 1 + (n-1-q) holds qubit q
    axes = [1 + num_qubits - 1 - q for q in qubits]
    m = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(t, m, axes=(axes, list(range(k, 2 * k))))
    # tensordot appends the new axes at the end in operand order
    out = np.moveaxis(out, list(range(out.ndim - k, out.ndim)), axes)
    return out.reshape(batch, 2**num_qubits)


def circuit_unitary(c: Circuit, max_qubits: int = 10) -> np.ndarray:
    """Full 2**n x 2**n unitary of a measurement-free circuit (barriers ignored)."""
    if c.num_qubits > max_qubits:
        raise ResourceCapError(f"circuit_unitary is capped at {max_qubits} qubits")
    if any(g.name == "measure" for g in c.gates):
        raise ValidationError("circuit_unitary needs a circuit without measurements")
    dim = 2**c.num_qubits
    # rows of `cols` are the images of the basis vectors
    cols = np.eye(dim, dtype=complex)
    for g in c.gates:
        if g.is_unitary:
            cols = apply_to_states(cols, gate_matrix(g), g.qubits, c.num_qubits)
    return cols.T


# --- resource accounting -----------------------------------------------------


@dataclass(frozen=True)
class CircuitStats:
    depth: int
    count_1q: int
    count_2q: int
    qubits: int

    def as_dict(self) -> dict[str, int]:
        return {"qubits": self.qubits, "depth": self.depth,
                "count_1q": self.count_1q, "count_2q": self.count_2q}


def circuit_stats(c: Circuit) -> CircuitStats:
    """Greedy ASAP layering; measurements excluded, barriers act as fences only."""
    level = [0] * c.num_qubits
    n1 = n2 = 0
    for g in c.gates:
        if g.name == "measure":
            continue
        top = max(level[q] for q in g.qubits)
        if g.name == "barrier":
            for q in g.qubits:
                level[q] = top
            continue
        for q in g.qubits:
            level[q] = top + 1
        if g.arity == 1:
            n1 += 1
        else:
            n2 += 1
    return CircuitStats(max(level, default=0), n1, n2, len(c.active_qubits))


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    """True when a = e^{i g} b for some global phase g."""
    if a.shape != b.shape:
        return False
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[idx]) < atol:
        return bool(np.allclose(a, b, atol=atol))
    phase = a[idx] / b[idx]
    if not math.isclose(abs(phase), 1.0, abs_tol=atol):
        return False
    return bool(np.allclose(a, phase * b, atol=atol))
