"""SWAP-insertion routing, native-gate translation and a small peephole pass."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .circuit import Circuit, Gate
from .errors import ValidationError
from .topology import Topology

PI = math.pi
TWO_PI = 2 * math.pi

GATESETS: dict[str, frozenset[str]] = {
    "iqm": frozenset({"prx", "cz"}),
    "ibmq": frozenset({"u1", "u2", "u3", "cx"}),
}


def native_gateset(tag: str) -> frozenset[str]:
    try:
        return GATESETS[tag.lower()]
    except KeyError:
        raise ValidationError(f"unknown gateset {tag!r}; expected one of {sorted(GATESETS)}") from None


@dataclass(frozen=True)
class RoutedCircuit:
    """A circuit over physical qubits plus the logical -> physical layouts.

    ``permutation[p]`` is the physical qubit that ends up holding the state that
    started on physical qubit ``p``; it covers routing ancillas as well.
    """

    circuit: Circuit
    initial_layout: dict[int, int]
    final_layout: dict[int, int]
    permutation: tuple[int, ...]
    swaps: int = 0

    def two_qubit_edges(self) -> list[tuple[int, int]]:
        return [tuple(sorted(g.qubits)) for g in self.circuit.gates
                if g.is_unitary and g.arity == 2]


def check_edges(c: Circuit, t: Topology) -> list[Gate]:
    """2-qubit gates that do not sit on a coupling-graph edge."""
    return [g for g in c.gates if g.is_unitary and g.arity == 2 and not t.has_edge(*g.qubits)]


# --- routing -----------------------------------------------------------------


def _full_layout(initial: Mapping[int, int] | Sequence[int] | None, n_logical: int,
                 n_physical: int) -> list[int]:
    if initial is None:
        return list(range(n_physical))
    items = dict(initial) if isinstance(initial, Mapping) else dict(enumerate(initial))
    if sorted(items) != list(range(n_logical)):
        raise ValidationError("initial layout must map every logical qubit exactly once")
    phys = list(items.values())
    if len(set(phys)) != len(phys) or not all(0 <= p < n_physical for p in phys):
        raise ValidationError("initial layout must be injective onto physical qubits")
    spare = [p for p in range(n_physical) if p not in set(phys)]
    return [items[q] for q in range(n_logical)] + spare


WALKERS = ("first", "idle")


def route(c: Circuit, t: Topology, seed: int | None = None,
          initial_layout: Mapping[int, int] | Sequence[int] | None = None,
          walker: str = "first") -> RoutedCircuit:
    """Greedy SWAP insertion along shortest paths.

    For an uncoupled 2-qubit gate one operand walks toward the other: the first
    operand with ``walker="first"``, or with ``walker="idle"`` the one whose
    physical qubit has the shallower ASAP layer so far (first on ties). Among
    equally short continuations the lowest physical index wins; a ``seed``
    replaces that rule by a seeded random choice. Measurements are emitted at
    the end against the final layout.
    """
    if walker not in WALKERS:
        raise ValidationError(f"walker must be one of {WALKERS}, got {walker!r}")
    if c.num_qubits > t.num_qubits:
        raise ValidationError(
            f"circuit needs {c.num_qubits} qubits but the device has {t.num_qubits}")
    rng = random.Random(seed) if seed is not None else None
    l2p = _full_layout(initial_layout, c.num_qubits, t.num_qubits)
    p2l = [0] * t.num_qubits
    for lq, pq in enumerate(l2p):
        p2l[pq] = lq
    # track where each physical qubit's original content went
    content = list(range(t.num_qubits))  # content[p] = original physical slot now at p
    start = {q: l2p[q] for q in range(c.num_qubits)}
    out: list[Gate] = []
    measures: list[Gate] = []
    nswaps = 0
    level = [0] * t.num_qubits
    for g in c.gates:
        if g.name == "measure":
            measures.append(g)
            continue
        if g.arity == 2 and g.is_unitary:
            a, b = g.qubits
            if walker == "idle" and level[l2p[b]] < level[l2p[a]]:
                a, b = b, a
            dist = t.distances_from(l2p[b])
            while dist[l2p[a]] > 1:
                pa = l2p[a]
                options = [v for v in t.adjacency[pa] if dist[v] == dist[pa] - 1]
                nxt = rng.choice(options) if rng else options[0]
                out.append(Gate("swap", (pa, nxt)))
                nswaps += 1
                la, lb = p2l[pa], p2l[nxt]
                l2p[la], l2p[lb] = nxt, pa
                p2l[pa], p2l[nxt] = lb, la
                content[pa], content[nxt] = content[nxt], content[pa]
                level[pa] = level[nxt] = max(level[pa], level[nxt]) + 1
        out.append(g.remap(l2p))
        phys = out[-1].qubits
        top = max(level[p] for p in phys) + (0 if g.name == "barrier" else 1)
        for p in phys:
            level[p] = top
    for m in measures:
        out.append(Gate("measure", (l2p[m.qubits[0]],), clbit=m.clbit))
    perm = [0] * t.num_qubits
    for p, orig in enumerate(content):
        perm[orig] = p
    routed = Circuit(t.num_qubits, out, c.num_clbits, c.name)
    final = {q: l2p[q] for q in range(c.num_qubits)}
    return RoutedCircuit(routed, start, final, tuple(perm), nswaps)


# --- decomposition -----------------------------------------------------------

Rule = Callable[[Gate], list[Gate]]


def _prx(q: int, theta: float, phi: float) -> Gate:
    return Gate("prx", (q,), (theta, phi))


def _iqm_rz(q: int, theta: float) -> list[Gate]:
    # prx(pi, theta/2) . prx(pi, 0) = -rz(theta)
    return [_prx(q, PI, 0.0), _prx(q, PI, theta / 2)]


def _iqm_u3(q: int, theta: float, phi: float, lam: float) -> list[Gate]:
    # u3 = rz(phi + lam) . prx(theta, pi/2 - lam) up to phase
    gates = [_prx(q, theta, PI / 2 - lam)] if theta != 0.0 else []
    if math.remainder(phi + lam, TWO_PI) != 0.0:
        gates += _iqm_rz(q, phi + lam)
    return gates


def _iqm_h(q: int) -> list[Gate]:
    return [_prx(q, PI / 2, PI / 2), _prx(q, PI, 0.0)]


def _iqm_cx(c: int, t: int) -> list[Gate]:
    return _iqm_h(t) + [Gate("cz", (c, t))] + _iqm_h(t)


_IQM_RULES: dict[str, Rule] = {
    "x": lambda g: [_prx(g.qubits[0], PI, 0.0)],
    "y": lambda g: [_prx(g.qubits[0], PI, PI / 2)],
    "z": lambda g: _iqm_rz(g.qubits[0], PI),
    "h": lambda g: _iqm_h(g.qubits[0]),
    "rz": lambda g: _iqm_rz(g.qubits[0], g.params[0]),
    "u1": lambda g: _iqm_rz(g.qubits[0], g.params[0]),
    "u2": lambda g: _iqm_u3(g.qubits[0], PI / 2, *g.params),
    "u3": lambda g: _iqm_u3(g.qubits[0], *g.params),
    "cx": lambda g: _iqm_cx(*g.qubits),
    "swap": lambda g: (_iqm_cx(*g.qubits) + _iqm_cx(*reversed(g.qubits))
                       + _iqm_cx(*g.qubits)),
}


def _u2(q: int, phi: float, lam: float) -> Gate:
    return Gate("u2", (q,), (phi, lam))


def _u3(q: int, theta: float, phi: float, lam: float) -> Gate:
    return Gate("u3", (q,), (theta, phi, lam))


_IBM_RULES: dict[str, Rule] = {
    "prx": lambda g: [_u3(g.qubits[0], g.params[0], g.params[1] - PI / 2, PI / 2 - g.params[1])],
    "x": lambda g: [_u3(g.qubits[0], PI, 0.0, PI)],
    "y": lambda g: [_u3(g.qubits[0], PI, PI / 2, PI / 2)],
    "z": lambda g: [Gate("u1", g.qubits, (PI,))],
    "h": lambda g: [_u2(g.qubits[0], 0.0, PI)],
    "rz": lambda g: [Gate("u1", g.qubits, g.params)],
    "cz": lambda g: [_u2(g.qubits[1], 0.0, PI), Gate("cx", g.qubits), _u2(g.qubits[1], 0.0, PI)],
    "swap": lambda g: [Gate("cx", g.qubits), Gate("cx", g.qubits[::-1]), Gate("cx", g.qubits)],
}

_RULES = {"iqm": _IQM_RULES, "ibmq": _IBM_RULES}


def decompose(c: Circuit, gateset: str) -> Circuit:
    """Rewrite every non-native unitary gate; measurements and barriers pass through."""
    native = native_gateset(gateset)
    rules = _RULES[gateset.lower()]
    out: list[Gate] = []
    for g in c.gates:
        if not g.is_unitary or g.name in native:
            out.append(g)
        elif g.name in rules:
            out.extend(rules[g.name](g))
        else:
            raise ValidationError(f"no {gateset} decomposition rule for gate {g.name!r}")
    return Circuit(c.num_qubits, out, c.num_clbits, c.name)


def _same_angle(a: float, b: float, tol: float = 1e-12) -> bool:
    return abs(math.remainder(a - b, TWO_PI)) <= tol


def merge_rotations(c: Circuit) -> Circuit:
    """Merge back-to-back prx with a common axis (and u1 pairs); drop identities."""
    out: list[Gate | None] = []
    last: dict[int, int] = {}  # qubit -> index in `out` of its latest gate
    for g in c.gates:
        if g.name in ("prx", "u1") and g.qubits[0] in last:
            q = g.qubits[0]
            prev = out[last[q]]
            if prev is not None and prev.name == g.name:
                if g.name == "prx" and _same_angle(prev.params[1], g.params[1]):
                    merged = Gate("prx", (q,), (prev.params[0] + g.params[0], prev.params[1]))
                elif g.name == "u1":
                    merged = Gate("u1", (q,), (prev.params[0] + g.params[0],))
                else:
                    merged = None
                if merged is not None:
                    out[last[q]] = merged
                    continue
        out.append(g)
        for q in g.qubits:
            last[q] = len(out) - 1
    kept = []
    for g in out:
        if g.name in ("prx", "u1") and abs(math.remainder(g.params[0], TWO_PI)) <= 1e-12:
            continue
        kept.append(g)
    return Circuit(c.num_qubits, kept, c.num_clbits, c.name)


def compile_circuit(c: Circuit, t: Topology, gateset: str = "iqm", seed: int | None = None,
                    initial_layout=None, optimize: bool = True, walker: str = "first"
                    ) -> RoutedCircuit:
    """route, then decompose, then (optionally) the peephole pass."""
    native_gateset(gateset)
    routed = route(c, t, seed=seed, initial_layout=initial_layout, walker=walker)
    native = decompose(routed.circuit, gateset)
    if optimize:
        native = merge_rotations(native)
    return RoutedCircuit(native, routed.initial_layout, routed.final_layout,
                         routed.permutation, routed.swaps)
