"""ASAP scheduling of native circuits into per-qubit gate / idle timelines."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .calibration import CalibrationData
from .circuit import Circuit, Gate
from .errors import ValidationError


@dataclass(frozen=True)
class Interval:
    start: int
    end: int
    gate_index: int | None = None  # position in circuit.gates, None for idle

    @property
    def is_idle(self) -> bool:
        return self.gate_index is None

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Schedule:
    circuit: Circuit
    timelines: dict[int, tuple[Interval, ...]]
    total_duration: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(self.timelines)

    def gate_intervals(self) -> list[tuple[Interval, Gate]]:
        """Each timed gate once, ordered by start time and then by circuit position."""
        seen: dict[int, Interval] = {}
        for line in self.timelines.values():
            for iv in line:
                if not iv.is_idle:
                    seen[iv.gate_index] = iv
        return [(iv, self.circuit.gates[i]) for i, iv in
                sorted(seen.items(), key=lambda kv: (kv[1].start, kv[0]))]

    def idle_intervals(self) -> list[tuple[int, Interval]]:
        return [(q, iv) for q, line in self.timelines.items() for iv in line if iv.is_idle]

    def to_dict(self) -> dict:
        out = {}
        for q, line in self.timelines.items():
            out[str(q)] = [
                {"start": iv.start, "end": iv.end,
                 "kind": "idle" if iv.is_idle else self.circuit.gates[iv.gate_index].name,
                 **({} if iv.is_idle else {"gate": iv.gate_index})}
                for iv in line
            ]
        return {"total_duration_ns": self.total_duration, "qubits": out}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def gate_duration(g: Gate, cal: CalibrationData) -> int:
    if g.arity == 1:
        return cal.qubit(g.qubits[0]).gate_time_1q
    if g.arity == 2:
        return cal.pair(*g.qubits).gate_time_2q
    raise ValidationError(f"cannot time gate {g}")


def schedule_asap(c: Circuit, cal: CalibrationData) -> Schedule:
    """Start every gate as soon as its operands are free; barriers align their qubits.

    Only active qubits get a timeline. Measurements are not timed.
    """
    qubits = c.active_qubits
    free = {q: 0 for q in qubits}
    gates_on: dict[int, list[Interval]] = {q: [] for q in qubits}
    for i, g in enumerate(c.gates):
        if g.name == "measure":
            continue
        if g.name == "barrier":
            live = [q for q in g.qubits if q in free]
            if live:
                t = max(free[q] for q in live)
                for q in live:
                    free[q] = t
            continue
        dur = gate_duration(g, cal)
        start = max(free[q] for q in g.qubits)
        iv = Interval(start, start + dur, i)
        for q in g.qubits:
            gates_on[q].append(iv)
            free[q] = iv.end
    total = max((iv.end for line in gates_on.values() for iv in line), default=0)
    timelines = {}
    for q in qubits:
        line: list[Interval] = []
        t = 0
        for iv in gates_on[q]:
            if iv.start > t:
                line.append(Interval(t, iv.start))
            line.append(iv)
            t = iv.end
        if total > t:
            line.append(Interval(t, total))
        timelines[q] = tuple(line)
    return Schedule(c, timelines, total)


def idle_fraction(s: Schedule) -> dict[int, float]:
    if s.total_duration <= 0:
        raise ValidationError("idle fraction is undefined for a zero-duration schedule")
    return {q: sum(iv.length for iv in line if iv.is_idle) / s.total_duration
            for q, line in s.timelines.items()}
