"""Device coupling graphs and the bundled IQM-20 / IBM Q Melbourne layouts."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class Topology:
    num_qubits: int
    edges: frozenset[tuple[int, int]]
    name: str = ""

    def __init__(self, num_qubits: int, edges, name: str = "", require_connected: bool = True):
        norm = set()
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValidationError(f"self-loop on qubit {a}")
            if not (0 <= a < num_qubits and 0 <= b < num_qubits):
                raise ValidationError(f"edge ({a}, {b}) outside 0..{num_qubits - 1}")
            norm.add((min(a, b), max(a, b)))
        if num_qubits < 1:
            raise ValidationError("topology needs at least one qubit")
        object.__setattr__(self, "num_qubits", int(num_qubits))
        object.__setattr__(self, "edges", frozenset(norm))
        object.__setattr__(self, "name", name)
        if require_connected and not self.is_connected():
            raise ValidationError("coupling graph is not connected")

    def __hash__(self) -> int:
        return hash((self.num_qubits, self.edges))

    def __eq__(self, other) -> bool:
        return (isinstance(other, Topology) and self.num_qubits == other.num_qubits
                and self.edges == other.edges)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.num_qubits)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return tuple(tuple(sorted(n)) for n in adj)

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def distances_from(self, source: int) -> list[int]:
        dist = [-1] * self.num_qubits
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in self.adjacency[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    @cached_property
    def distance_matrix(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(self.distances_from(q)) for q in range(self.num_qubits))

    def is_connected(self) -> bool:
        return all(d >= 0 for d in self.distances_from(0))

    def to_dict(self) -> dict:
        return {"name": self.name, "num_qubits": self.num_qubits,
                "edges": [list(e) for e in self.sorted_edges()]}

    @classmethod
    def from_dict(cls, data: dict) -> Topology:
        try:
            return cls(data["num_qubits"], [tuple(e) for e in data["edges"]], data.get("name", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed topology document: {exc}") from exc


def square_grid(rows: int, cols: int) -> Topology:
    """Row-major grid: qubit r*cols + c couples to its right and lower neighbours."""
    if rows < 1 or cols < 1:
        raise ValidationError("grid dimensions must be positive")
    edges = []
    for r in range(rows):
        for c in range(cols):
            q = r * cols + c
            if c + 1 < cols:
                edges.append((q, q + 1))
            if r + 1 < rows:
                edges.append((q, q + cols))
    return Topology(rows * cols, edges, name=f"grid-{rows}x{cols}")


def load_topology(path: str | Path) -> Topology:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg})", exc.lineno, exc.colno) from None
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    return Topology.from_dict(data)


def bundled_topology(name: str) -> Topology:
    """``iqm20`` or ``melbourne`` (aliases ``ibmq``, ``ibmq_melbourne``)."""
    key = {"iqm20": "iqm20", "iqm": "iqm20", "melbourne": "melbourne",
           "ibmq": "melbourne", "ibmq_melbourne": "melbourne"}.get(name.lower())
    if key is None:
        raise ValidationError(f"unknown bundled topology {name!r}")
    text = resources.files("qtwin.data").joinpath(f"topology_{key}.json").read_text()
    return Topology.from_dict(json.loads(text))


def resolve_topology(spec: str | Path) -> Topology:
    """Path to a topology JSON, or the name of a bundled one."""
    p = Path(spec)
    if p.suffix == ".json" or p.exists():
        return load_topology(p)
    return bundled_topology(str(spec))
