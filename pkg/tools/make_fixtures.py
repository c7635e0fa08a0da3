"""Regenerate the bundled benchmark QASM files under src/qtwin/data/circuits.

GHZ-n fixtures are real compilations of ``ghz_circuit(n)`` onto IQM-20: a seeded
search over initial layouts, routing walker and SWAP operand order picks the
compilation whose (qubits, depth, 1q, 2q) signature matches the reference
table. RU, QAOA and QW-n are synthetic stand-ins: seeded random native circuits
built gate by gate so that their signature matches exactly.

    python3 tools/make_fixtures.py [--check]
"""

from __future__ import annotations

import argparse
import math
import random
import sys
from pathlib import Path

from qtwin.bench import FIXTURES, FixtureInfo, ghz_circuit
from qtwin.circuit import Circuit, Gate, circuit_stats
from qtwin.compiler import check_edges, decompose, route
from qtwin.qasm import parse_qasm, serialize_qasm
from qtwin.topology import Topology, bundled_topology

OUT = Path(__file__).resolve().parents[1] / "src" / "qtwin" / "data" / "circuits"
SEED = 2024


def _chain_layout(rng: random.Random, topo: Topology, n: int) -> list[int]:
    d = topo.distance_matrix
    while True:
        lay = [rng.randrange(topo.num_qubits)]
        while len(lay) < n:
            opts = [v for v in range(topo.num_qubits) if v not in lay and d[lay[-1]][v] in (1, 2)]
            if not opts:
                break
            lay.append(rng.choice(opts))
        if len(lay) == n:
            return lay


def compile_ghz(info: FixtureInfo, topo: Topology, tries: int = 200_000) -> tuple[Circuit, str]:
    n = int(info.name.split("-")[1])
    logical = ghz_circuit(n)
    rng = random.Random(SEED + n)
    target = info.signature()
    for _ in range(tries):
        lay = _chain_layout(rng, topo, n) if rng.random() < 0.7 else rng.sample(
            range(topo.num_qubits), n)
        walker = rng.choice(("first", "idle"))
        routed = route(logical, topo, initial_layout=lay, walker=walker)
        flips = []
        gates = []
        for g in routed.circuit.gates:
            if g.name == "swap" and rng.random() < 0.5:
                g = Gate("swap", g.qubits[::-1])
                flips.append(True)
            elif g.name == "swap":
                flips.append(False)
            gates.append(g)
        native = decompose(Circuit(topo.num_qubits, gates, routed.circuit.num_clbits), "iqm")
        if circuit_stats(native).as_dict() == target:
            note = (f"compiled from ghz_circuit({n}); initial layout {lay}, walker {walker}, "
                    f"swap orientation flips {flips}")
            return native, note
    raise RuntimeError(f"no compilation of {info.name} matches {target}")


def _connected_subset(topo: Topology, k: int, start: int = 0) -> list[int]:
    order, seen = [start], {start}
    i = 0
    while len(order) < k:
        for v in topo.adjacency[order[i]]:
            if v not in seen and len(order) < k:
                seen.add(v)
                order.append(v)
        i += 1
    return sorted(order)


def _random_1q(rng: random.Random, q: int, gateset: str) -> Gate:
    ang = lambda: round(rng.uniform(0.05, 2 * math.pi - 0.05), 6)  # noqa: E731
    if gateset == "iqm":
        return Gate("prx", (q,), (ang(), ang()))
    kind = rng.choice(("u1", "u2", "u3"))
    return Gate(kind, (q,), tuple(ang() for _ in range({"u1": 1, "u2": 2, "u3": 3}[kind])))


def synth(info: FixtureInfo, topo: Topology, qubits: list[int], gateset: str,
          seed: int) -> Circuit | None:
    """Build gates one at a time; a gate is 'critical' when it deepens the circuit.

    Exactly ``depth`` gates are critical, spread at random; a non-critical gate
    is placed only on operands whose layer is below the current depth.
    """
    rng = random.Random(seed)
    edges = [e for e in topo.sorted_edges() if e[0] in qubits and e[1] in qubits]
    kinds = [1] * info.count_1q + [2] * info.count_2q
    rng.shuffle(kinds)
    level = {q: 0 for q in qubits}
    depth, unused = 0, set(qubits)
    gates: list[Gate] = []
    twoq = "cz" if gateset == "iqm" else "cx"
    for i, kind in enumerate(kinds):
        left = len(kinds) - i
        need = info.depth - depth
        if need > left:
            return None
        crit = need == left or (need > 0 and (depth == 0 or rng.random() < need / left))

        def ok(ops: tuple[int, ...]) -> bool:
            top = max(level[q] for q in ops)
            return top == depth if crit else top + 1 <= depth

        if kind == 1:
            cands = [(q,) for q in qubits if ok((q,))]
        else:
            cands = [e for e in edges if ok(e)]
        if not cands:
            crit = not crit
            if (crit and need == 0) or (not crit and need == left):
                return None
            cands = [(q,) for q in qubits if ok((q,))] if kind == 1 else [e for e in edges if ok(e)]
            if not cands:
                return None
        fresh = [c for c in cands if unused & set(c)]
        ops = rng.choice(fresh if fresh and rng.random() < 0.8 else cands)
        if kind == 2 and rng.random() < 0.5:
            ops = ops[::-1]
        g = _random_1q(rng, ops[0], gateset) if kind == 1 else Gate(twoq, tuple(ops))
        gates.append(g)
        top = max(level[q] for q in ops) + 1
        for q in ops:
            level[q] = top
        depth = max(depth, top)
        unused -= set(ops)
    if unused:
        return None
    gates += [Gate("measure", (q,), clbit=i) for i, q in enumerate(qubits)]
    c = Circuit(topo.num_qubits, gates, len(qubits), info.name)
    return c if circuit_stats(c).as_dict() == info.signature() else None


def synth_fixture(info: FixtureInfo) -> tuple[Circuit, str]:
    if info.device == "iqm20":
        topo, gateset = bundled_topology("iqm20"), "iqm"
        qubits = [3, 4, 8, 9, 14]
    else:
        topo, gateset = bundled_topology("melbourne"), "ibmq"
        qubits = _connected_subset(topo, info.qubits)
    for attempt in range(10_000):
        seed = SEED * 1000 + attempt
        c = synth(info, topo, qubits, gateset, seed)
        if c is not None:
            return c, f"synthetic stand-in, {gateset} gates on qubits {qubits}, seed {seed}"
    raise RuntimeError(f"could not synthesise {info.name}")


def build() -> dict[str, str]:
    files = {}
    iqm = bundled_topology("iqm20")
    for info in FIXTURES:
        if info.name.startswith("GHZ"):
            c, note = compile_ghz(info, iqm)
            n = int(info.name.split("-")[1])
            files[f"ghz-{n}_logical.qasm"] = serialize_qasm(
                ghz_circuit(n), header=f"{info.name} logical source")
        else:
            c, note = synth_fixture(info)
        topo = iqm if info.device == "iqm20" else bundled_topology("melbourne")
        assert not check_edges(c, topo)
        files[f"{info.name.lower()}.qasm"] = serialize_qasm(c, header=f"{info.name}: {note}")
    return files


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true",
                    help="verify bundled files against the reference signatures instead of writing")
    args = ap.parse_args(argv)
    if args.check:
        bad = 0
        for info in FIXTURES:
            c = parse_qasm((OUT / f"{info.name.lower()}.qasm").read_text())
            got = circuit_stats(c).as_dict()
            if got != info.signature():
                print(f"{info.name}: {got} != {info.signature()}")
                bad += 1
        return 1 if bad else 0
    OUT.mkdir(parents=True, exist_ok=True)
    for name, text in build().items():
        (OUT / name).write_text(text)
        print("wrote", name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
