from __future__ import annotations

import math
import random

import numpy as np
import pytest

from qtwin.calibration import CalibrationData, PairCalibration, QubitCalibration
from qtwin.circuit import Circuit, Gate
from qtwin.topology import Topology


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    d = 2**n
    a = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_calibration(n: int, rng: random.Random, gateset: str = "iqm",
                       topology: Topology | None = None) -> CalibrationData:
    topo = topology or Topology(n, [(i, i + 1) for i in range(n - 1)] + ([(0, n - 1)] if n > 2 else []))
    qubits = {}
    for q in range(topo.num_qubits):
        t1 = rng.uniform(5, 80)
        qubits[q] = QubitCalibration(t1=t1, t2=rng.uniform(0.5, 1.9 * t1),
                                     fidelity_1q=rng.uniform(0.98, 1.0),
                                     eps_meas_0=rng.uniform(0, 0.1), eps_meas_1=rng.uniform(0, 0.15),
                                     gate_time_1q=rng.choice((20, 35, 100)))
    pairs = {e: PairCalibration(rng.uniform(0.9, 1.0), rng.choice((40, 60, 500)))
             for e in topo.sorted_edges()}
    return CalibrationData(qubits, pairs, topo, gateset)


def random_native_circuit(cal: CalibrationData, ngates: int, rng: random.Random,
                          measure: bool = True) -> Circuit:
    n = cal.topology.num_qubits
    edges = cal.topology.sorted_edges()
    gates = []
    for _ in range(ngates):
        if edges and rng.random() < 0.35:
            a, b = rng.choice(edges)
            if rng.random() < 0.5:
                a, b = b, a
            gates.append(Gate("cz" if cal.gateset == "iqm" else "cx", (a, b)))
        else:
            q = rng.randrange(n)
            if cal.gateset == "iqm":
                gates.append(Gate("prx", (q,), (rng.uniform(-2 * math.pi, 2 * math.pi),
                                                rng.uniform(-2 * math.pi, 2 * math.pi))))
            else:
                kind = rng.choice(("u1", "u2", "u3"))
                k = {"u1": 1, "u2": 2, "u3": 3}[kind]
                gates.append(Gate(kind, (q,), tuple(rng.uniform(-math.pi, math.pi) for _ in range(k))))
    if measure:
        gates += [Gate("measure", (q,)) for q in range(n)]
    return Circuit(n, gates)


@pytest.fixture
def np_rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(mod.RESULTS):
            terminalreporter.write_line(mod.RESULTS[n])
