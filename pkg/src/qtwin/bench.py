"""Benchmark circuits, bundled fixtures and the mode-comparison suite."""

from __future__ import annotations

import time
from dataclasses import dataclass
from importlib import resources

from .calibration import CalibrationData, bundled_calibration
from .circuit import Circuit, Gate, circuit_stats
from .engine import simulate
from .errors import ResourceCapError, ValidationError
from .metrics import hellinger, hellinger_std
from .qasm import parse_qasm


@dataclass(frozen=True)
class FixtureInfo:
    name: str
    qubits: int
    depth: int
    count_1q: int
    count_2q: int
    device: str  # bundled calibration used for the suite

    def signature(self) -> dict[str, int]:
        return {"qubits": self.qubits, "depth": self.depth,
                "count_1q": self.count_1q, "count_2q": self.count_2q}


# name, active qubits, depth, 1-qubit gates, 2-qubit gates, device
FIXTURES: tuple[FixtureInfo, ...] = tuple(FixtureInfo(*row) for row in (
    ("GHZ-2", 2, 5, 6, 1, "iqm20"),
    ("GHZ-3", 4, 16, 22, 5, "iqm20"),
    ("GHZ-4", 4, 19, 26, 6, "iqm20"),
    ("GHZ-5", 5, 20, 30, 7, "iqm20"),
    ("GHZ-6", 6, 36, 46, 11, "iqm20"),
    ("GHZ-7", 7, 46, 62, 15, "iqm20"),
    ("RU", 5, 33, 48, 13, "iqm20"),
    ("QAOA", 5, 87, 110, 37, "iqm20"),
    ("QW-2", 4, 44, 19, 35, "melbourne"),
    ("QW-3", 6, 194, 83, 178, "melbourne"),
    ("QW-4", 11, 409, 175, 423, "melbourne"),
    ("QW-5", 14, 733, 297, 811, "melbourne"),
    ("QW-6", 15, 1062, 449, 1137, "melbourne"),
))
FIXTURE_NAMES = tuple(f.name for f in FIXTURES)


def fixture_info(name: str) -> FixtureInfo:
    for f in FIXTURES:
        if f.name.lower() == name.lower():
            return f
    raise ValidationError(f"unknown fixture {name!r}; expected one of {', '.join(FIXTURE_NAMES)}")


def ghz_circuit(n: int) -> Circuit:
    """H on qubit 0, CNOT chain 0->1->...->n-1, every qubit measured."""
    if n < 2:
        raise ValidationError(f"GHZ circuit needs n >= 2, got {n}")
    gates = [Gate("h", (0,))] + [Gate("cx", (i, i + 1)) for i in range(n - 1)]
    gates += [Gate("measure", (i,)) for i in range(n)]
    return Circuit(n, gates, name=f"GHZ-{n}")


def _read(fname: str) -> str:
    try:
        return resources.files("qtwin.data.circuits").joinpath(fname).read_text()
    except FileNotFoundError:
        raise ValidationError(f"fixture file {fname} is not bundled") from None


def load_fixture(name: str) -> Circuit:
    """Compiled, native benchmark circuit on the physical register of its device."""
    info = fixture_info(name)
    c = parse_qasm(_read(f"{info.name.lower()}.qasm"))
    return Circuit(c.num_qubits, c.gates, c.num_clbits, info.name)


def load_logical(name: str) -> Circuit:
    """Device-independent source of a GHZ benchmark."""
    info = fixture_info(name)
    if not info.name.startswith("GHZ"):
        raise ValidationError(f"no logical source is bundled for {info.name}")
    c = parse_qasm(_read(f"{info.name.lower()}_logical.qasm"))
    return Circuit(c.num_qubits, c.gates, c.num_clbits, info.name)


def select_fixtures(only: str | None = None) -> list[FixtureInfo]:
    """All fixtures, or those whose name starts with one of the comma-separated prefixes."""
    if not only:
        return list(FIXTURES)
    wanted = [w.strip().lower() for w in only.split(",") if w.strip()]
    picked = [f for f in FIXTURES if any(f.name.lower().startswith(w) for w in wanted)]
    if not picked:
        raise ValidationError(f"--only {only!r} matches no fixture")
    return picked


@dataclass(frozen=True)
class BenchRow:
    name: str
    stats: dict[str, int]
    status: str  # "ok" or "skipped: <reason>"
    hellinger_modes: float | None = None
    hellinger_sampling_mean: float | None = None
    hellinger_sampling_std: float | None = None
    runtime_s: dict[str, float] | None = None
    peak_bytes: int | None = None

    def report_dict(self) -> dict:
        """Deterministic part of the row (no timings)."""
        return {"circuit": self.name, **self.stats, "status": self.status,
                "hellinger_paper_vs_unm_style": self.hellinger_modes,
                "sampling_hellinger_mean": self.hellinger_sampling_mean,
                "sampling_hellinger_std": self.hellinger_sampling_std}


def run_suite(fixtures: list[FixtureInfo], seed: int = 0, shots: int = 10000,
              repetitions: int = 50, max_qubits: int = 15,
              calibrations: dict[str, CalibrationData] | None = None,
              precision: str = "double") -> list[BenchRow]:
    """Simulate each fixture in ``paper`` and ``unm_style`` mode and compare them."""
    from .engine import required_bytes

    cals = dict(calibrations or {})
    rows = []
    for info in fixtures:
        c = load_fixture(info.name)
        stats = circuit_stats(c).as_dict()
        cal = cals.get(info.device) or cals.setdefault(info.device, bundled_calibration(info.device))
        dists, times = {}, {}
        try:
            for mode in ("paper", "unm_style"):
                t0 = time.perf_counter()
                dists[mode] = simulate(c, cal, mode, max_qubits=max_qubits, precision=precision)
                times[mode] = time.perf_counter() - t0
        except ResourceCapError as exc:
            rows.append(BenchRow(info.name, stats, f"skipped: {exc}"))
            continue
        spread = hellinger_std(dists["paper"], shots, repetitions, seed)
        rows.append(BenchRow(info.name, stats, "ok",
                             hellinger(dists["paper"], dists["unm_style"]),
                             spread.hellinger_mean, spread.hellinger_std, times,
                             required_bytes(stats["qubits"], precision)))
    return rows
