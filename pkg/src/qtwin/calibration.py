"""Per-qubit and per-pair noise parameters that instantiate a device twin.

Units inside the data model: T1/T2 in microseconds, gate times in integer
nanoseconds, fidelities and readout errors as plain probabilities.
"""

from __future__ import annotations

import hashlib
import json
import math
import statistics
import warnings
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from .errors import ParseError, ValidationError
from .topology import Topology, resolve_topology

QUBIT_FIELDS = ("t1", "t2", "fidelity_1q", "eps_meas_0", "eps_meas_1", "gate_time_1q")
PAIR_FIELDS = ("fidelity_2q", "gate_time_2q")


class CalibrationWarning(UserWarning):
    pass


def _check_gate_time(value, what: str) -> int:
    if isinstance(value, bool) or not float(value).is_integer() or value < 0:
        raise ValidationError(f"{what} must be a non-negative integer number of ns, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class QubitCalibration:
    t1: float
    t2: float
    fidelity_1q: float
    eps_meas_0: float
    eps_meas_1: float
    gate_time_1q: int = 20

    def __post_init__(self) -> None:
        for name in ("t1", "t2"):
            v = getattr(self, name)
            if not (v > 0):
                raise ValidationError(f"{name} must be positive, got {v!r}")
        if not (0 < self.fidelity_1q <= 1):
            raise ValidationError(f"fidelity_1q must lie in (0, 1], got {self.fidelity_1q!r}")
        for name in ("eps_meas_0", "eps_meas_1"):
            v = getattr(self, name)
            if not (0 <= v < 1):
                raise ValidationError(f"{name} must lie in [0, 1), got {v!r}")
        object.__setattr__(self, "gate_time_1q", _check_gate_time(self.gate_time_1q, "gate_time_1q"))
        if self.t2 > 2 * self.t1:
            warnings.warn(f"T2={self.t2} exceeds 2*T1={2 * self.t1}; pure dephasing time is "
                          "undefined", CalibrationWarning, stacklevel=3)

    @property
    def t_phi(self) -> float:
        """Pure dephasing time from 1/T2 = 1/(2 T1) + 1/T_phi (inf when T2 >= 2 T1)."""
        rate = 1 / self.t2 - 1 / (2 * self.t1)
        return math.inf if rate <= 0 else 1 / rate


@dataclass(frozen=True)
class PairCalibration:
    fidelity_2q: float
    gate_time_2q: int = 40

    def __post_init__(self) -> None:
        if not (0 < self.fidelity_2q <= 1):
            raise ValidationError(f"fidelity_2q must lie in (0, 1], got {self.fidelity_2q!r}")
        object.__setattr__(self, "gate_time_2q", _check_gate_time(self.gate_time_2q, "gate_time_2q"))


def _pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class CalibrationData:
    qubits: Mapping[int, QubitCalibration]
    pairs: Mapping[tuple[int, int], PairCalibration]
    topology: Topology
    gateset: str = "iqm"
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", dict(sorted(self.qubits.items())))
        object.__setattr__(self, "pairs",
                           dict(sorted((_pair(*k), v) for k, v in self.pairs.items())))
        missing = [q for q in range(self.topology.num_qubits) if q not in self.qubits]
        if missing:
            raise ValidationError(f"missing calibration record for qubit(s) {missing}")
        extra = [q for q in self.qubits if not 0 <= q < self.topology.num_qubits]
        if extra:
            raise ValidationError(f"calibration for qubit(s) {extra} outside the topology")
        for e in self.topology.sorted_edges():
            if e not in self.pairs:
                raise ValidationError(f"missing calibration record for pair {e}")
        for p in self.pairs:
            if not self.topology.has_edge(*p):
                raise ValidationError(f"pair {p} is not an edge of the topology")

    def qubit(self, q: int) -> QubitCalibration:
        try:
            return self.qubits[q]
        except KeyError:
            raise ValidationError(f"no calibration for qubit {q}") from None

    def pair(self, a: int, b: int) -> PairCalibration:
        try:
            return self.pairs[_pair(a, b)]
        except KeyError:
            raise ValidationError(f"no calibration for qubit pair ({a}, {b})") from None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "gateset": self.gateset,
            "topology": self.topology.to_dict(),
            "qubits": [{"id": q, **asdict(c)} for q, c in self.qubits.items()],
            "pairs": [{"qubits": list(p), **asdict(c)} for p, c in self.pairs.items()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def relabel(self, mapping: Mapping[int, int]) -> CalibrationData:
        """Move record of qubit q to mapping[q] (a permutation of all qubits)."""
        topo = Topology(self.topology.num_qubits,
                        [(mapping[a], mapping[b]) for a, b in self.topology.edges],
                        self.topology.name)
        return CalibrationData({mapping[q]: c for q, c in self.qubits.items()},
                               {_pair(mapping[a], mapping[b]): c for (a, b), c in self.pairs.items()},
                               topo, self.gateset, self.name)


def calibration_from_dict(data: dict, strict: bool = True) -> CalibrationData:
    if not isinstance(data, dict):
        raise ValidationError("calibration document must be a JSON object")
    known = {"name", "gateset", "topology", "qubits", "pairs", "defaults"}
    if strict and set(data) - known:
        raise ValidationError(f"unknown top-level field(s) {sorted(set(data) - known)}")
    defaults = data.get("defaults", {})
    try:
        topo_spec = data["topology"]
        topology = (Topology.from_dict(topo_spec) if isinstance(topo_spec, dict)
                    else resolve_topology(topo_spec))
        qubits = {}
        for rec in data["qubits"]:
            rec = dict(rec)
            q = int(rec.pop("id"))
            if strict and set(rec) - set(QUBIT_FIELDS):
                raise ValidationError(f"qubit {q}: unknown field(s) {sorted(set(rec) - set(QUBIT_FIELDS))}")
            if q in qubits:
                raise ValidationError(f"duplicate record for qubit {q}")
            kw = {k: rec[k] for k in QUBIT_FIELDS if k in rec}
            if "gate_time_1q" not in kw and "gate_time_1q" in defaults:
                kw["gate_time_1q"] = defaults["gate_time_1q"]
            try:
                qubits[q] = QubitCalibration(**kw)
            except TypeError as exc:
                raise ValidationError(f"qubit {q}: {exc}") from exc
        pairs = {}
        for rec in data.get("pairs", []):
            rec = dict(rec)
            a, b = rec.pop("qubits")
            if strict and set(rec) - set(PAIR_FIELDS):
                raise ValidationError(f"pair ({a}, {b}): unknown field(s) {sorted(set(rec) - set(PAIR_FIELDS))}")
            kw = {k: rec[k] for k in PAIR_FIELDS if k in rec}
            if "gate_time_2q" not in kw and "gate_time_2q" in defaults:
                kw["gate_time_2q"] = defaults["gate_time_2q"]
            key = _pair(int(a), int(b))
            if key in pairs:
                raise ValidationError(f"duplicate record for pair {key}")
            try:
                pairs[key] = PairCalibration(**kw)
            except TypeError as exc:
                raise ValidationError(f"pair {key}: {exc}") from exc
    except KeyError as exc:
        raise ValidationError(f"calibration document lacks field {exc}") from exc
    gateset = data.get("gateset", "iqm")
    if gateset not in ("iqm", "ibmq"):
        raise ValidationError(f"unknown gateset {gateset!r}")
    return CalibrationData(qubits, pairs, topology, gateset, data.get("name", ""))


def load_calibration(path: str | Path, strict: bool = True) -> CalibrationData:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg})", exc.lineno, exc.colno) from None
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    return calibration_from_dict(data, strict=strict)


def bundled_calibration(name: str = "iqm20") -> CalibrationData:
    """``iqm20`` (per-qubit snapshot), ``iqm20-mean`` or ``melbourne`` (uniform averages)."""
    key = name.lower()
    if key in ("iqm20", "iqm"):
        text = resources.files("qtwin.data").joinpath("calibration_iqm20.json").read_text()
        return calibration_from_dict(json.loads(text))
    if key in ("iqm20-mean", "iqm-mean"):
        return iqm_mean_profile()
    if key in ("melbourne", "ibmq", "ibmq_melbourne"):
        return melbourne_profile()
    raise ValidationError(f"unknown bundled calibration {name!r}")


def resolve_calibration(spec: str | Path, strict: bool = True) -> CalibrationData:
    p = Path(spec)
    if p.suffix == ".json" or p.exists():
        return load_calibration(p, strict=strict)
    return bundled_calibration(str(spec))


def uniform_calibration(n: int | Topology, qubit: QubitCalibration, fidelity_2q: float,
                        gate_time_2q: int, gateset: str = "iqm", name: str = "") -> CalibrationData:
    """Identical parameters on every qubit and edge. An int ``n`` builds a line of n qubits."""
    if isinstance(n, Topology):
        topology = n
    else:
        if n < 1:
            raise ValidationError("uniform calibration needs at least one qubit")
        topology = Topology(n, [(i, i + 1) for i in range(n - 1)], name=f"line-{n}")
    pair = PairCalibration(fidelity_2q, gate_time_2q)
    return CalibrationData({q: qubit for q in range(topology.num_qubits)},
                           {e: pair for e in topology.edges}, topology, gateset, name)


def melbourne_profile() -> CalibrationData:
    from .topology import bundled_topology

    q = QubitCalibration(t1=56.15, t2=56.01, fidelity_1q=0.9999, eps_meas_0=0.0761,
                         eps_meas_1=0.0761, gate_time_1q=100)
    return uniform_calibration(bundled_topology("melbourne"), q, 0.9683, 500, gateset="ibmq",
                               name="IBM-Q-Melbourne (averages)")


def iqm_mean_profile() -> CalibrationData:
    from .topology import bundled_topology

    q = QubitCalibration(t1=41.8, t2=3.2, fidelity_1q=0.9985, eps_meas_0=0.0266,
                         eps_meas_1=0.0509, gate_time_1q=20)
    return uniform_calibration(bundled_topology("iqm20"), q, 0.9859, 40, gateset="iqm",
                               name="IQM-20 (mean profile)")


# --- summaries ---------------------------------------------------------------

SUMMARY_PARAMETERS = ("fidelity_1q", "fidelity_2q", "gate_time_1q", "gate_time_2q",
                      "t1", "t2", "eps_meas_0", "eps_meas_1")


def _values(c: CalibrationData, param: str) -> list[float]:
    if param in PAIR_FIELDS:
        return [getattr(p, param) for p in c.pairs.values()]
    return [getattr(q, param) for q in c.qubits.values()]


def summary_stats(c: CalibrationData) -> dict[str, dict[str, float]]:
    """Mean and median per parameter: qubit parameters over qubits, pair ones over edges."""
    out = {}
    for param in SUMMARY_PARAMETERS:
        vals = _values(c, param)
        if vals:
            out[param] = {"mean": statistics.fmean(vals), "median": statistics.median(vals),
                          "count": len(vals)}
    return out


def cumulative_distribution(c: CalibrationData, param: str) -> list[tuple[float, float]]:
    """Empirical CDF as (value, fraction <= value) rows.

    Besides the raw parameters, ``error_1q``, ``error_2q``, ``readout_0`` and
    ``readout_1`` give the error-rate views used for CDF plots.
    """
    views = {"error_1q": ("fidelity_1q", True), "error_2q": ("fidelity_2q", True),
             "readout_0": ("eps_meas_0", False), "readout_1": ("eps_meas_1", False)}
    base, invert = views.get(param, (param, False))
    vals = sorted(1 - v if invert else v for v in _values(c, base))
    n = len(vals)
    return [(v, (i + 1) / n) for i, v in enumerate(vals)]
