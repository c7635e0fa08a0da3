"""Calibration-driven noisy density-matrix simulation of superconducting devices."""

from __future__ import annotations

__version__ = "0.1.0"

from .calibration import (CalibrationData, PairCalibration, QubitCalibration, bundled_calibration,
                          load_calibration, summary_stats, uniform_calibration)
from .channels import (KrausChannel, ReadoutModel, dephasing_channel, depolarizing_channel,
                       fidelity_to_pdep, readout_confusion, relaxation_channel)
from .circuit import Circuit, Gate, circuit_stats
from .compiler import RoutedCircuit, compile_circuit, decompose, route
from .engine import DensityMatrix, OutcomeDistribution, sample, simulate
from .errors import (ParseError, QTwinError, ResourceCapError, UsageError, ValidationError)
from .qasm import load_qasm, parse_qasm, serialize_qasm
from .schedule import Schedule, schedule_asap
from .topology import Topology, bundled_topology, load_topology

__all__ = [
    "CalibrationData", "Circuit", "DensityMatrix", "Gate", "KrausChannel", "OutcomeDistribution",
    "PairCalibration", "ParseError", "QTwinError", "QubitCalibration", "ReadoutModel",
    "ResourceCapError", "RoutedCircuit", "Schedule", "Topology", "UsageError", "ValidationError",
    "__version__", "bundled_calibration", "bundled_topology", "circuit_stats", "compile_circuit",
    "decompose", "dephasing_channel", "depolarizing_channel", "fidelity_to_pdep", "load_calibration",
    "load_qasm", "load_topology", "parse_qasm", "readout_confusion", "relaxation_channel", "route",
    "sample", "schedule_asap", "serialize_qasm", "simulate", "summary_stats", "uniform_calibration",
]
