"""``qtwin`` command line: compile, simulate, compare and bench."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .bench import FIXTURE_NAMES, fixture_info, load_fixture, run_suite, select_fixtures
from .calibration import CalibrationData, bundled_calibration, resolve_calibration
from .circuit import Circuit, circuit_stats
from .compiler import GATESETS, WALKERS, check_edges, compile_circuit, native_gateset
from .engine import MODES, sample, scale_counts, simulate
from .errors import QTwinError, ResourceCapError, UsageError, ValidationError
from .formats import (atomic_write, circuit_digest, distribution_csv, distribution_json,
                      dumps_json, load_distribution, output_dir)
from .metrics import Histogram, compare
from .qasm import load_qasm, serialize_qasm
from .schedule import schedule_asap
from .topology import resolve_topology


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2; route through UsageError instead
        raise UsageError(f"{self.prog}: {message}")


def _load_circuit(spec: str) -> tuple[Circuit, str | None]:
    """A .qasm path, or a bundled fixture name (returns its device too)."""
    p = Path(spec)
    if p.suffix.lower() == ".qasm" or p.exists():
        if not p.exists():
            raise ValidationError(f"circuit file {p} does not exist")
        return load_qasm(p), None
    if spec.upper() in {n.upper() for n in FIXTURE_NAMES}:
        info = fixture_info(spec)
        return load_fixture(info.name), info.device
    raise ValidationError(f"{spec!r} is neither a .qasm file nor a bundled fixture "
                          f"({', '.join(FIXTURE_NAMES)})")


def _calibration(spec: str | None, device: str | None) -> CalibrationData:
    if spec:
        return resolve_calibration(spec)
    return bundled_calibration(device or "iqm20")


def _metadata(c: Circuit, cal: CalibrationData | None, mode: str, seed: int | None,
              **extra) -> dict:
    return {"circuit": c.name, "circuit_hash": circuit_digest(c),
            "calibration_hash": cal.digest() if cal is not None else None,
            "mode": mode, "seed": seed, "tool_version": __version__, **extra}


# --- subcommands -------------------------------------------------------------


def cmd_compile(args) -> int:
    c, _ = _load_circuit(args.circuit)
    topo = resolve_topology(args.topology)
    layout = _parse_layout(args.layout) if args.layout else None
    routed = compile_circuit(c, topo, args.gateset, seed=args.seed, initial_layout=layout,
                             optimize=not args.no_optimize, walker=args.walker)
    bad = check_edges(routed.circuit, topo)
    if bad:
        raise ValidationError(f"compiled circuit uses non-edges: {bad[:3]}")
    out = output_dir(args.out)
    stem = Path(args.circuit).stem if args.circuit.endswith(".qasm") else args.circuit.lower()
    stats = {"circuit": c.name, "circuit_hash": circuit_digest(routed.circuit),
             "source_hash": circuit_digest(c), "topology": topo.name, "gateset": args.gateset,
             "seed": args.seed, "tool_version": __version__, "swaps": routed.swaps,
             "initial_layout": {str(k): v for k, v in routed.initial_layout.items()},
             "final_layout": {str(k): v for k, v in routed.final_layout.items()},
             "stats": circuit_stats(routed.circuit).as_dict()}
    header = f"{c.name} compiled for {topo.name or 'topology'} ({args.gateset})"
    atomic_write(out / f"{stem}.{args.gateset}.qasm", serialize_qasm(routed.circuit, header))
    atomic_write(out / f"{stem}.{args.gateset}.stats.json", dumps_json(stats))
    print(json.dumps(stats["stats"]))
    return 0


def _parse_layout(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"--layout expects comma-separated physical qubits, got {text!r}") from None


def cmd_simulate(args) -> int:
    c, device = _load_circuit(args.circuit)
    cal = None if args.mode == "noiseless" and not args.calibration else _calibration(
        args.calibration, device)
    if args.compile:
        if cal is None:
            cal = _calibration(None, device)
        c = compile_circuit(c, cal.topology, cal.gateset, seed=args.seed).circuit
    dist = simulate(c, cal, args.mode, dephasing=args.dephasing, trailing_idle=args.trailing_idle,
                    precision=args.precision, max_qubits=args.max_qubits,
                    check_memory=not args.no_memory_check)
    if args.sample:
        counts = sample(dist, args.shots, args.seed)
    else:
        counts = scale_counts(dist, args.shots)
    meta = _metadata(c, cal, args.mode, args.seed, shots=args.shots,
                     counts="sampled" if args.sample else "scaled", dephasing=args.dephasing,
                     trailing_idle=args.trailing_idle, precision=args.precision)
    out = output_dir(args.out)
    stem = f"{(c.name or 'circuit').lower()}.{args.mode}"
    atomic_write(out / f"{stem}.json", distribution_json(meta, dist.probabilities, counts))
    atomic_write(out / f"{stem}.csv", distribution_csv(meta, dist.probabilities, counts))
    if args.dump_schedule:
        if cal is None:
            raise UsageError("--dump-schedule needs calibration data (gate durations)")
        sched = schedule_asap(c, cal).to_dict()
        sched["metadata"] = meta
        atomic_write(out / f"{stem}.schedule.json", dumps_json(sched))
    top = sorted(dist.probabilities.items(), key=lambda kv: (-kv[1], kv[0]))[:4]
    for k, p in top:
        print(f"{k} {p:.6f}")
    return 0


def cmd_compare(args) -> int:
    meta_s, sim = load_distribution(args.sim)
    meta_r, ref = load_distribution(args.ref)
    if args.shots:
        sim = Histogram({k: v * args.shots for k, v in sim.normalized().items()})
        ref = Histogram({k: v * args.shots for k, v in ref.normalized().items()})
    name = args.name or meta_s.get("circuit") or Path(args.sim).stem
    report = compare(sim, ref, args.filter_below, circuit=name)
    doc = report.to_dict()
    doc["metadata"] = {"sim": str(args.sim), "ref": str(args.ref),
                       "sim_circuit_hash": meta_s.get("circuit_hash"),
                       "ref_circuit_hash": meta_r.get("circuit_hash"),
                       "calibration_hash": meta_s.get("calibration_hash"),
                       "mode": meta_s.get("mode"), "seed": meta_s.get("seed"),
                       "tool_version": __version__}
    out = output_dir(args.out)
    stem = f"{name.lower()}.compare"
    atomic_write(out / f"{stem}.json", dumps_json(doc))
    atomic_write(out / f"{stem}.csv", report.table_csv())
    atomic_write(out / "plots" / f"{name.lower()}.csv", report.plot_csv())
    print(f"hellinger {report.hellinger:.6f}")
    return 0


def cmd_bench(args) -> int:
    fixtures = select_fixtures(args.only)
    t0 = time.perf_counter()
    rows = run_suite(fixtures, seed=args.seed, shots=args.shots, repetitions=args.repetitions,
                     max_qubits=args.max_qubits, precision=args.precision)
    wall = time.perf_counter() - t0
    report = {"metadata": {"seed": args.seed, "shots": args.shots,
                           "repetitions": args.repetitions, "max_qubits": args.max_qubits,
                           "precision": args.precision, "tool_version": __version__,
                           "modes": ["paper", "unm_style"], "averaging": "per_repetition",
                           "calibration_hashes": {d: bundled_calibration(d).digest()
                                                  for d in sorted({f.device for f in fixtures})},
                           "circuit_hashes": {f.name: circuit_digest(load_fixture(f.name))
                                              for f in fixtures}},
              "rows": [r.report_dict() for r in rows]}
    timing = {"wall_s": wall, "rows": {r.name: {"runtime_s": r.runtime_s,
                                                "state_bytes": r.peak_bytes} for r in rows}}
    out = output_dir(args.out)
    atomic_write(out / "bench_report.json", dumps_json(report))
    atomic_write(out / "bench_report.csv", _bench_csv(report["rows"]))
    atomic_write(out / "bench_timing.json", dumps_json(timing))
    print(f"{'circuit':8} {'qubits':>6} {'depth':>6} {'1QB':>5} {'2QB':>5}  H(paper,unm_style)")
    for r in report["rows"]:
        h = r["hellinger_paper_vs_unm_style"]
        print(f"{r['circuit']:8} {r['qubits']:6} {r['depth']:6} {r['count_1q']:5} "
              f"{r['count_2q']:5}  {h:.4f}" if h is not None else
              f"{r['circuit']:8} {r['qubits']:6} {r['depth']:6} {r['count_1q']:5} "
              f"{r['count_2q']:5}  {r['status']}")
    return 0


def _bench_csv(rows: list[dict]) -> str:
    cols = ["circuit", "qubits", "depth", "count_1q", "count_2q", "status",
            "hellinger_paper_vs_unm_style", "sampling_hellinger_mean", "sampling_hellinger_std"]
    lines = [",".join(cols)]
    for r in rows:
        cells = []
        for k in cols:
            v = r[k]
            if v is None:
                cells.append("")
            elif isinstance(v, float):
                cells.append(repr(v))
            elif k == "status":
                cells.append('"' + str(v).replace('"', "'") + '"')
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qtwin", description="Calibration-driven noisy density-matrix simulator.")
    ap.add_argument("--version", action="version", version=f"qtwin {__version__}")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--out", help="output directory (default: $QTWIN_OUTPUT_DIR or ./qtwin-out)")
        p.add_argument("--seed", type=int, default=0, help="seed recorded in every output")

    p = sub.add_parser("compile", help="route and translate a circuit to native gates")
    p.add_argument("circuit", help=".qasm file or bundled fixture name")
    p.add_argument("--topology", default="iqm20", help="topology JSON or bundled name")
    p.add_argument("--gateset", default="iqm", choices=sorted(GATESETS))
    p.add_argument("--layout", help="initial layout as comma-separated physical qubits")
    p.add_argument("--walker", default="first", choices=WALKERS)
    p.add_argument("--no-optimize", action="store_true", help="skip rotation merging")
    common(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("simulate", help="simulate a native circuit under a noise model")
    p.add_argument("circuit", help=".qasm file or bundled fixture name")
    p.add_argument("--calibration", help="calibration JSON or bundled name (iqm20, iqm20-mean, "
                                         "melbourne)")
    p.add_argument("--mode", default="paper", choices=MODES)
    p.add_argument("--shots", type=int, default=10000)
    p.add_argument("--sample", action="store_true",
                   help="multinomial counts instead of probability x shots")
    p.add_argument("--dephasing", default="t2", choices=("t2", "tphi"))
    p.add_argument("--trailing-idle", action=argparse.BooleanOptionalAction, default=True,
                   help="apply idle noise after a qubit's last gate")
    p.add_argument("--precision", default="double", choices=("double", "single"))
    p.add_argument("--max-qubits", type=int, default=15)
    p.add_argument("--no-memory-check", action="store_true")
    p.add_argument("--compile", action="store_true",
                   help="route/translate onto the calibration's device first")
    p.add_argument("--dump-schedule", action="store_true", help="also write the ASAP schedule")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="Hellinger comparison of two distribution files")
    p.add_argument("sim")
    p.add_argument("ref")
    p.add_argument("--filter-below", type=float, default=0.0,
                   help="drop states with both counts below this from the per-state table")
    p.add_argument("--shots", type=int, help="rescale both histograms to this many shots")
    p.add_argument("--name", help="circuit label for the report")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="run the bundled suite in paper and unm_style modes")
    p.add_argument("--only", help="comma-separated fixture name prefixes, e.g. ghz")
    p.add_argument("--shots", type=int, default=10000)
    p.add_argument("--repetitions", type=int, default=50)
    p.add_argument("--max-qubits", type=int, default=15)
    p.add_argument("--precision", default="double", choices=("double", "single"))
    common(p)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("missing subcommand (compile, simulate, compare, bench)")
        if getattr(args, "shots", 1) is not None and getattr(args, "shots", 1) < 1:
            raise UsageError("--shots must be positive")
        if args.command == "compile":
            native_gateset(args.gateset)
        return args.func(args)
    except QTwinError as exc:
        print(f"qtwin: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except MemoryError:
        print("qtwin: ResourceCapError: out of memory", file=sys.stderr)
        return ResourceCapError.exit_code


if __name__ == "__main__":
    sys.exit(main())
