from __future__ import annotations

import csv
import json
import shutil
import subprocess

import pytest

from qtwin.bench import load_fixture
from qtwin.cli import main
from qtwin.compiler import check_edges
from qtwin.formats import OUTPUT_DIR_ENV, load_distribution, parse_distribution_csv
from qtwin.qasm import load_qasm, serialize_qasm
from qtwin.topology import bundled_topology

GHZ3 = ('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[3];\ncreg c[3];\nh q[0];\ncx q[0],q[1];\n'
        'cx q[1],q[2];\nmeasure q -> c;\n')


@pytest.fixture
def out(tmp_path):
    return tmp_path / "out"


class TestCompile:
    def test_writes_native_circuit(self, tmp_path, out):
        src = tmp_path / "ghz3.qasm"
        src.write_text(GHZ3)
        assert main(["compile", str(src), "--out", str(out), "--layout", "0,1,4"]) == 0
        c = load_qasm(out / "ghz3.iqm.qasm")
        assert not check_edges(c, bundled_topology("iqm20"))
        assert {g.name for g in c.unitary_gates()} == {"prx", "cz"}
        stats = json.loads((out / "ghz3.iqm.stats.json").read_text())
        assert stats["initial_layout"] == {"0": 0, "1": 1, "2": 4} and stats["seed"] == 0

    def test_ibmq_on_melbourne(self, tmp_path, out):
        src = tmp_path / "ghz3.qasm"
        src.write_text(GHZ3)
        assert main(["compile", str(src), "--topology", "melbourne", "--gateset", "ibmq",
                     "--walker", "idle", "--out", str(out)]) == 0
        c = load_qasm(out / "ghz3.ibmq.qasm")
        assert not check_edges(c, bundled_topology("melbourne"))

    def test_bad_gateset_is_usage(self, tmp_path, out):
        src = tmp_path / "ghz3.qasm"
        src.write_text(GHZ3)
        assert main(["compile", str(src), "--gateset", "cirq", "--out", str(out)]) == 2

    def test_bad_layout_is_usage(self, tmp_path, out):
        src = tmp_path / "ghz3.qasm"
        src.write_text(GHZ3)
        assert main(["compile", str(src), "--layout", "a,b", "--out", str(out)]) == 2

    def test_bad_qasm_is_parse(self, tmp_path, out, capsys):
        src = tmp_path / "bad.qasm"
        src.write_text(GHZ3.replace("cx q[0],q[1];", "cx q[0] q[1];"))
        assert main(["compile", str(src), "--out", str(out)]) == 3
        assert "line 6" in capsys.readouterr().err


class TestSimulate:
    def test_fixture_outputs(self, out):
        assert main(["simulate", "GHZ-2", "--out", str(out), "--dump-schedule"]) == 0
        meta, hist = load_distribution(out / "ghz-2.paper.csv")
        assert {"circuit_hash", "calibration_hash", "mode", "seed", "tool_version"} <= set(meta)
        assert meta["mode"] == "paper" and meta["seed"] == 0
        assert hist.total == pytest.approx(10000)
        doc = json.loads((out / "ghz-2.paper.json").read_text())
        assert doc["metadata"] == meta
        sched = json.loads((out / "ghz-2.paper.schedule.json").read_text())
        assert sched["total_duration_ns"] > 0

    def test_csv_layout(self, out):
        main(["simulate", "GHZ-2", "--out", str(out), "--mode", "noiseless"])
        lines = (out / "ghz-2.noiseless.csv").read_text().splitlines()
        body = [ln for ln in lines if not ln.startswith("#")]
        assert body[0] == "bitstring,probability,count"
        rows = list(csv.reader(body[1:]))
        assert {r[0] for r in rows} == {"00", "11"} and all(float(r[2]) == pytest.approx(5000) for r in rows)

    def test_env_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
        assert main(["simulate", "GHZ-2", "--mode", "noiseless"]) == 0
        assert (tmp_path / "env" / "ghz-2.noiseless.json").exists()

    def test_sampling_is_seeded(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            assert main(["simulate", "GHZ-3", "--sample", "--seed", "7", "--out", str(d)]) == 0
        assert (a / "ghz-3.paper.csv").read_bytes() == (b / "ghz-3.paper.csv").read_bytes()
        _, _, counts = parse_distribution_csv((a / "ghz-3.paper.csv").read_text())
        assert all(float(v).is_integer() for v in counts.values())

    def test_compile_flag_on_logical_source(self, tmp_path, out):
        src = tmp_path / "ghz3.qasm"
        src.write_text(GHZ3)
        assert main(["simulate", str(src), "--compile", "--out", str(out)]) == 0
        assert (out / "ghz3.paper.json").exists()

    def test_non_native_is_validation(self, tmp_path, out):
        src = tmp_path / "ghz3.qasm"
        src.write_text(GHZ3)
        assert main(["simulate", str(src), "--out", str(out)]) == 4

    def test_over_cap_is_resource(self, out, capsys):
        assert main(["simulate", "QW-4", "--max-qubits", "10", "--out", str(out)]) == 5
        assert "cap" in capsys.readouterr().err

    def test_unknown_circuit(self, out):
        assert main(["simulate", "GHZ-99", "--out", str(out)]) == 4

    def test_missing_calibration_file(self, out):
        assert main(["simulate", "GHZ-2", "--calibration", "nope.json", "--out", str(out)]) == 4

    def test_negative_shots(self, out):
        assert main(["simulate", "GHZ-2", "--shots", "0", "--out", str(out)]) == 2

    def test_custom_calibration(self, tmp_path, out):
        from qtwin.calibration import bundled_calibration
        p = tmp_path / "cal.json"
        p.write_text(bundled_calibration("iqm20-mean").to_json())
        assert main(["simulate", "GHZ-2", "--calibration", str(p), "--out", str(out)]) == 0


class TestCompare:
    def test_self_compare(self, out, capsys):
        main(["simulate", "GHZ-2", "--out", str(out)])
        capsys.readouterr()
        f = str(out / "ghz-2.paper.csv")
        assert main(["compare", f, f, "--filter-below", "100", "--out", str(out)]) == 0
        assert "hellinger 0.000000" in capsys.readouterr().out
        rep = json.loads((out / "ghz-2.compare.json").read_text())
        assert rep["hellinger"] == 0 and rep["filtered_threshold"] == 100
        head = (out / "plots" / "ghz-2.csv").read_text().splitlines()[0]
        assert head == "bitstring,sim_count,ref_count,std"

    def test_modes_differ(self, out, capsys):
        main(["simulate", "QW-2", "--out", str(out)])
        main(["simulate", "QW-2", "--mode", "unm_style", "--out", str(out)])
        capsys.readouterr()
        assert main(["compare", str(out / "qw-2.paper.json"), str(out / "qw-2.unm_style.json"),
                     "--out", str(out)]) == 0
        h = float(capsys.readouterr().out.split()[-1])
        assert h > 0.01

    def test_malformed_csv_reports_line(self, tmp_path, out, capsys):
        bad = tmp_path / "ref.csv"
        bad.write_text("bitstring,probability,count\n00,0.5,5000\n11,half,5000\n")
        main(["simulate", "GHZ-2", "--out", str(out)])
        assert main(["compare", str(out / "ghz-2.paper.csv"), str(bad), "--out", str(out)]) == 3
        assert "line 3" in capsys.readouterr().err

    def test_missing_file(self, out):
        assert main(["compare", "a.csv", "b.csv", "--out", str(out)]) == 4


class TestBench:
    def test_byte_identical_reports(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            assert main(["bench", "--only", "GHZ-2,GHZ-3", "--shots", "1000", "--repetitions", "5",
                         "--seed", "3", "--out", str(d)]) == 0
        for name in ("bench_report.json", "bench_report.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        rows = json.loads((a / "bench_report.json").read_text())["rows"]
        assert [r["circuit"] for r in rows] == ["GHZ-2", "GHZ-3"]
        assert json.loads((a / "bench_timing.json").read_text())["wall_s"] > 0

    def test_skipped_row(self, out, capsys):
        assert main(["bench", "--only", "QW-4", "--max-qubits", "10", "--repetitions", "1",
                     "--out", str(out)]) == 0
        assert "skipped" in capsys.readouterr().out


class TestUsage:
    def test_no_subcommand(self):
        assert main([]) == 2

    def test_unknown_flag(self):
        assert main(["simulate", "GHZ-2", "--bogus"]) == 2

    def test_bad_mode(self):
        assert main(["simulate", "GHZ-2", "--mode", "ideal"]) == 2

    @pytest.mark.skipif(shutil.which("qtwin") is None, reason="console script not installed")
    def test_console_script(self, tmp_path):
        r = subprocess.run(["qtwin", "simulate", "GHZ-2", "--mode", "noiseless", "--out", str(tmp_path)],
                           capture_output=True, text=True)
        assert r.returncode == 0
        assert sorted(r.stdout.split()) == ["0.500000", "0.500000", "00", "11"]
        r = subprocess.run(["qtwin", "frobnicate"], capture_output=True, text=True)
        assert r.returncode == 2


def test_fixture_round_trips_through_serializer():
    c = load_fixture("RU")
    from qtwin.qasm import parse_qasm
    assert parse_qasm(serialize_qasm(c)).gates == c.gates
