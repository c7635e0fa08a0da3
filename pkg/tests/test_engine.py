from __future__ import annotations

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtwin.bench import ghz_circuit
from qtwin.calibration import (CalibrationData, PairCalibration, QubitCalibration,
                               bundled_calibration, uniform_calibration)
from qtwin.channels import depolarizing_channel_1q, relaxation_channel
from qtwin.circuit import Circuit, Gate, gate_matrix
from qtwin.compiler import compile_circuit
from qtwin.engine import (DensityMatrix, OutcomeDistribution, apply_channel, apply_unitary,
                          init_ground, noise_program, required_bytes, sample, scale_counts,
                          simulate)
from qtwin.errors import ResourceCapError, ValidationError
from qtwin.topology import Topology

from conftest import random_calibration, random_density, random_native_circuit
from oracles import embed, oracle_distribution

IDEAL = QubitCalibration(t1=1e12, t2=1e12, fidelity_1q=1.0, eps_meas_0=0.0, eps_meas_1=0.0)


def assert_close(dist, ref, atol):
    keys = set(dist.probabilities) | set(ref)
    for k in keys:
        assert abs(dist[k] - ref.get(k, 0.0)) <= atol, k


class TestState:
    def test_init_ground(self):
        assert np.array_equal(init_ground(1).data, np.diag([1, 0]))
        rho = init_ground(2).data
        assert rho.shape == (4, 4) and rho[0, 0] == 1 and np.count_nonzero(rho) == 1

    def test_x_on_qubit0(self):
        rho = apply_unitary(init_ground(2), gate_matrix("x"), (0,))
        assert rho.probabilities()[1] == pytest.approx(1)

    def test_apply_unitary_matches_embedding(self, np_rng):
        rho = DensityMatrix(random_density(3, np_rng))
        u = gate_matrix("u3", (0.3, 1.2, -0.7))
        cz = gate_matrix("cx")
        ref = rho.data.copy()
        for m, qs in ((u, (1,)), (cz, (2, 0)), (cz, (0, 1))):
            big = embed(m, list(qs), 3)
            ref = big @ ref @ big.conj().T
            apply_unitary(rho, m, qs)
        assert np.allclose(rho.data, ref, atol=1e-14)

    def test_full_relaxation(self, np_rng):
        rho = DensityMatrix(random_density(1, np_rng))
        apply_channel(rho, relaxation_channel(1e9, 1.0), (0,))
        assert np.allclose(rho.data, np.diag([1, 0]), atol=1e-12)

    def test_maximal_depolarizing_reduces_to_mixed(self, np_rng):
        rho = DensityMatrix(random_density(3, np_rng))
        apply_channel(rho, depolarizing_channel_1q(0.75), (1,))
        assert np.allclose(rho.reduced([1]), np.eye(2) / 2, atol=1e-12)
        rho.check()

    def test_reduced_bit_order(self):
        rho = apply_unitary(init_ground(3), gate_matrix("x"), (2,))
        r = rho.reduced([2, 0])
        assert r[2, 2] == pytest.approx(1)  # first listed qubit is the high bit

    def test_invalid_shape(self):
        with pytest.raises(ValidationError):
            DensityMatrix(np.eye(3))

    def test_check_detects_drift(self):
        with pytest.raises(ValidationError, match="trace"):
            DensityMatrix(np.eye(2)).check()


class TestResources:
    def test_qubit_cap(self):
        with pytest.raises(ResourceCapError, match="cap"):
            init_ground(16)

    def test_memory_estimate(self):
        assert required_bytes(10) == pytest.approx(4**10 * 16, rel=2.01) and required_bytes(10) >= 4**10 * 16
        assert required_bytes(10, "single") * 2 == required_bytes(10)

    def test_memory_guard(self, monkeypatch):
        import qtwin.engine as eng
        monkeypatch.setattr(eng, "_available_bytes", lambda: 1000)
        with pytest.raises(ResourceCapError, match="GiB"):
            init_ground(5)
        assert init_ground(5, check_memory=False).num_qubits == 5

    def test_bad_precision(self):
        with pytest.raises(ValidationError):
            init_ground(2, precision="half")


class TestNoiseless:
    @pytest.mark.parametrize("n", range(2, 11))
    def test_ghz(self, n):
        d = simulate(ghz_circuit(n), mode="noiseless")
        assert set(d.probabilities) == {"0" * n, "1" * n}
        assert all(abs(p - 0.5) < 1e-12 for p in d.probabilities.values())

    def test_ghz2(self):
        assert simulate(ghz_circuit(2), mode="noiseless").probabilities == pytest.approx(
            {"00": 0.5, "11": 0.5}, abs=1e-15)

    def test_noise_switched_off(self):
        rng = random.Random(3)
        for _ in range(5):
            n = rng.randint(2, 4)
            cal = uniform_calibration(n, IDEAL, 1.0, 40)
            c = random_native_circuit(cal, 12, rng)
            a, b = simulate(c, cal, "paper"), simulate(c, mode="noiseless")
            assert_close(a, b.probabilities, 1e-9)
            u = simulate(c, cal, "unm_style")
            assert_close(u, b.probabilities, 1e-9)

    def test_unmeasured_clbits_read_zero(self):
        c = Circuit(2, [Gate("x", (0,)), Gate("x", (1,)), Gate("measure", (1,), clbit=1)])
        assert simulate(c, mode="noiseless").probabilities == {"10": 1.0}

    def test_clbit_order(self):
        c = Circuit(3, [Gate("x", (0,)), Gate("measure", (0,), clbit=2), Gate("measure", (2,), clbit=0)])
        assert simulate(c, mode="noiseless").probabilities == {"100": 1.0}


class TestPaperMode:
    @pytest.mark.parametrize("mode", ["paper", "unm_style"])
    def test_matches_oracle(self, mode):
        rng = random.Random(20)
        for _ in range(8):
            n = rng.randint(1, 3)
            cal = random_calibration(n, rng, rng.choice(["iqm", "ibmq"]))
            c = random_native_circuit(cal, rng.randint(1, 10), rng)
            assert_close(simulate(c, cal, mode), oracle_distribution(c, cal, mode), 1e-10)

    def test_unfused_equals_fused(self):
        rng = random.Random(21)
        cal = random_calibration(4, rng)
        c = random_native_circuit(cal, 30, rng)
        a, b = simulate(c, cal, fuse=False), simulate(c, cal, fuse=True)
        assert_close(a, b.probabilities, 1e-12)
        assert b.metadata["blocks"] < a.metadata["blocks"]

    def test_ghz2_shape(self):
        cal = bundled_calibration("iqm20")
        r = compile_circuit(ghz_circuit(2), cal.topology)
        d = simulate(r, cal)
        counts = scale_counts(d, 10000)
        assert counts["00"] > 4000 and counts["11"] > 3500
        assert 0 < d["01"] < 0.1 and 0 < d["10"] < 0.1

    def test_debug_mode_checks_state(self):
        rng = random.Random(22)
        cal = random_calibration(3, rng)
        c = random_native_circuit(cal, 10, rng)
        assert_close(simulate(c, cal, debug=True), simulate(c, cal).probabilities, 0)

    def test_single_precision(self):
        rng = random.Random(23)
        cal = random_calibration(3, rng)
        c = random_native_circuit(cal, 15, rng)
        assert_close(simulate(c, cal, precision="single"), simulate(c, cal).probabilities, 1e-5)

    def test_idle_qubit_decoheres_only_in_paper_mode(self):
        q = QubitCalibration(t1=10.0, t2=2.0, fidelity_1q=1.0, eps_meas_0=0.0, eps_meas_1=0.0)
        cal = uniform_calibration(2, q, 1.0, 40)
        gates = [Gate("prx", (1,), (math.pi / 2, 0.0)), Gate("prx", (0,), (math.pi / 2, 0.0))]
        gates += [Gate("prx", (0,), (math.pi, 0.0))] * 200
        gates += [Gate("barrier", (0, 1)), Gate("prx", (1,), (-math.pi / 2, 0.0))]
        c = Circuit(2, gates + [Gate("measure", (1,))], num_clbits=2)
        # without idle noise qubit 1 returns to |0>
        assert simulate(c, cal, "unm_style")["00"] + simulate(c, cal, "unm_style")["01"] > 0.98
        assert simulate(c, cal, "paper")["10"] > 0.3

    def test_trailing_idle_flag(self):
        q = QubitCalibration(t1=5.0, t2=5.0, fidelity_1q=1.0, eps_meas_0=0.0, eps_meas_1=0.0)
        cal = uniform_calibration(2, q, 1.0, 40)
        c = Circuit(2, [Gate("prx", (1,), (math.pi, 0.0))] + [Gate("prx", (0,), (0.1, 0.0))] * 100)
        with_tail = simulate(c, cal)
        without = simulate(c, cal, trailing_idle=False)
        assert without["10"] > with_tail["10"]

    def test_tphi_is_weaker_than_t2(self):
        q = QubitCalibration(t1=40.0, t2=3.0, fidelity_1q=1.0, eps_meas_0=0.0, eps_meas_1=0.0)
        cal = uniform_calibration(2, q, 1.0, 40)
        gates = [Gate("prx", (1,), (math.pi / 2, 0.0))] + [Gate("prx", (0,), (0.1, 0.0))] * 100
        c = Circuit(2, gates + [Gate("barrier", (0, 1)), Gate("prx", (1,), (math.pi / 2, 0.0))])
        t2, tphi = simulate(c, cal, dephasing="t2"), simulate(c, cal, dephasing="tphi")
        assert tphi["10"] + tphi["11"] > t2["10"] + t2["11"]

    def test_permutation_covariance(self):
        rng = random.Random(24)
        cal = random_calibration(3, rng)
        c = random_native_circuit(cal, 12, rng)
        perm = {0: 2, 1: 0, 2: 1}
        moved = Circuit(3, [g.remap(perm) for g in c.gates], c.num_clbits)
        assert_close(simulate(moved, cal.relabel(perm)), simulate(c, cal).probabilities, 1e-12)

    def test_unused_register_qubits_ignored(self):
        cal = bundled_calibration("iqm20")
        c = Circuit(20, [Gate("prx", (7,), (1.0, 0.0)), Gate("measure", (7,), clbit=0)], num_clbits=1)
        d = simulate(c, cal)
        assert set(d.probabilities) == {"0", "1"} and d.metadata["qubits"] == [7]

    def test_purity_decreases(self):
        rng = random.Random(25)
        cal = random_calibration(3, rng)
        gates = list(random_native_circuit(cal, 20, rng, measure=False).gates)
        last = 1.0
        for k in range(0, 21, 5):
            _, rho = simulate(Circuit(3, gates[:k] + [Gate("barrier", (0, 1, 2))]), cal,
                              return_state=True)
            assert rho.purity() <= last + 1e-12
            last = rho.purity()

    def test_deterministic(self):
        cal = bundled_calibration("iqm20")
        r = compile_circuit(ghz_circuit(4), cal.topology)
        assert simulate(r, cal).probabilities == simulate(r, cal).probabilities


class TestErrors:
    def test_unknown_mode(self):
        with pytest.raises(ValidationError, match="mode"):
            simulate(ghz_circuit(2), bundled_calibration("iqm20"), "ideal")

    def test_non_native_gate(self):
        with pytest.raises(ValidationError, match="native"):
            simulate(ghz_circuit(2), bundled_calibration("iqm20"))

    def test_missing_pair_names_it(self):
        cal = bundled_calibration("iqm20")
        with pytest.raises(ValidationError, match=r"\(0, 2\)"):
            simulate(Circuit(3, [Gate("cz", (0, 2))]), cal)

    def test_missing_qubit_names_it(self):
        cal = uniform_calibration(2, IDEAL, 1.0, 40)
        with pytest.raises(ValidationError, match="qubit 3"):
            simulate(Circuit(4, [Gate("prx", (3,), (1.0, 0.0))]), cal)

    def test_needs_calibration(self):
        with pytest.raises(ValidationError):
            noise_program(Circuit(1, [Gate("prx", (0,), (1.0, 0.0))]), None, "paper")


class TestOutcomes:
    def _dist(self):
        return OutcomeDistribution({"00": 0.5, "01": 0.25, "11": 0.25}, 2)

    def test_normalisation_enforced(self):
        with pytest.raises(ValidationError):
            OutcomeDistribution({"0": 0.7}, 1)

    def test_vector_round_trip(self):
        d = self._dist()
        assert OutcomeDistribution.from_vector(d.vector(), 2).probabilities == d.probabilities

    def test_sample_deterministic(self):
        d = self._dist()
        assert sample(d, 1000, seed=4) == sample(d, 1000, seed=4)
        assert sum(sample(d, 1000, seed=4).values()) == 1000

    def test_sample_statistics(self):
        d = self._dist()
        rng = np.random.default_rng(0)
        draws = [sample(d, 10000, rng).get("00", 0) for _ in range(200)]
        assert np.mean(draws) == pytest.approx(5000, rel=0.01)
        assert np.std(draws) == pytest.approx(50, rel=0.2)

    def test_scale_counts(self):
        assert scale_counts(self._dist(), 10) == {"00": 5.0, "01": 2.5, "11": 2.5}

    @given(st.integers(1, 10**6))
    @settings(max_examples=30, deadline=None)
    def test_sample_total(self, shots):
        assert sum(sample(self._dist(), shots, seed=shots).values()) == shots


def test_native_circuit_without_measures_reads_all_active():
    cal = CalibrationData({0: IDEAL, 1: IDEAL}, {(0, 1): PairCalibration(1.0)}, Topology(2, [(0, 1)]))
    d = simulate(Circuit(2, [Gate("prx", (1,), (math.pi, 0.0))]), cal)
    # only qubit 1 is active, so the outcome has one bit
    assert d.num_bits == 1 and d.metadata["qubits"] == [1]
    assert_close(d, {"1": 1.0}, 1e-9)
