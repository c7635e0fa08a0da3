from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtwin.channels import (KrausChannel, ReadoutModel, decay_probability, dephasing_channel,
                            depolarizing_channel, depolarizing_channel_1q, depolarizing_channel_2q,
                            fidelity_to_pdep, readout_confusion, relaxation_channel)
from qtwin.errors import ValidationError

from conftest import random_density
from oracles import average_gate_fidelity

_fid = st.floats(min_value=0.9, max_value=1.0)


class TestFamilies:
    @given(st.floats(0, 1e6), st.floats(1e-3, 1e6))
    @settings(max_examples=100, deadline=None)
    def test_relaxation_cptp(self, t, t1):
        assert relaxation_channel(t, t1).is_cptp(1e-12)

    @given(st.floats(0, 1e6), st.floats(1e-3, 1e6))
    @settings(max_examples=100, deadline=None)
    def test_dephasing_cptp(self, t, t2):
        assert dephasing_channel(t, t2).is_cptp(1e-12)

    @given(st.floats(0, 1), st.sampled_from([1, 2]))
    @settings(max_examples=100, deadline=None)
    def test_depolarizing_cptp(self, p, n):
        assert depolarizing_channel(p, n).is_cptp(1e-12)

    def test_relaxation_probability(self):
        # 20 ns gate on the mean T1 of 41.8 us
        assert decay_probability(20, 41.8e3) == pytest.approx(4.784e-4, rel=1e-3)

    def test_dephasing_probability(self):
        assert decay_probability(20, 3.2e3) == pytest.approx(6.231e-3, rel=1e-3)

    def test_zero_duration_is_identity(self):
        rho = random_density(1, np.random.default_rng(0))
        for ch in (relaxation_channel(0, 10.0), dephasing_channel(0, 10.0)):
            assert np.allclose(ch.apply(rho), rho, atol=1e-15)

    def test_full_relaxation_reaches_ground(self):
        rho = random_density(1, np.random.default_rng(1))
        out = relaxation_channel(1e9, 1.0).apply(rho)
        assert np.allclose(out, np.diag([1, 0]), atol=1e-12)

    def test_dephasing_scales_coherence(self):
        rho = np.full((2, 2), 0.5, dtype=complex)
        p = decay_probability(50, 100)
        out = dephasing_channel(50, 100).apply(rho)
        assert out[0, 1] == pytest.approx(0.5 * (1 - 2 * p))
        assert out[0, 0] == pytest.approx(0.5)

    def test_negative_duration(self):
        with pytest.raises(ValidationError):
            relaxation_channel(-1, 10)

    def test_infinite_timescale(self):
        assert decay_probability(100, math.inf) == 0.0

    def test_maximal_depolarizing_1q(self):
        rho = random_density(1, np.random.default_rng(2))
        out = depolarizing_channel_1q(0.75).apply(rho)
        assert np.allclose(out, np.eye(2) / 2, atol=1e-14)

    def test_maximal_depolarizing_2q(self):
        rho = random_density(2, np.random.default_rng(3))
        out = depolarizing_channel_2q(15 / 16).apply(rho)
        assert np.allclose(out, np.eye(4) / 4, atol=1e-14)

    def test_depolarizing_is_unital(self):
        for n in (1, 2):
            d = 2**n
            assert np.allclose(depolarizing_channel(0.3, n).apply(np.eye(d) / d), np.eye(d) / d)

    def test_depolarizing_lowers_purity(self):
        rng = np.random.default_rng(4)
        for n in (1, 2):
            rho = random_density(n, rng, rank=1)
            before = np.trace(rho @ rho).real
            out = depolarizing_channel(0.2, n).apply(rho)
            assert np.trace(out @ out).real < before

    def test_invalid_p(self):
        with pytest.raises(ValidationError):
            depolarizing_channel_1q(1.2)

    def test_relax_dephase_commute(self):
        rng = np.random.default_rng(5)
        a, b = relaxation_channel(30, 40.0), dephasing_channel(30, 7.0)
        for _ in range(10):
            rho = random_density(1, rng)
            assert np.allclose(a.then(b).apply(rho), b.then(a).apply(rho), atol=1e-14)

    def test_superoperator_matches_apply(self):
        rng = np.random.default_rng(6)
        ch = depolarizing_channel_2q(0.1).then(KrausChannel(np.array([np.kron(np.eye(2), [[0, 1], [1, 0]])])))
        rho = random_density(2, rng)
        vec = ch.superoperator() @ rho.reshape(-1)
        assert np.allclose(vec.reshape(4, 4), ch.apply(rho), atol=1e-14)

    def test_kraus_shape_checked(self):
        with pytest.raises(ValidationError):
            KrausChannel(np.eye(3))


class TestChainedTrace:
    def test_trace_drift_over_long_chain(self):
        rng = np.random.default_rng(7)
        chans = [relaxation_channel(20, 40.0), dephasing_channel(20, 3.0), depolarizing_channel_1q(0.01)]
        rho = random_density(1, rng)
        for i in range(1000):
            rho = chans[i % 3].apply(rho)
        assert abs(np.trace(rho) - 1) < 1e-10


class TestFidelityMapping:
    def test_closed_form(self):
        assert fidelity_to_pdep(0.99, 2) == pytest.approx(0.015)
        assert fidelity_to_pdep(0.99, 4) == pytest.approx(0.0125)
        assert fidelity_to_pdep(1.0, 4) == 0.0

    @given(_fid, st.sampled_from([2, 4]))
    @settings(max_examples=50, deadline=None)
    def test_round_trip_through_tomography(self, f, d):
        ch = depolarizing_channel(fidelity_to_pdep(f, d), 1 if d == 2 else 2)
        assert abs(average_gate_fidelity(ch.kraus_ops, d) - f) < 1e-9

    def test_unreachable_fidelity(self):
        with pytest.raises(ValidationError):
            fidelity_to_pdep(0.2, 2)
        with pytest.raises(ValidationError):
            fidelity_to_pdep(0.99, 3)


class TestReadout:
    def test_single_bit_ground(self):
        m = ReadoutModel(((0.0266, 0.0509),))
        out = readout_confusion(m, {"0": 1.0})
        assert out["0"] == pytest.approx(0.9734) and out["1"] == pytest.approx(0.0266)

    def test_single_bit_excited(self):
        m = ReadoutModel(((0.0266, 0.0509),))
        out = readout_confusion(m, np.array([0.0, 1.0]))
        assert out == pytest.approx([0.0509, 0.9491])

    def test_bit_order(self):
        # bit 0 (rightmost character) uses errors[0]
        m = ReadoutModel(((0.1, 0.0), (0.0, 0.0)))
        out = readout_confusion(m, {"00": 1.0})
        assert out == pytest.approx({"00": 0.9, "01": 0.1})

    def test_trivial_model(self):
        m = ReadoutModel(((0.0, 0.0),) * 3)
        v = np.random.default_rng(0).dirichlet(np.ones(8))
        assert m.is_trivial() and np.array_equal(readout_confusion(m, v), v)

    def test_preserves_normalisation(self):
        rng = np.random.default_rng(8)
        m = ReadoutModel(tuple(tuple(rng.uniform(0, 0.2, 2)) for _ in range(4)))
        out = readout_confusion(m, rng.dirichlet(np.ones(16)))
        assert out.sum() == pytest.approx(1, abs=1e-14) and np.all(out >= 0)

    def test_povm_sums_to_identity(self):
        m = ReadoutModel(((0.03, 0.07),))
        e0, e1 = m.povm(0)
        assert np.allclose(e0 + e1, np.eye(2))

    def test_rejects_unnormalised(self):
        with pytest.raises(ValidationError):
            readout_confusion(ReadoutModel(((0.1, 0.1),)), np.array([0.5, 0.6]))

    def test_rejects_bad_errors(self):
        with pytest.raises(ValidationError):
            ReadoutModel(((1.0, 0.0),))
