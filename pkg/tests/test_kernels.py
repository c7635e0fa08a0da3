from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtwin import _kernels_py, kernels

from conftest import random_density
from oracles import embed

try:
    from qtwin import _kernels as _ext
except ImportError:
    _ext = None

BACKENDS = [pytest.param(_kernels_py, id="numpy"),
            pytest.param(_ext, id="cython",
                         marks=pytest.mark.skipif(_ext is None, reason="extension not built"))]


def _random_superop(k, rng):
    """Superoperator of a random Kraus pair on k qubits."""
    d = 2**k
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    b = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return np.kron(a, a.conj()) + np.kron(b, b.conj())


def _reference(rho, s, qubits):
    """Expand S[(ro, co), (ri, ci)] into |ro><ri| rho |ci><co| terms on the full space."""
    n = rho.shape[0].bit_length() - 1
    k = len(qubits)
    d = 2**k
    out = np.zeros_like(rho)
    s4 = s.reshape(d, d, d, d)  # [row_out, col_out, row_in, col_in]
    for ro in range(d):
        for co in range(d):
            for ri in range(d):
                for ci in range(d):
                    c = s4[ro, co, ri, ci]
                    if c == 0:
                        continue
                    left = np.zeros((d, d))
                    left[ro, ri] = 1
                    right = np.zeros((d, d))
                    right[ci, co] = 1
                    out += c * embed(left, list(qubits), n) @ rho @ embed(right, list(qubits), n)
    return out


class TestAgainstReference:
    @pytest.mark.parametrize("mod", BACKENDS)
    def test_1q(self, mod, np_rng):
        for n in (1, 2, 4):
            for q in range(n):
                rho = random_density(n, np_rng)
                s = _random_superop(1, np_rng)
                ref = _reference(rho, s, (q,))
                assert np.allclose(mod.superop_1q(rho.copy(), s, q), ref, atol=1e-12)

    @pytest.mark.parametrize("mod", BACKENDS)
    def test_2q(self, mod, np_rng):
        for n in (2, 3, 4):
            for qa in range(n):
                for qb in range(n):
                    if qa == qb:
                        continue
                    rho = random_density(n, np_rng)
                    s = _random_superop(2, np_rng)
                    ref = _reference(rho, s, (qa, qb))
                    assert np.allclose(mod.superop_2q(rho.copy(), s, qa, qb), ref, atol=1e-12)

    @pytest.mark.parametrize("mod", BACKENDS)
    def test_in_place(self, mod, np_rng):
        rho = random_density(3, np_rng)
        out = mod.superop_1q(rho, _random_superop(1, np_rng), 1)
        assert out is rho

    @pytest.mark.parametrize("mod", BACKENDS)
    def test_complex64(self, mod, np_rng):
        rho = random_density(4, np_rng)
        s = _random_superop(2, np_rng)
        lo = mod.superop_2q(rho.astype(np.complex64), s, 3, 1)
        hi = mod.superop_2q(rho.copy(), s, 3, 1)
        assert lo.dtype == np.complex64
        assert np.allclose(lo, hi, atol=1e-4)

    @pytest.mark.parametrize("mod", BACKENDS)
    def test_input_validation(self, mod):
        s = np.eye(4)
        with pytest.raises(ValueError):
            mod.superop_1q(np.eye(4, dtype=complex)[:, ::2].copy(), s, 0)
        with pytest.raises(ValueError):
            mod.superop_1q(np.asfortranarray(np.eye(4, dtype=complex) + 1j * np.ones((4, 4))), s, 0)
        with pytest.raises(TypeError):
            mod.superop_1q(np.eye(4), s, 0)
        with pytest.raises(ValueError, match="range"):
            mod.superop_1q(np.eye(4, dtype=complex), s, 2)
        with pytest.raises(ValueError, match="distinct"):
            mod.superop_2q(np.eye(4, dtype=complex), np.eye(16), 1, 1)


@pytest.mark.skipif(_ext is None, reason="extension not built")
class TestBackendsAgree:
    @given(st.integers(0, 2**32 - 1), st.integers(2, 6))
    @settings(max_examples=40, deadline=None)
    def test_random_sequences(self, seed, n):
        rng = np.random.default_rng(seed)
        a = random_density(n, rng)
        b = a.copy()
        for _ in range(6):
            if rng.random() < 0.5:
                q = int(rng.integers(n))
                s = _random_superop(1, rng)
                _ext.superop_1q(a, s, q)
                _kernels_py.superop_1q(b, s, q)
            else:
                qa, qb = (int(x) for x in rng.choice(n, 2, replace=False))
                s = _random_superop(2, rng)
                _ext.superop_2q(a, s, qa, qb)
                _kernels_py.superop_2q(b, s, qa, qb)
            scale = max(1.0, float(np.max(np.abs(b))))
            assert np.max(np.abs(a - b)) <= 1e-12 * scale


class TestSelection:
    def test_backend_name(self):
        assert kernels.BACKEND in ("cython", "python")
        if _ext is not None and os.environ.get("QTWIN_PURE_PYTHON", "") not in ("1", "true", "yes"):
            assert kernels.BACKEND == "cython"

    def test_env_forces_fallback(self):
        env = dict(os.environ, QTWIN_PURE_PYTHON="1")
        out = subprocess.run([sys.executable, "-c", "from qtwin import kernels; print(kernels.BACKEND)"],
                             env=env, capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "python"

    def test_engine_agrees_across_backends(self):
        code = ("from qtwin.bench import load_fixture; from qtwin.calibration import bundled_calibration;"
                "from qtwin.engine import simulate; import json;"
                "d = simulate(load_fixture('GHZ-5'), bundled_calibration('iqm20'));"
                "print(json.dumps(d.probabilities))")
        import json
        outs = []
        for pure in ("0", "1"):
            env = dict(os.environ, QTWIN_PURE_PYTHON=pure)
            r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                               check=True)
            outs.append(json.loads(r.stdout))
        keys = set(outs[0]) | set(outs[1])
        assert max(abs(outs[0].get(k, 0) - outs[1].get(k, 0)) for k in keys) < 1e-12
