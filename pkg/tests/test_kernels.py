import numpy as np
import pytest
from hypothesis import given, strategies as st

from hoferlike import _kernels as K

pytestmark = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not importable")


def _coef(N, seed, order):
    rng = np.random.default_rng(seed)
    return K.spline_coefficients(0.1 * rng.normal(size=(2, N, N)), order)


@given(st.integers(0, 2**31), st.sampled_from([1, 3]), st.sampled_from([8, 16, 32]))
def test_interp_twins_agree(seed, order, N):
    rng = np.random.default_rng(seed)
    C = _coef(N, seed, order)
    px, py = rng.uniform(-2, 3, 50), rng.uniform(-2, 3, 50)
    assert np.max(np.abs(K.interp_numba(C, px, py, order) - K.interp_numpy(C, px, py, order))) <= 1e-14


@given(st.integers(0, 2**31), st.sampled_from([1, 3]), st.sampled_from([5, 2000]),
       st.integers(1, 5))
def test_rk4_twins_agree(seed, order, M, substeps):
    # 5 points take the direct path, 2000 the pre-blended one
    rng = np.random.default_rng(seed)
    C0, C1 = _coef(32, seed, order), _coef(32, seed + 1, order)
    px, py = rng.random(M), rng.random(M)
    a = np.array(K.rk4_interval_numba(C0, C1, px, py, 0.05, substeps, order))
    b = np.array(K.rk4_interval_numpy(C0, C1, px, py, 0.05, substeps, order))
    assert np.max(np.abs(a - b)) <= 1e-14


@given(st.integers(0, 2**31), st.sampled_from([1, 3]))
def test_newton_twins_agree(seed, order):
    rng = np.random.default_rng(seed)
    N = 16
    X, Y = np.meshgrid(np.arange(N) / N, np.arange(N) / N, indexing="ij")
    D = np.stack([0.05 * np.sin(2 * np.pi * Y + rng.random()), 0.05 * np.cos(2 * np.pi * X)])
    from hoferlike.torus import displacement_gradient
    DC = K.spline_coefficients(D, order)
    JC = K.spline_coefficients(displacement_gradient(D), order)
    qx, qy = X.ravel(), Y.ravel()
    a = K.newton_invert_numba(DC, JC, qx, qy, qx.copy(), qy.copy(), 1e-12, 50, order)
    b = K.newton_invert_numpy(DC, JC, qx, qy, qx.copy(), qy.copy(), 1e-12, 50, order)
    assert np.all(a[2] >= 0) and np.all(b[2] >= 0)
    # rounding can put a residual on either side of tol, so a node may stop one
    # iteration apart; with equal counts the twins agree to rounding
    same = a[2] == b[2]
    assert np.max(np.abs(a[0] - b[0])[same]) <= 1e-14 and np.max(np.abs(a[1] - b[1])[same]) <= 1e-14
    assert np.max(np.abs(a[0] - b[0])) <= 1e-11 and np.max(np.abs(a[1] - b[1])) <= 1e-11
    for px, py, _ in (a, b):
        d = K.interp_numpy(DC, px, py, order)
        assert np.max(np.abs(px + d[0] - qx)) <= 1e-12 and np.max(np.abs(py + d[1] - qy)) <= 1e-12


def test_env_switch(monkeypatch):
    monkeypatch.setenv("HOFERLIKE_NUMBA", "0")
    assert not K.numba_enabled()
    monkeypatch.setenv("HOFERLIKE_NUMBA", "1")
    assert K.numba_enabled()
