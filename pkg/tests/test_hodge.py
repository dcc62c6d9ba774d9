import numpy as np
import pytest
from hypothesis import given, strategies as st

from hoferlike.hodge import (
    harmonic_projection,
    hodge_decompose,
    norm_equivalence_constants,
)
from hoferlike.torus import TorusGrid, exterior_derivative

from conftest import TAU, trig_field

modes = st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5),
                           st.floats(-1, 1), st.floats(0, 6.28)), min_size=1, max_size=5)
coeff = st.floats(-3, 3)


def test_decompose_example(g64):
    X, Y = g64.mesh
    alpha = g64.constant_form(3, 0) + exterior_derivative(np.sin(TAU * X))
    dec = hodge_decompose(alpha)
    assert np.allclose(dec.H, [3.0, 0.0], atol=1e-12)
    assert np.max(np.abs(dec.U - np.sin(TAU * X))) <= 1e-12
    assert dec.residual <= 1e-9


def test_decompose_harmonic_and_exact(g64):
    X, Y = g64.mesh
    dec = hodge_decompose(g64.constant_form(1, 1))
    assert np.allclose(dec.H, [1, 1]) and np.max(np.abs(dec.U)) <= 1e-14
    dec = hodge_decompose(exterior_derivative(np.cos(TAU * Y)))
    assert np.max(np.abs(dec.H)) <= 1e-14
    assert np.max(np.abs(dec.U - np.cos(TAU * Y))) <= 1e-12


def test_decompose_rejects_open_form(g64):
    X, Y = g64.mesh
    alpha = np.stack([np.zeros_like(X), np.sin(TAU * X) * 0 + X])
    with pytest.raises(ValueError, match="form not closed"):
        hodge_decompose(alpha)


def test_decomposition_invariants(g64):
    f = trig_field(g64, [(2, 1, 0.5, 0.2), (-1, 3, 0.1, 2.0)])
    dec = hodge_decompose(exterior_derivative(f) + g64.constant_form(0.2, -0.7))
    assert abs(dec.U.mean()) <= 1e-12
    Hf = dec.harmonic_form()
    assert np.ptp(Hf[0]) == 0.0 and np.ptp(Hf[1]) == 0.0


def test_projection_examples(g64):
    X, Y = g64.mesh
    assert np.max(np.abs(harmonic_projection(g64.constant_form(1, 0)) - g64.constant_form(1, 0))) == 0.0
    assert np.max(np.abs(harmonic_projection(exterior_derivative(np.sin(TAU * X))))) <= 1e-14
    f = np.exp(np.sin(TAU * X)) * np.cos(TAU * Y)
    P = harmonic_projection(g64.constant_form(2, -5) + exterior_derivative(f))
    assert np.max(np.abs(P - g64.constant_form(2, -5))) <= 1e-10


@given(modes, coeff, coeff)
def test_projection_idempotent(m, a, b):
    g = TorusGrid(32)
    alpha = exterior_derivative(trig_field(g, m)) + g.constant_form(a, b)
    P = harmonic_projection(alpha)
    np.testing.assert_array_equal(harmonic_projection(P), P)


@given(modes, coeff, coeff)
def test_orthogonality_and_reconstruction(m, a, b):
    g = TorusGrid(64)
    alpha = exterior_derivative(trig_field(g, m)) + g.constant_form(a, b)
    dec = hodge_decompose(alpha)
    dU = exterior_derivative(dec.U)
    assert abs(np.mean(dU[0] * dec.H[0] + dU[1] * dec.H[1])) <= 1e-9
    assert dec.residual <= 1e-8


@given(modes, modes, coeff, coeff, coeff, coeff)
def test_linearity(m1, m2, a1, b1, a2, b2):
    g = TorusGrid(32)
    al = exterior_derivative(trig_field(g, m1)) + g.constant_form(a1, b1)
    be = exterior_derivative(trig_field(g, m2)) + g.constant_form(a2, b2)
    H = hodge_decompose(al + be).H
    assert np.max(np.abs(H - hodge_decompose(al).H - hodge_decompose(be).H)) <= 1e-10


@given(modes, coeff, coeff)
def test_uniqueness(m, a, b):
    g = TorusGrid(64)
    U = trig_field(g, m)
    U -= U.mean()
    dec = hodge_decompose(exterior_derivative(U) + g.constant_form(a, b))
    assert np.max(np.abs(dec.U - U)) <= 1e-8
    assert np.max(np.abs(dec.H - [a, b])) <= 1e-8


def test_batched_decomposition(g64):
    f = np.stack([trig_field(g64, [(1, 0, 1.0, 0.0)]), trig_field(g64, [(0, 2, 0.3, 1.0)])])
    alpha = exterior_derivative(f) + np.array([[0.1, 0.2], [0.3, 0.4]])[:, :, None, None]
    dec = hodge_decompose(alpha)
    assert dec.U.shape == (2, 64, 64) and dec.H.shape == (2, 2)
    assert np.allclose(dec.H, [[0.1, 0.2], [0.3, 0.4]])


def test_norm_equivalence_flat():
    L0, L1 = norm_equivalence_constants(1024)
    assert abs(L0 - 1.0) <= 1e-12 and abs(L1 - 1.0) <= 1e-12
    assert norm_equivalence_constants(1) == (1.0, 1.0)


@pytest.mark.parametrize("area", [0.25, 4.0])
def test_norm_equivalence_area_formula(area):
    L0, L1 = norm_equivalence_constants(64, area=area)
    assert abs(L0 - area ** -0.5) <= 1e-12 and abs(L1 - area ** -0.5) <= 1e-12
