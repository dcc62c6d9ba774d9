import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hoferlike.constructions import (
    build_family,
    build_Z,
    correction_hamiltonian,
    fragment,
    fragment_flux_check,
    fragment_recovery_error,
    gronwall_bound,
    gronwall_check,
    osc_bound_check,
    piece_generator,
    sup_V,
)
from hoferlike.functionals import hoferlike_length
from hoferlike.torus import TorusGrid, exterior_derivative, sharp_omega

from conftest import TAU


def rotating(T):
    t = np.linspace(0, 1, T + 1)
    return np.stack([np.cos(np.pi * t), np.sin(np.pi * t)], axis=1)


@pytest.fixture(scope="module")
def rotating_family():
    return build_family(rotating(32), S=32, N=64)


# Z, G, V

def test_zero_field():
    fam = build_family(np.zeros((9, 2)), N=16)
    assert np.max(np.abs(fam.Z)) == 0.0
    assert np.max(np.abs(fam.G)) == 0.0
    assert sup_V(fam) == 0.0


def test_constant_field_closed_forms():
    X = np.tile([0.3, -0.2], (17, 1))
    fam = build_family(X, N=16)
    s = fam.s[:, None, None, None, None]
    t = fam.t[None, :, None, None, None]
    Xv = fam.X[0][None, None]
    assert np.max(np.abs(fam.Z - t * (1 - 2 * s) * Xv)) <= 1e-14
    assert np.max(np.abs(fam.Z[:, 0])) == 0.0
    assert np.max(np.abs(fam.G - t * (s - s * s) * Xv)) <= 1e-13
    assert np.max(np.abs(fam.V - (s - s * s) * Xv)) <= 1e-12
    assert np.max(np.abs(fam.V[0])) == 0.0
    assert fam.K_hat == 0.0


def test_build_Z_validation():
    with pytest.raises(ValueError, match="grid size"):
        build_Z(np.zeros((9, 2)))
    with pytest.raises(ValueError, match="X must be"):
        build_Z(np.zeros((9, 3, 4)))


def test_gronwall_bound_examples():
    assert gronwall_bound(1.0, 1.0) == (pytest.approx(np.e - 1.0), False)
    assert gronwall_bound(2.0, 0.0) == (2.0, True)
    assert gronwall_bound(1.0, 1.0, 0.0)[0] == 0.0


def test_unit_field_sup_V():
    fam = build_family(np.tile([1.0, 0.0], (17, 1)), N=16)
    assert sup_V(fam) == pytest.approx(0.25, abs=1e-12)
    check = gronwall_check(fam)
    assert check["limit_case"] and check["pass"]


def test_gronwall_rotating(rotating_family):
    check = gronwall_check(rotating_family)
    assert check["pass"]
    assert check["sup_V"] <= check["raw_bound"]


def test_gronwall_nonconstant():
    g = TorusGrid(32)
    X_, Y_ = g.mesh
    t = np.linspace(0, 1, 17)
    U = 0.05 * np.cos(TAU * X_)
    base = sharp_omega(exterior_derivative(U))
    X = np.stack([(1.0 + tt) * base + np.stack([0.2 * np.ones_like(X_), 0 * X_]) for tt in t])
    fam = build_family(X, S=16)
    check = gronwall_check(fam)
    assert check["K_hat"] > 0.0 and not check["limit_case"]
    assert check["pass"]


# correction Hamiltonian

def test_correction_vanishes_for_parallel_fields():
    fam = build_family(np.tile([0.3, 0.4], (17, 1)), N=16)
    F, Fn = correction_hamiltonian(fam)
    assert np.max(np.abs(F)) <= 1e-15 and np.max(np.abs(Fn)) <= 1e-15
    with pytest.raises(ValueError, match="u must lie"):
        correction_hamiltonian(fam, 1.5)


def test_osc_bound_rotating(rotating_family):
    check = osc_bound_check(rotating_family)
    assert check["pass"]
    assert check["sup_X_HL"] == pytest.approx(1.0, abs=1e-12)
    for u in (0.25, 0.5):
        assert osc_bound_check(rotating_family, u)["pass"]


# fragmentation

def test_fragment_weights():
    plan = fragment(rotating(16), K=50)
    assert abs(plan.weights.sum() - 1.0) <= 1e-12
    assert np.all(np.diff(plan.weights[:-1]) < 0)
    assert np.all(plan.weights[plan.N0 - 1:] <= plan.eps)
    assert plan.weights[plan.N0 - 2:].sum() > plan.eps


def test_fragment_sums_and_lengths():
    H = rotating(16)
    plan = fragment(H, K=20)
    check = fragment_flux_check(plan)
    assert check["harmonic_sum_error"] <= 1e-14
    g = TorusGrid(16)
    for k in (1, 5, 20):
        L = hoferlike_length(piece_generator(plan, k, g), 2, "(inf,2)").value
        assert L == pytest.approx(plan.piece_lengths()[k - 1], abs=1e-14)


def test_small_piece_flux():
    H = np.tile([0.0, 1.0], (17, 1))
    plan = fragment(H, K=10)
    check = fragment_flux_check(plan)
    assert np.allclose(check["distance"], np.minimum(plan.weights, 1 - plan.weights), atol=1e-12)
    assert not check["in_lattice"].any()
    tiny = fragment(np.tile([0.0, 0.001], (17, 1)), K=10)
    assert fragment_flux_check(tiny)["distance"].sum() == pytest.approx(0.001, abs=1e-12)


def test_fragment_errors():
    with pytest.raises(ValueError, match="unknown weight"):
        fragment(rotating(8), kind="geometric")
    with pytest.raises(ValueError, match="K must"):
        fragment(rotating(8), K=1)
    with pytest.raises(ValueError, match="harmonic family"):
        fragment(np.zeros((9, 3)))


def test_fragment_recovery():
    # time differences of a piecewise-linear-in-t generator leave dt^2 |H''| / 12
    out = fragment_recovery_error(fragment(rotating(64), K=8), TorusGrid(16))
    assert out["harmonic_error"] <= 5e-4 and out["exact_part_max"] <= 1e-6


@settings(max_examples=15)
@given(st.integers(2, 200), st.floats(1e-4, 0.5))
def test_N0_is_least_index(K, eps):
    plan = fragment(rotating(8), K=K, eps=eps)
    tails = np.cumsum(plan.weights[::-1])[::-1]
    if plan.N0 <= K:
        assert tails[plan.N0 - 1] <= eps
    if plan.N0 >= 2:
        assert tails[plan.N0 - 2] > eps
