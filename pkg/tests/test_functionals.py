import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hoferlike.functionals import (
    append_ledger,
    calabi,
    hodge_respect_ratio,
    hofer_length,
    hoferlike_length,
    scaling_law,
    vf_hoferlike_norm,
)
from hoferlike.isotopy import GeneratorPath, flux_cohomological, harmonic_generator
from hoferlike.torus import TorusGrid, exterior_derivative, sharp_omega

from conftest import TAU

P_VALUES = [1.0, 1.5, 2.0, 4.0, np.inf]


def mixed_generator(seed, grid, T=32):
    rng = np.random.default_rng(seed)
    k = rng.integers(1, 3)
    c = rng.uniform(-0.5, 0.5, size=3)
    h = rng.uniform(-1.0, 1.0, size=(2, 2))
    return GeneratorPath.from_functions(
        grid, T,
        U=lambda t, x, y: (c[0] + c[1] * t) * np.cos(TAU * k * x) + c[2] * np.sin(TAU * y),
        H=lambda t: h[0] + h[1] * t)


# Hofer

def test_hofer_examples(g64):
    cos = GeneratorPath.from_functions(g64, 16, U=lambda t, x, y: np.cos(TAU * x))
    assert hofer_length(cos).value == pytest.approx(2.0, abs=1e-12)
    ramp = GeneratorPath.from_functions(g64, 16, U=lambda t, x, y: t * np.cos(TAU * x))
    assert hofer_length(ramp).value == pytest.approx(1.0, abs=1e-12)
    assert hofer_length(ramp, "inf").value == pytest.approx(2.0, abs=1e-12)
    assert hofer_length(ramp).functional == "H(1,inf)"


def test_hofer_rejects_harmonic(g64):
    with pytest.raises(ValueError, match="non-Hamiltonian"):
        hofer_length(harmonic_generator(g64, 16, 0.0, 1.0))


def test_unknown_mode(g64):
    with pytest.raises(ValueError, match="unknown mode"):
        hoferlike_length(harmonic_generator(g64, 16, 0.0, 1.0), 2, "(2,2)")
    with pytest.raises(ValueError, match="invalid exponent"):
        hoferlike_length(harmonic_generator(g64, 16, 0.0, 1.0), 0.5)


# Hofer-like

@pytest.mark.parametrize("p", P_VALUES)
def test_constant_harmonic_length(p, g64):
    gen = harmonic_generator(g64, 16, 0.3, -0.4)
    assert hoferlike_length(gen, p).value == pytest.approx(0.5, abs=1e-12)
    assert hoferlike_length(gen, p, "(inf,p)").value == pytest.approx(0.5, abs=1e-12)


def test_hamiltonian_reduces_to_hofer(g64):
    gen = GeneratorPath.from_functions(g64, 16, U=lambda t, x, y: np.sin(TAU * t) * np.cos(TAU * y))
    for p in P_VALUES:
        assert hoferlike_length(gen, p).value == hofer_length(gen).value
        assert hoferlike_length(gen, p, "inf").value == hofer_length(gen, "inf").value


def test_mixed_sup_length(g64):
    gen = GeneratorPath.from_functions(g64, 16, U=lambda t, x, y: np.cos(TAU * x), H=lambda t: (0.0, 1.0))
    assert hoferlike_length(gen, "inf", "(inf,inf)").value == pytest.approx(3.0, abs=1e-12)
    assert hoferlike_length(gen, 2).value == pytest.approx(3.0, abs=1e-12)


@given(st.integers(0, 10_000))
def test_monotone_in_p(seed):
    gen = mixed_generator(seed, TorusGrid(16))
    vals = [hoferlike_length(gen, p).value for p in P_VALUES]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


@given(st.integers(0, 10_000))
def test_flux_floor(seed):
    gen = mixed_generator(seed, TorusGrid(16))
    assert hoferlike_length(gen, 2).value >= flux_cohomological(gen).norm - 1e-12
    assert hoferlike_length(gen, 2, "(inf,2)").value >= hoferlike_length(gen, 2).value - 1e-12


@given(st.integers(0, 10_000))
def test_reparametrization_invariance(seed):
    g = TorusGrid(16)
    rng = np.random.default_rng(seed)
    c, h = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
    k = rng.uniform(0.0, 0.9)
    # monotone reparametrization fixing 0 and 1
    phi = lambda t: t + 0.5 * k * t * (1.0 - t)
    dphi = lambda t: 1.0 + 0.5 * k * (1.0 - 2.0 * t)
    base = dict(U=lambda t, x, y: (c[0] + c[1] * t) * np.cos(TAU * x), H=lambda t: h * (1.0 + t))
    rep = dict(U=lambda t, x, y: dphi(t) * base["U"](phi(t), x, y), H=lambda t: dphi(t) * base["H"](phi(t)))
    a = hoferlike_length(GeneratorPath.from_functions(g, 512, **base), 2).value
    b = hoferlike_length(GeneratorPath.from_functions(g, 512, **rep), 2).value
    assert abs(a - b) <= 1e-4


# vector field norm

def test_vf_norm_examples(g64):
    X, _ = g64.mesh
    dx = np.stack([np.ones_like(X), np.zeros_like(X)])
    assert vf_hoferlike_norm(dx) == pytest.approx(1.0, abs=1e-12)
    Y = sharp_omega(exterior_derivative(np.cos(TAU * X)))
    assert vf_hoferlike_norm(Y) == pytest.approx(2.0, abs=1e-10)
    assert vf_hoferlike_norm(np.zeros((2, 64, 64))) == 0.0


def test_vf_norm_not_symplectic(g64):
    X, _ = g64.mesh
    Y = np.stack([np.sin(TAU * X), np.zeros_like(X)])
    with pytest.raises(ValueError, match="vector field not symplectic"):
        vf_hoferlike_norm(Y)


# Calabi

def test_calabi_examples(g64):
    zero = GeneratorPath(np.zeros((17, 64, 64)), np.zeros((17, 2)))
    assert calabi(zero) == 0.0
    gen = GeneratorPath.from_functions(g64, 16, U=lambda t, x, y: np.cos(TAU * x))
    assert abs(calabi(gen)) <= 1e-15
    assert calabi(gen, 0.7) == pytest.approx(0.7, abs=1e-14)
    assert calabi(gen, np.linspace(0, 1, 17)) == pytest.approx(0.5, abs=1e-14)
    with pytest.raises(ValueError, match="non-Hamiltonian"):
        calabi(harmonic_generator(g64, 16, 1.0, 0.0))


@given(st.integers(0, 10_000), st.floats(-3, 3))
def test_calabi_bounded_by_hofer(seed, c):
    g = TorusGrid(16)
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1, 1, 3)
    gen = GeneratorPath.from_functions(g, 16, U=lambda t, x, y: a[0] * np.cos(TAU * x) + a[1] * t * np.sin(TAU * y))
    # normalized U has zero Calabi, so a constant offset contributes exactly c
    assert abs(calabi(gen)) <= 1e-12
    assert abs(calabi(gen, c)) <= abs(c) + 1e-14


# scaling

def test_scaling_examples(g64):
    gen = GeneratorPath.from_functions(g64, 16, U=lambda t, x, y: np.cos(TAU * x), H=lambda t: (0.0, 1.0))
    r = scaling_law(gen, 2.0, 1)
    assert r.original == pytest.approx(3.0, abs=1e-12)
    assert r.rescaled == pytest.approx(6.0, abs=1e-12)
    assert r.exact_dim2 == pytest.approx(r.rescaled, abs=1e-12)
    h = scaling_law(harmonic_generator(g64, 16, 0.0, 1.0), 4.0, 3)
    assert h.rescaled == pytest.approx(16.0, abs=1e-12) and h.exact_dim2 is None
    assert h.predicted_low == pytest.approx(4.0) and h.predicted_high == pytest.approx(16.0)
    same = scaling_law(gen, 1.0, 2)
    assert same.rescaled == pytest.approx(same.original, abs=1e-15)
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError, match="scale factor"):
            scaling_law(gen, bad)


@given(st.integers(0, 10_000), st.floats(0.1, 10.0), st.integers(1, 4))
def test_scaling_bracket(seed, c, n):
    r = scaling_law(mixed_generator(seed, TorusGrid(16), 16), c, n)
    assert r.predicted_low - 1e-9 <= r.rescaled <= r.predicted_high + 1e-9


# Hamiltonian plus flux lower bound

def test_hodge_respect(g64):
    ham = GeneratorPath.from_functions(g64, 32, U=lambda t, x, y: 0.3 * np.cos(TAU * y))
    out = hodge_respect_ratio(ham, harmonic_generator(g64, 32, 0.0, 1.0))
    assert out["flux_floor_holds"]
    assert out["l_HL"] == pytest.approx(1.6, abs=1e-3)
    assert out["C1_hat"] == pytest.approx(1.0, abs=1e-3)


def test_ledger(tmp_path, g64):
    gen = harmonic_generator(g64, 16, 0.0, 1.0)
    path = tmp_path / "lengths.csv"
    append_ledger(path, [hoferlike_length(gen, 2, path_id="a")])
    append_ledger(path, [hoferlike_length(gen, np.inf, path_id="b")])
    rows = list(csv.DictReader(open(path)))
    assert [r["path_id"] for r in rows] == ["a", "b"]
    assert rows[1]["p"] == "inf" and float(rows[0]["value"]) == 1.0
    assert rows[0]["N"] == "64" and rows[0]["T"] == "16"
