import numpy as np
import pytest
from hypothesis import given, strategies as st

from hoferlike.lattice import (
    LatticeSpec,
    distance_to_lattice,
    duality_bounds,
    is_in_lattice,
    iterate_distances,
    iterate_lower_bound,
    lattice_min_norm,
    nearest_lattice_point,
    energy_floor,
)

coord = st.floats(-50, 50, allow_nan=False)


def test_min_norm_examples():
    assert lattice_min_norm() == 1.0
    assert lattice_min_norm(LatticeSpec(((2.0, 0.0), (0.0, 2.0)))) == 2.0
    assert lattice_min_norm(LatticeSpec(((1.0, 0.0), (0.5, 1.0)))) == pytest.approx(1.0)
    with pytest.raises(ValueError, match="trivial lattice"):
        lattice_min_norm(LatticeSpec(()))


def test_degenerate_basis():
    with pytest.raises(ValueError, match="degenerate"):
        LatticeSpec(((1.0, 1.0), (2.0, 2.0)))


def test_distance_examples():
    assert distance_to_lattice((2.0, -3.0)) == 0.0
    assert distance_to_lattice((0.5, 0.0)) == 0.5
    assert distance_to_lattice((0.5, 0.5)) == pytest.approx(np.sqrt(2) / 2, abs=1e-15)
    assert distance_to_lattice((0.3, 0.0), LatticeSpec(((1.0, 0.0),))) == pytest.approx(0.3)
    assert distance_to_lattice((0.0, 0.3), LatticeSpec(((1.0, 0.0),))) == pytest.approx(0.3)
    with pytest.raises(ValueError, match="two finite"):
        distance_to_lattice((np.nan, 0.0))


def test_membership():
    assert is_in_lattice((2.0, -3.0))
    assert not is_in_lattice((0.5, 0.0))
    assert is_in_lattice((1.0 + 1e-8, 0.0))
    with pytest.raises(ValueError, match="packing radius"):
        is_in_lattice((0.0, 0.0), tol=0.5)


def test_duality_examples():
    r = duality_bounds((0.5, 0.0), [0.5])
    assert r.A_hat == 1.0 and r.B_hat == 1.0 and r.best_upper_ratio == 1.0
    r = duality_bounds((0.0, 0.25), [0.2, 0.4])
    assert r.A_hat == pytest.approx(0.8) and r.B_hat == pytest.approx(1.6)
    assert r.constant_path_ratio == 1.0 and r.best_upper_ratio == pytest.approx(0.8)
    with pytest.raises(ValueError, match="zero flux"):
        duality_bounds((0.0, 0.0), [1.0])
    with pytest.raises(ValueError, match="candidate"):
        duality_bounds((1.0, 0.0), [])


def test_iterate_examples():
    assert iterate_distances((0.5, 0.0), 4) == pytest.approx([0.5, 0.0, 0.5, 0.0])
    d = iterate_lower_bound((np.sqrt(2) / 10, 0.0), 20)
    assert len(d) == 20 and min(d) > 0.0
    with pytest.raises(ValueError, match="trivial quotient flux"):
        iterate_lower_bound((1.0, 2.0), 5)
    with pytest.raises(ValueError, match="k_max"):
        iterate_lower_bound((0.3, 0.0), 0)


def test_energy_floor_examples():
    assert energy_floor(0.3) == {"raw": 0.3, "prefactored": 0.15}
    assert energy_floor(4.0)["raw"] == 1.0
    assert energy_floor(4.0, volume=4.0)["prefactored"] == 0.25


@given(coord, coord, st.integers(-5, 5), st.integers(-5, 5))
def test_distance_periodic_and_symmetric(a, b, n, m):
    d = distance_to_lattice((a, b))
    assert distance_to_lattice((a + n, b + m)) == pytest.approx(d, abs=1e-9)
    assert distance_to_lattice((-a, -b)) == pytest.approx(d, abs=1e-12)
    assert 0.0 <= d <= np.sqrt(2) / 2 + 1e-12


@given(coord, coord)
def test_nearest_point_general_basis(a, b):
    spec = LatticeSpec(((1.0, 0.0), (0.3, 1.0)))
    p = nearest_lattice_point((a, b), spec)
    coords = np.linalg.solve(spec._B.T, p)
    assert np.allclose(coords, np.round(coords), atol=1e-9)
    d = np.linalg.norm(np.array([a, b]) - p)
    for c in ((1, 0), (0, 1), (1, 1), (1, -1)):
        q = p + np.array(c) @ spec._B
        assert d <= np.linalg.norm(np.array([a, b]) - q) + 1e-9


@given(st.floats(-0.49, 0.49), st.floats(-0.49, 0.49))
def test_small_flux_distance_is_norm(a, b):
    assert distance_to_lattice((a, b)) == pytest.approx(np.hypot(a, b), abs=1e-15)


@given(st.floats(0, 100))
def test_energy_floor_bounded(f):
    out = energy_floor(f)
    assert out["raw"] <= min(1.0, f) + 1e-15
    assert out["prefactored"] == pytest.approx(out["raw"] / 2)
