"""The period lattice of the flat unit torus inside H^1 = R^2, and flux-based floors."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice spanned by ``basis`` (rows) in the {dx, dy} coordinates.

    The default is the integer lattice, which is the flux group of the unit
    torus with dx^dy.
    """

    basis: tuple = ((1.0, 0.0), (0.0, 1.0))
    _B: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float).reshape(-1, 2)
        if B.shape[0] > 2 or (B.shape[0] == 2 and abs(np.linalg.det(B)) < 1e-14):
            raise ValueError("lattice basis is degenerate")
        object.__setattr__(self, "_B", B)

    @property
    def rank(self) -> int:
        return self._B.shape[0]

    @property
    def min_nonzero_norm(self) -> float:
        return lattice_min_norm(self)


STANDARD = LatticeSpec()


def _neighbours(rank: int, radius: int = 1):
    for c in itertools.product(range(-radius, radius + 1), repeat=rank):
        if any(c):
            yield np.array(c, dtype=float)


def lattice_min_norm(spec: LatticeSpec = STANDARD) -> float:
    """Shortest nonzero vector among the lattice neighbours of the origin."""
    if spec.rank == 0:
        raise ValueError("trivial lattice has no nonzero element")
    return float(min(np.linalg.norm(c @ spec._B) for c in _neighbours(spec.rank)))


def _as_vec(v) -> np.ndarray:
    v = np.asarray(tuple(v), dtype=float)
    if v.shape != (2,) or not np.all(np.isfinite(v)):
        raise ValueError("flux class must be two finite numbers")
    return v


def nearest_lattice_point(v, spec: LatticeSpec = STANDARD) -> np.ndarray:
    v = _as_vec(v)
    if spec.rank == 0:
        return np.zeros(2)
    if spec.rank == 1:
        b = spec._B[0]
        return np.round(v @ b / (b @ b)) * b
    coords = np.linalg.solve(spec._B.T, v)
    base = np.round(coords)
    best = base @ spec._B
    for c in _neighbours(2):
        cand = (base + c) @ spec._B
        if np.linalg.norm(v - cand) < np.linalg.norm(v - best):
            best = cand
    return best


def distance_to_lattice(v, spec: LatticeSpec = STANDARD) -> float:
    """Euclidean distance to the nearest lattice point."""
    v = _as_vec(v)
    if spec is STANDARD:
        return float(np.hypot(*(v - np.round(v))))
    return float(np.linalg.norm(v - nearest_lattice_point(v, spec)))


def is_in_lattice(v, tol: float = 1e-6, spec: LatticeSpec = STANDARD) -> bool:
    if tol >= 0.5:
        raise ValueError("tolerance exceeds lattice packing radius")
    return distance_to_lattice(v, spec) <= tol


@dataclass(frozen=True)
class DualityReport:
    flux_norm: float
    A_hat: float
    B_hat: float
    constant_path_value: float
    constant_path_ratio: float
    best_upper_ratio: float


def duality_bounds(flux, candidate_energies) -> DualityReport:
    """Empirical constants bracketing energies by the flux norm.

    ``A_hat`` and ``B_hat`` are the smallest and largest candidate energies
    divided by ||flux||.  The constant harmonic path with class ``flux`` is
    always a competitor of length exactly ||flux||; ``best_upper_ratio`` is the
    smallest ratio once it is included, hence at most 1.
    """
    f = _as_vec(flux)
    n = float(np.hypot(*f))
    if n <= 1e-15:
        raise ValueError("duality bounds undefined at zero flux")
    cands = np.asarray(list(candidate_energies), dtype=float)
    if cands.size == 0:
        raise ValueError("need at least one candidate energy")
    const_value = n
    return DualityReport(
        flux_norm=n,
        A_hat=float(cands.min() / n),
        B_hat=float(cands.max() / n),
        constant_path_value=const_value,
        constant_path_ratio=const_value / n,
        best_upper_ratio=float(min(cands.min(), const_value) / n),
    )


def iterate_distances(flux, k_max: int) -> list[float]:
    """dist(k * flux, lattice) for k = 1..k_max."""
    f = _as_vec(flux)
    return [distance_to_lattice(k * f) for k in range(1, int(k_max) + 1)]


def iterate_lower_bound(flux, k_max: int, tol: float = 1e-6) -> list[float]:
    """Flux floors dist(k * flux, lattice) for the iterates phi^k, k = 1..k_max.

    Raises for lattice flux, where every floor is zero.  Torsion classes
    (rational flux) still produce zeros at the k that clear denominators; the
    floors are strictly positive for every k only when some coordinate is
    irrational.
    """
    if int(k_max) < 1:
        raise ValueError("k_max must be at least 1")
    if is_in_lattice(flux, tol):
        raise ValueError("bound vacuous for trivial quotient flux")
    return iterate_distances(flux, k_max)


def energy_floor(flux_norm: float, volume: float = 1.0,
                 spec: LatticeSpec = STANDARD) -> dict:
    """min{m, ||flux||}, raw and with the prefactor 1 / (2 sqrt(volume))."""
    raw = min(lattice_min_norm(spec), float(flux_norm))
    return {"raw": raw, "prefactored": raw / (2.0 * np.sqrt(volume))}
