"""Length functionals of generator paths: Hofer, Hofer-like (1,p) and (inf,p), Calabi, scaling."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .hodge import hodge_decompose
from .isotopy import (
    GeneratorPath,
    concatenate_generators,
    flux_cohomological,
)
from .torus import contract_with_omega, oscillation

HAMILTONIAN_TOL = 1e-8


def _parse_mode(mode) -> str:
    m = str(mode).replace(" ", "").lower().strip("()")
    if m.startswith("1,") or m == "1":
        return "1"
    if m.startswith("inf") or m.startswith("∞"):
        return "inf"
    raise ValueError(f"unknown mode {mode!r}")


def _parse_p(p) -> float:
    if isinstance(p, str):
        p = np.inf if p.lower() in ("inf", "∞") else float(p)
    p = float(p)
    if not (p >= 1.0):
        raise ValueError("invalid exponent")
    return p


def _p_label(p: float) -> str:
    return "inf" if np.isinf(p) else f"{p:g}"


@dataclass(frozen=True)
class LengthReport:
    """A length value tagged with functional, exponent and resolution."""

    value: float
    functional: str
    p: float
    N: int
    T: int
    path_id: str = ""

    def __post_init__(self):
        if not np.isfinite(self.value) or self.value < 0.0:
            raise ValueError("length must be finite and non-negative")

    def __float__(self):
        return float(self.value)

    def row(self) -> dict:
        return {"path_id": self.path_id, "functional": self.functional,
                "p": _p_label(self.p), "N": self.N, "T": self.T, "value": repr(self.value)}


def _collapse(integrand: np.ndarray, mode: str, dt: float) -> float:
    if mode == "1":
        return float(np.trapezoid(integrand, dx=dt))
    return float(np.max(integrand))


def oscillation_profile(gen: GeneratorPath) -> np.ndarray:
    """osc(U_t) per time sample."""
    return oscillation(gen.U)


def harmonic_norm_profile(gen: GeneratorPath, p: float = 2.0) -> np.ndarray:
    """||H_t||_p per sample.

    H_t is constant in space and the torus has unit area, so the L^p norm
    equals the pointwise Euclidean norm for every p.
    """
    _parse_p(p)
    return np.hypot(gen.H[:, 0], gen.H[:, 1])


def _require_hamiltonian(gen: GeneratorPath, what: str):
    if not gen.is_hamiltonian(HAMILTONIAN_TOL):
        raise ValueError(f"{what} undefined for non-Hamiltonian path")


def hofer_length(gen: GeneratorPath, mode="(1,inf)", path_id: str = "") -> LengthReport:
    """Trapezoidal integral (mode ``(1,inf)``) or sup (mode ``inf``) of osc(U_t).

    Raises
    ------
    ValueError
        If the generator has a harmonic part above ``HAMILTONIAN_TOL``.
    """
    m = _parse_mode(mode)
    _require_hamiltonian(gen, "Hofer length")
    value = _collapse(oscillation_profile(gen), m, gen.dt)
    return LengthReport(value, "H(1,inf)" if m == "1" else "H(inf)", np.inf, gen.N, gen.T, path_id)


def hoferlike_integrand(gen: GeneratorPath, p: float = 2.0) -> np.ndarray:
    return oscillation_profile(gen) + harmonic_norm_profile(gen, p)


def hoferlike_length(gen: GeneratorPath, p=2.0, mode="(1,p)", path_id: str = "") -> LengthReport:
    """Length with integrand osc(U_t) + ||H_t||_p, integrated (``(1,p)``) or sup'd (``(inf,p)``).

    Parameters
    ----------
    gen : GeneratorPath
    p : float or "inf"
        Exponent of the harmonic norm, at least 1.
    mode : str
        ``"(1,p)"`` for the time integral, ``"(inf,p)"`` for the sup over samples.
    """
    p = _parse_p(p)
    m = _parse_mode(mode)
    value = _collapse(hoferlike_integrand(gen, p), m, gen.dt)
    tag = f"HL({'1' if m == '1' else 'inf'},{_p_label(p)})"
    return LengthReport(value, tag, p, gen.N, gen.T, path_id)


def vf_hoferlike_norm(Y: np.ndarray, tol: float | None = None) -> float:
    """osc(U_Y) + ||H_Y||_2 for the Hodge pieces of iota_Y omega.

    Raises ``ValueError("vector field not symplectic ...")`` if the contraction
    is not closed within ``tol``.
    """
    try:
        dec = hodge_decompose(contract_with_omega(Y), tol)
    except ValueError as exc:
        raise ValueError(f"vector field not symplectic ({exc})") from exc
    return float(oscillation(dec.U) + np.hypot(*dec.H))


def calabi(gen: GeneratorPath, offset=None) -> float:
    """Trapezoidal time integral of the spatial integral of U_t + offset_t.

    ``offset`` may be a scalar, one value per sample, or a field per sample.
    With normalized U and no offset the value vanishes up to rounding.
    """
    _require_hamiltonian(gen, "Calabi invariant")
    F = gen.U
    if offset is not None:
        off = np.asarray(offset, dtype=float)
        if off.ndim == 1:
            off = off[:, None, None]
        F = F + off
    return float(np.trapezoid(F.mean(axis=(1, 2)), dx=gen.dt))


@dataclass(frozen=True)
class ScalingReport:
    original: float
    rescaled: float
    predicted_low: float
    predicted_high: float
    exact_dim2: float | None


def scaling_law(gen: GeneratorPath, c: float, n: int = 1) -> ScalingReport:
    """Hofer-like (1,2) length after omega -> c omega on a 2n-dimensional manifold.

    The exact part scales by c and the harmonic L2 norm by c^((n+1)/2), so the
    rescaled length lies between min and max of those factors times the
    original.  For n = 1 both factors equal c and ``exact_dim2 = c * original``.
    """
    c = float(c)
    if not (c > 0.0):
        raise ValueError("scale factor must be positive")
    if int(n) != n or n < 1:
        raise ValueError("half-dimension n must be a positive integer")
    osc = oscillation_profile(gen)
    hn = harmonic_norm_profile(gen, 2.0)
    original = float(np.trapezoid(osc + hn, dx=gen.dt))
    fh = c ** ((n + 1) / 2.0)
    rescaled = float(np.trapezoid(c * osc + fh * hn, dx=gen.dt))
    lo, hi = min(c, fh), max(c, fh)
    exact = c * original if n == 1 else None
    return ScalingReport(original, rescaled, lo * original, hi * original, exact)


def hodge_respect_ratio(gen_ham: GeneratorPath, gen_harm: GeneratorPath,
                        delta: float = 0.1) -> dict:
    """Empirical constant for the Hamiltonian-plus-flux lower bound on a concatenation.

    The Hamiltonian piece runs first, the harmonic piece second.  Returns the
    concatenated (1,2) length, the Hofer length of the Hamiltonian part, the
    flux norm and their ratio; the ratio is the best constant C1 this path
    supports.
    """
    whole = concatenate_generators(gen_harm, gen_ham, delta)
    l_hl = hoferlike_length(whole, 2.0).value
    l_h = hofer_length(gen_ham).value
    f = flux_cohomological(whole).norm
    denom = l_h + f
    return {"l_HL": l_hl, "l_H_ham": l_h, "flux_norm": f,
            "C1_hat": l_hl / denom if denom > 0 else np.inf,
            "flux_floor_holds": bool(l_hl >= f - 1e-8)}


LEDGER_FIELDS = ("path_id", "functional", "p", "N", "T", "value")


def append_ledger(path: str | os.PathLike, reports) -> None:
    """Append LengthReport rows to a CSV file, writing the header on creation."""
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=LEDGER_FIELDS)
        if new:
            w.writeheader()
        for r in reports:
            w.writerow(r.row())
