"""Two explicit constructions on harmonic families: the (s, t) family Z, G, V and fragmentation."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .functionals import vf_hoferlike_norm
from .hodge import norm_equivalence_constants
from .isotopy import (
    DiffeoPath,
    GeneratorPath,
    compose_paths,
    flow_fields,
    flux_cohomological,
    integrate_generator,
    invert_diffeo,
    recover_generator,
    time_derivative,
)
from .lattice import distance_to_lattice
from .torus import (
    TorusGrid,
    compose_field,
    is_spatially_constant,
    jacobian,
    oscillation,
    sharp_omega,
)

GRONWALL_MARGIN = 1.10
SLACK = 1e-6


# ---------------------------------------------------------------------------
# two-parameter family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoParamFamily:
    """Samples of Z, G, V on s_i = i / S, t_j = j / T.

    ``X`` is (T+1, 2, N, N); ``Z``, ``G`` (displacements) and ``V`` are
    (S+1, T+1, 2, N, N).  ``Zt`` holds dZ/dt, exact from the defining formula.
    """

    X: np.ndarray
    s: np.ndarray
    t: np.ndarray
    Z: np.ndarray
    Zt: np.ndarray
    G: np.ndarray | None = None
    V: np.ndarray | None = None

    @property
    def S(self) -> int:
        return self.s.size - 1

    @property
    def T(self) -> int:
        return self.t.size - 1

    @property
    def N(self) -> int:
        return self.X.shape[-1]

    @property
    def N_hat(self) -> float:
        return float(np.max(np.hypot(self.Zt[:, :, 0], self.Zt[:, :, 1])))

    @property
    def K_hat(self) -> float:
        if is_spatially_constant(self.Z):
            return 0.0
        J = jacobian(self.Z)
        J[..., 0, 0, :, :] -= 1.0
        J[..., 1, 1, :, :] -= 1.0
        a, b = J[..., 0, 0, :, :], J[..., 0, 1, :, :]
        c, d = J[..., 1, 0, :, :], J[..., 1, 1, :, :]
        # largest singular value of [[a, b], [c, d]]
        f = 0.5 * (a * a + b * b + c * c + d * d)
        g = np.sqrt(np.maximum(f * f - (a * d - b * c) ** 2, 0.0))
        return float(np.sqrt(np.max(f + g)))


def _as_vector_fields(X, N: int | None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 2 and X.shape[1] == 2:
        # harmonic coefficients (a_t, b_t) -> constant vector fields
        if N is None:
            raise ValueError("grid size needed for coefficient input")
        forms = np.broadcast_to(X[:, :, None, None], X.shape + (N, N))
        return sharp_omega(forms)
    if X.ndim != 4 or X.shape[1] != 2:
        raise ValueError("X must be (T+1, 2, N, N) fields or (T+1, 2) harmonic coefficients")
    return X


def _sample_linear(X: np.ndarray, u: np.ndarray) -> np.ndarray:
    T = X.shape[0] - 1
    x = np.clip(u, 0.0, 1.0) * T
    i = np.minimum(np.floor(x).astype(np.int64), T - 1)
    w = (x - i)[:, None, None, None]
    return (1.0 - w) * X[i] + w * X[i + 1]


def build_Z(X, S: int | None = None, N: int | None = None) -> TwoParamFamily:
    """Z_{s,t} = t X_s - 2 s int_0^t X_u du with a trapezoidal time integral.

    ``X`` is a family of vector fields on the uniform t-grid, or harmonic
    coefficients (a_t, b_t) with ``N`` given.  X_s is read off the same grid
    (linear in between when ``S`` differs from T).
    """
    X = _as_vector_fields(X, N)
    T = X.shape[0] - 1
    S = T if S is None else int(S)
    if T < 2 or S < 2:
        raise ValueError("need at least 3 samples in s and t")
    t = np.linspace(0.0, 1.0, T + 1)
    s = np.linspace(0.0, 1.0, S + 1)
    Xs = X if S == T else _sample_linear(X, s)
    I = cumulative_trapezoid(X, dx=1.0 / T, axis=0, initial=0.0)
    Z = t[None, :, None, None, None] * Xs[:, None] - 2.0 * s[:, None, None, None, None] * I[None, :]
    Zt = Xs[:, None] - 2.0 * s[:, None, None, None, None] * X[None, :]
    return TwoParamFamily(X=X, s=s, t=t, Z=Z, Zt=Zt)


def flow_in_s(fam: TwoParamFamily, substeps: int = 4) -> TwoParamFamily:
    """G_{s,t}: for each t, the flow in s of Z_{., t} from the identity."""
    G = np.empty_like(fam.Z)
    for j in range(fam.T + 1):
        G[:, j] = flow_fields(fam.Z[:, j], substeps)
    return replace(fam, G=G)


def extract_V(fam: TwoParamFamily) -> TwoParamFamily:
    """V_{s,t} = (dG_{s,t}/dt) o G_{s,t}^{-1}, with finite differences in t."""
    if fam.G is None:
        raise ValueError("flow_in_s must run first")
    if fam.T < 2:
        raise ValueError("need at least 3 t-samples")
    W = time_derivative(np.moveaxis(fam.G, 1, 0), 1.0 / fam.T)
    W = np.moveaxis(W, 0, 1)
    V = np.empty_like(W)
    for i in range(fam.S + 1):
        E = None
        for j in range(fam.T + 1):
            E = invert_diffeo(fam.G[i, j], guess=E)
            V[i, j] = compose_field(W[i, j], E)
    return replace(fam, V=V)


def build_family(X, S: int | None = None, N: int | None = None, substeps: int = 4) -> TwoParamFamily:
    return extract_V(flow_in_s(build_Z(X, S, N), substeps))


def gronwall_bound(N_hat: float, K_hat: float, s: float = 1.0) -> tuple[float, bool]:
    """(N/K)(e^{Ks} - 1), or its K -> 0 limit N s; the flag marks the limit case."""
    if K_hat <= 1e-12:
        return float(N_hat * s), True
    return float(N_hat / K_hat * np.expm1(K_hat * s)), False


def sup_V(fam: TwoParamFamily) -> float:
    if fam.V is None:
        raise ValueError("extract_V must run first")
    return float(np.max(np.hypot(fam.V[:, :, 0], fam.V[:, :, 1])))


def gronwall_check(fam: TwoParamFamily, margin: float = GRONWALL_MARGIN) -> dict:
    """Compare sup |V| with the Gronwall bound built from grid estimates of N and K.

    The bound is inflated by ``margin`` because the grid sup under-samples
    the true sup of |dZ/dt| and |DZ|.
    """
    v = sup_V(fam)
    n_hat, k_hat = fam.N_hat, fam.K_hat
    raw, limit = gronwall_bound(n_hat, k_hat)
    bound = margin * raw
    return {"sup_V": v, "N_hat": n_hat, "K_hat": k_hat, "bound": bound, "raw_bound": raw,
            "limit_case": limit, "pass": bool(v <= bound + SLACK)}


def omega_ZV(fam: TwoParamFamily) -> np.ndarray:
    Z, V = fam.Z, fam.V
    return Z[:, :, 0] * V[:, :, 1] - Z[:, :, 1] * V[:, :, 0]


def correction_hamiltonian(fam: TwoParamFamily, u: float = 1.0,
                           t_index: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """F_{u,t} = int_0^u omega(Z_{s,t}, V_{s,t}) ds, raw and mean-free.

    Without ``t_index`` all t-samples are returned, shape (T+1, N, N).
    """
    if fam.V is None:
        raise ValueError("extract_V must run first")
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1]")
    w = omega_ZV(fam)
    cum = cumulative_trapezoid(w, dx=1.0 / fam.S, axis=0, initial=0.0)
    x = u * fam.S
    i = min(int(np.floor(x)), fam.S - 1)
    a = x - i
    F = (1.0 - a) * cum[i] + a * cum[i + 1]
    if t_index is not None:
        F = F[t_index]
    return F, F - F.mean(axis=(-2, -1), keepdims=True)


def osc_bound_check(fam: TwoParamFamily, u: float = 1.0, L0: float | None = None) -> dict:
    """osc F_{u,t} (max over t) against 4 L0 sup|V| sup_t ||X_t||_HL."""
    if L0 is None:
        L0 = norm_equivalence_constants(N=fam.N)[0]
    F, _ = correction_hamiltonian(fam, u)
    osc_val = float(np.max(oscillation(F)))
    x_hl = max(vf_hoferlike_norm(fam.X[j]) for j in range(fam.T + 1))
    bound = 4.0 * L0 * sup_V(fam) * x_hl
    return {"osc": osc_val, "bound": bound, "sup_X_HL": x_hl, "L0": L0,
            "pass": bool(osc_val <= bound + SLACK)}


# ---------------------------------------------------------------------------
# fragmentation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FragmentationPlan:
    """Weights nu_k (k = 1..K) summing to 1 and the harmonic family they split."""

    weights: np.ndarray
    H: np.ndarray
    N0: int
    eps: float
    kind: str = "inverse-square"

    @property
    def K(self) -> int:
        return self.weights.size

    def piece(self, k: int) -> np.ndarray:
        """Harmonic coefficients nu_k H_t of piece k (1-based)."""
        return self.weights[k - 1] * self.H

    def pieces(self) -> np.ndarray:
        return self.weights[:, None, None] * self.H[None]

    def piece_lengths(self) -> np.ndarray:
        """sup_t ||nu_k H_t||_2 for each piece."""
        return self.weights * float(np.max(np.hypot(self.H[:, 0], self.H[:, 1])))


def _harmonic_coeffs(H) -> np.ndarray:
    if isinstance(H, GeneratorPath):
        if not H.is_harmonic():
            raise ValueError("fragmentation needs a harmonic family")
        return H.H.copy()
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[1] != 2:
        raise ValueError("harmonic family must be (T+1, 2) coefficients")
    return H


def fragment(H, kind: str = "inverse-square", K: int = 50, eps: float = 0.01) -> FragmentationPlan:
    """Split a harmonic family into K pieces nu_k H with nu_k proportional to 1/k^2.

    N0 is the least index whose tail sum_{j >= N0} nu_j is at most eps, so
    every weight from N0 on is at most eps.
    """
    if kind != "inverse-square":
        raise ValueError(f"unknown weight kind {kind!r}")
    if int(K) != K or K < 2:
        raise ValueError("K must be an integer >= 2")
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    k = np.arange(1, int(K) + 1, dtype=float)
    w = 1.0 / (k * k)
    w = w / w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    tails = np.cumsum(w[::-1])[::-1]
    below = np.nonzero(tails <= eps)[0]
    N0 = int(below[0]) + 1 if below.size else int(K) + 1
    return FragmentationPlan(weights=w, H=_harmonic_coeffs(H), N0=N0, eps=float(eps), kind=kind)


def fragment_flux_check(plan: FragmentationPlan, H=None, tol: float = 1e-6) -> dict:
    """Per-piece flux nu_k int H_t dt and its distance to the lattice."""
    Hc = plan.H if H is None else _harmonic_coeffs(H)
    T = Hc.shape[0] - 1
    total = np.trapezoid(Hc, dx=1.0 / T, axis=0)
    flux = plan.weights[:, None] * total[None, :]
    dist = np.array([distance_to_lattice(f) for f in flux])
    return {"total_flux": total, "piece_flux": flux, "distance": dist,
            "in_lattice": dist <= tol, "weight_sum": float(plan.weights.sum()),
            "harmonic_sum_error": float(np.max(np.abs(plan.pieces().sum(axis=0) - Hc)))}


def piece_generator(plan: FragmentationPlan, k: int, grid: TorusGrid) -> GeneratorPath:
    h = plan.piece(k)
    return GeneratorPath(np.zeros((h.shape[0], grid.N, grid.N)), h)


def compose_fragments(plan: FragmentationPlan, grid: TorusGrid, substeps: int = 4) -> DiffeoPath:
    """Pointwise composition rho_K o ... o rho_1 of the piece flows."""
    path = None
    for k in range(1, plan.K + 1):
        p = integrate_generator(piece_generator(plan, k, grid), substeps)
        path = p if path is None else compose_paths(p, path)
    return path


def fragment_recovery_error(plan: FragmentationPlan, grid: TorusGrid, substeps: int = 4) -> dict:
    """Recover the generator of the composed pieces and compare with the family."""
    path = compose_fragments(plan, grid, substeps)
    gen = recover_generator(path)
    return {"harmonic_error": float(np.max(np.abs(gen.H - plan.H))),
            "exact_part_max": float(np.max(np.abs(gen.U))),
            "flux": tuple(flux_cohomological(gen))}
