"""Symplectic isotopies of the torus: generators, flows, inverses, composition, flux."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import _kernels
from .hodge import hodge_decompose
from .torus import (
    TorusGrid,
    compose_field,
    contract_with_omega,
    displacement_gradient,
    exterior_derivative,
    image_points,
    interp_order,
    is_spatially_constant,
    jacobian,
    partial_derivatives,
    reduce_mod1,
    sharp_omega,
    spline_coefficients,
)

MIN_SAMPLES = 16
CFL_FACTOR = 10.0


class FluxClass(NamedTuple):
    """Cohomology class a dx + b dy."""

    a: float
    b: float

    @property
    def norm(self) -> float:
        return float(np.hypot(self.a, self.b))

    def __sub__(self, other):
        return FluxClass(self.a - other[0], self.b - other[1])

    def __add__(self, other):
        return FluxClass(self.a + other[0], self.b + other[1])


@dataclass(frozen=True)
class GeneratorPath:
    """Time samples of (U_t, H_t) on t_n = n / T.

    ``U`` has shape (T+1, N, N) with every slice mean-free; ``H`` has shape
    (T+1, 2) holding the coefficients of H_t = a dx + b dy.
    """

    U: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        U = np.asarray(self.U, dtype=float)
        H = np.asarray(self.H, dtype=float)
        if U.ndim != 3 or U.shape[1] != U.shape[2]:
            raise ValueError("U must have shape (T+1, N, N)")
        if H.shape != (U.shape[0], 2):
            raise ValueError("H must have shape (T+1, 2)")
        if U.shape[0] - 1 < MIN_SAMPLES:
            raise ValueError(f"need at least {MIN_SAMPLES} time intervals")
        TorusGrid(U.shape[-1])
        if not (np.all(np.isfinite(U)) and np.all(np.isfinite(H))):
            raise ValueError("non-finite generator")
        scale = max(1.0, float(np.max(np.abs(U))))
        if np.max(np.abs(U.mean(axis=(1, 2)))) > 1e-12 * scale:
            raise ValueError("U_t must be mean-free")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "H", H)

    @classmethod
    def build(cls, U, H) -> "GeneratorPath":
        """Normalize U (subtract per-sample means) and wrap."""
        U = np.array(U, dtype=float)
        U -= U.mean(axis=(1, 2), keepdims=True)
        return cls(U, np.array(H, dtype=float))

    @classmethod
    def from_functions(cls, grid: TorusGrid, T: int,
                       U: Callable | None = None, H: Callable | None = None) -> "GeneratorPath":
        """Sample U(t, x, y) and H(t) -> (a, b) on the grid."""
        times = np.linspace(0.0, 1.0, T + 1)
        X, Y = grid.mesh
        Us = np.zeros((T + 1, grid.N, grid.N))
        Hs = np.zeros((T + 1, 2))
        for n, t in enumerate(times):
            if U is not None:
                Us[n] = np.broadcast_to(U(t, X, Y), (grid.N, grid.N))
            if H is not None:
                Hs[n] = H(t)
        return cls.build(Us, Hs)

    @property
    def T(self) -> int:
        return self.U.shape[0] - 1

    @property
    def N(self) -> int:
        return self.U.shape[-1]

    @property
    def grid(self) -> TorusGrid:
        return TorusGrid(self.N)

    @property
    def dt(self) -> float:
        return 1.0 / self.T

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.T + 1)

    def is_hamiltonian(self, tol: float = 1e-8) -> bool:
        return bool(np.max(np.abs(self.H)) <= tol)

    def is_harmonic(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.U)) <= tol)

    def forms(self) -> np.ndarray:
        """alpha_t = dU_t + H_t, shape (T+1, 2, N, N)."""
        if not np.any(self.U):
            return np.broadcast_to(self.H[:, :, None, None], self.H.shape + (self.N, self.N)).copy()
        return exterior_derivative(self.U) + self.H[:, :, None, None]

    def vector_fields(self) -> np.ndarray:
        return sharp_omega(self.forms())

    def sample(self, s) -> tuple[np.ndarray, np.ndarray]:
        """Linear-in-time interpolation of (U, H) at times s in [0, 1]."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        i, w = _bracket(s, self.T)
        U = (1.0 - w)[:, None, None] * self.U[i] + w[:, None, None] * self.U[i + 1]
        H = (1.0 - w)[:, None] * self.H[i] + w[:, None] * self.H[i + 1]
        return U, H

    def scaled(self, c: float) -> "GeneratorPath":
        return GeneratorPath(c * self.U, c * self.H)

    def __add__(self, other: "GeneratorPath") -> "GeneratorPath":
        return GeneratorPath(self.U + other.U, self.H + other.H)


@dataclass(frozen=True)
class DiffeoPath:
    """Displacement samples D_t of shape (T+1, 2, N, N); phi_t(x) = x + D_t(x) mod 1.

    Displacements are kept unreduced so winding survives.
    """

    D: np.ndarray
    source: str = "integrated"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        D = np.asarray(self.D, dtype=float)
        if D.ndim != 4 or D.shape[1] != 2 or D.shape[2] != D.shape[3]:
            raise ValueError("D must have shape (T+1, 2, N, N)")
        if np.max(np.abs(D[0])) > 1e-12:
            raise ValueError("path must start at the identity")
        object.__setattr__(self, "D", D)

    @property
    def T(self) -> int:
        return self.D.shape[0] - 1

    @property
    def N(self) -> int:
        return self.D.shape[-1]

    @property
    def dt(self) -> float:
        return 1.0 / self.T

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.T + 1)

    @property
    def endpoint(self) -> np.ndarray:
        return self.D[-1]

    def sample(self, s: float) -> np.ndarray:
        """Displacement at time s, linear between samples (on the lift)."""
        i, w = _bracket(np.array([s], dtype=float), self.T)
        i, w = int(i[0]), float(w[0])
        return (1.0 - w) * self.D[i] + w * self.D[i + 1]


def _bracket(s: np.ndarray, T: int):
    x = np.clip(s, 0.0, 1.0) * T
    i = np.minimum(np.floor(x).astype(np.int64), T - 1)
    return i, x - i


# ---------------------------------------------------------------------------
# flows
# ---------------------------------------------------------------------------

def flow_fields(X: np.ndarray, substeps: int = 4, points=None) -> np.ndarray:
    """Transport points under the velocity samples X (K+1, 2, N, N) on [0, 1].

    Velocity is linear in time between samples and interpolated in space; each
    sample interval takes ``substeps`` RK4 steps.  Spatially constant fields
    are integrated in closed form (RK4 is exact for them anyway).  Returns
    displacements of shape (K+1, 2, M) for explicit points or (K+1, 2, N, N)
    for the nodes.
    """
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    X = np.asarray(X, dtype=float)
    K = X.shape[0] - 1
    N = X.shape[-1]
    dt = 1.0 / K
    vmax = float(np.max(np.hypot(X[:, 0], X[:, 1])))
    if vmax * dt / substeps > 0.5 * CFL_FACTOR / N:
        raise ValueError("time step too large")
    if points is None:
        qx, qy = TorusGrid(N).points
        shape = (N, N)
    else:
        qx, qy = (np.asarray(p, dtype=float).ravel() for p in points)
        shape = (qx.size,)
    D = np.zeros((K + 1, 2) + shape)
    if is_spatially_constant(X):
        v = X.mean(axis=(-2, -1))
        steps = 0.5 * dt * (v[1:] + v[:-1])
        D[1:] = np.cumsum(steps, axis=0).reshape((K, 2) + (1,) * len(shape))
        return D
    order = interp_order()
    C = spline_coefficients(X, order)
    px, py = qx, qy
    flat = [is_spatially_constant(X[n]) for n in range(K + 1)]
    for n in range(K):
        if flat[n] and flat[n + 1]:
            # RK4 is exact here; skip the interpolation
            v = 0.5 * dt * (X[n].mean(axis=(-2, -1)) + X[n + 1].mean(axis=(-2, -1)))
            px, py = px + v[0], py + v[1]
        else:
            px, py = _kernels.rk4_interval(C[n], C[n + 1], px, py, dt, substeps, order)
        D[n + 1, 0] = (px - qx).reshape(shape)
        D[n + 1, 1] = (py - qy).reshape(shape)
    return D


def integrate_generator(gen: GeneratorPath, substeps: int = 4) -> DiffeoPath:
    """Flow of X_t = sharp(dU_t + H_t) from the identity."""
    D = flow_fields(gen.vector_fields(), substeps)
    return DiffeoPath(D, "integrated")


def invert_diffeo(D: np.ndarray, tol: float = 1e-11, max_iter: int = 50,
                  guess: np.ndarray | None = None) -> np.ndarray:
    """Displacement E of the inverse map: phi^{-1}(y) = y + E(y).

    Each node solves x + D(x) = y by damped Newton iteration with the
    interpolated spectral Jacobian.  ``guess`` is an initial inverse
    displacement (for instance the inverse at the previous time sample);
    without it the start is y - D(y).
    """
    D = np.asarray(D, dtype=float)
    N = D.shape[-1]
    if is_spatially_constant(D):
        # translation: the inverse is exact
        return np.broadcast_to(-D.mean(axis=(-2, -1))[:, None, None], D.shape).copy()
    qx, qy = TorusGrid(N).points
    start = -D if guess is None else np.asarray(guess, dtype=float)
    x0 = qx + start[0].ravel()
    y0 = qy + start[1].ravel()
    order = interp_order()
    DC = spline_coefficients(D, order)
    JC = spline_coefficients(displacement_gradient(D), order)
    px, py, iters = _kernels.newton_invert(DC, JC, qx, qy, x0, y0, tol, max_iter, order)
    bad = np.nonzero(iters < 0)[0]
    if bad.size:
        i, j = divmod(int(bad[0]), N)
        raise ValueError(f"map not invertible at node ({i}, {j})")
    return np.stack([(px - qx).reshape(N, N), (py - qy).reshape(N, N)])


def compose_displacements(D_outer: np.ndarray, D_inner: np.ndarray) -> np.ndarray:
    """Displacement of outer o inner."""
    return D_inner + compose_field(D_outer, D_inner)


def time_derivative(D: np.ndarray, dt: float) -> np.ndarray:
    """Fourth-order finite differences in time (central inside, one-sided at the ends).

    Paths integrated from generators that are linear in t between samples have
    acceleration jumps at the samples; the five-point central stencil leaves
    an error of dt^2 |X_tt| / 12 there, a third of the three-point stencil's.
    """
    D = np.asarray(D, dtype=float)
    K = D.shape[0] - 1
    if K < 4:
        return np.gradient(D, dt, axis=0, edge_order=2)
    V = np.empty_like(D)
    V[2:K - 1] = (-D[4:] + 8.0 * D[3:K] - 8.0 * D[1:K - 2] + D[:K - 3]) / (12.0 * dt)
    V[0] = (-25.0 * D[0] + 48.0 * D[1] - 36.0 * D[2] + 16.0 * D[3] - 3.0 * D[4]) / (12.0 * dt)
    V[1] = (-3.0 * D[0] - 10.0 * D[1] + 18.0 * D[2] - 6.0 * D[3] + D[4]) / (12.0 * dt)
    V[K] = (25.0 * D[K] - 48.0 * D[K - 1] + 36.0 * D[K - 2] - 16.0 * D[K - 3] + 3.0 * D[K - 4]) / (12.0 * dt)
    V[K - 1] = (3.0 * D[K] + 10.0 * D[K - 1] - 18.0 * D[K - 2] + 6.0 * D[K - 3] - D[K - 4]) / (12.0 * dt)
    return V


def relative_curl(alpha: np.ndarray) -> float:
    """sup |curl alpha| divided by the largest first derivative of alpha."""
    alpha = np.asarray(alpha, dtype=float)
    ax, ay = partial_derivatives(alpha[..., 0, :, :])
    bx, by = partial_derivatives(alpha[..., 1, :, :])
    scale = max(float(np.max(np.abs(ax))), float(np.max(np.abs(ay))),
                float(np.max(np.abs(bx))), float(np.max(np.abs(by))))
    curl = float(np.max(np.abs(bx - ay)))
    # floor keeps roundoff in nearly constant forms from counting as curl
    N = alpha.shape[-1]
    floor = 1e-9 * N * max(1.0, float(np.max(np.abs(alpha))))
    return curl / max(scale, floor)


RECOVER_TOL = 5e-2


def recover_generator(path: DiffeoPath, tol: float = RECOVER_TOL) -> GeneratorPath:
    """Generator (U_t, H_t) of a sampled isotopy.

    X_t at the nodes is phi_dot_t evaluated at phi_t^{-1}(node); the 1-forms
    iota_X omega are then Hodge-decomposed sample by sample.  Finite
    differences in time leave a small curl even for exact symplectic flows,
    so closedness is judged relative to the size of the derivatives of the
    forms: ``tol`` bounds :func:`relative_curl`.  Compressible maps give a
    relative curl of order one.
    """
    N = path.N
    V = time_derivative(path.D, path.dt)
    alphas = np.empty_like(V)
    E = np.zeros((2, N, N))
    for n in range(path.T + 1):
        if n == 0:
            Xn = V[0]
        else:
            E = invert_diffeo(path.D[n], guess=E)
            Xn = compose_field(V[n], E)
        alphas[n] = contract_with_omega(Xn)
    if relative_curl(alphas) > tol:
        raise ValueError("path not symplectic to tolerance")
    dec = hodge_decompose(alphas, np.inf)
    return GeneratorPath.build(dec.U, dec.H)


def compose_paths(psi: DiffeoPath, phi: DiffeoPath) -> DiffeoPath:
    """(psi o phi)_t = psi_t o phi_t."""
    if psi.D.shape != phi.D.shape:
        raise ValueError("paths must share time sampling and grid")
    D = np.empty_like(phi.D)
    for n in range(phi.T + 1):
        D[n] = compose_displacements(psi.D[n], phi.D[n])
    D[0] = 0.0
    return DiffeoPath(D, "composed")


def plateau(t, delta: float = 0.1):
    """Quintic smoothstep rescaled to vanish on [0, delta] and equal 1 on [1 - delta, 1]."""
    u = np.clip((np.asarray(t, dtype=float) - delta) / (1.0 - 2.0 * delta), 0.0, 1.0)
    return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)


def plateau_rate(t, delta: float = 0.1):
    u = np.clip((np.asarray(t, dtype=float) - delta) / (1.0 - 2.0 * delta), 0.0, 1.0)
    return 30.0 * u * u * (1.0 - u) ** 2 / (1.0 - 2.0 * delta)


def _check_delta(delta):
    if not (0.0 < delta < 0.5):
        raise ValueError("delta must lie in (0, 1/2)")


def concatenate_left(psi: DiffeoPath, phi: DiffeoPath, delta: float = 0.1) -> DiffeoPath:
    """Run phi on [0, 1/2] (time lambda(t) = f(2t)), then psi_{f(2t-1)} o phi_1."""
    _check_delta(delta)
    if psi.N != phi.N:
        raise ValueError("paths must share the grid")
    T = max(psi.T, phi.T)
    times = np.linspace(0.0, 1.0, T + 1)
    D = np.empty((T + 1, 2, phi.N, phi.N))
    end = phi.endpoint
    for n, t in enumerate(times):
        if t <= 0.5:
            D[n] = phi.sample(float(plateau(2.0 * t, delta)))
        else:
            D[n] = compose_displacements(psi.sample(float(plateau(2.0 * t - 1.0, delta))), end)
    D[0] = 0.0
    return DiffeoPath(D, "concatenated")


def concatenate_generators(gen_psi: GeneratorPath, gen_phi: GeneratorPath,
                           delta: float = 0.1, T: int | None = None) -> GeneratorPath:
    """Generator of the left concatenation of the flows of gen_psi and gen_phi.

    On the first half the field is 2 f'(2t) X^phi_{f(2t)}; on the second it is
    2 f'(2t-1) X^psi_{f(2t-1)} (right composition with phi_1 leaves it alone).
    """
    _check_delta(delta)
    if gen_psi.N != gen_phi.N:
        raise ValueError("generators must share the grid")
    if T is None:
        T = gen_psi.T + gen_phi.T
    if T % 2:
        raise ValueError("output sampling must be even")
    t = np.linspace(0.0, 1.0, T + 1)
    first = t <= 0.5
    U = np.empty((T + 1, gen_phi.N, gen_phi.N))
    H = np.empty((T + 1, 2))
    for mask, g, arg in ((first, gen_phi, 2.0 * t), (~first, gen_psi, 2.0 * t - 1.0)):
        s = plateau(arg[mask], delta)
        rate = 2.0 * plateau_rate(arg[mask], delta)
        # normalize so the trapezoid rule integrates each half's rate to exactly 1
        full = plateau_rate(np.linspace(0.0, 1.0, T // 2 + 1), delta)
        rate /= np.trapezoid(full, dx=2.0 / T)
        Us, Hs = g.sample(s)
        U[mask] = rate[:, None, None] * Us
        H[mask] = rate[:, None] * Hs
    return GeneratorPath.build(U, H)


def reverse_path(phi: DiffeoPath) -> DiffeoPath:
    """{phi_{1-t} o phi_1^{-1}}: starts at the identity, ends at phi_1^{-1}."""
    E = invert_diffeo(phi.endpoint)
    D = np.empty_like(phi.D)
    for n in range(phi.T + 1):
        D[n] = compose_displacements(phi.D[phi.T - n], E)
    D[0] = 0.0
    return DiffeoPath(D, "reversed")


def reverse_generator(gen: GeneratorPath) -> GeneratorPath:
    """Generator of the reversed path: -X_{1-t}."""
    return GeneratorPath(-gen.U[::-1].copy(), -gen.H[::-1].copy())


# ---------------------------------------------------------------------------
# flux and loops
# ---------------------------------------------------------------------------

def flux_cohomological(gen: GeneratorPath) -> FluxClass:
    """Trapezoidal time integral of the harmonic coefficients."""
    a, b = np.trapezoid(gen.H, dx=gen.dt, axis=0)
    return FluxClass(float(a), float(b))


def flux_form(path: DiffeoPath) -> np.ndarray:
    """The closed 1-form int_0^1 phi_t^*(iota_{X_t} omega) dt on the nodes.

    The pulled-back form equals omega(phi_dot_t, D phi_t .) so no inverse map is
    needed.  Between samples the lifted trajectories are taken linear in time,
    for which the per-interval integral is exactly
    omega(Delta D, (D phi_n + D phi_{n+1}) / 2 .).
    """
    D = path.D
    N = path.N
    sigma = np.zeros((2, N, N))
    J0 = jacobian(D[0])
    for n in range(path.T):
        J1 = jacobian(D[n + 1])
        Jm = 0.5 * (J0 + J1)
        dx = D[n + 1, 0] - D[n, 0]
        dy = D[n + 1, 1] - D[n, 1]
        sigma[0] += dx * Jm[1, 0] - dy * Jm[0, 0]
        sigma[1] += dx * Jm[1, 1] - dy * Jm[0, 1]
        J0 = J1
    return sigma


def flux_definition(path: DiffeoPath) -> FluxClass:
    """Harmonic projection of the time-integrated pulled-back contraction."""
    a, b = flux_form(path).mean(axis=(1, 2))
    return FluxClass(float(a), float(b))


def loop_residual(path_or_D) -> float:
    """sup over nodes of the torus distance between phi_1(x) and x."""
    D1 = path_or_D.endpoint if isinstance(path_or_D, DiffeoPath) else np.asarray(path_or_D)
    r = reduce_mod1(D1)
    return float(np.max(np.hypot(r[0], r[1])))


def is_loop(path: DiffeoPath, tol: float = 1e-6) -> bool:
    return loop_residual(path) <= tol


def endpoint_distance(D_a: np.ndarray, D_b: np.ndarray) -> float:
    """sup-norm distance of two maps on the torus (winding ignored)."""
    return loop_residual(np.asarray(D_a) - np.asarray(D_b))


# ---------------------------------------------------------------------------
# convenience generators
# ---------------------------------------------------------------------------

def harmonic_generator(grid: TorusGrid, T: int, a: float, b: float) -> GeneratorPath:
    """Constant harmonic generator H = a dx + b dy, U = 0."""
    return GeneratorPath(np.zeros((T + 1, grid.N, grid.N)), np.tile([a, b], (T + 1, 1)))


def harmonic_flow_generator(grid: TorusGrid, T: int, n: float, m: float) -> GeneratorPath:
    """Generator of the translation flow (x + n t, y + m t): iota_A omega = n dy - m dx."""
    return harmonic_generator(grid, T, -m, n)


def zero_path(grid: TorusGrid, T: int) -> DiffeoPath:
    return DiffeoPath(np.zeros((T + 1, 2, grid.N, grid.N)), "identity")


def translation_path(grid: TorusGrid, T: int, v) -> DiffeoPath:
    t = np.linspace(0.0, 1.0, T + 1)
    D = np.zeros((T + 1, 2, grid.N, grid.N))
    D[:, 0] = t[:, None, None] * v[0]
    D[:, 1] = t[:, None, None] * v[1]
    return DiffeoPath(D, "translation")


__all__ = [
    "FluxClass", "GeneratorPath", "DiffeoPath", "flow_fields", "integrate_generator",
    "invert_diffeo", "compose_displacements", "time_derivative", "recover_generator",
    "relative_curl", "RECOVER_TOL",
    "compose_paths", "plateau", "plateau_rate", "concatenate_left", "concatenate_generators",
    "reverse_path", "reverse_generator", "flux_cohomological", "flux_form", "flux_definition",
    "loop_residual", "is_loop", "endpoint_distance", "harmonic_generator",
    "harmonic_flow_generator", "zero_path", "translation_path", "image_points",
]
