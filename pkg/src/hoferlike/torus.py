"""Discrete calculus on the flat unit torus with symplectic form dx^dy.

Array conventions (all float64, ``indexing="ij"`` so axis -2 is x, axis -1 is y):

* scalar field  ``(..., N, N)``
* 1-form        ``(..., 2, N, N)`` with components (a, b) of ``a dx + b dy``
* vector field  ``(..., 2, N, N)`` with components (vx, vy)
* displacement  ``(..., 2, N, N)``; the map is ``x -> x + D(x)`` read mod 1

Derivatives are pseudo-spectral with the Nyquist mode dropped, which makes the
discrete derivative skew-adjoint and keeps every exact form mean-free.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class TorusGrid:
    """Uniform N x N node grid on R^2 / Z^2 (side 1, area 1)."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 8 or self.N % 2:
            raise ValueError(f"grid resolution must be an even integer >= 8, got {self.N}")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def area(self) -> float:
        return 1.0

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.N) / self.N

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        X, Y = np.meshgrid(self.x, self.x, indexing="ij")
        return X, Y

    @cached_property
    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened node coordinates (row-major)."""
        X, Y = self.mesh
        return X.ravel().copy(), Y.ravel().copy()

    def field(self, fn) -> np.ndarray:
        """Sample a function of (x, y) on the nodes."""
        X, Y = self.mesh
        return np.broadcast_to(np.asarray(fn(X, Y), dtype=float), (self.N, self.N)).copy()

    def constant_form(self, a: float, b: float) -> np.ndarray:
        out = np.empty((2, self.N, self.N))
        out[0] = a
        out[1] = b
        return out


def grid_of(arr: np.ndarray) -> TorusGrid:
    return TorusGrid(arr.shape[-1])


@lru_cache(maxsize=16)
def _wavenumbers(N: int):
    kx = 2.0 * np.pi * np.fft.fftfreq(N, d=1.0 / N)
    ky = 2.0 * np.pi * np.fft.rfftfreq(N, d=1.0 / N)
    kx[N // 2] = 0.0
    ky[-1] = 0.0
    return kx[:, None], ky[None, :]


def _check_finite(arr, what="field"):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"non-finite {what}")


def partial_derivatives(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Spectral (d/dx f, d/dy f) for scalar fields with arbitrary leading axes."""
    N = f.shape[-1]
    kx, ky = _wavenumbers(N)
    F = np.fft.rfft2(f)
    fx = np.fft.irfft2(1j * kx * F, s=(N, N))
    fy = np.fft.irfft2(1j * ky * F, s=(N, N))
    return fx, fy


def oscillation(f: np.ndarray):
    """max - min over the grid; leading axes are kept (e.g. one value per time)."""
    f = np.asarray(f, dtype=float)
    _check_finite(f)
    out = f.max(axis=(-2, -1)) - f.min(axis=(-2, -1))
    return float(out) if out.ndim == 0 else out


def pointwise_norm(alpha: np.ndarray) -> np.ndarray:
    return np.hypot(alpha[..., 0, :, :], alpha[..., 1, :, :])


def lp_norm_form(alpha: np.ndarray, p: float):
    """L^p norm of a 1-form on the unit-area grid; p = inf gives the sup norm.

    Parameters
    ----------
    alpha : ndarray, shape (..., 2, N, N)
    p : float
        Exponent in [1, inf].

    Returns
    -------
    float or ndarray
        One value per leading index.
    """
    p = float(p)
    if not (p >= 1.0):
        raise ValueError("invalid exponent")
    alpha = np.asarray(alpha, dtype=float)
    _check_finite(alpha, "form")
    pw = pointwise_norm(alpha)
    if np.isinf(p):
        out = pw.max(axis=(-2, -1))
    elif p == 1.0:
        out = pw.mean(axis=(-2, -1))
    elif p == 2.0:
        out = np.sqrt((pw * pw).mean(axis=(-2, -1)))
    else:
        # scale out the max so large p does not overflow
        m = pw.max(axis=(-2, -1), keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        out = safe[..., 0, 0] * ((pw / safe) ** p).mean(axis=(-2, -1)) ** (1.0 / p)
        out = np.where(m[..., 0, 0] > 0, out, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def contract_with_omega(X: np.ndarray) -> np.ndarray:
    """iota_X (dx^dy) = vx dy - vy dx."""
    X = np.asarray(X, dtype=float)
    return np.stack([-X[..., 1, :, :], X[..., 0, :, :]], axis=-3)


def sharp_omega(alpha: np.ndarray) -> np.ndarray:
    """Inverse of :func:`contract_with_omega`."""
    alpha = np.asarray(alpha, dtype=float)
    return np.stack([alpha[..., 1, :, :], -alpha[..., 0, :, :]], axis=-3)


def exterior_derivative(f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    _check_finite(f)
    fx, fy = partial_derivatives(f)
    return np.stack([fx, fy], axis=-3)


def closedness_residual(alpha: np.ndarray) -> float:
    """sup |d_x b - d_y a| (spectral), over all leading indices."""
    alpha = np.asarray(alpha, dtype=float)
    _, ay = partial_derivatives(alpha[..., 0, :, :])
    bx, _ = partial_derivatives(alpha[..., 1, :, :])
    return float(np.max(np.abs(bx - ay)))


def default_closed_tol(N: int) -> float:
    return 1e-6 * N


def jacobian(D: np.ndarray) -> np.ndarray:
    """Spectral Jacobian of the map x + D(x): shape (..., 2, 2, N, N), [i, j] = d phi^i / d x^j."""
    D = np.asarray(D, dtype=float)
    dxx, dxy = partial_derivatives(D[..., 0, :, :])
    dyx, dyy = partial_derivatives(D[..., 1, :, :])
    J = np.stack([np.stack([1.0 + dxx, dxy], axis=-3),
                  np.stack([dyx, 1.0 + dyy], axis=-3)], axis=-4)
    return J


def displacement_gradient(D: np.ndarray) -> np.ndarray:
    """(dDx/dx, dDx/dy, dDy/dx, dDy/dy) stacked as (4, N, N) for the Newton kernel."""
    dxx, dxy = partial_derivatives(D[0])
    dyx, dyy = partial_derivatives(D[1])
    return np.stack([dxx, dxy, dyx, dyy])


def is_spatially_constant(f: np.ndarray, rtol: float = 1e-14) -> bool:
    """True when every (N, N) slice is constant up to ``rtol`` relative rounding."""
    f = np.asarray(f, dtype=float)
    dev = f - f.mean(axis=(-2, -1), keepdims=True)
    return bool(np.max(np.abs(dev)) <= rtol * max(1.0, float(np.max(np.abs(f)))))


def interp_order() -> int:
    """Off-grid interpolation order: 3 (cubic B-spline, default) or 1 (bilinear).

    Set ``HOFERLIKE_INTERP=linear`` to switch to bilinear.
    """
    flag = os.environ.get("HOFERLIKE_INTERP", "cubic").strip().lower()
    if flag in ("1", "linear", "bilinear"):
        return 1
    if flag in ("3", "cubic"):
        return 3
    raise ValueError(f"unknown interpolation order {flag!r}")


def spline_coefficients(field: np.ndarray, order: int | None = None) -> np.ndarray:
    return _kernels.spline_coefficients(field, interp_order() if order is None else order)


def interpolate_coefficients(coef: np.ndarray, px, py, order: int | None = None) -> np.ndarray:
    """Evaluate precomputed coefficients (C, N, N) at points of any shape."""
    order = interp_order() if order is None else order
    shape = np.shape(px)
    out = _kernels.interp(coef, np.ravel(px), np.ravel(py), order)
    return out.reshape((coef.shape[0],) + shape)


def interpolate(field: np.ndarray, px, py, order: int | None = None) -> np.ndarray:
    """Periodic interpolation of a (C, N, N) or (N, N) field at points.

    Cubic B-spline interpolation reproduces the node values exactly and is
    C^2 between them; bilinear is available through ``order=1``.
    """
    field = np.asarray(field, dtype=float)
    scalar = field.ndim == 2
    if scalar:
        field = field[None]
    order = interp_order() if order is None else order
    out = interpolate_coefficients(spline_coefficients(field, order), px, py, order)
    return out[0] if scalar else out


def image_points(D: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lifted node images x + D(x), flattened."""
    N = D.shape[-1]
    px, py = TorusGrid(N).points
    return px + D[0].ravel(), py + D[1].ravel()


def compose_field(f: np.ndarray, D: np.ndarray) -> np.ndarray:
    """f o phi on the nodes, f of shape (N, N) or (C, N, N)."""
    f = np.asarray(f, dtype=float)
    if is_spatially_constant(f):
        return f.copy()
    px, py = image_points(D)
    out = interpolate(f, px, py)
    return out.reshape(f.shape)


def pullback_oneform(D: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """(phi^* alpha)_x(v) = alpha_{phi(x)}(D phi_x v).

    alpha is sampled at phi(x) by periodic interpolation; the Jacobian of phi
    is spectral.
    """
    J = jacobian(D)
    A = compose_field(np.asarray(alpha, dtype=float), D)
    a = A[0] * J[0, 0] + A[1] * J[1, 0]
    b = A[0] * J[0, 1] + A[1] * J[1, 1]
    return np.stack([a, b])


def reduce_mod1(d: np.ndarray) -> np.ndarray:
    """Reduce displacements to (-1/2, 1/2]."""
    return d - np.ceil(d - 0.5)
