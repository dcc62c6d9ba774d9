"""Hot loops: periodic interpolation, RK4 node transport, damped Newton inversion.

Every kernel exists twice, as a numba function and as a vectorized numpy twin.
The numba path is used when numba imports and ``HOFERLIKE_NUMBA`` is not ``0``.

Interpolation reads coefficient arrays of shape (C, N, N).  For order 1
(bilinear) the coefficients are the node values; for order 3 they are periodic
cubic B-spline coefficients from :func:`spline_coefficients`.
"""

from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def numba_enabled() -> bool:
    flag = os.environ.get("HOFERLIKE_NUMBA", "1").strip().lower()
    return HAVE_NUMBA and flag not in ("0", "false", "off", "no")


@lru_cache(maxsize=16)
def _bspline_symbol(N: int) -> np.ndarray:
    k = np.arange(N)
    b = (4.0 + 2.0 * np.cos(2.0 * np.pi * k / N)) / 6.0
    return b[:, None] * b[None, :N // 2 + 1]


def spline_coefficients(values: np.ndarray, order: int) -> np.ndarray:
    """Coefficients whose interpolant reproduces ``values`` at the nodes."""
    values = np.asarray(values, dtype=np.float64)
    if order == 1:
        return np.ascontiguousarray(values)
    N = values.shape[-1]
    return np.fft.irfft2(np.fft.rfft2(values) / _bspline_symbol(N), s=(N, N))


# ---------------------------------------------------------------------------
# numpy twins
# ---------------------------------------------------------------------------

def _cubic_weights(s):
    s2 = s * s
    s3 = s2 * s
    return ((1.0 - s) ** 3 / 6.0, (3.0 * s3 - 6.0 * s2 + 4.0) / 6.0,
            (-3.0 * s3 + 3.0 * s2 + 3.0 * s + 1.0) / 6.0, s3 / 6.0)


def _stencil_numpy(p, N, order):
    u = p * N
    fi = np.floor(u)
    s = u - fi
    i = fi.astype(np.int64)
    if order == 1:
        return [(i % N, 1.0 - s), ((i + 1) % N, s)]
    return list(zip([(i + q) % N for q in (-1, 0, 1, 2)], _cubic_weights(s)))


def interp_numpy(coef, px, py, order=3):
    N = coef.shape[-1]
    sx = _stencil_numpy(px, N, order)
    sy = _stencil_numpy(py, N, order)
    out = np.zeros((coef.shape[0], px.shape[0]))
    for ii, wx in sx:
        for jj, wy in sy:
            out += (wx * wy) * coef[:, ii, jj]
    return out


def rk4_interval_numpy(C0, C1, px, py, dt, substeps, order=3):
    """Advance points over one sample interval; velocity is linear in t across it."""
    def vel(tau, x, y):
        return (1.0 - tau) * interp_numpy(C0, x, y, order) + tau * interp_numpy(C1, x, y, order)

    hs = 1.0 / substeps
    h = dt * hs
    for k in range(substeps):
        tau = k * hs
        k1 = vel(tau, px, py)
        k2 = vel(tau + 0.5 * hs, px + 0.5 * h * k1[0], py + 0.5 * h * k1[1])
        k3 = vel(tau + 0.5 * hs, px + 0.5 * h * k2[0], py + 0.5 * h * k2[1])
        k4 = vel(tau + hs, px + h * k3[0], py + h * k3[1])
        px = px + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        py = py + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    return px, py


def newton_invert_numpy(DC, JC, qx, qy, x0, y0, tol, max_iter, order=3):
    """Solve p + D(p) = q per point; returns (px, py, iterations), -1 marks failure.

    Steps use the interpolated Jacobian of D and are halved (at most 12 times)
    until the residual decreases.
    """
    px = x0.copy()
    py = y0.copy()
    iters = np.full(px.shape, -1, dtype=np.int64)
    d = interp_numpy(DC, px, py, order)
    rx = px + d[0] - qx
    ry = py + d[1] - qy
    res = np.maximum(np.abs(rx), np.abs(ry))
    for it in range(max_iter + 1):
        iters[(res <= tol) & (iters < 0)] = it
        idx = np.nonzero(iters < 0)[0]
        if idx.size == 0 or it == max_iter:
            break
        j = interp_numpy(JC, px[idx], py[idx], order)
        a = 1.0 + j[0]
        b = j[1]
        c = j[2]
        e = 1.0 + j[3]
        det = a * e - b * c
        sx = (e * rx[idx] - b * ry[idx]) / det
        sy = (a * ry[idx] - c * rx[idx]) / det
        lam = np.ones(idx.size)
        pending = np.arange(idx.size)
        for halving in range(13):
            k = idx[pending]
            nx = px[k] - lam[pending] * sx[pending]
            ny = py[k] - lam[pending] * sy[pending]
            dn = interp_numpy(DC, nx, ny, order)
            nrx = nx + dn[0] - qx[k]
            nry = ny + dn[1] - qy[k]
            nres = np.maximum(np.abs(nrx), np.abs(nry))
            take = (nres < res[k]) | (halving == 12)
            kk = k[take]
            px[kk] = nx[take]
            py[kk] = ny[take]
            rx[kk] = nrx[take]
            ry[kk] = nry[take]
            res[kk] = nres[take]
            pending = pending[~take]
            if pending.size == 0:
                break
            lam[pending] *= 0.5
    return px, py, iters


# ---------------------------------------------------------------------------
# numba versions
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True, inline="always")
    def _eval2(C0, C1, order, x, y):
        # components 0 and 1 of two coefficient arrays at one point
        N = C0.shape[-1]
        u = x * N
        v = y * N
        fi = np.floor(u)
        fj = np.floor(v)
        s = u - fi
        t = v - fj
        i = int(fi)
        j = int(fj)
        a0 = 0.0
        a1 = 0.0
        b0 = 0.0
        b1 = 0.0
        if order == 1:
            i0 = i % N
            j0 = j % N
            i1 = (i0 + 1) % N
            j1 = (j0 + 1) % N
            w00 = (1.0 - s) * (1.0 - t)
            w10 = s * (1.0 - t)
            w01 = (1.0 - s) * t
            w11 = s * t
            a0 = w00 * C0[0, i0, j0] + w10 * C0[0, i1, j0] + w01 * C0[0, i0, j1] + w11 * C0[0, i1, j1]
            a1 = w00 * C0[1, i0, j0] + w10 * C0[1, i1, j0] + w01 * C0[1, i0, j1] + w11 * C0[1, i1, j1]
            b0 = w00 * C1[0, i0, j0] + w10 * C1[0, i1, j0] + w01 * C1[0, i0, j1] + w11 * C1[0, i1, j1]
            b1 = w00 * C1[1, i0, j0] + w10 * C1[1, i1, j0] + w01 * C1[1, i0, j1] + w11 * C1[1, i1, j1]
            return a0, a1, b0, b1
        s2 = s * s
        s3 = s2 * s
        t2 = t * t
        t3 = t2 * t
        wx0 = (1.0 - s) ** 3 / 6.0
        wx1 = (3.0 * s3 - 6.0 * s2 + 4.0) / 6.0
        wx2 = (-3.0 * s3 + 3.0 * s2 + 3.0 * s + 1.0) / 6.0
        wx3 = s3 / 6.0
        wy = ((1.0 - t) ** 3 / 6.0, (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
              (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0, t3 / 6.0)
        for q in range(4):
            jj = (j - 1 + q) % N
            i0 = (i - 1) % N
            i1 = i % N
            i2 = (i + 1) % N
            i3 = (i + 2) % N
            w = wy[q]
            a0 += w * (wx0 * C0[0, i0, jj] + wx1 * C0[0, i1, jj] + wx2 * C0[0, i2, jj] + wx3 * C0[0, i3, jj])
            a1 += w * (wx0 * C0[1, i0, jj] + wx1 * C0[1, i1, jj] + wx2 * C0[1, i2, jj] + wx3 * C0[1, i3, jj])
            b0 += w * (wx0 * C1[0, i0, jj] + wx1 * C1[0, i1, jj] + wx2 * C1[0, i2, jj] + wx3 * C1[0, i3, jj])
            b1 += w * (wx0 * C1[1, i0, jj] + wx1 * C1[1, i1, jj] + wx2 * C1[1, i2, jj] + wx3 * C1[1, i3, jj])
        return a0, a1, b0, b1

    @numba.njit(cache=True)
    def interp_numba(coef, px, py, order):
        C = coef.shape[0]
        M = px.shape[0]
        out = np.empty((C, M))
        for c in range(0, C - 1, 2):
            sub = coef[c:c + 2]
            for m in range(M):
                v0, v1, _, _ = _eval2(sub, sub, order, px[m], py[m])
                out[c, m] = v0
                out[c + 1, m] = v1
        if C % 2:
            sub = np.empty((2, coef.shape[1], coef.shape[2]))
            sub[0] = coef[C - 1]
            sub[1] = coef[C - 1]
            for m in range(M):
                v0, _, _, _ = _eval2(sub, sub, order, px[m], py[m])
                out[C - 1, m] = v0
        return out

    @numba.njit(cache=True, inline="always")
    def _eval_padded(P, order, x, y):
        # P[c, a, b] = C[c, (a - 1) % N, (b - 1) % N]; wrapping happens once per point
        N = P.shape[-1] - 3
        u = x * N
        v = y * N
        fi = np.floor(u)
        fj = np.floor(v)
        s = u - fi
        t = v - fj
        i = int(fi) % N
        j = int(fj) % N
        if order == 1:
            w00 = (1.0 - s) * (1.0 - t)
            w10 = s * (1.0 - t)
            w01 = (1.0 - s) * t
            w11 = s * t
            a0 = w00 * P[0, i + 1, j + 1] + w10 * P[0, i + 2, j + 1] + w01 * P[0, i + 1, j + 2] + w11 * P[0, i + 2, j + 2]
            a1 = w00 * P[1, i + 1, j + 1] + w10 * P[1, i + 2, j + 1] + w01 * P[1, i + 1, j + 2] + w11 * P[1, i + 2, j + 2]
            return a0, a1
        s2 = s * s
        s3 = s2 * s
        t2 = t * t
        t3 = t2 * t
        wx0 = (1.0 - s) ** 3 / 6.0
        wx1 = (3.0 * s3 - 6.0 * s2 + 4.0) / 6.0
        wx2 = (-3.0 * s3 + 3.0 * s2 + 3.0 * s + 1.0) / 6.0
        wx3 = s3 / 6.0
        wy0 = (1.0 - t) ** 3 / 6.0
        wy1 = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0
        wy2 = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0
        wy3 = t3 / 6.0
        P0 = P[0]
        P1 = P[1]
        a0 = (wx0 * (wy0 * P0[i, j] + wy1 * P0[i, j + 1] + wy2 * P0[i, j + 2] + wy3 * P0[i, j + 3])
              + wx1 * (wy0 * P0[i + 1, j] + wy1 * P0[i + 1, j + 1] + wy2 * P0[i + 1, j + 2] + wy3 * P0[i + 1, j + 3])
              + wx2 * (wy0 * P0[i + 2, j] + wy1 * P0[i + 2, j + 1] + wy2 * P0[i + 2, j + 2] + wy3 * P0[i + 2, j + 3])
              + wx3 * (wy0 * P0[i + 3, j] + wy1 * P0[i + 3, j + 1] + wy2 * P0[i + 3, j + 2] + wy3 * P0[i + 3, j + 3]))
        a1 = (wx0 * (wy0 * P1[i, j] + wy1 * P1[i, j + 1] + wy2 * P1[i, j + 2] + wy3 * P1[i, j + 3])
              + wx1 * (wy0 * P1[i + 1, j] + wy1 * P1[i + 1, j + 1] + wy2 * P1[i + 1, j + 2] + wy3 * P1[i + 1, j + 3])
              + wx2 * (wy0 * P1[i + 2, j] + wy1 * P1[i + 2, j + 1] + wy2 * P1[i + 2, j + 2] + wy3 * P1[i + 2, j + 3])
              + wx3 * (wy0 * P1[i + 3, j] + wy1 * P1[i + 3, j + 1] + wy2 * P1[i + 3, j + 2] + wy3 * P1[i + 3, j + 3]))
        return a0, a1

    @numba.njit(cache=True)
    def _blend_padded(C0, C1, substeps):
        # coefficients at the RK4 stage times q / (2 substeps), padded for wrap-free stencils
        N = C0.shape[-1]
        Q = 2 * substeps + 1
        B = np.empty((Q, 2, N + 3, N + 3))
        for q in range(Q):
            w = q / (2.0 * substeps)
            for c in range(2):
                for a in range(N + 3):
                    ia = (a - 1) % N
                    for b in range(N + 3):
                        ib = (b - 1) % N
                        B[q, c, a, b] = (1.0 - w) * C0[c, ia, ib] + w * C1[c, ia, ib]
        return B

    @numba.njit(cache=True)
    def _rk4_direct(C0, C1, px, py, dt, substeps, order):
        # few points: evaluate both end samples and blend per stage
        M = px.shape[0]
        ox = np.empty(M)
        oy = np.empty(M)
        h = dt / substeps
        hs = 1.0 / substeps
        for m in range(M):
            x = px[m]
            y = py[m]
            for k in range(substeps):
                tau = k * hs
                a0, a1, b0, b1 = _eval2(C0, C1, order, x, y)
                k1x = (1.0 - tau) * a0 + tau * b0
                k1y = (1.0 - tau) * a1 + tau * b1
                w = tau + 0.5 * hs
                a0, a1, b0, b1 = _eval2(C0, C1, order, x + 0.5 * h * k1x, y + 0.5 * h * k1y)
                k2x = (1.0 - w) * a0 + w * b0
                k2y = (1.0 - w) * a1 + w * b1
                a0, a1, b0, b1 = _eval2(C0, C1, order, x + 0.5 * h * k2x, y + 0.5 * h * k2y)
                k3x = (1.0 - w) * a0 + w * b0
                k3y = (1.0 - w) * a1 + w * b1
                w = tau + hs
                a0, a1, b0, b1 = _eval2(C0, C1, order, x + h * k3x, y + h * k3y)
                k4x = (1.0 - w) * a0 + w * b0
                k4y = (1.0 - w) * a1 + w * b1
                x = x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
                y = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            ox[m] = x
            oy[m] = y
        return ox, oy

    @numba.njit(cache=True)
    def rk4_interval_numba(C0, C1, px, py, dt, substeps, order):
        M = px.shape[0]
        N = C0.shape[-1]
        if 2 * M < (N + 3) * (N + 3):
            return _rk4_direct(C0, C1, px, py, dt, substeps, order)
        ox = np.empty(M)
        oy = np.empty(M)
        h = dt / substeps
        B = _blend_padded(C0, C1, substeps)
        # stage-major sweeps keep the per-point work independent inside each loop
        ax = np.empty(M)
        ay = np.empty(M)
        kx = np.empty(M)
        ky = np.empty(M)
        ox[:] = px
        oy[:] = py
        for k in range(substeps):
            P0 = B[2 * k]
            Ph = B[2 * k + 1]
            P1 = B[2 * k + 2]
            for m in range(M):
                vx, vy = _eval_padded(P0, order, ox[m], oy[m])
                ax[m] = vx
                ay[m] = vy
                kx[m] = ox[m] + 0.5 * h * vx
                ky[m] = oy[m] + 0.5 * h * vy
            for m in range(M):
                vx, vy = _eval_padded(Ph, order, kx[m], ky[m])
                ax[m] += 2.0 * vx
                ay[m] += 2.0 * vy
                kx[m] = ox[m] + 0.5 * h * vx
                ky[m] = oy[m] + 0.5 * h * vy
            for m in range(M):
                vx, vy = _eval_padded(Ph, order, kx[m], ky[m])
                ax[m] += 2.0 * vx
                ay[m] += 2.0 * vy
                kx[m] = ox[m] + h * vx
                ky[m] = oy[m] + h * vy
            for m in range(M):
                vx, vy = _eval_padded(P1, order, kx[m], ky[m])
                ox[m] = ox[m] + h / 6.0 * (ax[m] + vx)
                oy[m] = oy[m] + h / 6.0 * (ay[m] + vy)
        return ox, oy

    @numba.njit(cache=True)
    def newton_invert_numba(DC, JC, qx, qy, x0, y0, tol, max_iter, order):
        M = qx.shape[0]
        px = x0.copy()
        py = y0.copy()
        iters = np.full(M, -1, dtype=np.int64)
        J01 = JC[0:2]
        J23 = JC[2:4]
        for m in range(M):
            x = px[m]
            y = py[m]
            d0, d1, _, _ = _eval2(DC, DC, order, x, y)
            rx = x + d0 - qx[m]
            ry = y + d1 - qy[m]
            res = max(abs(rx), abs(ry))
            for it in range(max_iter + 1):
                if res <= tol:
                    iters[m] = it
                    break
                if it == max_iter:
                    break
                ja, jb, jc, je = _eval2(J01, J23, order, x, y)
                a = 1.0 + ja
                e = 1.0 + je
                det = a * e - jb * jc
                sx = (e * rx - jb * ry) / det
                sy = (a * ry - jc * rx) / det
                lam = 1.0
                nx = x
                ny = y
                nrx = rx
                nry = ry
                nres = res
                for k in range(13):
                    nx = x - lam * sx
                    ny = y - lam * sy
                    d0, d1, _, _ = _eval2(DC, DC, order, nx, ny)
                    nrx = nx + d0 - qx[m]
                    nry = ny + d1 - qy[m]
                    nres = max(abs(nrx), abs(nry))
                    if nres < res:
                        break
                    lam *= 0.5
                x = nx
                y = ny
                rx = nrx
                ry = nry
                res = nres
            px[m] = x
            py[m] = y
        return px, py, iters


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _f(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def interp(coef, px, py, order=3):
    coef, px, py = _f(coef), _f(px), _f(py)
    if numba_enabled():
        return interp_numba(coef, px, py, int(order))
    return interp_numpy(coef, px, py, int(order))


def rk4_interval(C0, C1, px, py, dt, substeps, order=3):
    C0, C1, px, py = _f(C0), _f(C1), _f(px), _f(py)
    if numba_enabled():
        return rk4_interval_numba(C0, C1, px, py, float(dt), int(substeps), int(order))
    return rk4_interval_numpy(C0, C1, px, py, float(dt), int(substeps), int(order))


def newton_invert(DC, JC, qx, qy, x0, y0, tol, max_iter, order=3):
    args = (_f(DC), _f(JC), _f(qx), _f(qy), _f(x0), _f(y0))
    if numba_enabled():
        return newton_invert_numba(*args, float(tol), int(max_iter), int(order))
    return newton_invert_numpy(*args, float(tol), int(max_iter), int(order))
