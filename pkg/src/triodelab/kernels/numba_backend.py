"""Numba-compiled grid kernels; semantics mirror numpy_backend exactly."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _poly(c, x, y):
    acc = 0.0
    np_, nq = c.shape
    for p in range(np_ - 1, -1, -1):
        row = c[p, nq - 1]
        for q in range(nq - 2, -1, -1):
            row = row * y + c[p, q]
        acc = acc * x + row
    return acc


@njit(cache=True)
def _bump(x, y, s, rho, cx, cy):
    if s == 0.0:
        return 0.0, 0.0, 0.0
    xt = x - cx
    yt = y - cy
    q = (xt * xt + yt * yt) / (rho * rho)
    if q >= 1.0:
        return 0.0, 0.0, 0.0
    env = np.exp(1.0 - 1.0 / (1.0 - q))
    denv = env * (-1.0 / ((1.0 - q) * (1.0 - q)))
    ang = 1.0 + xt * yt / (rho * rho)
    w = s * env * ang
    gx = s * (denv * (2.0 * xt / (rho * rho)) * ang + env * yt / (rho * rho))
    gy = s * (denv * (2.0 * yt / (rho * rho)) * ang + env * xt / (rho * rho))
    return w, gx, gy


@njit(cache=True)
def _energy(values, cell_inside, h, eps, c0, c1, c2, s, rho, bcx, bcy):
    n = values.shape[0]
    e = 0.0
    hq = h * h / eps
    for i in range(n - 1):
        for j in range(n - 1):
            if not cell_inside[i, j]:
                continue
            ax = values[i, j, 0]
            ay = values[i, j, 1]
            bx = values[i, j + 1, 0]
            by = values[i, j + 1, 1]
            cx_ = values[i + 1, j, 0]
            cy_ = values[i + 1, j, 1]
            dx = values[i + 1, j + 1, 0]
            dy = values[i + 1, j + 1, 1]
            e1 = (bx - ax) ** 2 + (by - ay) ** 2
            e2 = (dx - cx_) ** 2 + (dy - cy_) ** 2
            e3 = (cx_ - ax) ** 2 + (cy_ - ay) ** 2
            e4 = (dx - bx) ** 2 + (dy - by) ** 2
            gsq = 0.5 * (e1 + e2) + 0.5 * (e3 + e4)
            ubx = 0.25 * (ax + bx + cx_ + dx)
            uby = 0.25 * (ay + by + cy_ + dy)
            w = _poly(c0, ubx, uby)
            bw, _, _ = _bump(ubx, uby, s, rho, bcx, bcy)
            e += 0.5 * eps * gsq + hq * (w + bw)
    return e


@njit(cache=True)
def _energy_and_grad(values, cell_inside, interior, h, eps, c0, c1, c2, s, rho, bcx, bcy):
    n = values.shape[0]
    e = 0.0
    g = np.zeros_like(values)
    cc = 0.5 * eps
    hq = h * h / eps
    wq = h * h / (4.0 * eps)
    for i in range(n - 1):
        for j in range(n - 1):
            if not cell_inside[i, j]:
                continue
            ax = values[i, j, 0]
            ay = values[i, j, 1]
            bx = values[i, j + 1, 0]
            by = values[i, j + 1, 1]
            cx_ = values[i + 1, j, 0]
            cy_ = values[i + 1, j, 1]
            dx = values[i + 1, j + 1, 0]
            dy = values[i + 1, j + 1, 1]
            e1 = (bx - ax) ** 2 + (by - ay) ** 2
            e2 = (dx - cx_) ** 2 + (dy - cy_) ** 2
            e3 = (cx_ - ax) ** 2 + (cy_ - ay) ** 2
            e4 = (dx - bx) ** 2 + (dy - by) ** 2
            gsq = 0.5 * (e1 + e2) + 0.5 * (e3 + e4)
            ubx = 0.25 * (ax + bx + cx_ + dx)
            uby = 0.25 * (ay + by + cy_ + dy)
            w = _poly(c0, ubx, uby)
            wx = _poly(c1, ubx, uby)
            wy = _poly(c2, ubx, uby)
            bw, bgx, bgy = _bump(ubx, uby, s, rho, bcx, bcy)
            w += bw
            wx += bgx
            wy += bgy
            e += 0.5 * eps * gsq + hq * w
            gwx = wq * wx
            gwy = wq * wy
            g[i, j, 0] += cc * ((ax - bx) + (ax - cx_)) + gwx
            g[i, j, 1] += cc * ((ay - by) + (ay - cy_)) + gwy
            g[i, j + 1, 0] += cc * ((bx - ax) + (bx - dx)) + gwx
            g[i, j + 1, 1] += cc * ((by - ay) + (by - dy)) + gwy
            g[i + 1, j, 0] += cc * ((cx_ - dx) + (cx_ - ax)) + gwx
            g[i + 1, j, 1] += cc * ((cy_ - dy) + (cy_ - ay)) + gwy
            g[i + 1, j + 1, 0] += cc * ((dx - cx_) + (dx - bx)) + gwx
            g[i + 1, j + 1, 1] += cc * ((dy - cy_) + (dy - by)) + gwy
    for i in range(n):
        for j in range(n):
            if not interior[i, j]:
                g[i, j, 0] = 0.0
                g[i, j, 1] = 0.0
    return e, g


def energy(values, cell_inside, h, eps, coeffs, bump):
    return float(
        _energy(
            values, cell_inside, h, eps,
            coeffs[0], coeffs[1], coeffs[2],
            bump[0], bump[1], bump[2], bump[3],
        )
    )


def energy_and_grad(values, cell_inside, interior, h, eps, coeffs, bump):
    e, g = _energy_and_grad(
        values, cell_inside, interior, h, eps,
        coeffs[0], coeffs[1], coeffs[2],
        bump[0], bump[1], bump[2], bump[3],
    )
    return float(e), g
