"""Pure-numpy reference implementation of the grid kernels.

Cell-centered quadrature over cells whose center lies in the unit disk:
the gradient term averages squared forward differences along the four
cell edges, the potential is evaluated at the cell-averaged state.  The
gradient routine is the exact adjoint of the energy.
"""

from __future__ import annotations

import numpy as np


def _poly(c, x, y):
    acc = np.zeros_like(x)
    for p in range(c.shape[0] - 1, -1, -1):
        row = np.full_like(x, c[p, c.shape[1] - 1])
        for q in range(c.shape[1] - 2, -1, -1):
            row = row * y + c[p, q]
        acc = acc * x + row
    return acc


def _bump(x, y, bump):
    s, rho, cx, cy = bump
    w = np.zeros_like(x)
    gx = np.zeros_like(x)
    gy = np.zeros_like(x)
    if s == 0.0:
        return w, gx, gy
    xt = x - cx
    yt = y - cy
    q = (xt * xt + yt * yt) / (rho * rho)
    m = q < 1.0
    env = np.exp(1.0 - 1.0 / (1.0 - q[m]))
    denv = env * (-1.0 / (1.0 - q[m]) ** 2)
    ang = 1.0 + xt[m] * yt[m] / (rho * rho)
    w[m] = s * env * ang
    gx[m] = s * (denv * (2.0 * xt[m] / rho**2) * ang + env * yt[m] / rho**2)
    gy[m] = s * (denv * (2.0 * yt[m] / rho**2) * ang + env * xt[m] / rho**2)
    return w, gx, gy


def _cell_terms(values, eps, coeffs, bump):
    u00 = values[:-1, :-1]
    u01 = values[:-1, 1:]
    u10 = values[1:, :-1]
    u11 = values[1:, 1:]
    dx1 = u01 - u00
    dx2 = u11 - u10
    dy1 = u10 - u00
    dy2 = u11 - u01
    gsq = 0.5 * (
        np.einsum("ijk,ijk->ij", dx1, dx1) + np.einsum("ijk,ijk->ij", dx2, dx2)
    ) + 0.5 * (
        np.einsum("ijk,ijk->ij", dy1, dy1) + np.einsum("ijk,ijk->ij", dy2, dy2)
    )
    ub = 0.25 * (u00 + u01 + u10 + u11)
    w = _poly(coeffs[0], ub[..., 0], ub[..., 1])
    wx = _poly(coeffs[1], ub[..., 0], ub[..., 1])
    wy = _poly(coeffs[2], ub[..., 0], ub[..., 1])
    bw, bgx, bgy = _bump(ub[..., 0], ub[..., 1], bump)
    return gsq, w + bw, wx + bgx, wy + bgy


def energy(values, cell_inside, h, eps, coeffs, bump):
    gsq, w, _, _ = _cell_terms(values, eps, coeffs, bump)
    dens = 0.5 * eps * gsq + (h * h / eps) * w
    return float(np.sum(dens[cell_inside]))


def energy_and_grad(values, cell_inside, interior, h, eps, coeffs, bump):
    gsq, w, wx, wy = _cell_terms(values, eps, coeffs, bump)
    dens = 0.5 * eps * gsq + (h * h / eps) * w
    e = float(np.sum(dens[cell_inside]))

    mask = cell_inside.astype(float)[..., None]
    cc = 0.5 * eps
    wq = h * h / (4.0 * eps)
    wvec = np.stack([wx, wy], axis=-1) * (wq * mask[..., 0])[..., None]

    u00 = values[:-1, :-1]
    u01 = values[:-1, 1:]
    u10 = values[1:, :-1]
    u11 = values[1:, 1:]
    g = np.zeros_like(values)
    g[:-1, :-1] += (cc * ((u00 - u01) + (u00 - u10))) * mask + wvec
    g[:-1, 1:] += (cc * ((u01 - u00) + (u01 - u11))) * mask + wvec
    g[1:, :-1] += (cc * ((u10 - u11) + (u10 - u00))) * mask + wvec
    g[1:, 1:] += (cc * ((u11 - u10) + (u11 - u01))) * mask + wvec
    g[~interior] = 0.0
    return e, g
