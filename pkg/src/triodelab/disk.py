"""Masked Cartesian discretization of the unit disk and the rescaled energy.

Nodes with |z| >= 1 are boundary-clamped and always hold the ramped
boundary trace g_eps; interior nodes are the optimization variables.
The energy is a cell-centered quadrature over cells whose center lies in
the disk (see kernels).  This module also builds the explicit energy
competitor used to upper-bound the minimizer: 1D connection profiles on
the three leg sectors, angular interpolation on the wedges between them,
a discrete-harmonic plug in the inner ball and a radial blend to the
boundary trace in the outer ring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import kernels
from .errors import InvalidConfigError, InvalidInputError
from .potential import PotentialSpec, WellSet, grad_w, poly_derivative

TWO_PI = 2.0 * math.pi
# boundary transition centers: the triod leg directions
RAMP_CENTERS = (0.5 * math.pi, 7.0 * math.pi / 6.0, 11.0 * math.pi / 6.0)


def smoothstep(x):
    """g0(x) = 3x^2 - 2x^3: strictly increasing, g0(0)=0, g0(1)=1, |g0'|<=1.5."""
    return x * x * (3.0 - 2.0 * x)


def boundary_g_eps(theta, epsilon: float, c0: float, wells: WellSet) -> np.ndarray:
    """Boundary trace: well constants with smoothstep ramps of half-width c0*eps."""
    w = c0 * epsilon
    if 2.0 * w >= math.pi / 3.0:
        raise InvalidConfigError("ramp half-width c0*eps must satisfy 2*c0*eps < pi/3")
    th = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    a1, a2, a3 = wells.a1, wells.a2, wells.a3
    r1, r2, r3 = RAMP_CENTERS
    out = np.empty(th.shape + (2,))
    out[...] = a2
    m = (th >= r1 + w) & (th < r2 - w)
    out[m] = a1
    m = (th >= r2 + w) & (th < r3 - w)
    out[m] = a3
    for center, lo_val, hi_val in ((r1, a2, a1), (r2, a1, a3), (r3, a3, a2)):
        m = (th >= center - w) & (th < center + w)
        if np.any(m):
            s = smoothstep((th[m] - (center - w)) / (2.0 * w))[..., None]
            out[m] = lo_val + s * (hi_val - lo_val)
    return out


@dataclass(frozen=True)
class DiskGrid:
    """Uniform n x n grid on [-1, 1]^2 with disk node classification."""

    n: int
    h: float = dc_field(init=False)
    xs: np.ndarray = dc_field(init=False)
    interior: np.ndarray = dc_field(init=False)
    cell_inside: np.ndarray = dc_field(init=False)
    theta: np.ndarray = dc_field(init=False)
    radius: np.ndarray = dc_field(init=False)

    def __post_init__(self):
        if self.n < 9 or self.n % 2 == 0:
            raise InvalidConfigError("grid size must be odd and >= 9")
        object.__setattr__(self, "h", 2.0 / (self.n - 1))
        xs = np.linspace(-1.0, 1.0, self.n)
        object.__setattr__(self, "xs", xs)
        x, y = np.meshgrid(xs, xs, indexing="xy")
        r = np.hypot(x, y)
        object.__setattr__(self, "radius", r)
        object.__setattr__(self, "interior", r < 1.0)
        object.__setattr__(self, "theta", np.mod(np.arctan2(y, x), TWO_PI))
        xc = 0.5 * (xs[:-1] + xs[1:])
        cx, cy = np.meshgrid(xc, xc, indexing="xy")
        object.__setattr__(self, "cell_inside", (cx * cx + cy * cy) < 1.0)

    def coords(self):
        x, y = np.meshgrid(self.xs, self.xs, indexing="xy")
        return x, y

    def quadrature_tolerance(self) -> float:
        return 2.0 * self.h


def grid_for_epsilon(epsilon: float, denominator: float = 4.0, cap: int = 513) -> DiskGrid:
    """Smallest odd grid with h <= epsilon / denominator."""
    n = int(math.ceil(2.0 * denominator / epsilon)) + 1
    if n % 2 == 0:
        n += 1
    if n > cap:
        raise InvalidConfigError(f"grid {n} exceeds cap {cap} for eps={epsilon}")
    return DiskGrid(max(n, 9))


@dataclass
class Field:
    """Vector order parameter on a disk grid with clamped boundary trace."""

    grid: DiskGrid
    values: np.ndarray
    epsilon: float
    c0: float
    spec: PotentialSpec

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise InvalidInputError("epsilon must lie in (0, 1)")
        if self.values.shape != (self.grid.n, self.grid.n, 2):
            raise InvalidInputError("field values shape mismatch")

    def clamp_boundary(self) -> None:
        g = boundary_g_eps(
            self.grid.theta[~self.grid.interior], self.epsilon, self.c0, self.spec.wells
        )
        self.values[~self.grid.interior] = g

    def boundary_trace(self) -> np.ndarray:
        return self.values[~self.grid.interior]

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy(), self.epsilon, self.c0, self.spec)

    def sample(self, pts: np.ndarray) -> np.ndarray:
        """Bilinear interpolation at points (..., 2) inside [-1, 1]^2."""
        return bilinear(self.grid, self.values, pts)


def bilinear(grid: DiskGrid, values: np.ndarray, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    fx = np.clip((pts[..., 0] + 1.0) / grid.h, 0.0, grid.n - 1 - 1e-12)
    fy = np.clip((pts[..., 1] + 1.0) / grid.h, 0.0, grid.n - 1 - 1e-12)
    j0 = fx.astype(int)
    i0 = fy.astype(int)
    tx = (fx - j0)[..., None]
    ty = (fy - i0)[..., None]
    v00 = values[i0, j0]
    v01 = values[i0, j0 + 1]
    v10 = values[i0 + 1, j0]
    v11 = values[i0 + 1, j0 + 1]
    return (
        v00 * (1 - tx) * (1 - ty)
        + v01 * tx * (1 - ty)
        + v10 * (1 - tx) * ty
        + v11 * tx * ty
    )


def _kernel_args(spec: PotentialSpec):
    base = spec.coeffs
    coeffs = np.stack([base, poly_derivative(base, 0), poly_derivative(base, 1)])
    return np.ascontiguousarray(coeffs), spec.bump_params


def energy(field: Field, spec: PotentialSpec | None = None) -> float:
    spec = spec or field.spec
    coeffs, bump = _kernel_args(spec)
    return kernels.energy(
        field.values, field.grid.cell_inside, field.grid.h, field.epsilon, coeffs, bump
    )


def energy_gradient(field: Field, spec: PotentialSpec | None = None):
    spec = spec or field.spec
    coeffs, bump = _kernel_args(spec)
    return kernels.energy_and_grad(
        field.values,
        field.grid.cell_inside,
        field.grid.interior,
        field.grid.h,
        field.epsilon,
        coeffs,
        bump,
    )


def el_residual(field: Field, spec: PotentialSpec | None = None):
    """Five-point residual eps*Lap(u) - W_u(u)/eps at depth > 2h from the rim."""
    spec = spec or field.spec
    g = field.grid
    u = field.values
    res = np.zeros((g.n, g.n))
    deep = g.radius < 1.0 - 2.0 * g.h
    lap = np.zeros_like(u)
    lap[1:-1, 1:-1] = (
        u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1]
    ) / g.h**2
    vec = field.epsilon * lap - grad_w(spec, u) / field.epsilon
    res[deep] = np.linalg.norm(vec[deep], axis=-1)
    return res, float(res.max())


def constant_field(grid: DiskGrid, epsilon: float, c0: float, spec: PotentialSpec,
                   value) -> Field:
    """Validation-mode field: constant everywhere, boundary clamp skipped."""
    vals = np.tile(np.asarray(value, dtype=float), (grid.n, grid.n, 1))
    return Field(grid, vals, epsilon, c0, spec)


def u0_field(grid: DiskGrid, epsilon: float, c0: float, spec: PotentialSpec,
             center=(0.0, 0.0), orientation: float = 0.0) -> Field:
    """Sampled sharp-partition field: wells on the three triod sectors."""
    x, y = grid.coords()
    ang = np.mod(np.arctan2(y - center[1], x - center[0]), TWO_PI)
    shift = np.mod(ang - 0.5 * math.pi - orientation, TWO_PI)
    wells = spec.wells.as_array()
    vals = np.where(
        (shift < 2.0 * math.pi / 3.0)[..., None],
        wells[0],
        np.where((shift < 4.0 * math.pi / 3.0)[..., None], wells[2], wells[1]),
    )
    return Field(grid, np.ascontiguousarray(vals, dtype=float), epsilon, c0, spec)


# --- explicit energy competitor -----------------------------------------

def _annulus_value(profiles, epsilon, r, th):
    """Competitor on the annulus r1 <= r <= r2: legs carry 1D profiles,
    wedges interpolate in angle between their leg edges."""
    p12, p23, p31 = profiles[(0, 1)], profiles[(1, 2)], profiles[(2, 0)]
    out = np.zeros(th.shape + (2,))
    third = math.pi / 3.0

    m = (th >= third) & (th <= 2 * third)
    out[m] = p12.at(r[m] * np.sin(0.5 * math.pi - th[m]) / epsilon)
    m = (th >= math.pi) & (th <= 4 * third)
    out[m] = p31.at(r[m] * np.sin(7 * math.pi / 6 - th[m]) / epsilon)
    m = th >= 5 * third
    out[m] = p23.at(r[m] * np.sin(11 * math.pi / 6 - th[m]) / epsilon)

    m = (th > 2 * third) & (th < math.pi)
    lam = ((math.pi - th[m]) / third)[..., None]
    out[m] = lam * p12.at(-r[m] / (2 * epsilon)) + (1 - lam) * p31.at(r[m] / (2 * epsilon))
    m = (th > 4 * third) & (th < 5 * third)
    lam = ((5 * third - th[m]) / third)[..., None]
    out[m] = lam * p31.at(-r[m] / (2 * epsilon)) + (1 - lam) * p23.at(r[m] / (2 * epsilon))
    m = th < third
    lam = ((third - th[m]) / third)[..., None]
    out[m] = lam * p23.at(-r[m] / (2 * epsilon)) + (1 - lam) * p12.at(r[m] / (2 * epsilon))
    return out


def build_test_function(
    grid: DiskGrid,
    epsilon: float,
    c0: float,
    spec: PotentialSpec,
    profiles: dict,
    fill_tol: float = 1e-10,
) -> Field:
    """Assemble the competitor field on the grid."""
    for key in ((0, 1), (1, 2), (2, 0)):
        if key not in profiles:
            raise InvalidInputError(f"missing connection profile for pair {key}")
    r1, r2 = c0 * epsilon, 1.0 - c0 * epsilon
    r = grid.radius
    th = grid.theta
    vals = np.zeros((grid.n, grid.n, 2))

    ann = (r >= r1) & (r <= r2)
    vals[ann] = _annulus_value(profiles, epsilon, r[ann], th[ann])

    outer = (r > r2) & (r < 1.0)
    if np.any(outer):
        ur2 = _annulus_value(profiles, epsilon, np.full(int(outer.sum()), r2), th[outer])
        g = boundary_g_eps(th[outer], epsilon, c0, spec.wells)
        lam = ((1.0 - r[outer]) / (c0 * epsilon))[..., None]
        vals[outer] = lam * ur2 + (1.0 - lam) * g

    rim = r >= 1.0
    vals[rim] = boundary_g_eps(th[rim], epsilon, c0, spec.wells)

    inner = r < r1
    if np.any(inner):
        vals[inner] = _annulus_value(profiles, epsilon, np.full(int(inner.sum()), r1), th[inner])
        idx = np.argwhere(inner)
        ii, jj = idx[:, 0], idx[:, 1]
        for _ in range(20000):
            nb = 0.25 * (
                vals[ii + 1, jj] + vals[ii - 1, jj] + vals[ii, jj + 1] + vals[ii, jj - 1]
            )
            resid = float(np.max(np.abs(nb - vals[ii, jj])))
            vals[ii, jj] = 0.2 * vals[ii, jj] + 0.8 * nb
            if resid <= fill_tol:
                break

    return Field(grid, vals, epsilon, c0, spec)
