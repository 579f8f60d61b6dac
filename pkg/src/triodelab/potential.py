"""Triple-well potentials on the order-parameter plane.

The benchmark potential is W(u) = |z^3 - 1|^2 with z = u1 + i*u2, whose
wells are the three cube roots of unity.  A perturbed variant adds a
smooth compactly supported bump away from the wells and the segments
joining them, which breaks the three-fold symmetry without touching the
heteroclinic connections.  All potentials used by the grid kernels are
reduced to a dense polynomial coefficient table plus bump parameters, so
one evaluation path serves every kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisViolationError, InvalidInputError

SQRT3 = math.sqrt(3.0)

# Cube roots of unity, the wells of the benchmark potential.
CUBIC_WELLS = np.array(
    [[1.0, 0.0], [-0.5, 0.5 * SQRT3], [-0.5, -0.5 * SQRT3]]
)

# |z^3-1|^2 = (x^2+y^2)^3 - 2(x^3-3xy^2) + 1 as a coefficient table
# C[p, q] multiplying x^p y^q.
_CUBIC_COEFFS = np.zeros((7, 7))
_CUBIC_COEFFS[6, 0] = 1.0
_CUBIC_COEFFS[4, 2] = 3.0
_CUBIC_COEFFS[2, 4] = 3.0
_CUBIC_COEFFS[0, 6] = 1.0
_CUBIC_COEFFS[3, 0] = -2.0
_CUBIC_COEFFS[1, 2] = 6.0
_CUBIC_COEFFS[0, 0] = 1.0


@dataclass(frozen=True)
class WellSet:
    """The three zeros of a triple-well potential."""

    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray

    def __post_init__(self):
        pts = self.as_array()
        for i in range(3):
            for j in range(i + 1, 3):
                if np.linalg.norm(pts[i] - pts[j]) < 1e-12:
                    raise InvalidInputError("wells must be pairwise distinct")

    def as_array(self) -> np.ndarray:
        return np.array([self.a1, self.a2, self.a3], dtype=float)

    def min_separation(self) -> float:
        pts = self.as_array()
        return min(
            float(np.linalg.norm(pts[i] - pts[j]))
            for i in range(3)
            for j in range(i + 1, 3)
        )


def cubic_wells() -> WellSet:
    return WellSet(*[CUBIC_WELLS[i].copy() for i in range(3)])


@dataclass(frozen=True)
class PotentialSpec:
    """A concrete potential: kind, wells, and optional perturbation.

    kinds:
      "cubic"           -- W(z) = |z^3 - 1|^2
      "perturbed-cubic" -- cubic plus a mollifier bump of amplitude ``s``
                           supported in B_rho(center), modulated by an
                           odd factor that breaks reflection symmetry
      "user-polynomial" -- arbitrary coefficient table (degree <= 6)
    """

    kind: str = "cubic"
    wells: WellSet = field(default_factory=cubic_wells)
    s: float = 0.0
    rho: float = 0.2
    center: tuple = (0.0, 0.0)
    coeffs: np.ndarray = field(default_factory=lambda: _CUBIC_COEFFS.copy())

    def __post_init__(self):
        if self.kind not in ("cubic", "perturbed-cubic", "user-polynomial"):
            raise InvalidInputError(f"unknown potential kind {self.kind!r}")
        if self.kind == "perturbed-cubic" and self.rho <= 0:
            raise InvalidInputError("perturbation radius must be positive")

    @property
    def bump_params(self) -> np.ndarray:
        """(s, rho, cx, cy) packed for the grid kernels."""
        if self.kind == "perturbed-cubic":
            return np.array([self.s, self.rho, *self.center])
        return np.array([0.0, 1.0, 0.0, 0.0])

    def support_is_admissible(self) -> bool:
        """Bump support disjoint from a rho-tube around each well segment."""
        if self.kind != "perturbed-cubic" or self.s == 0.0:
            return True
        c = np.asarray(self.center, dtype=float)
        pts = self.wells.as_array()
        for i in range(3):
            for j in range(i + 1, 3):
                if _point_segment_distance(c, pts[i], pts[j]) < 2.0 * self.rho:
                    return False
        return True


def perturbed_cubic(s: float, rho: float = 0.2, center=(0.0, 0.0)) -> PotentialSpec:
    return PotentialSpec(kind="perturbed-cubic", s=s, rho=rho, center=tuple(center))


def _point_segment_distance(p, a, b) -> float:
    ab = b - a
    t = float(np.dot(p - a, ab) / np.dot(ab, ab))
    t = min(max(t, 0.0), 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def poly_derivative(coeffs: np.ndarray, axis: int) -> np.ndarray:
    """d/dx (axis=0) or d/dy (axis=1) of a coefficient table."""
    out = np.zeros_like(coeffs)
    if axis == 0:
        for p in range(1, coeffs.shape[0]):
            out[p - 1, :] += p * coeffs[p, :]
    else:
        for q in range(1, coeffs.shape[1]):
            out[:, q - 1] += q * coeffs[:, q]
    return out


def poly_eval(coeffs: np.ndarray, x, y):
    """Evaluate a coefficient table at (x, y); broadcasts over arrays."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    acc = np.zeros(np.broadcast(x, y).shape)
    for p in range(coeffs.shape[0] - 1, -1, -1):
        row = np.zeros_like(acc)
        for q in range(coeffs.shape[1] - 1, -1, -1):
            row = row * y + coeffs[p, q]
        acc = acc * x + row
    return acc


# --- bump perturbation -------------------------------------------------

def _bump_and_grad(u: np.ndarray, params: np.ndarray):
    """Mollifier bump s*exp(1 - 1/(1-t^2))*(1 + xt*yt/rho^2) and its gradient.

    Vanishes with all derivatives on |u - center| >= rho.
    """
    s, rho, cx, cy = params
    u = np.asarray(u, dtype=float)
    xt = u[..., 0] - cx
    yt = u[..., 1] - cy
    q = (xt * xt + yt * yt) / (rho * rho)
    val = np.zeros_like(q)
    grad = np.zeros(q.shape + (2,))
    if s == 0.0:
        return val, grad
    inside = q < 1.0
    qi = q[inside]
    env = np.exp(1.0 - 1.0 / (1.0 - qi))
    denv = env * (-1.0 / (1.0 - qi) ** 2)
    ang = 1.0 + xt[inside] * yt[inside] / (rho * rho)
    val[inside] = s * env * ang
    gx = s * (denv * (2.0 * xt[inside] / rho**2) * ang + env * yt[inside] / rho**2)
    gy = s * (denv * (2.0 * yt[inside] / rho**2) * ang + env * xt[inside] / rho**2)
    grad[inside, 0] = gx
    grad[inside, 1] = gy
    return val, grad


# --- public evaluators -------------------------------------------------

def _check_finite(u):
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise InvalidInputError("non-finite order-parameter input")
    return u


def eval_w(spec: PotentialSpec, u) -> np.ndarray:
    """W(u) >= 0; broadcasts over trailing point arrays of shape (..., 2)."""
    u = _check_finite(u)
    if spec.kind in ("cubic", "perturbed-cubic"):
        z = u[..., 0] + 1j * u[..., 1]
        f = z * z * z - 1.0
        w = (f * np.conj(f)).real
        if spec.kind == "perturbed-cubic":
            b, _ = _bump_and_grad(u, spec.bump_params)
            w = w + b
        return w
    return poly_eval(spec.coeffs, u[..., 0], u[..., 1])


def grad_w(spec: PotentialSpec, u) -> np.ndarray:
    """W_u(u).

    The cubic path uses the complex identity grad |f|^2 = 2 conj(f') f,
    validated against finite differences of eval_w in the test suite.
    """
    u = _check_finite(u)
    if spec.kind in ("cubic", "perturbed-cubic"):
        z = u[..., 0] + 1j * u[..., 1]
        f = z * z * z - 1.0
        g = 2.0 * np.conj(3.0 * z * z) * f
        out = np.stack([g.real, g.imag], axis=-1)
        if spec.kind == "perturbed-cubic":
            _, bg = _bump_and_grad(u, spec.bump_params)
            out = out + bg
        return out
    cx = poly_derivative(spec.coeffs, 0)
    cy = poly_derivative(spec.coeffs, 1)
    return np.stack(
        [poly_eval(cx, u[..., 0], u[..., 1]), poly_eval(cy, u[..., 0], u[..., 1])],
        axis=-1,
    )


def hess_w(spec: PotentialSpec, u) -> np.ndarray:
    """Symmetric 2x2 Hessian of W at a single point."""
    u = _check_finite(np.asarray(u, dtype=float))
    if spec.kind in ("cubic", "perturbed-cubic"):
        z = complex(u[0], u[1])
        f = z * z * z - 1.0
        fp = 3.0 * z * z
        fpp = 6.0 * z
        # H = 2|f'|^2 I + [[Re B, Im B], [Im B, -Re B]],  B = 2 conj(f'') f
        a = 2.0 * abs(fp) ** 2
        b = 2.0 * np.conj(fpp) * f
        h = np.array([[a + b.real, b.imag], [b.imag, a - b.real]])
        if spec.kind == "perturbed-cubic":
            h = h + _bump_hessian_fd(u, spec.bump_params)
        return h
    cx = poly_derivative(spec.coeffs, 0)
    cy = poly_derivative(spec.coeffs, 1)
    cxx = poly_derivative(cx, 0)
    cxy = poly_derivative(cx, 1)
    cyy = poly_derivative(cy, 1)
    return np.array(
        [
            [poly_eval(cxx, u[0], u[1]), poly_eval(cxy, u[0], u[1])],
            [poly_eval(cxy, u[0], u[1]), poly_eval(cyy, u[0], u[1])],
        ]
    )


def _bump_hessian_fd(u, params, step=1e-6):
    """Central differences of the analytic bump gradient (symmetrized)."""
    h = np.zeros((2, 2))
    for k in range(2):
        up = u.copy()
        um = u.copy()
        up[k] += step
        um[k] -= step
        _, gp = _bump_and_grad(up, params)
        _, gm = _bump_and_grad(um, params)
        h[:, k] = (gp - gm) / (2.0 * step)
    return 0.5 * (h + h.T)


# --- measured constants ------------------------------------------------

@dataclass(frozen=True)
class PotentialConstants:
    """Sampled constants behind the quadratic-well and coercivity bounds.

    For |u - a_i| = delta < delta_w the sandwich
    c_w/2 * delta^2 <= W(u) <= C_w/2 * delta^2 holds on every sample, as
    does W(u) >= c_w/2 * delta^2 whenever min_i |u - a_i| >= delta.
    """

    c_w: float
    big_c_w: float
    delta_w: float
    c1: float
    c2: float
    coercivity_radius: float

    def __post_init__(self):
        if not (0 < self.c_w <= self.big_c_w):
            raise HypothesisViolationError("need 0 < c_w <= C_w")
        if not (0 < self.c1 <= self.c2):
            raise HypothesisViolationError("need 0 < c1 <= c2")
        if self.delta_w <= 0:
            raise HypothesisViolationError("need delta_w > 0")


def estimate_constants(
    spec: PotentialSpec,
    n_radii: int = 64,
    n_angles: int = 256,
    safety: float = 1.1,
) -> PotentialConstants:
    """Estimate (c_w, C_w, delta_w, c1, c2, M) by dense sampling.

    delta_w is pushed as far as the sampled sphere minima of 2W/delta^2
    stay positive, capped below half the minimal well separation so the
    delta-neighborhoods stay disjoint.
    """
    wells = spec.wells.as_array()
    delta_cap = 0.49 * spec.wells.min_separation()
    radii = np.linspace(delta_cap / n_radii, delta_cap, n_radii)
    angles = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=-1)

    lo = np.full(n_radii, np.inf)
    hi = np.full(n_radii, -np.inf)
    for a in wells:
        pts = a[None, None, :] + radii[:, None, None] * dirs[None, :, :]
        w = eval_w(spec, pts)
        ratio = 2.0 * w / (radii[:, None] ** 2)
        lo = np.minimum(lo, ratio.min(axis=1))
        hi = np.maximum(hi, ratio.max(axis=1))

    positive = lo > 0.0
    if not positive[0]:
        raise HypothesisViolationError(
            "potential vanishes arbitrarily close to a well sphere",
            sample=(float(radii[0]),),
        )
    k_bad = np.argmin(positive) if not positive.all() else n_radii
    delta_w = float(radii[k_bad - 1]) if k_bad < n_radii else float(radii[-1])
    keep = radii <= delta_w
    c_w_sphere = float(lo[keep].min())
    big_c_w = float(hi[keep].max())

    # second part of the well lemma: W >= c_w/2 * min(dist, delta_w)^2 globally
    grid = np.linspace(-2.5, 2.5, 161)
    gx, gy = np.meshgrid(grid, grid, indexing="xy")
    pts = np.stack([gx, gy], axis=-1)
    w = eval_w(spec, pts)
    dist = np.min(
        np.stack([np.linalg.norm(pts - a, axis=-1) for a in wells]), axis=0
    )
    mask = dist > 1e-3
    ratio = 2.0 * w[mask] / np.minimum(dist[mask], delta_w) ** 2
    c_w = min(c_w_sphere, float(ratio.min()))
    if c_w <= 0:
        bad = np.argwhere(mask)[int(np.argmin(ratio))]
        raise HypothesisViolationError(
            "W is not bounded below by a quadratic away from the wells",
            sample=(float(gx[tuple(bad)]), float(gy[tuple(bad)])),
        )

    eigs = []
    for a in wells:
        h = hess_w(spec, a)
        ev = np.linalg.eigvalsh(0.5 * (h + h.T))
        if ev[0] <= 0:
            raise HypothesisViolationError(
                "degenerate well: Hessian not positive definite", sample=tuple(a)
            )
        eigs.append(ev)
    eigs = np.array(eigs)
    c1 = float(eigs[:, 0].min())
    c2 = float(eigs[:, 1].max())

    # coercivity: smallest sampled radius beyond which W_u . u > 0 everywhere
    r_scan = np.linspace(0.5, 3.0, 126)
    ok_radius = None
    for r in r_scan:
        pts = r * dirs
        wu = grad_w(spec, pts)
        if np.all(np.einsum("ij,ij->i", wu, pts) > 0.0):
            if ok_radius is None:
                ok_radius = r
        else:
            ok_radius = None
    if ok_radius is None:
        raise HypothesisViolationError("no coercivity radius found up to 3.0")
    coercivity = float(safety * ok_radius)

    return PotentialConstants(
        c_w=c_w,
        big_c_w=big_c_w,
        delta_w=delta_w,
        c1=c1,
        c2=c2,
        coercivity_radius=coercivity,
    )
