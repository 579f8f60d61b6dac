"""Heteroclinic connections between wells and their actions.

A connection U_ij minimizes the 1D action
    A(U) = int ( |U'|^2 / 2 + W(U) ) d eta,   U(-inf)=a_i, U(+inf)=a_j,
truncated to [-L, L] with hard endpoint pinning.  The discrete action is
trapezoid in the gradient term and midpoint in the potential.  The
minimizer runs an L-BFGS warm phase followed by a damped block-Newton
endgame so the reported stationarity is near machine precision; both
phases are monotone in the action.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import minimize as _scipy_minimize

from .errors import (
    InsufficientTailError,
    InvalidInputError,
    InvalidProfileError,
    NonConvergenceError,
    ConsistencyWarning,
)
from .potential import PotentialSpec, eval_w, grad_w, hess_w


@dataclass
class ConnectionProfile:
    """Discretized connection from well i to well j on [-L, L]."""

    i: int
    j: int
    eta: np.ndarray
    values: np.ndarray
    action: float
    half_length: float
    n: int
    grad_max_norm: float = 0.0

    def endpoint_wells(self, spec: PotentialSpec):
        wells = spec.wells.as_array()
        return wells[self.i], wells[self.j]

    def at(self, q) -> np.ndarray:
        """Sample the profile at arbitrary eta, clamped to the wells outside."""
        q = np.asarray(q, dtype=float)
        x = np.interp(q, self.eta, self.values[:, 0])
        y = np.interp(q, self.eta, self.values[:, 1])
        return np.stack([x, y], axis=-1)

    def reversed(self) -> "ConnectionProfile":
        return ConnectionProfile(
            i=self.j,
            j=self.i,
            eta=self.eta.copy(),
            values=self.values[::-1].copy(),
            action=self.action,
            half_length=self.half_length,
            n=self.n,
            grad_max_norm=self.grad_max_norm,
        )


@dataclass(frozen=True)
class DecayFit:
    """Exponential tail model |U - a| ~ K * exp(-k * distance-into-tail)."""

    side: str
    amplitude: float
    rate: float
    residual: float
    n_points: int


def discrete_action(spec: PotentialSpec, eta: np.ndarray, values: np.ndarray) -> float:
    h = eta[1] - eta[0]
    du = np.diff(values, axis=0)
    mid = 0.5 * (values[:-1] + values[1:])
    return float(np.sum(0.5 * np.einsum("ij,ij->i", du, du) / h + h * eval_w(spec, mid)))


def action(profile: ConnectionProfile, spec: PotentialSpec) -> float:
    """Quadrature of the action for any profile on a uniform grid."""
    h = np.diff(profile.eta)
    if not np.allclose(h, h[0], rtol=1e-12, atol=1e-14):
        raise InvalidInputError("profile grid must be uniform")
    return discrete_action(spec, profile.eta, profile.values)


def action_gradient(spec: PotentialSpec, eta, values) -> np.ndarray:
    """Gradient of the discrete action w.r.t. interior nodes (ends pinned)."""
    h = eta[1] - eta[0]
    du = np.diff(values, axis=0)
    mid = 0.5 * (values[:-1] + values[1:])
    g = np.zeros_like(values)
    g[1:] += du / h
    g[:-1] -= du / h
    wm = grad_w(spec, mid) * (0.5 * h)
    g[1:] += wm
    g[:-1] += wm
    g[0] = 0.0
    g[-1] = 0.0
    return g


def _hess_batch(spec: PotentialSpec, pts: np.ndarray) -> np.ndarray:
    out = np.empty((pts.shape[0], 2, 2))
    for k in range(pts.shape[0]):
        out[k] = hess_w(spec, pts[k])
    return out


def _newton_polish(spec, eta, values, tol, max_iter=60):
    """Damped block-tridiagonal Newton on the interior nodes."""
    h = eta[1] - eta[0]
    n = len(eta)
    m = n - 2
    a = discrete_action(spec, eta, values)
    for _ in range(max_iter):
        g = action_gradient(spec, eta, values)
        gmax = float(np.max(np.abs(g)))
        if gmax <= tol:
            break
        mid = 0.5 * (values[:-1] + values[1:])
        hw = _hess_batch(spec, mid) * (h / 4.0)
        # banded matrix over interleaved (x, y) unknowns, bandwidth 3
        ab = np.zeros((7, 2 * m))
        for k in range(m):
            dblk = (2.0 / h) * np.eye(2) + hw[k] + hw[k + 1]
            for r in range(2):
                for c in range(2):
                    row = 2 * k + r
                    col = 2 * k + c
                    ab[3 + row - col, col] += dblk[r, c]
            if k + 1 < m:
                oblk = -(1.0 / h) * np.eye(2) + hw[k + 1]
                for r in range(2):
                    for c in range(2):
                        row = 2 * k + r
                        col = 2 * (k + 1) + c
                        ab[3 + row - col, col] += oblk[r, c]
                        ab[3 + col - row, row] += oblk[c, r]
        rhs = -g[1:-1].ravel()
        try:
            step = solve_banded((3, 3), ab, rhs).reshape(m, 2)
        except np.linalg.LinAlgError:
            step = -g[1:-1]
        if float(np.sum(step * g[1:-1])) >= 0.0:
            step = -g[1:-1]
        t = 1.0
        while t > 1e-10:
            trial = values.copy()
            trial[1:-1] += t * step
            a_new = discrete_action(spec, eta, trial)
            if a_new <= a:
                values = trial
                a = a_new
                break
            t *= 0.5
        else:
            break
    return values, a


def minimize_action(
    spec: PotentialSpec,
    i: int,
    j: int,
    half_length: float = 12.0,
    n: int = 1024,
    init: str = "affine",
    tol_scale: float = 1e-10,
    max_iter: int = 20000,
) -> ConnectionProfile:
    """Minimize the truncated discrete action with pinned endpoints."""
    if i == j:
        raise InvalidInputError("wells i and j must differ")
    if half_length <= 0 or n < 64:
        raise InvalidInputError("need half_length > 0 and n >= 64")
    wells = spec.wells.as_array()
    a, b = wells[i], wells[j]
    eta = np.linspace(-half_length, half_length, n)
    h = eta[1] - eta[0]
    t = (eta + half_length) / (2.0 * half_length)
    if init == "affine":
        u0 = a[None, :] * (1 - t)[:, None] + b[None, :] * t[:, None]
    elif init == "arc":
        # circular arc at the wells' radius, bulging away from the origin
        pha, phb = np.arctan2(a[1], a[0]), np.arctan2(b[1], b[0])
        dph = (phb - pha + np.pi) % (2 * np.pi) - np.pi
        rad = 0.5 * (np.linalg.norm(a) + np.linalg.norm(b))
        ph = pha + t * dph
        u0 = rad * np.stack([np.cos(ph), np.sin(ph)], axis=-1)
        u0[0], u0[-1] = a, b
    else:
        raise InvalidInputError(f"unknown initializer {init!r}")

    def fun(x):
        vals = np.empty((n, 2))
        vals[0], vals[-1] = a, b
        vals[1:-1] = x.reshape(-1, 2)
        e = discrete_action(spec, eta, vals)
        g = action_gradient(spec, eta, vals)
        return e, g[1:-1].ravel()

    res = _scipy_minimize(
        fun,
        u0[1:-1].ravel(),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "ftol": 1e-18, "gtol": 1e-13},
    )
    values = np.empty((n, 2))
    values[0], values[-1] = a, b
    values[1:-1] = res.x.reshape(-1, 2)

    a_val = discrete_action(spec, eta, values)
    tol = tol_scale * (1.0 + abs(a_val))
    values, a_val = _newton_polish(spec, eta, values, tol)
    g = action_gradient(spec, eta, values)
    gmax = float(np.max(np.abs(g)))
    if gmax > tol:
        raise NonConvergenceError(
            f"connection ({i},{j}) stalled at grad max-norm {gmax:.3e} > {tol:.3e}",
            last_iterate=values,
        )
    radius = 2.0 * np.max(np.linalg.norm(wells, axis=1))
    if np.max(np.linalg.norm(values, axis=1)) > 2.0 * radius:
        raise InvalidProfileError("profile escaped the coercivity ball")
    if spec.kind == "perturbed-cubic" and spec.support_is_admissible():
        d = np.linalg.norm(values - np.asarray(spec.center), axis=1)
        if np.min(d) < spec.rho:
            warnings.warn(
                "connection passes through the perturbation support that was "
                "promised disjoint",
                ConsistencyWarning,
            )
    return ConnectionProfile(
        i=i,
        j=j,
        eta=eta,
        values=values,
        action=a_val,
        half_length=half_length,
        n=n,
        grad_max_norm=gmax,
    )


def check_equal_actions(
    spec: PotentialSpec,
    tol: float = 1e-6,
    half_length: float = 12.0,
    n: int = 1024,
    profiles=None,
) -> dict:
    """Verify the equal-action hypothesis for the three well pairs."""
    if profiles is None:
        profiles = connect_all(spec, half_length=half_length, n=n)
    sigmas = {}
    for key, p in profiles.items():
        if p.action <= 0.0:
            raise InvalidProfileError(f"non-positive action for pair {key}")
        sigmas[key] = p.action
    vals = np.array(list(sigmas.values()))
    rel_dev = float((vals.max() - vals.min()) / vals.mean())
    return {
        "sigmas": {f"{k[0]+1}{k[1]+1}": float(v) for k, v in sigmas.items()},
        "max_rel_deviation": rel_dev,
        "tol": tol,
        "passed": rel_dev <= tol,
        "sigma": float(vals.mean()),
    }


def connect_all(spec: PotentialSpec, half_length: float = 12.0, n: int = 1024) -> dict:
    """The three connections {(0,1), (1,2), (2,0)} keyed by well pair."""
    return {
        (i, j): minimize_action(spec, i, j, half_length=half_length, n=n)
        for (i, j) in ((0, 1), (1, 2), (2, 0))
    }


def fit_decay(
    profile: ConnectionProfile,
    spec: PotentialSpec,
    delta_half: float | None = None,
    tail_floor: float = 1e-6,
    resid_target: float = 1e-2,
) -> dict:
    """Least-squares exponential fits of both tails.

    The window keeps nodes with tail_floor < |U - a| < delta_half; the
    floor removes the stretch where endpoint pinning and solver noise
    dominate the converged tail.  If the log-linear fit misses
    `resid_target`, the window top is halved until the asymptotic regime
    is isolated (while at least 8 points remain).
    """
    if delta_half is None:
        delta_half = 0.25 * spec.wells.min_separation()
    wells = spec.wells.as_array()
    out = {}
    for side, widx, orient in (("left", profile.i, 1.0), ("right", profile.j, -1.0)):
        d = np.linalg.norm(profile.values - wells[widx], axis=1)
        half = profile.eta < 0 if side == "left" else profile.eta > 0
        top = delta_half
        fit = None
        while True:
            mask = half & (d > tail_floor) & (d < top)
            n_pts = int(mask.sum())
            if n_pts < 8:
                if fit is not None:
                    break
                raise InsufficientTailError(
                    f"{side} tail has {n_pts} points < 8; increase half_length"
                )
            x = profile.eta[mask]
            y = np.log(d[mask])
            slope, intercept = np.polyfit(x, y, 1)
            resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
            fit = (slope, intercept, resid, n_pts)
            if resid <= resid_target:
                break
            top *= 0.5
        slope, intercept, resid, n_pts = fit
        rate = float(orient * slope)
        if rate <= 0:
            raise InvalidProfileError(f"{side} tail does not decay (rate {rate:.3e})")
        out[side] = DecayFit(
            side=side,
            amplitude=float(np.exp(intercept)),
            rate=rate,
            residual=resid,
            n_points=n_pts,
        )
    return out


def refine_action(spec: PotentialSpec, i: int, j: int, ladder=None) -> dict:
    """Action on a (L, n) refinement ladder plus an h^2 Richardson fit."""
    if ladder is None:
        ladder = [(8.0, 512), (12.0, 1024), (16.0, 2048)]
    rows = []
    for half_length, n in ladder:
        p = minimize_action(spec, i, j, half_length=half_length, n=n)
        rows.append((half_length, n, 2.0 * half_length / (n - 1), p.action))
    h2 = np.array([r[2] ** 2 for r in rows])
    sig = np.array([r[3] for r in rows])
    design = np.stack([np.ones_like(h2), h2], axis=-1)
    coef, *_ = np.linalg.lstsq(design, sig, rcond=None)
    return {
        "ladder": [
            {"half_length": r[0], "n": r[1], "h": r[2], "action": r[3]} for r in rows
        ],
        "extrapolated": float(coef[0]),
        "h2_slope": float(coef[1]),
    }
