"""Measured quantities behind the quantitative estimates.

Everything here is a pure function of a finished field: the row measures
lambda_i and the junction row y*, the computable lower-bound certificate,
level curves and the diffuse interface, localization against the triod,
interface width r1, the ball competitor, the triple point on the outer
a1-curve, its greedy discretization into balanced point families, and
the L1 comparison against the sharp three-sector partition.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import geometry as geo
from .disk import Field, energy, u0_field
from .errors import (
    CertificateViolationError,
    ConsistencyWarning,
    DegenerateFieldError,
    InvalidConfigError,
    InvalidInputError,
    ScaleLimitError,
    StructureViolationError,
)
from .potential import PotentialConstants, PotentialSpec, eval_w

SQRT3 = math.sqrt(3.0)


def min_chain(x: float) -> float:
    """1 - x + sqrt(3 + 4 (x + 1/2)^2); attains its minimum 3 at x = 0."""
    return 1.0 - x + math.sqrt(3.0 + 4.0 * (x + 0.5) ** 2)


# --- row measures and the junction row ----------------------------------

def lambda_rows(field: Field, threshold: float | None = None) -> dict:
    """Per-row 1D measures of the well sub-level sets along horizontal cuts.

    Measures are node counts times spacing, matching the energy quadrature.
    """
    if threshold is None:
        threshold = field.epsilon ** 0.25
    g = field.grid
    wells = field.spec.wells.as_array()
    inside = g.interior
    lam = np.zeros((g.n, 3))
    for i in range(3):
        close = np.linalg.norm(field.values - wells[i], axis=-1) < threshold
        lam[:, i] = g.h * np.sum(inside & close, axis=1)
    row_measure = g.h * np.sum(inside, axis=1)
    return {
        "y": g.xs.copy(),
        "lam": lam,
        "row_measure": row_measure,
        "threshold": threshold,
    }


def y_star(field: Field, lambdas: dict, alpha: float) -> float:
    """Smallest row y in [-1/2, 1] where lambda_1 + lambda_2 fills the row
    up to the deficit alpha * sqrt(eps)."""
    if alpha < 0:
        raise InvalidInputError("alpha must be nonnegative")
    deficit = alpha * math.sqrt(field.epsilon)
    y = lambdas["y"]
    lam = lambdas["lam"]
    rows = np.where((y >= -0.5) & (y <= 1.0) & (lambdas["row_measure"] > 0))[0]
    for i in rows:
        if lam[i, 0] + lam[i, 1] >= lambdas["row_measure"][i] - deficit:
            return float(y[i])
    raise DegenerateFieldError("no row satisfies the junction-row event")


@dataclass
class LowerBoundCertificate:
    alpha: float
    threshold: float
    y_star: float
    k_measure: float
    m_measure: float
    beta: float
    value: float
    energy: float
    tolerance: float
    sigma: float
    terms: dict = dc_field(default_factory=dict)
    lambdas: dict = dc_field(default_factory=dict)


def lower_bound_certificate(
    field: Field,
    spec: PotentialSpec,
    sigma: float,
    constants: PotentialConstants,
    alpha: float | None = None,
    rel_tolerance: float = 0.02,
) -> LowerBoundCertificate:
    """Instantiate the energy lower-bound chain with measured sets.

    The bound decomposes the disk at the junction row y*: below it,
    columns crossing from the bottom well into the upper sub-levels carry
    a (sqrt3/2)-weighted 1D action deficit, rows meeting the third well a
    full one, and leftover rows pay the potential floor; above y*, each
    row carries one full transition.  The value is asserted to stay
    below the measured energy within `rel_tolerance`.
    """
    eps = field.epsilon
    c0 = field.c0
    delta = eps ** 0.25
    if delta >= constants.delta_w:
        warnings.warn(
            "threshold eps^(1/4) exceeds the validated well neighborhood;"
            " the certificate bound is heuristic at this epsilon",
            ConsistencyWarning,
        )
    if alpha is None:
        alpha = 16.0 * sigma / constants.c_w
    elif constants.c_w * alpha / 8.0 < 2.0 * sigma:
        warnings.warn(
            "alpha below the proof's choice c_w*alpha/8 >= 2*sigma",
            ConsistencyWarning,
        )
    lambdas = lambda_rows(field, threshold=delta)
    ys = y_star(field, lambdas, alpha)

    g = field.grid
    wells = spec.wells.as_array()
    xs = g.xs
    cols = np.where(
        (xs >= -SQRT3 / 2.0 + c0 * eps) & (xs <= SQRT3 / 2.0 - c0 * eps)
    )[0]
    zeta = np.minimum(ys, np.sqrt(np.maximum(1.0 - xs[cols] ** 2, 0.0)))
    pts = np.stack([xs[cols], zeta], axis=-1)
    uvals = field.sample(pts)
    in_k = (np.linalg.norm(uvals - wells[0], axis=-1) < delta) | (
        np.linalg.norm(uvals - wells[1], axis=-1) < delta
    )
    k_measure = g.h * float(np.sum(in_k))

    rows = np.where((xs >= -0.5 + c0 * eps) & (xs <= ys))[0]
    lam3 = lambdas["lam"][rows, 2]
    m_measure = g.h * float(np.sum(lam3 > 0.0))
    beta = g.h * float(np.sum(lam3 == 0.0))

    deficit_1d = sigma - constants.big_c_w * math.sqrt(eps)
    term_km = (SQRT3 / 2.0 * k_measure + m_measure) * deficit_1d
    term_beta = constants.c_w * alpha * beta / 8.0
    term_top = sigma * max(1.0 - c0 * eps - ys, 0.0)
    value = term_km + term_beta + term_top

    e = energy(field, spec)
    tol = rel_tolerance * abs(e)
    if value > e + tol:
        raise CertificateViolationError(
            f"certificate {value:.6f} exceeds energy {e:.6f} beyond tolerance"
        )
    return LowerBoundCertificate(
        alpha=alpha,
        threshold=delta,
        y_star=ys,
        k_measure=k_measure,
        m_measure=m_measure,
        beta=beta,
        value=value,
        energy=e,
        tolerance=tol,
        sigma=sigma,
        terms={
            "transition_deficit": deficit_1d,
            "below_km": term_km,
            "below_beta": term_beta,
            "above_rows": term_top,
        },
        lambdas=lambdas,
    )


# --- level curves and the diffuse interface ------------------------------

@dataclass
class InterfaceGeometry:
    gamma: float
    families: list
    diffuse_mask: np.ndarray
    diffuse_points: np.ndarray
    ghat1: np.ndarray | None = None
    endpoint_a: np.ndarray | None = None
    endpoint_b: np.ndarray | None = None


def extract_level_curves(
    field: Field,
    gamma: float,
    sigma: float | None = None,
    big_c_w: float | None = None,
    gamma0_proxy: float = 0.5,
    want_ghat1: bool = True,
) -> InterfaceGeometry:
    """Marching-squares level curves |u - a_i| = gamma for the three wells.

    gamma must stay below half the well separation (hard error).  The
    theorem-side caps (the maximum-principle proxy and sqrt(sigma/20 C_w))
    are checked softly: with measured constants they can undershoot any
    resolvable level, so violations warn instead of aborting.
    """
    sep_cap = 0.5 * field.spec.wells.min_separation()
    if not (0.0 < gamma < sep_cap):
        raise InvalidConfigError(f"gamma must lie in (0, {sep_cap:.4f})")
    caps = [gamma0_proxy]
    if sigma is not None and big_c_w is not None:
        caps.append(math.sqrt(sigma / (20.0 * big_c_w)))
    if gamma >= min(caps):
        warnings.warn(
            f"gamma={gamma} exceeds the theorem-side cap {min(caps):.4f};"
            " proceeding (caps reported, not enforced)",
            ConsistencyWarning,
        )
    g = field.grid
    wells = field.spec.wells.as_array()
    dists = np.stack(
        [np.linalg.norm(field.values - w, axis=-1) for w in wells], axis=0
    )
    families = [geo.extract_polylines(g, dists[i] - gamma) for i in range(3)]

    diffuse = g.interior & np.all(dists > gamma, axis=0)
    x, yy = g.coords()
    pts = np.stack([x[diffuse], yy[diffuse]], axis=-1)

    ghat1 = None
    a_pt = b_pt = None
    if want_ghat1 and families[0]:
        try:
            ghat1 = geo.open_boundary_curve(families[0], g)
            top = np.array([0.0, 1.0])
            if np.linalg.norm(ghat1[-1] - top) < np.linalg.norm(ghat1[0] - top):
                ghat1 = ghat1[::-1].copy()
            a_pt, b_pt = ghat1[0].copy(), ghat1[-1].copy()
        except DegenerateFieldError:
            ghat1 = None
    return InterfaceGeometry(
        gamma=gamma,
        families=families,
        diffuse_mask=diffuse,
        diffuse_points=pts,
        ghat1=ghat1,
        endpoint_a=a_pt,
        endpoint_b=b_pt,
    )


def localization_distance(geometry: InterfaceGeometry, field: Field) -> dict:
    """Max distance of diffuse-interface nodes to the best-centered triod."""
    pts = geometry.diffuse_points
    if pts.shape[0] == 0:
        raise DegenerateFieldError("diffuse interface is empty")
    center, max_dist = geo.fit_triod_center(pts)
    return {
        "max_dist": max_dist,
        "center": center,
        "center_offset": float(np.linalg.norm(center)),
        "n_nodes": int(pts.shape[0]),
    }


def interface_width(geometry: InterfaceGeometry, field: Field, samples: int = 50) -> dict:
    """Sampled r1 = distance from a level-curve point to the other families."""
    fams = geometry.families
    if any(not f for f in fams):
        raise DegenerateFieldError("a level-curve family is empty")
    lengths = [sum(geo.polyline_length(p) for p in f) for f in fams]
    total = sum(lengths)
    rows = []
    for i, fam in enumerate(fams):
        n_i = max(1, int(round(samples * lengths[i] / total)))
        others = [p for j in range(3) if j != i for p in fams[j]]
        concat = np.concatenate(fam)
        s = geo.arclength(concat)
        targets = np.linspace(0.0, s[-1], n_i + 2)[1:-1]
        pts = np.atleast_2d(geo.point_at_arclength(concat, targets, s))
        r1 = geo.dist_to_family(pts, others)
        for p, r in zip(pts, r1):
            rows.append((i + 1, float(p[0]), float(p[1]), float(r)))
    r1s = np.array([r[3] for r in rows])
    return {
        "samples": rows,
        "max_r1": float(r1s.max()),
        "max_ratio": float(r1s.max() / field.epsilon),
        "median_ratio": float(np.median(r1s) / field.epsilon),
    }


def competitor_energy_bound(
    field: Field, z1, r1: float, spec: PotentialSpec, well_index: int = 0
) -> tuple:
    """Potential energy of u in B(z1, r1) and the energy of the explicit
    competitor that rings down to a well over a width-eps annulus."""
    z1 = np.asarray(z1, dtype=float)
    eps = field.epsilon
    if np.linalg.norm(z1) + r1 > 1.0:
        raise InvalidInputError("ball must sit inside the unit disk")
    if r1 < 2.0 * eps:
        raise InvalidInputError("need r1 >= 2*eps")
    g = field.grid
    a = spec.wells.as_array()[well_index]

    d = np.linalg.norm(
        np.stack(g.coords(), axis=-1) - z1, axis=-1
    )
    v = field.values.copy()
    core = d < r1 - eps
    ring = (d >= r1 - eps) & (d < r1)
    v[core] = a
    lam = ((r1 - d[ring]) / eps)[:, None]
    v[ring] = lam * a + (1.0 - lam) * field.values[ring]

    xc = 0.5 * (g.xs[:-1] + g.xs[1:])
    cx, cy = np.meshgrid(xc, xc, indexing="xy")
    cell_ball = ((cx - z1[0]) ** 2 + (cy - z1[1]) ** 2) < r1 * r1
    cells = cell_ball & g.cell_inside

    def cell_energy(vals):
        u00, u01 = vals[:-1, :-1], vals[:-1, 1:]
        u10, u11 = vals[1:, :-1], vals[1:, 1:]
        gsq = 0.5 * (
            np.sum((u01 - u00) ** 2, -1) + np.sum((u11 - u10) ** 2, -1)
        ) + 0.5 * (np.sum((u10 - u00) ** 2, -1) + np.sum((u11 - u01) ** 2, -1))
        ub = 0.25 * (u00 + u01 + u10 + u11)
        w = eval_w(spec, ub)
        return 0.5 * eps * gsq, (g.h * g.h / eps) * w

    grad_u, pot_u = cell_energy(field.values)
    grad_v, pot_v = cell_energy(v)
    potential_inside = float(np.sum(pot_u[cells]))
    competitor = float(np.sum((grad_v + pot_v)[cells]))
    return potential_inside, competitor


# --- triple point and interface discretization ---------------------------

@dataclass
class JunctionReport:
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    dist_pq: float
    dist_pr: float
    alpha_start: float
    alpha_end: float
    gamma: float
    p_norm: float


def triple_point(geometry: InterfaceGeometry, field: Field) -> JunctionReport:
    """Equidistance point on the outer a1-curve via a sign change of
    alpha(t) = dist(., Gamma^2) - dist(., Gamma^3)."""
    if geometry.ghat1 is None:
        raise DegenerateFieldError("outer a1 level curve unavailable")
    fam2, fam3 = geometry.families[1], geometry.families[2]
    if not fam2 or not fam3:
        raise DegenerateFieldError("families 2/3 empty")
    gh = geometry.ghat1
    alpha = geo.dist_to_family(gh, fam2) - geo.dist_to_family(gh, fam3)
    sgn = np.sign(alpha)
    flips = np.where(np.diff(sgn) != 0)[0]
    if flips.size == 0:
        raise StructureViolationError("no sign change of the distance gap on the curve")
    k = int(flips[0])
    lo, hi = gh[k], gh[k + 1]
    tol = field.grid.h / 4.0

    def alpha_at(pt):
        return float(
            geo.dist_to_family(pt[None, :], fam2)[0]
            - geo.dist_to_family(pt[None, :], fam3)[0]
        )

    alo = alpha[k]
    while np.linalg.norm(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        am = alpha_at(mid)
        if (am < 0.0) == (alo < 0.0):
            lo, alo = mid, am
        else:
            hi = mid
    p = 0.5 * (lo + hi)
    q, dq = geo.nearest_on_family(p, fam2)
    r, dr = geo.nearest_on_family(p, fam3)
    return JunctionReport(
        p=p,
        q=q,
        r=r,
        dist_pq=dq,
        dist_pr=dr,
        alpha_start=float(alpha[0]),
        alpha_end=float(alpha[-1]),
        gamma=geometry.gamma,
        p_norm=float(np.linalg.norm(p)),
    )


def discretize_interface(
    geometry: InterfaceGeometry,
    field: Field,
    k: int,
    c0_measured: float,
) -> dict:
    """Greedy chord discretization of the outer a1-curve plus the balanced
    bisection into the point families {Q_j}, {R_j} (sizes 2^k)."""
    if geometry.ghat1 is None:
        raise DegenerateFieldError("outer a1 level curve unavailable")
    if k < 1:
        raise InvalidInputError("need k >= 1")
    eps = field.epsilon
    step = 8.0 * c0_measured * eps
    z, params = geo.greedy_chord_points(geometry.ghat1, step)
    need = 2 ** (k + 1)
    if z.shape[0] < need:
        raise ScaleLimitError(
            f"curve yields {z.shape[0]} points < {need}; decrease epsilon"
        )
    d2 = geo.dist_to_family(z, geometry.families[1])
    d3 = geo.dist_to_family(z, geometry.families[2])
    in_z2 = d2 <= d3

    counts = np.convolve(in_z2.astype(int), np.ones(need, dtype=int), mode="valid")
    starts = np.where(counts == 2**k)[0]
    if starts.size == 0:
        raise ScaleLimitError("no balanced window of greedy points; decrease epsilon")
    l0 = int(starts[0])

    l = l0
    for j in range(k):
        width = 2 ** (k + 1 - j)
        half = width // 2
        found = None
        for cand in range(l, l + half + 1):
            if cand + half > z.shape[0]:
                break
            if int(np.sum(in_z2[cand : cand + half])) == 2 ** (k - 1 - j):
                found = cand
                break
        if found is None:
            raise ScaleLimitError("balanced bisection failed; decrease epsilon")
        l = found
    p_eps = z[l]

    window = range(l0, l0 + need)
    q_pts, r_pts, q_src, r_src = [], [], [], []
    for idx in window:
        if in_z2[idx]:
            pt, _ = geo.nearest_on_family(z[idx], geometry.families[1])
            q_pts.append(pt)
            q_src.append(z[idx])
        else:
            pt, _ = geo.nearest_on_family(z[idx], geometry.families[2])
            r_pts.append(pt)
            r_src.append(z[idx])
    q_pts = sorted(q_pts, key=lambda p: float(np.linalg.norm(p - p_eps)))
    r_pts = sorted(r_pts, key=lambda p: float(np.linalg.norm(p - p_eps)))

    fam = np.array(q_pts + r_pts)
    pd = np.linalg.norm(fam[:, None, :] - fam[None, :, :], axis=-1)
    np.fill_diagonal(pd, np.inf)
    violations = []
    tol = field.grid.h
    if float(pd.min()) < 6.0 * c0_measured * eps - tol:
        violations.append(f"pairwise separation {pd.min():.4f} < 6*C0*eps")
    for j, pt in enumerate(q_pts, start=1):
        if np.linalg.norm(pt - p_eps) > (32.0 * j + 1.0) * c0_measured * eps + tol:
            violations.append(f"Q_{j} too far from P")
    for j, pt in enumerate(r_pts, start=1):
        if np.linalg.norm(pt - p_eps) > (32.0 * j + 1.0) * c0_measured * eps + tol:
            violations.append(f"R_{j} too far from P")
    zd = np.linalg.norm(z[:, None, :] - z[None, :, :], axis=-1)
    np.fill_diagonal(zd, np.inf)
    return {
        "z_points": z,
        "params": params,
        "in_z2": in_z2,
        "p_eps": p_eps,
        "q_family": np.array(q_pts),
        "r_family": np.array(r_pts),
        "step": step,
        "min_pairwise_z": float(zd.min()),
        "min_pairwise_family": float(pd.min()),
        "violations": violations,
        "k": k,
    }


def lemma61_event(geometry: InterfaceGeometry, field: Field, c0_measured: float):
    """First grid row y0 in [1/4, 3/8] whose band of outer-curve points is
    uniformly closer to Gamma^2 than Gamma^3; None if no row qualifies."""
    if geometry.ghat1 is None:
        return None
    gh = geometry.ghat1
    d2 = geo.dist_to_family(gh, geometry.families[1])
    d3 = geo.dist_to_family(gh, geometry.families[2])
    band = c0_measured * field.epsilon
    ys = field.grid.xs
    for y0 in ys[(ys >= 0.25) & (ys <= 0.375)]:
        m = np.abs(gh[:, 1] - y0) <= band
        if np.any(m) and np.all(d2[m] <= d3[m]):
            return float(y0)
    return None


# --- blow-down comparison -------------------------------------------------

def l1_distance_to_partition(
    field: Field, center=(0.0, 0.0), orientation: float = 0.0
) -> float:
    ref = u0_field(
        field.grid, field.epsilon, field.c0, field.spec,
        center=center, orientation=orientation,
    )
    g = field.grid
    diff = np.linalg.norm(field.values - ref.values, axis=-1)
    return float(g.h * g.h * np.sum(diff[g.interior]))


def l1_blowdown_distance(
    field: Field, center=(0.0, 0.0), orientation: float = 0.0, best_fit: bool = True
) -> dict:
    """L1(B1) distance to the sharp partition, optionally locally optimized
    over the partition's center and orientation (deterministic refinement)."""
    fixed = l1_distance_to_partition(field, center, orientation)
    out = {
        "fixed": fixed,
        "best": fixed,
        "best_center": np.asarray(center, dtype=float),
        "best_orientation": orientation,
    }
    if not best_fit:
        return out
    c = np.asarray(center, dtype=float)
    phi = orientation
    span_c, span_phi = 0.12, math.pi / 12.0
    for _ in range(3):
        best = (out["best"], c.copy(), phi)
        for dx in np.linspace(-span_c, span_c, 5):
            for dy in np.linspace(-span_c, span_c, 5):
                for dphi in np.linspace(-span_phi, span_phi, 5):
                    val = l1_distance_to_partition(field, c + [dx, dy], phi + dphi)
                    if val < best[0] - 1e-15:
                        best = (val, c + np.array([dx, dy]), phi + dphi)
        out["best"], c, phi = best[0], best[1], best[2]
        span_c /= 4.0
        span_phi /= 4.0
    out["best_center"] = c
    out["best_orientation"] = phi
    return out
