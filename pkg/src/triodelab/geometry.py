"""Level curves, polyline metrics and the triod geometry."""

from __future__ import annotations

import math

import numpy as np
from skimage import measure

from .disk import DiskGrid
from .errors import DegenerateFieldError

LEG_ANGLES = (0.5 * math.pi, 7.0 * math.pi / 6.0, 11.0 * math.pi / 6.0)


def extract_polylines(grid: DiskGrid, phi: np.ndarray, level: float = 0.0):
    """Marching-squares contours of phi at `level`, clipped to the closed disk.

    Vertices are linear interpolations along cell edges; pieces falling
    outside the disk (the clamped exterior carries radially constant
    data) are dropped, splitting polylines where necessary.
    """
    polys = []
    for c in measure.find_contours(phi, level):
        pts = np.stack([-1.0 + c[:, 1] * grid.h, -1.0 + c[:, 0] * grid.h], axis=-1)
        inside = np.hypot(pts[:, 0], pts[:, 1]) <= 1.0
        idx = np.where(inside)[0]
        if idx.size == 0:
            continue
        breaks = np.where(np.diff(idx) > 1)[0]
        for seg in np.split(idx, breaks + 1):
            if seg.size >= 2:
                polys.append(np.ascontiguousarray(pts[seg]))
    return polys


def polyline_length(poly: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(np.diff(poly, axis=0), axis=1)))


def arclength(poly: np.ndarray) -> np.ndarray:
    seg = np.linalg.norm(np.diff(poly, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def point_at_arclength(poly: np.ndarray, s_query, s=None) -> np.ndarray:
    if s is None:
        s = arclength(poly)
    x = np.interp(s_query, s, poly[:, 0])
    y = np.interp(s_query, s, poly[:, 1])
    return np.stack([np.atleast_1d(x), np.atleast_1d(y)], axis=-1).squeeze()


def dist_to_polyline(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Distance from points (..., 2) to a polyline by segment projection."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    a = poly[:-1]
    ab = poly[1:] - a
    denom = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
    diff = pts[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("pij,ij->pi", diff, ab) / denom, 0.0, 1.0)
    proj = a[None, :, :] + t[..., None] * ab[None, :, :]
    d = np.linalg.norm(pts[:, None, :] - proj, axis=-1)
    return d.min(axis=1)


def dist_to_family(pts, family) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if not family:
        raise DegenerateFieldError("empty level-curve family")
    best = np.full(pts.shape[0], np.inf)
    for poly in family:
        best = np.minimum(best, dist_to_polyline(pts, poly))
    return best


def nearest_on_family(pt, family):
    """Closest point on a family of polylines to `pt`."""
    pt = np.asarray(pt, dtype=float)
    best_d = np.inf
    best_p = None
    for poly in family:
        a = poly[:-1]
        ab = poly[1:] - a
        denom = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
        t = np.clip(np.einsum("ij,ij->i", pt[None, :] - a, ab) / denom, 0.0, 1.0)
        proj = a + t[:, None] * ab
        d = np.linalg.norm(proj - pt, axis=1)
        k = int(np.argmin(d))
        if d[k] < best_d:
            best_d = float(d[k])
            best_p = proj[k]
    return best_p, best_d


def open_boundary_curve(family, grid: DiskGrid, margin: float = 3.0):
    """The longest polyline whose both endpoints approach the unit circle."""
    cands = [
        p
        for p in family
        if np.hypot(*p[0]) >= 1.0 - margin * grid.h
        and np.hypot(*p[-1]) >= 1.0 - margin * grid.h
    ]
    if not cands:
        raise DegenerateFieldError("no level curve reaches the disk boundary")
    return max(cands, key=polyline_length)


def greedy_chord_points(poly: np.ndarray, step: float):
    """Greedy discretization: from each point, jump to the supremum of the
    parameters whose curve point is still within `step` (chord distance).

    Consecutive points are exactly `step` apart and all pairs are at
    least `step` apart; stops once the far endpoint is within `step`.
    """
    s = arclength(poly)
    pts = [poly[0].copy()]
    params = [0.0]
    end = poly[-1]
    while True:
        z = pts[-1]
        if np.linalg.norm(end - z) <= step * (1.0 + 1e-9):
            break
        hit = None
        for k in range(len(poly) - 2, -1, -1):
            a, b = poly[k], poly[k + 1]
            t = _last_param_within(a, b, z, step)
            if t is None:
                continue
            cand = s[k] + t * np.linalg.norm(b - a)
            if cand > params[-1] + 1e-12:
                hit = (cand, a + t * (b - a))
            break
        if hit is None:
            break
        params.append(hit[0])
        pts.append(hit[1])
    return np.array(pts), np.array(params)


def _last_param_within(a, b, z, radius):
    """Largest t in [0,1] with |a + t(b-a) - z| <= radius, or None."""
    ab = b - a
    az = a - z
    qa = float(ab @ ab)
    qb = 2.0 * float(az @ ab)
    qc = float(az @ az) - radius * radius
    if qa < 1e-300:
        return 1.0 if qc <= 0 else None
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        return None
    r2 = (-qb + math.sqrt(disc)) / (2.0 * qa)
    r1 = (-qb - math.sqrt(disc)) / (2.0 * qa)
    if r2 < 0.0 or r1 > 1.0:
        return None
    return min(r2, 1.0)


def triod_leg_segments(center, leg_angles=LEG_ANGLES):
    """Segments from `center` to the unit circle along fixed directions."""
    c = np.asarray(center, dtype=float)
    segs = []
    for ang in leg_angles:
        d = np.array([math.cos(ang), math.sin(ang)])
        cd = float(c @ d)
        t = -cd + math.sqrt(max(cd * cd + 1.0 - float(c @ c), 0.0))
        segs.append((c, c + t * d))
    return segs


def dist_to_triod(pts, center, leg_angles=LEG_ANGLES) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    best = np.full(pts.shape[0], np.inf)
    for a, b in triod_leg_segments(center, leg_angles):
        poly = np.stack([a, b])
        best = np.minimum(best, dist_to_polyline(pts, poly))
    return best


def fit_triod_center(pts, search_radius: float = 0.3, rounds: int = 3, coarse: int = 13):
    """Center minimizing the max point-to-triod distance (grid refinement)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    center = np.zeros(2)
    radius = search_radius
    for _ in range(rounds):
        grid1d = np.linspace(-radius, radius, coarse)
        best = (np.inf, center)
        for dx in grid1d:
            for dy in grid1d:
                c = center + np.array([dx, dy])
                val = float(dist_to_triod(pts, c).max())
                if val < best[0] - 1e-15:
                    best = (val, c)
        center = best[1]
        radius /= coarse / 2.5
    return center, float(dist_to_triod(pts, center).max())
