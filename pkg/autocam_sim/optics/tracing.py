"""Sequential ray tracing through a lens prescription.

All functions are vectorised over rays: positions and directions are
(N, 3) arrays in the lens frame (mm).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from autocam_sim.optics.diffraction import hurb_perturb
from autocam_sim.optics.refraction import refract_many
from autocam_sim.optics.surfaces import (
    NEWTON_MAX_ITERATIONS,
    NEWTON_TOLERANCE_MM,
    LensPrescription,
    LensSurface,
    SurfaceKind,
)

logger = logging.getLogger(__name__)


@dataclass
class SurfaceHit:
    points: np.ndarray
    normals: np.ndarray
    hit: np.ndarray
    diverged: np.ndarray

    @property
    def vignetted(self) -> np.ndarray:
        return ~self.hit


def _sphere_t(origins: np.ndarray, directions: np.ndarray, c: float) -> tuple[np.ndarray, np.ndarray]:
    """Ray parameter of the vertex-side intersection with a sphere (or plane for c=0)."""
    oz, dz = origins[:, 2], directions[:, 2]
    if c == 0.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            t = -oz / dz
        return t, np.isfinite(t)
    radius = 1.0 / c
    oc = origins - np.array([0.0, 0.0, radius])
    b = np.sum(oc * directions, axis=1)
    cc = np.sum(oc * oc, axis=1) - radius * radius
    disc = b * b - cc
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    t_near = -b - sq
    t_far = -b + sq
    # The vertex-side hemisphere satisfies c * z < 1.
    z_near = oz + t_near * dz
    t = np.where(c * z_near < 1.0, t_near, t_far)
    return t, ok


def intersect_surface(origins: np.ndarray, directions: np.ndarray, surface: LensSurface) -> SurfaceHit:
    """Intersect rays with ``surface`` in its local frame (vertex at the origin).

    Spherical and flat surfaces are solved in closed form. Conic, aspheric
    and biconic surfaces use Newton iteration on ``sag(x, y) - z`` seeded
    from the spherical solution. Hits beyond the semi-aperture, misses and
    non-converged rays are flagged as not hit.
    """
    o = np.atleast_2d(np.asarray(origins, dtype=np.float64))
    d = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    if surface.kind is SurfaceKind.BICONIC:
        c_seed = 0.5 * (surface.curvature_x + surface.curvature_y)
    else:
        c_seed = surface.curvature
    t, ok = _sphere_t(o, d, 0.0 if surface.is_stop else c_seed)
    diverged = np.zeros(len(o), dtype=bool)

    if not surface.is_closed_form:
        plane_t, plane_ok = _sphere_t(o, d, 0.0)
        t = np.where(ok, t, plane_t)
        ok = ok | plane_ok
        converged = np.zeros(len(o), dtype=bool)
        active = ok.copy()
        for _ in range(NEWTON_MAX_ITERATIONS):
            if not active.any():
                break
            p = o[active] + t[active, None] * d[active]
            f = surface.sag(p[:, 0], p[:, 1]) - p[:, 2]
            gx, gy = surface.sag_gradient(p[:, 0], p[:, 1])
            df = gx * d[active, 0] + gy * d[active, 1] - d[active, 2]
            with np.errstate(divide="ignore", invalid="ignore"):
                step = f / df
            bad = ~np.isfinite(step)
            t_active = t[active] - np.where(bad, 0.0, step)
            done = (np.abs(f) < NEWTON_TOLERANCE_MM) & ~bad
            idx = np.flatnonzero(active)
            t[idx] = np.where(done, t[active], t_active)
            converged[idx[done]] = True
            active[idx[done | bad]] = False
        diverged = ok & ~converged
        ok = converged

    points = o + np.where(ok, t, 0.0)[:, None] * d
    r2 = points[:, 0] ** 2 + points[:, 1] ** 2
    hit = ok & (t > -NEWTON_TOLERANCE_MM) & (r2 <= surface.semi_aperture**2)
    normals = np.zeros_like(points)
    normals[:, 2] = 1.0
    if hit.any() and not surface.is_stop:
        normals[hit] = surface.normal(points[hit, 0], points[hit, 1])
    return SurfaceHit(points, normals, hit, diverged)


@dataclass
class LensTraceResult:
    """Scene-side rays leaving the front surface; ``weights`` is 0 or 1."""

    origins: np.ndarray
    directions: np.ndarray
    weights: np.ndarray
    vignetted: int
    tir: int
    diverged: int


def trace_rays(
    origins: np.ndarray,
    directions: np.ndarray,
    wavelength_nm,
    prescription: LensPrescription,
    rng: np.random.Generator | None = None,
    *,
    diffraction: bool = True,
    normals: np.ndarray | None = None,
) -> LensTraceResult:
    """Trace rays that start behind the rear surface, travelling toward +z."""
    o = np.array(origins, dtype=np.float64, ndmin=2)
    d = np.array(directions, dtype=np.float64, ndmin=2)
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    n_rays = len(o)
    wl = np.broadcast_to(np.asarray(wavelength_nm, dtype=np.float64), (n_rays,))
    alive = np.ones(n_rays, dtype=bool)
    n_vignetted = n_tir = n_diverged = 0

    for i, surface in enumerate(prescription.surfaces):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        z0 = prescription.vertex_z[i]
        local = o[idx] - np.array([0.0, 0.0, z0])
        hit = intersect_surface(local, d[idx], surface)
        n_diverged += int(hit.diverged.sum())
        n_vignetted += int((~hit.hit & ~hit.diverged).sum())
        alive[idx[~hit.hit]] = False
        keep = hit.hit
        idx = idx[keep]
        points = hit.points[keep] + np.array([0.0, 0.0, z0])
        o[idx] = points
        if surface.is_stop:
            if diffraction and idx.size:
                edge = surface.semi_aperture - np.hypot(points[:, 0], points[:, 1])
                draws = None if normals is None else np.asarray(normals)[idx]
                d[idx] = hurb_perturb(d[idx], edge, wl[idx], rng=rng, normals=draws)
            continue
        n1 = prescription.index_before(i, wl[idx])
        n2 = prescription.index_after(i, wl[idx])
        new_d, tir = refract_many(d[idx], hit.normals[keep], n1, n2)
        n_tir += int(tir.sum())
        alive[idx[tir]] = False
        d[idx] = new_d

    return LensTraceResult(o, d, alive.astype(np.float64), n_vignetted, n_tir, n_diverged)


def trace_through_lens(
    film_points: np.ndarray,
    rear_samples: np.ndarray,
    wavelength_nm,
    prescription: LensPrescription,
    rng: np.random.Generator | None = None,
    *,
    diffraction: bool = True,
    normals: np.ndarray | None = None,
) -> LensTraceResult:
    """Trace from film points through rear-vertex-plane samples out into the scene.

    Args:
        film_points: (N, 2) film coordinates in mm (the film sits at
            z = -film_distance).
        rear_samples: (N, 2) points on the rear vertex plane, within the rear
            semi-aperture.
        wavelength_nm: scalar or (N,) wavelengths.
        prescription: lens to trace.
        rng: generator for diffraction draws (ignored when ``normals`` given).
        diffraction: apply ray bending at the aperture stop.
        normals: (N, 2) standard normals for the diffraction tilt.
    """
    film = np.atleast_2d(np.asarray(film_points, dtype=np.float64))
    rear = np.atleast_2d(np.asarray(rear_samples, dtype=np.float64))
    n = max(len(film), len(rear))
    origins = np.zeros((n, 3))
    origins[:, :2] = film
    origins[:, 2] = -prescription.film_distance
    targets = np.zeros((n, 3))
    targets[:, :2] = rear
    directions = targets - origins
    return trace_rays(
        origins, directions, wavelength_nm, prescription, rng, diffraction=diffraction, normals=normals
    )


def rms_spot_radius(
    prescription: LensPrescription,
    film_point,
    wavelength_nm: float,
    n_rays: int,
    rng: np.random.Generator,
) -> float:
    """Angular RMS spread (radians) of exit directions for one film point.

    Rays are sampled uniformly over the rear aperture with diffraction off.
    Returns NaN when every ray is vignetted.
    """
    a = prescription.rear_semi_aperture
    r = a * np.sqrt(rng.random(n_rays))
    phi = 2.0 * np.pi * rng.random(n_rays)
    rear = np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)
    film = np.broadcast_to(np.asarray(film_point, dtype=np.float64), (n_rays, 2))
    result = trace_through_lens(film, rear, wavelength_nm, prescription, diffraction=False)
    live = result.weights > 0
    if not live.any():
        return float("nan")
    dirs = result.directions[live]
    mean = dirs.mean(axis=0)
    mean /= np.linalg.norm(mean)
    angles = np.arccos(np.clip(dirs @ mean, -1.0, 1.0))
    return float(np.sqrt(np.mean(angles**2)))
