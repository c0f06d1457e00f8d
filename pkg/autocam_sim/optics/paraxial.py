"""First-order (paraxial) optics of a prescription.

Ray state is (height y, reduced angle w = n·u) in the meridional (y-z)
plane, propagated rear to front.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from autocam_sim.optics.surfaces import LensPrescription
from autocam_sim.optics.tracing import trace_rays


def paraxial_matrix(prescription: LensPrescription, wavelength_nm: float) -> np.ndarray:
    """2×2 system matrix from just before the rear surface to just after the front one."""
    m = np.eye(2)
    surfaces = prescription.surfaces
    for i, surface in enumerate(surfaces):
        n1 = float(prescription.index_before(i, wavelength_nm))
        n2 = float(prescription.index_after(i, wavelength_nm))
        power = 0.0 if surface.is_stop else (n2 - n1) * surface.curvature
        m = np.array([[1.0, 0.0], [-power, 1.0]]) @ m
        if i < len(surfaces) - 1:
            m = np.array([[1.0, surface.thickness / n2], [0.0, 1.0]]) @ m
    return m


def paraxial_matrix_focal_length(prescription: LensPrescription, wavelength_nm: float) -> float:
    """Effective focal length (mm); infinite for a system without power."""
    c = paraxial_matrix(prescription, wavelength_nm)[1, 0]
    return float("inf") if c == 0 else float(-1.0 / c)


def rear_focal_distance(prescription: LensPrescription, wavelength_nm: float) -> float:
    """Distance behind the rear vertex where a point images to infinity."""
    m = paraxial_matrix(prescription, wavelength_nm)
    return float("inf") if m[1, 0] == 0 else float(-m[1, 1] / m[1, 0])


@dataclass(frozen=True)
class ParaxialFocus:
    effective_focal_length: float
    focus_distance: float


def paraxial_trace_focus(
    prescription: LensPrescription, wavelength_nm: float, height_mm: float = 1e-3
) -> ParaxialFocus:
    """Trace a real ray parallel to the axis at small height from the film side.

    Returns the effective focal length implied by its exit slope and the
    distance beyond the front vertex where it crosses the axis.
    """
    origin = np.array([[0.0, height_mm, -1.0]])
    direction = np.array([[0.0, 0.0, 1.0]])
    result = trace_rays(origin, direction, wavelength_nm, prescription, diffraction=False)
    if result.weights[0] == 0:
        raise ValueError("paraxial ray was vignetted; use a smaller height")
    o, d = result.origins[0], result.directions[0]
    slope = d[1] / d[2]
    if slope == 0:
        return ParaxialFocus(float("inf"), float("inf"))
    z_cross = o[2] - o[1] / slope
    return ParaxialFocus(float(-height_mm / slope), float(z_cross - prescription.front_vertex_z))
