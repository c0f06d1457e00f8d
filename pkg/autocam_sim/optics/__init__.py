"""Camera optics: lens prescriptions, sequential tracing and analytic projections."""

from autocam_sim.optics.diffraction import hurb_perturb, hurb_sigma
from autocam_sim.optics.lens_file import load_lens, parse_lens
from autocam_sim.optics.paraxial import (
    paraxial_matrix,
    paraxial_matrix_focal_length,
    paraxial_trace_focus,
    rear_focal_distance,
)
from autocam_sim.optics.projection import CameraFrame, fisheye_project, pinhole_project
from autocam_sim.optics.refraction import refract, refract_many
from autocam_sim.optics.surfaces import LensPrescription, LensSurface, SurfaceKind
from autocam_sim.optics.tracing import (
    LensTraceResult,
    intersect_surface,
    rms_spot_radius,
    trace_rays,
    trace_through_lens,
)

__all__ = [
    "CameraFrame",
    "LensPrescription",
    "LensSurface",
    "LensTraceResult",
    "SurfaceKind",
    "fisheye_project",
    "hurb_perturb",
    "hurb_sigma",
    "intersect_surface",
    "load_lens",
    "paraxial_matrix",
    "paraxial_matrix_focal_length",
    "paraxial_trace_focus",
    "parse_lens",
    "pinhole_project",
    "rear_focal_distance",
    "refract",
    "refract_many",
    "rms_spot_radius",
    "trace_rays",
    "trace_through_lens",
]
