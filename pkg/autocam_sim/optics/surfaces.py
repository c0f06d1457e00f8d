"""Lens surfaces and prescriptions.

Lens frame: millimetres, optical axis along +z pointing into the scene,
rear (film-side) vertex at z = 0, film plane at z = -film_distance.
Surfaces are listed rear to front; ``index`` is the medium on the scene
side of a surface (between it and the next one). Positive curvature puts
the center of curvature on the +z side of the vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from autocam_sim.spectral import DEFAULT_GRID, Spectrum, WavelengthGrid

NEWTON_TOLERANCE_MM = 1e-9
NEWTON_MAX_ITERATIONS = 20


class SurfaceKind(str, Enum):
    SPHERICAL = "spherical"
    ASPHERIC = "aspheric"
    BICONIC = "biconic"
    APERTURE_STOP = "stop"


@dataclass(frozen=True)
class LensSurface:
    """One refracting surface or the aperture stop."""

    kind: SurfaceKind
    curvature_x: float
    curvature_y: float
    conic_x: float
    conic_y: float
    a4: float
    a6: float
    a8: float
    thickness: float
    semi_aperture: float
    index: Spectrum
    line: int = 0

    @classmethod
    def rotational(
        cls,
        kind: SurfaceKind,
        curvature: float,
        thickness: float,
        semi_aperture: float,
        index: Spectrum,
        conic: float = 0.0,
        a4: float = 0.0,
        a6: float = 0.0,
        a8: float = 0.0,
        line: int = 0,
    ) -> LensSurface:
        return cls(kind, curvature, curvature, conic, conic, a4, a6, a8, thickness, semi_aperture, index, line)

    @property
    def curvature(self) -> float:
        return self.curvature_y

    @property
    def is_stop(self) -> bool:
        return self.kind is SurfaceKind.APERTURE_STOP

    @property
    def is_closed_form(self) -> bool:
        """True when the exact intersection is a quadratic (sphere or plane)."""
        return self.is_stop or (
            self.kind is not SurfaceKind.BICONIC
            and self.conic_x == 0.0
            and self.a4 == 0.0
            and self.a6 == 0.0
            and self.a8 == 0.0
        )

    def _poly(self, r2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Even-asphere polynomial and d(poly)/d(r2)."""
        value = self.a4 * r2**2 + self.a6 * r2**3 + self.a8 * r2**4
        slope = 2 * self.a4 * r2 + 3 * self.a6 * r2**2 + 4 * self.a8 * r2**3
        return value, slope

    def sag(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Surface z at (x, y); NaN where the conic term is not real."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self.is_stop:
            return np.zeros(np.broadcast(x, y).shape)
        r2 = x * x + y * y
        poly, _ = self._poly(r2)
        with np.errstate(invalid="ignore"):
            if self.kind is SurfaceKind.BICONIC:
                cx, cy = self.curvature_x, self.curvature_y
                num = cx * x * x + cy * y * y
                s = np.sqrt(1 - (1 + self.conic_x) * cx**2 * x * x - (1 + self.conic_y) * cy**2 * y * y)
            else:
                c = self.curvature
                num = c * r2
                s = np.sqrt(1 - (1 + self.conic_x) * c * c * r2)
        return num / (1 + s) + poly

    def sag_gradient(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(dz/dx, dz/dy) of :meth:`sag`."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self.is_stop:
            zero = np.zeros(np.broadcast(x, y).shape)
            return zero, zero
        r2 = x * x + y * y
        _, slope = self._poly(r2)
        with np.errstate(invalid="ignore", divide="ignore"):
            if self.kind is SurfaceKind.BICONIC:
                cx, cy = self.curvature_x, self.curvature_y
                kx, ky = self.conic_x, self.conic_y
                num = cx * x * x + cy * y * y
                s = np.sqrt(1 - (1 + kx) * cx**2 * x * x - (1 + ky) * cy**2 * y * y)
                ds_dx = -(1 + kx) * cx**2 * x / s
                ds_dy = -(1 + ky) * cy**2 * y / s
                denom = (1 + s) ** 2
                gx = (2 * cx * x * (1 + s) - num * ds_dx) / denom
                gy = (2 * cy * y * (1 + s) - num * ds_dy) / denom
            else:
                c = self.curvature
                s = np.sqrt(1 - (1 + self.conic_x) * c * c * r2)
                gx = c * x / s
                gy = c * y / s
        return gx + 2 * x * slope, gy + 2 * y * slope

    def normal(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Unit normals (N, 3) pointing toward +z."""
        gx, gy = self.sag_gradient(x, y)
        n = np.stack([-gx, -gy, np.ones_like(gx)], axis=-1)
        return n / np.linalg.norm(n, axis=-1, keepdims=True)

    def sag_is_real(self) -> bool:
        """Whether the conic square root stays real out to the semi-aperture."""
        a2 = self.semi_aperture**2
        if self.is_stop:
            return True
        return (1 + self.conic_x) * self.curvature_x**2 * a2 < 1 and (
            1 + self.conic_y
        ) * self.curvature_y**2 * a2 < 1


@dataclass(frozen=True)
class LensPrescription:
    """Ordered surfaces (rear to front) plus film placement."""

    surfaces: tuple[LensSurface, ...]
    film_distance: float
    focal_length: float | None = None
    name: str = ""
    analytic: str | None = None
    grid: WavelengthGrid = DEFAULT_GRID
    vertex_z: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        thickness = np.array([s.thickness for s in self.surfaces], dtype=np.float64)
        z = np.concatenate(([0.0], np.cumsum(thickness)[:-1])) if len(thickness) else np.zeros(0)
        z.setflags(write=False)
        object.__setattr__(self, "vertex_z", z)

    @property
    def stop_index(self) -> int:
        return next(i for i, s in enumerate(self.surfaces) if s.is_stop)

    @property
    def stop(self) -> LensSurface:
        return self.surfaces[self.stop_index]

    @property
    def rear_semi_aperture(self) -> float:
        return self.surfaces[0].semi_aperture

    @property
    def front_vertex_z(self) -> float:
        return float(self.vertex_z[-1])

    def index_before(self, i: int, wavelength_nm) -> np.ndarray:
        """Refractive index on the film side of surface ``i``."""
        if i == 0:
            return np.ones_like(np.asarray(wavelength_nm, dtype=np.float64))
        return self.surfaces[i - 1].index.at(wavelength_nm)

    def index_after(self, i: int, wavelength_nm) -> np.ndarray:
        return self.surfaces[i].index.at(wavelength_nm)
