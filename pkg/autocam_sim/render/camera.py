"""Camera ray generation for pinhole, fisheye and traced-lens cameras.

Each camera sample carries a per-band weight that turns scene radiance
into film irradiance. Pinhole and fisheye cameras use the constant
on-axis factor pi / (4 N^2) for f-number N (geometry factor 1 / (4 N^2)
times pi). Lens cameras sample the rear element uniformly by area and
weight by pi a^2 cos^4(theta) / d^2 (rear semi-aperture a, film distance
d), which reduces to the same factor for a thin lens; every lens sample
traces one band, stratified over the samples of a pixel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from autocam_sim.models import CameraConfig
from autocam_sim.optics.lens_file import load_lens
from autocam_sim.optics.projection import CameraFrame, fisheye_directions, pinhole_directions
from autocam_sim.optics.surfaces import LensPrescription
from autocam_sim.optics.tracing import trace_through_lens
from autocam_sim.render.sampling import (
    DIM_BAND,
    DIM_DIFFRACTION,
    DIM_LENS_U,
    DIM_LENS_V,
    DIM_PIXEL_X,
    DIM_PIXEL_Y,
    SampleStream,
)
from autocam_sim.spectral import WavelengthGrid
from autocam_sim.utils.paths import resolve_data_file

logger = logging.getLogger(__name__)

MM_TO_M = 1e-3


@dataclass
class CameraRays:
    origins: np.ndarray
    directions: np.ndarray
    weights: np.ndarray  # (N, B)
    vignetted: int = 0
    diverged: int = 0


class RenderCamera:
    """Film geometry plus the camera model that turns film points into world rays."""

    def __init__(
        self,
        camera: CameraConfig,
        width_px: int,
        height_px: int,
        grid: WavelengthGrid,
        prescription: LensPrescription | None = None,
        diffraction: bool = True,
    ):
        if camera.model == "lens" and prescription is None:
            raise ValueError("lens camera needs a prescription")
        self.camera = camera
        self.width = width_px
        self.height = height_px
        self.grid = grid
        self.prescription = prescription
        self.diffraction = diffraction
        self.frame = CameraFrame.from_config(camera)
        self.film_width_mm = camera.film_width_mm
        self.film_height_mm = camera.film_width_mm * height_px / width_px
        self.analytic_weight = np.pi / (4.0 * camera.f_number**2)

    @classmethod
    def from_config(
        cls,
        camera: CameraConfig,
        width_px: int,
        height_px: int,
        grid: WavelengthGrid,
        base_dir: Path | None = None,
        diffraction: bool = True,
    ) -> RenderCamera:
        prescription = None
        if camera.model == "lens":
            path = resolve_data_file(camera.lens_file, "lenses", base_dir)
            prescription = load_lens(path, grid)
        return cls(camera, width_px, height_px, grid, prescription, diffraction)

    @property
    def kind(self) -> str:
        if self.prescription is None:
            return self.camera.model
        return "analytic" if self.prescription.analytic else "lens"

    def film_points(self, rows: np.ndarray, cols: np.ndarray, jx: np.ndarray, jy: np.ndarray) -> np.ndarray:
        """Film positions (mm, x right, y up) of jittered pixel samples."""
        ndc_x = (cols + jx) / self.width * 2.0 - 1.0
        ndc_y = 1.0 - (rows + jy) / self.height * 2.0
        return np.stack([ndc_x * self.film_width_mm / 2.0, ndc_y * self.film_height_mm / 2.0], axis=1)

    def _analytic_rays(self, film: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "pinhole":
            local = pinhole_directions(film, self.camera)
            valid = np.ones(len(film), dtype=bool)
        else:
            focal = self.camera.focal_length_mm if self.prescription is None else self.prescription.focal_length
            local, valid = fisheye_directions(film, focal, self.camera.fov_deg)
        return self.frame.to_world_directions(local), valid

    def generate(
        self, rows: np.ndarray, cols: np.ndarray, sample_index: np.ndarray, spp: int, stream: SampleStream
    ) -> CameraRays:
        """Rays for one (pixel, sample) batch."""
        n = len(rows)
        n_bands = self.grid.n_bands
        film = self.film_points(rows, cols, stream.uniform(DIM_PIXEL_X), stream.uniform(DIM_PIXEL_Y))
        if self.kind != "lens":
            dirs, valid = self._analytic_rays(film)
            weights = np.where(valid[:, None], self.analytic_weight, 0.0) * np.ones((n, n_bands))
            origins = np.broadcast_to(self.frame.origin, (n, 3)).copy()
            return CameraRays(origins, dirs, weights, vignetted=int((~valid).sum()))

        lens = self.prescription
        band = np.floor((sample_index + stream.uniform(DIM_BAND)) / spp * n_bands).astype(np.int64) % n_bands
        wavelengths = self.grid.centers[band]
        a = lens.rear_semi_aperture
        r = a * np.sqrt(stream.uniform(DIM_LENS_U))
        phi = 2.0 * np.pi * stream.uniform(DIM_LENS_V)
        rear = np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)
        # the lens inverts the image, so a film point maps to the opposite side of the scene
        film_lens = -film
        result = trace_through_lens(
            film_lens,
            rear,
            wavelengths,
            lens,
            diffraction=self.diffraction,
            normals=stream.normal_pair(DIM_DIFFRACTION),
        )
        d = lens.film_distance
        cos_t = d / np.sqrt(np.sum((rear - film_lens) ** 2, axis=1) + d * d)
        geometric = np.pi * a * a * cos_t**4 / (d * d) * result.weights
        weights = np.zeros((n, n_bands))
        weights[np.arange(n), band] = geometric * n_bands
        origins = self.frame.origin + self.frame.to_world_directions(result.origins * MM_TO_M)
        dirs = self.frame.to_world_directions(result.directions)
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        return CameraRays(origins, dirs, weights, vignetted=result.vignetted + result.tir, diverged=result.diverged)

    def primary_rays(self, rows: np.ndarray, cols: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Pixel-center rays used for metadata: (origins, directions, valid).

        Lens cameras trace the chief ray through the rear vertex at the
        center wavelength without diffraction. Where that ray is blocked the
        paraxial pinhole ray with the lens focal length stands in.
        """
        n = len(rows)
        film = self.film_points(rows, cols, np.full(n, 0.5), np.full(n, 0.5))
        if self.kind != "lens":
            dirs, valid = self._analytic_rays(film)
            return np.broadcast_to(self.frame.origin, (n, 3)).copy(), dirs, valid
        lens = self.prescription
        center = float(self.grid.centers[self.grid.n_bands // 2])
        result = trace_through_lens(-film, np.zeros((n, 2)), center, lens, diffraction=False)
        origins = self.frame.origin + self.frame.to_world_directions(result.origins * MM_TO_M)
        dirs = self.frame.to_world_directions(result.directions)
        blocked = result.weights == 0
        if blocked.any():
            focal = lens.focal_length or lens.film_distance
            local = np.concatenate([film[blocked], np.full((int(blocked.sum()), 1), focal)], axis=1)
            dirs[blocked] = self.frame.to_world_directions(local)
            origins[blocked] = self.frame.origin
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        return origins, dirs, np.ones(n, dtype=bool)
