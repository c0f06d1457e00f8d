"""Sky lighting: a uniform spectrum or an equirectangular spectral map.

Map rows run from the zenith (theta = 0, +z) to the nadir; columns cover
azimuth phi = atan2(y, x) from -pi to pi.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from autocam_sim.models import LightingConfig
from autocam_sim.render.materials import cosine_hemisphere
from autocam_sim.sceneformat.asset_store import AssetStore
from autocam_sim.sceneformat.spectral_container import read_spectral_image
from autocam_sim.spectral import Spectrum, WavelengthGrid, resample

logger = logging.getLogger(__name__)

BUILTIN_UNIFORM = "builtin:uniform"
BUILTIN_CLEAR_DAY = "builtin:clear_day"
_CLEAR_DAY_SIZE = (64, 128)
_SUN_DIRECTION = np.array([0.5, 0.5, np.sqrt(0.5)])
_SUN_RADIUS_RAD = np.radians(2.0)


@dataclass
class EnvironmentLight:
    """Radiance in W·m⁻²·sr⁻¹·nm⁻¹; exactly one of ``uniform`` and ``map`` is set."""

    grid: WavelengthGrid
    uniform: np.ndarray | None = None  # (B,)
    map: np.ndarray | None = None  # (H, W, B)
    scale: float = 1.0
    _cdf_rows: np.ndarray | None = field(default=None, repr=False)
    _cdf_cols: np.ndarray | None = field(default=None, repr=False)
    _pixel_prob: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if (self.uniform is None) == (self.map is None):
            raise ValueError("environment needs exactly one of a uniform spectrum or a map")
        source = self.uniform if self.uniform is not None else self.map
        if np.any(source < 0) or not np.all(np.isfinite(source)):
            raise ValueError("environment radiance must be finite and non-negative")
        if self.map is not None:
            self._build_distribution()

    @classmethod
    def uniform_sky(cls, spectrum: Spectrum, scale: float = 1.0) -> EnvironmentLight:
        return cls(spectrum.grid, uniform=np.array(spectrum.values), scale=scale)

    def _build_distribution(self) -> None:
        h, w, _ = self.map.shape
        theta = (np.arange(h) + 0.5) / h * np.pi
        weight = self.map.mean(axis=2) * np.sin(theta)[:, None]
        total = weight.sum()
        if total <= 0:
            weight = np.broadcast_to(np.sin(theta)[:, None], (h, w)).copy()
            total = weight.sum()
        prob = weight / total
        row_prob = prob.sum(axis=1)
        self._cdf_rows = np.cumsum(row_prob)
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = np.where(row_prob[:, None] > 0, prob / row_prob[:, None], 1.0 / w)
        self._cdf_cols = np.cumsum(cond, axis=1)
        self._pixel_prob = prob

    def _pixel_of(self, directions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        h, w, _ = self.map.shape
        theta = np.arccos(np.clip(directions[:, 2], -1.0, 1.0))
        phi = np.arctan2(directions[:, 1], directions[:, 0])
        row = np.clip((theta / np.pi * h).astype(np.int64), 0, h - 1)
        col = np.clip(((phi + np.pi) / (2 * np.pi) * w).astype(np.int64), 0, w - 1)
        return row, col

    def radiance(self, directions: np.ndarray) -> np.ndarray:
        """(N, B) radiance arriving from each unit direction."""
        if self.uniform is not None:
            return np.broadcast_to(self.uniform * self.scale, (len(directions), self.grid.n_bands)).copy()
        row, col = self._pixel_of(directions)
        return self.map[row, col] * self.scale

    def sample(self, normals: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Directions toward the sky and their solid-angle pdf.

        The uniform sky is sampled cosine-weighted about ``normals``; maps
        are sampled in proportion to pixel luminance times solid angle.
        """
        if self.uniform is not None:
            dirs = cosine_hemisphere(normals, u[:, 0], u[:, 1])
            return dirs, np.einsum("ij,ij->i", dirs, normals) / np.pi
        h, w, _ = self.map.shape
        row, fu = _invert_cdf(self._cdf_rows[None, :].repeat(len(u), axis=0), u[:, 0])
        col, fv = _invert_cdf(self._cdf_cols[row], u[:, 1])
        theta = (row + fu) / h * np.pi
        phi = (col + fv) / w * 2.0 * np.pi - np.pi
        sin_t = np.sin(theta)
        dirs = np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), np.cos(theta)], axis=1)
        with np.errstate(divide="ignore"):
            pdf = self._pixel_prob[row, col] * w * h / (2.0 * np.pi**2 * sin_t)
        return dirs, np.where(sin_t > 0, pdf, 0.0)


def _invert_cdf(cdf: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index and fractional position inside the bin for each row of ``cdf`` (N, K)."""
    k = cdf.shape[1]
    target = u * cdf[:, -1]
    idx = np.minimum((cdf <= target[:, None]).sum(axis=1), k - 1)
    lo = np.where(idx > 0, cdf[np.arange(len(idx)), idx - 1], 0.0)
    width = cdf[np.arange(len(idx)), idx] - lo
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(width > 0, (target - lo) / width, 0.5)
    return idx, np.clip(frac, 0.0, 1.0 - 1e-12)


def clear_day_map(grid: WavelengthGrid, radiance: float, size: tuple[int, int] = _CLEAR_DAY_SIZE) -> np.ndarray:
    """Analytic sky: bluish dome brightening toward the horizon, a sun disk, dim ground."""
    h, w = size
    theta = (np.arange(h) + 0.5) / h * np.pi
    phi = (np.arange(w) + 0.5) / w * 2.0 * np.pi - np.pi
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    dirs = np.stack([np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1)
    z = dirs[..., 2]
    blue = (grid.centers / 550.0) ** -4.0
    blue /= blue.mean()
    sky = (1.0 + (1.0 - np.clip(z, 0.0, 1.0)))[..., None] * blue
    ground = np.full(grid.n_bands, 0.2)
    out = np.where((z > 0)[..., None], sky, ground)
    sun = np.arccos(np.clip(dirs @ _SUN_DIRECTION, -1.0, 1.0)) < _SUN_RADIUS_RAD
    out[sun] = 200.0
    return out * radiance


def load_environment(
    lighting: LightingConfig, grid: WavelengthGrid, store: AssetStore | None = None
) -> EnvironmentLight:
    """Resolve a recipe's lighting block.

    Raises:
        FileNotFoundError: when a map reference does not resolve in ``store``.
    """
    ref = lighting.sky_map
    if ref == BUILTIN_UNIFORM:
        return EnvironmentLight.uniform_sky(Spectrum.constant(grid, lighting.sky_radiance), lighting.sky_scale)
    if ref == BUILTIN_CLEAR_DAY:
        return EnvironmentLight(grid, map=clear_day_map(grid, lighting.sky_radiance), scale=lighting.sky_scale)
    if store is None:
        raise FileNotFoundError(f"sky map '{ref}' needs an asset store to resolve")
    img = read_spectral_image(store.resolve(ref))
    data = img.data.astype(np.float64)
    if img.grid != grid:
        logger.info(f"Resampling sky map {ref} onto the render grid")
        data = np.stack(
            [resample(Spectrum(img.grid, px), grid).values for px in data.reshape(-1, img.grid.n_bands)]
        ).reshape(img.height, img.width, grid.n_bands)
    return EnvironmentLight(grid, map=data, scale=lighting.sky_scale)
