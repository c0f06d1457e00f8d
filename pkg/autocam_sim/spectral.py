"""Wavelength grids, spectra and radiometric conversions.

All physics modules share these types. Wavelengths are in nanometres,
irradiance in W·m⁻²·nm⁻¹, reflectance/QE/transmittance dimensionless.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np

from autocam_sim.errors import GridMismatchError

# Planck constant times speed of light, J·m.
HC = 1.98645e-25


@dataclass(frozen=True)
class WavelengthGrid:
    """Uniform band grid; band centers are the midpoints of equal-width bands."""

    lambda_min: float = 395.0
    lambda_max: float = 705.0
    n_bands: int = 31

    def __post_init__(self) -> None:
        if not self.lambda_min < self.lambda_max:
            raise ValueError(
                f"lambda_min ({self.lambda_min}) must be below lambda_max ({self.lambda_max})"
            )
        if self.n_bands < 1:
            raise ValueError(f"n_bands must be >= 1, got {self.n_bands}")

    @property
    def band_width(self) -> float:
        """Width of every band in nm."""
        return (self.lambda_max - self.lambda_min) / self.n_bands

    @cached_property
    def centers(self) -> np.ndarray:
        """Band centers in nm, strictly increasing."""
        centers = self.lambda_min + (np.arange(self.n_bands) + 0.5) * self.band_width
        centers.setflags(write=False)
        return centers

    def to_dict(self) -> dict[str, Any]:
        return {"lambda_min": self.lambda_min, "lambda_max": self.lambda_max, "n_bands": self.n_bands}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> WavelengthGrid:
        return cls(float(data["lambda_min"]), float(data["lambda_max"]), int(data["n_bands"]))


# 400-700 nm at 10 nm spacing.
DEFAULT_GRID = WavelengthGrid()


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Non-negative samples on a wavelength grid."""

    grid: WavelengthGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.shape[0] != self.grid.n_bands:
            raise ValueError(
                f"spectrum has {values.shape[0]} samples but grid has {self.grid.n_bands} bands"
            )
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("spectrum values must be finite and non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Spectrum):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash((self.grid, self.values.tobytes()))

    @classmethod
    def constant(cls, grid: WavelengthGrid, value: float) -> Spectrum:
        return cls(grid, np.full(grid.n_bands, float(value)))

    @classmethod
    def from_samples(
        cls, wavelengths: Any, values: Any, grid: WavelengthGrid = DEFAULT_GRID
    ) -> Spectrum:
        """Build a spectrum from (wavelength, value) samples by linear interpolation.

        Samples outside the sampled range clamp to the nearest endpoint value.
        """
        wl = np.asarray(wavelengths, dtype=np.float64).reshape(-1)
        vals = np.asarray(values, dtype=np.float64).reshape(-1)
        if wl.shape != vals.shape or wl.size == 0:
            raise ValueError("wavelengths and values must be non-empty and the same length")
        order = np.argsort(wl, kind="stable")
        return cls(grid, np.interp(grid.centers, wl[order], vals[order]))

    def validate_unit_range(self, what: str = "spectrum") -> Spectrum:
        """Raise if any sample lies outside [0, 1]; returns self for chaining."""
        if np.any(self.values > 1.0):
            raise ValueError(f"{what} must lie in [0, 1] in every band")
        return self

    def at(self, wavelength_nm: Any) -> np.ndarray:
        """Piecewise-linear evaluation at arbitrary wavelengths, clamped at the ends."""
        return np.interp(np.asarray(wavelength_nm, dtype=np.float64), self.grid.centers, self.values)


@dataclass(frozen=True, eq=False)
class SpectralImage:
    """Sensor-plane irradiance stack with optional aligned metadata planes.

    ``data`` has shape (height, width, n_bands); metadata planes are
    (height, width). A depth of 0 marks a primary-ray miss.
    """

    width: int
    height: int
    grid: WavelengthGrid
    data: np.ndarray
    depth: np.ndarray | None = None
    class_id: np.ndarray | None = None
    instance_id: np.ndarray | None = None
    attributes: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float32)
        if data.shape != (self.height, self.width, self.grid.n_bands):
            raise ValueError(
                f"irradiance shape {data.shape} does not match "
                f"{(self.height, self.width, self.grid.n_bands)}"
            )
        if not np.all(np.isfinite(data)) or np.any(data < 0):
            raise ValueError("irradiance must be finite and non-negative")
        object.__setattr__(self, "data", data)
        for name, dtype in (("depth", np.float32), ("class_id", np.int32), ("instance_id", np.int32)):
            plane = getattr(self, name)
            if plane is None:
                continue
            plane = np.asarray(plane, dtype=dtype)
            if plane.shape != (self.height, self.width):
                raise ValueError(f"{name} plane shape {plane.shape} != {(self.height, self.width)}")
            object.__setattr__(self, name, plane)

    @property
    def has_metadata(self) -> bool:
        return self.depth is not None and self.class_id is not None and self.instance_id is not None


def resample(s: Spectrum, target: WavelengthGrid) -> Spectrum:
    """Piecewise-linear interpolation of ``s`` onto ``target`` band centers."""
    if s.grid == target:
        return s
    return Spectrum(target, np.interp(target.centers, s.grid.centers, s.values))


def photoelectron_weights(
    grid: WavelengthGrid,
    qe: np.ndarray,
    cfa_transmittance: np.ndarray,
    pixel_area: float,
    exposure: float,
) -> np.ndarray:
    """Per-band electrons per unit irradiance (W·m⁻²·nm⁻¹).

    ``qe`` and ``cfa_transmittance`` broadcast against the band axis, so a
    (rows, cols, bands) transmittance stack yields per-pixel weights.
    """
    lam_m = grid.centers * 1e-9
    return grid.band_width * pixel_area * exposure * (lam_m / HC) * qe * cfa_transmittance


def mean_photoelectrons(
    E: Spectrum,
    pixel_area: float,
    exposure: float,
    qe: Spectrum,
    cfa_transmittance: Spectrum,
) -> float:
    """Mean photoelectrons collected by one pixel (rectangle rule over bands)."""
    if not (E.grid == qe.grid == cfa_transmittance.grid):
        raise GridMismatchError(
            "irradiance, QE and CFA transmittance must share a wavelength grid; resample first"
        )
    weights = photoelectron_weights(E.grid, qe.values, cfa_transmittance.values, pixel_area, exposure)
    return float(np.dot(E.values, weights))


# Preview weight tables: Gaussian lobes (center nm, width nm) sampled at 10 nm
# from 400 to 700 nm. Non-colorimetric; previews only.
_PREVIEW_LOBES = {"r": (605.0, 40.0), "g": (545.0, 40.0), "b": (450.0, 30.0)}
_PREVIEW_NODES = np.arange(400.0, 701.0, 10.0)
PREVIEW_TABLES = {
    name: np.exp(-0.5 * ((_PREVIEW_NODES - mu) / sigma) ** 2) for name, (mu, sigma) in _PREVIEW_LOBES.items()
}


def _preview_matrix(grid: WavelengthGrid) -> np.ndarray:
    """(n_bands, 3) weights, each column summing to one on ``grid``."""
    columns = []
    for name in ("r", "g", "b"):
        w = np.interp(grid.centers, _PREVIEW_NODES, PREVIEW_TABLES[name])
        total = w.sum()
        columns.append(w / total if total > 0 else w)
    return np.stack(columns, axis=1)


def spectrum_to_preview_rgb(s: Spectrum) -> tuple[float, float, float]:
    """Preview color of a spectrum; an equal-energy spectrum maps to gray."""
    rgb = np.clip(s.values @ _preview_matrix(s.grid), 0.0, 1.0)
    return float(rgb[0]), float(rgb[1]), float(rgb[2])


def spectral_image_to_preview_rgb(img: SpectralImage, scale: float = 1.0) -> np.ndarray:
    """Linear preview RGB in [0, 1] for every pixel, after multiplying by ``scale``."""
    rgb = img.data.astype(np.float64) @ _preview_matrix(img.grid)
    return np.clip(rgb * scale, 0.0, 1.0)


def read_spectrum_csv(path: Path | str, grid: WavelengthGrid = DEFAULT_GRID) -> Spectrum:
    """Load ``wavelength_nm,value`` rows (header and ``#`` comments skipped) onto ``grid``.

    Raises:
        ValueError: if the file holds no numeric rows.
    """
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = [r for r in csv.reader(f) if r and not r[0].lstrip().startswith("#")]
    data = []
    for row in rows:
        try:
            data.append((float(row[0]), float(row[1])))
        except (ValueError, IndexError):
            continue
    if not data:
        raise ValueError(f"no spectral samples in {path}")
    wl, values = zip(*data)
    return Spectrum.from_samples(wl, values, grid)
