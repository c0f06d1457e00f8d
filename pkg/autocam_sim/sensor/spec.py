"""Sensor specification documents (JSON) and their resolved spectra."""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

from pydantic import Field, PrivateAttr, ValidationError, model_validator

from autocam_sim.errors import SensorSpecError
from autocam_sim.models import GridSpec, StrictModel
from autocam_sim.sceneformat.recipe_io import validation_error_path
from autocam_sim.spectral import Spectrum, WavelengthGrid, read_spectrum_csv
from autocam_sim.utils.paths import resolve_data_file

logger = logging.getLogger(__name__)

# Allowed mismatch between pitch × pixel count and the declared active area.
ACTIVE_AREA_TOLERANCE = 0.005


class SpectrumSource(StrictModel):
    """One of: a constant, a CSV file (``wavelength_nm,value``), or inline samples."""

    constant: float | None = Field(default=None, ge=0)
    file: str | None = None
    wavelengths: list[float] | None = None
    values: list[float] | None = None

    @model_validator(mode="after")
    def _one_source(self) -> SpectrumSource:
        given = [self.constant is not None, self.file is not None, self.wavelengths is not None]
        if sum(given) != 1:
            raise ValueError("give exactly one of constant, file or wavelengths/values")
        if (self.wavelengths is None) != (self.values is None):
            raise ValueError("wavelengths and values go together")
        return self

    def to_spectrum(self, grid: WavelengthGrid, base_dir: Path | None = None) -> Spectrum:
        if self.constant is not None:
            return Spectrum.constant(grid, self.constant)
        if self.file is not None:
            return read_spectrum_csv(resolve_data_file(self.file, "filters", base_dir), grid)
        return Spectrum.from_samples(self.wavelengths, self.values, grid)


class CFASpec(StrictModel):
    """A named preset (``rggb``, ``rccc``, ``rgbw``, ``mono``) or an explicit 2×2 tile."""

    pattern: str | None = "rggb"
    tile: tuple[tuple[str, str], tuple[str, str]] | None = None
    transmittance: dict[str, SpectrumSource] = Field(default_factory=dict)


class SensorSpec(StrictModel):
    """Pixel array, signal chain and noise parameters.

    Units follow the data sheet: pitch in µm, conversion gain in µV per
    electron, swing, dark rate, read noise and DSNU in mV.
    """

    name: str = "sensor"
    pixel_pitch_um: float = Field(gt=0)
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    exposure_s: float = Field(default=0.01, gt=0)
    qe: SpectrumSource = Field(default_factory=lambda: SpectrumSource(constant=0.5))
    cfa: CFASpec = Field(default_factory=CFASpec)
    conversion_gain_uv: float = Field(default=100.0, gt=0)
    voltage_swing_mv: float = Field(default=1000.0, gt=0)
    dark_rate_mv_per_s: float = Field(default=1.0, ge=0)
    read_noise_mv: float = Field(default=1.0, ge=0)
    prnu_sigma: float = Field(default=0.005, ge=0)
    dsnu_sigma_mv: float = Field(default=0.5, ge=0)
    adc_bits: int = Field(default=12, ge=8, le=16)
    analog_gain: float = Field(default=1.0, gt=0)
    noise_seed: int = Field(default=0, ge=0, lt=2**64)
    shot_noise: bool = True
    grid: GridSpec = Field(default_factory=GridSpec)
    active_width_mm: float | None = Field(default=None, gt=0)
    active_height_mm: float | None = Field(default=None, gt=0)
    frame_rate_fps: float | None = Field(default=None, gt=0)
    optical_format: str | None = None

    _base_dir: Path | None = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _active_area(self) -> SensorSpec:
        for extent, count, label in (
            (self.active_width_mm, self.cols, "width"),
            (self.active_height_mm, self.rows, "height"),
        ):
            if extent is None:
                continue
            derived = self.pixel_pitch_um * 1e-3 * count
            if abs(derived - extent) > ACTIVE_AREA_TOLERANCE * extent:
                raise ValueError(
                    f"pitch × pixels gives active {label} {derived:.4f} mm, declared {extent} mm"
                )
        return self

    @property
    def pixel_area_m2(self) -> float:
        return (self.pixel_pitch_um * 1e-6) ** 2

    @property
    def conversion_gain_mv(self) -> float:
        return self.conversion_gain_uv * 1e-3

    @property
    def max_dn(self) -> int:
        return 2**self.adc_bits - 1

    @property
    def wavelength_grid(self) -> WavelengthGrid:
        return self.grid.to_grid()

    @property
    def base_dir(self) -> Path | None:
        return self._base_dir

    def with_base_dir(self, base_dir: Path | None) -> SensorSpec:
        self._base_dir = base_dir
        return self

    def qe_spectrum(self) -> Spectrum:
        qe = self.qe.to_spectrum(self.wavelength_grid, self._base_dir)
        return qe.validate_unit_range("qe")

    def spec_hash(self) -> str:
        """Content hash of the spec (sorted JSON)."""
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()


def parse_sensor_spec(data: dict, base_dir: Path | None = None) -> SensorSpec:
    """Validate a sensor spec document.

    Raises:
        SensorSpecError: naming the offending field.
    """
    try:
        spec = SensorSpec.model_validate(data)
    except ValidationError as exc:
        field_path, message = validation_error_path(exc)
        raise SensorSpecError(f"invalid sensor spec at '{field_path}': {message}") from exc
    return spec.with_base_dir(base_dir)


def load_sensor_spec(reference: Path | str, base_dir: Path | None = None) -> SensorSpec:
    """Load a sensor spec JSON by path or bundled name (``sensorA.json``)."""
    path = resolve_data_file(reference, "sensors", base_dir)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SensorSpecError(f"{path.name}: not valid JSON: {exc}") from exc
    spec = parse_sensor_spec(data, path.parent)
    logger.debug(f"Loaded sensor {spec.name}: {spec.cols}x{spec.rows} at {spec.pixel_pitch_um} µm")
    return spec
