"""Pixel signal chain: irradiance to photoelectrons, noise, voltage and digital numbers.

Order of operations per pixel: photon shot noise, dark electrons, PRNU
gain, conversion to voltage with saturation at the swing, DSNU offset and
read noise in the voltage domain, then ADC quantization.

Random streams are keyed by (noise_seed, stage[, frame]) so fixed-pattern
maps stay fixed across frames while temporal noise changes per frame.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from autocam_sim.errors import GridMismatchError, SensorSpecError
from autocam_sim.sensor.cfa import CFAPattern, build_cfa
from autocam_sim.sensor.spec import SensorSpec
from autocam_sim.spectral import SpectralImage, Spectrum, photoelectron_weights

logger = logging.getLogger(__name__)

_STAGE_PRNU = 0
_STAGE_DSNU = 1
_STAGE_SHOT = 10
_STAGE_DARK = 11
_STAGE_READ = 12


def _rng(spec: SensorSpec, stage: int, frame_index: int | None = None) -> np.random.Generator:
    key = [spec.noise_seed, stage] if frame_index is None else [spec.noise_seed, stage, frame_index]
    return np.random.default_rng(np.random.SeedSequence(key))


@dataclass(frozen=True)
class SensorResponse:
    """QE and CFA spectra resolved on the sensor's wavelength grid."""

    qe: Spectrum
    cfa: CFAPattern

    @classmethod
    def from_spec(cls, spec: SensorSpec) -> SensorResponse:
        grid = spec.wavelength_grid
        try:
            qe = spec.qe_spectrum()
        except (OSError, ValueError) as exc:
            raise SensorSpecError(f"qe: {exc}") from exc
        return cls(qe, build_cfa(spec.cfa, grid, spec.base_dir))


@dataclass(frozen=True)
class SensorImage:
    """Digital numbers plus the filter over each pixel and where they came from.

    ``electrons`` holds the collected charge after shot, dark and PRNU,
    before conversion to voltage.
    """

    dn: np.ndarray
    filter_map: np.ndarray
    provenance: dict[str, Any] = field(default_factory=dict)
    electrons: np.ndarray | None = None

    @property
    def rows(self) -> int:
        return int(self.dn.shape[0])

    @property
    def cols(self) -> int:
        return int(self.dn.shape[1])


def bin_irradiance(img: SpectralImage, spec: SensorSpec) -> np.ndarray:
    """Average render pixels onto the sensor grid, shape (rows, cols, bands).

    Raises:
        SensorSpecError: when the image size is not an integer multiple of
            the sensor's pixel counts.
    """
    if img.height % spec.rows or img.width % spec.cols:
        raise SensorSpecError(
            f"image {img.width}x{img.height} is not an integer multiple of sensor {spec.cols}x{spec.rows}"
        )
    fy, fx = img.height // spec.rows, img.width // spec.cols
    data = img.data.astype(np.float64)
    if fy == fx == 1:
        return data
    return data.reshape(spec.rows, fy, spec.cols, fx, img.grid.n_bands).mean(axis=(1, 3))


def make_pixel_maps(spec: SensorSpec) -> tuple[np.ndarray, np.ndarray]:
    """PRNU gain map ~ N(1, prnu_sigma) and DSNU offset map ~ N(0, dsnu_sigma) in mV."""
    shape = (spec.rows, spec.cols)
    gain = np.ones(shape)
    offset = np.zeros(shape)
    if spec.prnu_sigma > 0:
        gain = 1.0 + spec.prnu_sigma * _rng(spec, _STAGE_PRNU).standard_normal(shape)
        gain = np.maximum(gain, 0.0)
    if spec.dsnu_sigma_mv > 0:
        offset = spec.dsnu_sigma_mv * _rng(spec, _STAGE_DSNU).standard_normal(shape)
    return gain, offset


def mean_electron_map(binned: np.ndarray, spec: SensorSpec, response: SensorResponse) -> np.ndarray:
    """Expected photoelectrons per pixel before any noise."""
    trans = response.cfa.transmittance_stack(spec.rows, spec.cols)
    weights = photoelectron_weights(
        response.qe.grid, response.qe.values, trans, spec.pixel_area_m2, spec.exposure_s
    )
    return np.sum(binned * weights, axis=2)


def dark_electron_mean(spec: SensorSpec) -> float:
    """Mean dark electrons per pixel: dark rate (mV/s) × exposure / conversion gain (mV/e⁻)."""
    return spec.dark_rate_mv_per_s * spec.exposure_s / spec.conversion_gain_mv


def _sha256(array: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(array).tobytes()).hexdigest()


def simulate(
    img: SpectralImage,
    spec: SensorSpec,
    *,
    frame_index: int = 0,
    response: SensorResponse | None = None,
) -> SensorImage:
    """Digitize a spectral irradiance image with the sensor's full pixel model.

    Args:
        img: irradiance on the sensor plane.
        spec: sensor description.
        frame_index: selects the temporal noise draw; fixed-pattern maps
            do not depend on it.
        response: pre-resolved QE and CFA spectra (resolved from ``spec``
            when omitted).

    Raises:
        GridMismatchError: if the image grid differs from the sensor's.
        SensorSpecError: if the image cannot be binned onto the sensor.
    """
    response = response or SensorResponse.from_spec(spec)
    if img.grid != response.qe.grid:
        raise GridMismatchError(
            f"image grid {img.grid.to_dict()} differs from sensor grid {response.qe.grid.to_dict()}"
        )
    shape = (spec.rows, spec.cols)
    binned = bin_irradiance(img, spec)
    mean_e = mean_electron_map(binned, spec, response)

    electrons = mean_e
    if spec.shot_noise:
        electrons = _rng(spec, _STAGE_SHOT, frame_index).poisson(mean_e).astype(np.float64)
    dark_mean = dark_electron_mean(spec)
    if dark_mean > 0:
        electrons = electrons + _rng(spec, _STAGE_DARK, frame_index).poisson(dark_mean, shape)

    gain, offset = make_pixel_maps(spec)
    electrons = electrons * gain

    voltage = np.minimum(electrons * spec.conversion_gain_mv * spec.analog_gain, spec.voltage_swing_mv)
    voltage = voltage + offset
    if spec.read_noise_mv > 0:
        voltage = voltage + spec.read_noise_mv * _rng(spec, _STAGE_READ, frame_index).standard_normal(shape)

    dn = np.clip(np.round(voltage / spec.voltage_swing_mv * spec.max_dn), 0, spec.max_dn).astype(np.uint16)
    saturated = int((dn == spec.max_dn).sum())
    if saturated:
        logger.debug(f"{spec.name}: {saturated} saturated pixels")

    provenance = {
        "sensor": spec.name,
        "spec_sha256": spec.spec_hash(),
        "source_sha256": _sha256(img.data),
        "noise_seed": spec.noise_seed,
        "frame_index": frame_index,
        "exposure_s": spec.exposure_s,
        "adc_bits": spec.adc_bits,
        "cfa_tile": [list(row) for row in response.cfa.tile],
    }
    return SensorImage(dn, response.cfa.filter_map(*shape), provenance, electrons)


def photon_transfer(frames: list[np.ndarray]) -> tuple[float, float]:
    """Mean signal and mean per-pixel temporal variance over a frame sequence."""
    stack = np.stack([np.asarray(f, dtype=np.float64) for f in frames])
    if stack.shape[0] < 2:
        raise ValueError("photon transfer needs at least two frames")
    return float(stack.mean()), float(stack.var(axis=0, ddof=1).mean())


def photon_transfer_slope(means: list[float], variances: list[float]) -> float:
    """Slope of log(variance) against log(mean)."""
    return float(np.polyfit(np.log(means), np.log(variances), 1)[0])
