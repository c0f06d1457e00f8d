"""Sensor pixel model: photoelectrons, noise, CFA mosaics and ADC."""

from autocam_sim.sensor.cfa import PRESETS, CFAPattern, build_cfa, cfa_filter_at
from autocam_sim.sensor.pixel_model import (
    SensorImage,
    SensorResponse,
    bin_irradiance,
    make_pixel_maps,
    photon_transfer,
    simulate,
)
from autocam_sim.sensor.sensor_io import read_sensor_image, write_sensor_image
from autocam_sim.sensor.spec import SensorSpec, load_sensor_spec, parse_sensor_spec

__all__ = [
    "PRESETS",
    "CFAPattern",
    "SensorImage",
    "SensorResponse",
    "SensorSpec",
    "bin_irradiance",
    "build_cfa",
    "cfa_filter_at",
    "load_sensor_spec",
    "make_pixel_maps",
    "parse_sensor_spec",
    "photon_transfer",
    "read_sensor_image",
    "simulate",
    "write_sensor_image",
]
