"""8-bit preview PNG of a spectral image."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from PIL import Image

from autocam_sim.spectral import SpectralImage, spectral_image_to_preview_rgb

logger = logging.getLogger(__name__)

GAMMA = 1.0 / 2.2
AUTO_PERCENTILE = 99.0


def auto_preview_scale(img: SpectralImage) -> float:
    """Scale that maps the 99th percentile of band-mean irradiance to 1."""
    level = float(np.percentile(img.data.mean(axis=2), AUTO_PERCENTILE))
    return 1.0 / level if level > 0 else 1.0


def preview_rgb8(img: SpectralImage, scale: float) -> np.ndarray:
    rgb = spectral_image_to_preview_rgb(img, scale)
    return np.round(255.0 * rgb**GAMMA).astype(np.uint8)


def write_preview(img: SpectralImage, path: Path | str, scale: float | None = None) -> float:
    """Write a gamma-encoded PNG and return the tone scale used.

    The scale is stored in ``img.attributes["preview_scale"]`` so that the
    container written afterwards records it.
    """
    path = Path(path)
    scale = auto_preview_scale(img) if scale is None else float(scale)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(preview_rgb8(img, scale)).save(path, format="PNG")
    img.attributes["preview_scale"] = scale
    logger.debug(f"Wrote preview {path.name} at scale {scale:.4g}")
    return scale
