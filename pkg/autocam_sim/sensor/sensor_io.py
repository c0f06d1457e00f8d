"""Sensor image files: 16-bit binary PGM plus a JSON provenance sidecar."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
from PIL import Image

from autocam_sim.sensor.pixel_model import SensorImage

logger = logging.getLogger(__name__)


def sidecar_path(path: Path | str) -> Path:
    return Path(path).with_suffix(".json")


def write_sensor_image(image: SensorImage, path: Path | str) -> Path:
    """Write ``<name>.pgm`` and ``<name>.json``; returns the PGM path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(image.dn.astype(np.int32)).save(path, format="PPM")
    tile = image.provenance.get("cfa_tile")
    sidecar = {
        "rows": image.rows,
        "cols": image.cols,
        "cfa_tile": tile,
        "provenance": image.provenance,
    }
    sidecar_path(path).write_text(json.dumps(sidecar, indent=2, sort_keys=True), encoding="utf-8")
    logger.debug(f"Wrote sensor image {path}")
    return path


def read_sensor_image(path: Path | str) -> SensorImage:
    """Read a PGM written by :func:`write_sensor_image` together with its sidecar."""
    path = Path(path)
    with Image.open(path) as im:
        dn = np.asarray(im).astype(np.uint16)
    meta = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
    tile = meta.get("cfa_tile") or [["M", "M"], ["M", "M"]]
    rows, cols = dn.shape
    filter_map = np.tile(np.array(tile, dtype="<U1"), ((rows + 1) // 2, (cols + 1) // 2))[:rows, :cols]
    return SensorImage(dn, filter_map, meta.get("provenance", {}))
