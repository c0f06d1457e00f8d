"""Binary container for spectral irradiance images.

Layout (little-endian):

    b"SPIM" | uint32 header length | UTF-8 JSON header | float32 planes

The JSON header records dimensions, the wavelength grid, band centers,
units and a plane table with byte offsets relative to the start of the
payload. Irradiance is stored band-major (one height × width plane per
band). Metadata planes (depth, class_id, instance_id) follow as float32;
ids are integers below 2**24 and therefore round-trip exactly.
"""

from __future__ import annotations

import json
import logging
import struct
from pathlib import Path
from typing import Any

import numpy as np

from autocam_sim.errors import SpectralContainerError
from autocam_sim.spectral import SpectralImage, WavelengthGrid

logger = logging.getLogger(__name__)

MAGIC = b"SPIM"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sI")
_METADATA_PLANES = ("depth", "class_id", "instance_id")
_UNITS = {
    "irradiance": "W m-2 nm-1",
    "depth": "m",
    "class_id": "class id",
    "instance_id": "instance id",
    "wavelength": "nm",
}


def write_spectral_image(img: SpectralImage, path: Path | str) -> Path:
    """Write ``img`` to ``path`` and return the path."""
    path = Path(path)
    plane_bytes = img.width * img.height * 4
    planes: list[dict[str, Any]] = []
    chunks: list[bytes] = []
    offset = 0

    cube = np.ascontiguousarray(img.data.transpose(2, 0, 1), dtype="<f4")
    for band in range(img.grid.n_bands):
        chunks.append(cube[band].tobytes())
        planes.append({"name": f"band_{band}", "offset": offset, "length": plane_bytes})
        offset += plane_bytes

    if img.has_metadata:
        for name in _METADATA_PLANES:
            chunks.append(np.asarray(getattr(img, name), dtype="<f4").tobytes())
            planes.append({"name": name, "offset": offset, "length": plane_bytes})
            offset += plane_bytes

    header = {
        "format": "SPIM",
        "version": FORMAT_VERSION,
        "width": img.width,
        "height": img.height,
        "grid": img.grid.to_dict(),
        "band_centers_nm": [float(c) for c in img.grid.centers],
        "dtype": "float32",
        "byte_order": "little",
        "units": _UNITS,
        "planes": planes,
        "attributes": img.attributes,
    }
    header_bytes = json.dumps(header, sort_keys=True, indent=1).encode("utf-8")

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(_PREFIX.pack(MAGIC, len(header_bytes)))
        f.write(header_bytes)
        for chunk in chunks:
            f.write(chunk)
    logger.debug(f"Wrote spectral image {path} ({img.width}x{img.height}, {img.grid.n_bands} bands)")
    return path


def read_spectral_header(raw: bytes) -> tuple[dict[str, Any], int]:
    """Parse the prefix and JSON header; returns (header, payload start)."""
    if len(raw) < _PREFIX.size:
        raise SpectralContainerError("file too short for a spectral container")
    magic, header_len = _PREFIX.unpack_from(raw, 0)
    if magic != MAGIC:
        raise SpectralContainerError(f"bad magic {magic!r}, expected {MAGIC!r}")
    start = _PREFIX.size + header_len
    if len(raw) < start:
        raise SpectralContainerError("truncated header")
    try:
        width = int(header["width"])
        height = int(header["height"])
        grid = WavelengthGrid.from_dict(header["grid"])
        planes = {p["name"]: (int(p["offset"]), int(p["length"])) for p in header["planes"]}
        attributes = dict(header.get("attributes") or {})
    except (KeyError, TypeError, ValueError, OverflowError) as exc:
        raise SpectralContainerError(f"incomplete header: {exc}") from exc

    if width <= 0 or height <= 0:
        raise SpectralContainerError(f"image dimensions must be positive, got {width}x{height}")
    n_band_planes = sum(1 for name in planes if isinstance(name, str) and name.startswith("band_"))
    if n_band_planes != grid.n_bands:
        raise SpectralContainerError(
            f"grid declares {grid.n_bands} bands but the plane table holds {n_band_planes}"
        )

    plane_bytes = width * height * 4
    expected = sum(length for _, length in planes.values())
    if len(payload) < expected:
        raise SpectralContainerError(
            f"truncated payload: header declares {expected} bytes, file holds {len(payload)}"
        )
    if len(payload) > expected:
        raise SpectralContainerError(
            f"header/payload size mismatch: {len(payload) - expected} unexpected trailing bytes"
        )

    def plane(name: str) -> np.ndarray:
        offset, length = planes[name]
        if offset < 0 or length != plane_bytes or offset + length > len(payload):
            raise SpectralContainerError(f"header/payload size mismatch in plane '{name}'")
        try:
            values = np.frombuffer(payload, dtype="<f4", count=width * height, offset=offset)
            return values.reshape(height, width)
        except ValueError as exc:
            raise SpectralContainerError(f"unreadable plane '{name}': {exc}") from exc

    try:
        data = np.stack([plane(f"band_{b}") for b in range(grid.n_bands)], axis=-1)
    except KeyError as exc:
        raise SpectralContainerError(f"missing irradiance plane {exc}") from exc

    meta: dict[str, np.ndarray | None] = {name: None for name in _METADATA_PLANES}
    if all(name in planes for name in _METADATA_PLANES):
        meta["depth"] = plane("depth").astype(np.float32)
        with np.errstate(invalid="ignore"):
            meta["class_id"] = plane("class_id").astype(np.int32)
            meta["instance_id"] = plane("instance_id").astype(np.int32)

    try:
        return SpectralImage(
            width=width,
            height=height,
            grid=grid,
            data=data.astype(np.float32),
            attributes=attributes,
            **meta,
        )
    except (TypeError, ValueError) as exc:
        raise SpectralContainerError(str(exc)) from exc
