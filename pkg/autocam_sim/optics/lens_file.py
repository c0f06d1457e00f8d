"""Reader for line-oriented lens prescription files.

See ``docs/lens_format.md``. Keyword lines set header fields; every other
non-comment line is one surface, listed rear (film side) to front::

    name wide angle
    focal_length 6.9
    film_distance auto
    # kind      curvature  conic  a4     a6  a8  thickness  semi_aperture  medium
    spherical   0.2083333  0      0      0   0   1.8        1.8            cauchy(1.6,0.0085)
    stop        0          0      0      0   0   1.2        0.9            air
"""

from __future__ import annotations

import logging
import re
from pathlib import Path

import numpy as np

from autocam_sim.errors import LensFormatError
from autocam_sim.optics.paraxial import rear_focal_distance
from autocam_sim.optics.surfaces import LensPrescription, LensSurface, SurfaceKind
from autocam_sim.spectral import DEFAULT_GRID, Spectrum, WavelengthGrid, read_spectrum_csv

logger = logging.getLogger(__name__)

SURFACE_COLUMNS = 9
KEYWORDS = ("name", "focal_length", "film_distance", "analytic")
ANALYTIC_MODELS = ("equidistant",)

_CAUCHY_RE = re.compile(r"^cauchy\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\)$")
_CONSTANT_RE = re.compile(r"^n=(\S+)$")
_TABLE_RE = re.compile(r"^table\((.+)\)$")


def _float(token: str, what: str, line: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise LensFormatError(f"{what} '{token}' is not a number", (line,)) from None
    if not np.isfinite(value):
        raise LensFormatError(f"{what} must be finite", (line,))
    return value


def _pair(token: str, what: str, line: int, biconic: bool) -> tuple[float, float]:
    parts = token.split(",")
    if biconic:
        if len(parts) == 1:
            v = _float(parts[0], what, line)
            return v, v
        if len(parts) == 2:
            return _float(parts[0], what, line), _float(parts[1], what, line)
        raise LensFormatError(f"{what} must be 'x,y' for a biconic surface", (line,))
    if len(parts) != 1:
        raise LensFormatError(f"{what} pairs are only allowed on biconic surfaces", (line,))
    v = _float(parts[0], what, line)
    return v, v


def parse_medium(token: str, grid: WavelengthGrid, line: int, base_dir: Path | None = None) -> Spectrum:
    """Index spectrum for ``air``, ``n=<v>``, ``cauchy(A,B)`` (B in µm²) or ``table(<csv>)``."""
    if token == "air":
        return Spectrum.constant(grid, 1.0)
    if m := _CONSTANT_RE.match(token):
        values = np.full(grid.n_bands, _float(m.group(1), "index", line))
    elif m := _CAUCHY_RE.match(token):
        a = _float(m.group(1), "Cauchy A", line)
        b = _float(m.group(2), "Cauchy B", line)
        lam_um = grid.centers * 1e-3
        values = a + b / lam_um**2
    elif m := _TABLE_RE.match(token):
        path = Path(m.group(1))
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        try:
            values = read_spectrum_csv(path, grid).values
        except (OSError, ValueError) as exc:
            raise LensFormatError(f"cannot read index table {path}: {exc}", (line,)) from exc
    else:
        raise LensFormatError(f"unknown medium '{token}'", (line,))
    if np.any(values < 1.0):
        raise LensFormatError("refractive index must be >= 1 in every band", (line,))
    return Spectrum(grid, values)


def parse_lens(text: str, grid: WavelengthGrid = DEFAULT_GRID, base_dir: Path | None = None) -> LensPrescription:
    """Parse lens file text.

    Args:
        text: Lens file contents.
        grid: Grid on which refractive indices are realized.
        base_dir: Directory for resolving ``table(...)`` references.

    Returns:
        Validated prescription. ``film_distance auto`` places the film at
        the paraxial rear focal point at the grid's central wavelength.

    Raises:
        LensFormatError: with the offending line number(s).
    """
    header: dict[str, str] = {}
    header_lines: dict[str, int] = {}
    surfaces: list[LensSurface] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        fields = content.split()
        key = fields[0].lower()
        if key in KEYWORDS:
            if key in header:
                raise LensFormatError(f"duplicate '{key}' line", (header_lines[key], lineno))
            header[key] = " ".join(fields[1:])
            header_lines[key] = lineno
            continue
        if key == "aperture_stop":
            key = SurfaceKind.APERTURE_STOP.value
        try:
            kind = SurfaceKind(key)
        except ValueError:
            raise LensFormatError(f"unknown surface kind or keyword '{fields[0]}'", (lineno,)) from None
        if len(fields) != SURFACE_COLUMNS:
            raise LensFormatError(
                f"surface line needs {SURFACE_COLUMNS} columns, found {len(fields)}", (lineno,)
            )
        biconic = kind is SurfaceKind.BICONIC
        cx, cy = _pair(fields[1], "curvature", lineno, biconic)
        kx, ky = _pair(fields[2], "conic", lineno, biconic)
        a4 = _float(fields[3], "a4", lineno)
        a6 = _float(fields[4], "a6", lineno)
        a8 = _float(fields[5], "a8", lineno)
        thickness = _float(fields[6], "thickness", lineno)
        semi = _float(fields[7], "semi_aperture", lineno)
        index = parse_medium(fields[8], grid, lineno, base_dir)
        if thickness < 0:
            raise LensFormatError("thickness must be >= 0", (lineno,))
        if semi <= 0:
            raise LensFormatError("semi_aperture must be > 0", (lineno,))
        if kind is SurfaceKind.APERTURE_STOP:
            cx = cy = kx = ky = a4 = a6 = a8 = 0.0
        elif kind is SurfaceKind.SPHERICAL and (kx or a4 or a6 or a8):
            kind = SurfaceKind.ASPHERIC
        surface = LensSurface(kind, cx, cy, kx, ky, a4, a6, a8, thickness, semi, index, lineno)
        if not surface.sag_is_real():
            raise LensFormatError("sag is not real within the semi-aperture ((1+k)c^2 r^2 >= 1)", (lineno,))
        surfaces.append(surface)

    stops = [s.line for s in surfaces if s.is_stop]
    if not stops:
        raise LensFormatError("prescription has no aperture stop")
    if len(stops) > 1:
        raise LensFormatError("multiple aperture stops", tuple(stops))

    analytic = header.get("analytic") or None
    if analytic is not None and analytic not in ANALYTIC_MODELS:
        raise LensFormatError(f"unknown analytic model '{analytic}'", (header_lines["analytic"],))
    focal_length = None
    if "focal_length" in header:
        focal_length = _float(header["focal_length"], "focal_length", header_lines["focal_length"])
    if analytic is not None and focal_length is None:
        raise LensFormatError("analytic lenses need a focal_length line")

    prescription = LensPrescription(
        surfaces=tuple(surfaces),
        film_distance=0.0,
        focal_length=focal_length,
        name=header.get("name", ""),
        analytic=analytic,
        grid=grid,
    )
    film = header.get("film_distance", "auto")
    if film == "auto":
        if analytic is not None:
            film_distance = focal_length
        else:
            center = float(grid.centers[grid.n_bands // 2])
            film_distance = rear_focal_distance(prescription, center)
            if not np.isfinite(film_distance) or film_distance <= 0:
                raise LensFormatError(
                    "film_distance auto needs a lens with positive optical power",
                    (header_lines.get("film_distance", 1),),
                )
    else:
        film_distance = _float(film, "film_distance", header_lines["film_distance"])
        if film_distance <= 0:
            raise LensFormatError("film_distance must be > 0", (header_lines["film_distance"],))

    return LensPrescription(
        surfaces=prescription.surfaces,
        film_distance=float(film_distance),
        focal_length=focal_length,
        name=prescription.name,
        analytic=analytic,
        grid=grid,
    )


def load_lens(path: Path | str, grid: WavelengthGrid = DEFAULT_GRID) -> LensPrescription:
    path = Path(path)
    prescription = parse_lens(path.read_text(encoding="utf-8"), grid, base_dir=path.parent)
    logger.debug(
        f"Loaded lens {path.name}: {len(prescription.surfaces)} surfaces, film at {prescription.film_distance:.4f} mm"
    )
    return prescription
