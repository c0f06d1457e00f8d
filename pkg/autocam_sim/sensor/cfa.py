"""Color filter arrays: 2×2 tiles of named filters with transmittance spectra."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from autocam_sim.errors import SensorSpecError
from autocam_sim.sensor.spec import CFASpec, SpectrumSource
from autocam_sim.spectral import Spectrum, WavelengthGrid

FILTER_NAMES = ("R", "G", "B", "C", "W", "M")

# "RGGGB" and "RRGB" in some data sheets denote the Bayer tile.
PRESETS: dict[str, tuple[tuple[str, str], tuple[str, str]]] = {
    "rggb": (("R", "G"), ("G", "B")),
    "rccc": (("R", "C"), ("C", "C")),
    "rgbw": (("R", "G"), ("B", "W")),
    "mono": (("M", "M"), ("M", "M")),
}

DEFAULT_TRANSMITTANCE: dict[str, SpectrumSource] = {
    "R": SpectrumSource(file="red.csv"),
    "G": SpectrumSource(file="green.csv"),
    "B": SpectrumSource(file="blue.csv"),
    "C": SpectrumSource(constant=1.0),
    "W": SpectrumSource(constant=1.0),
    "M": SpectrumSource(constant=1.0),
}


@dataclass(frozen=True)
class CFAPattern:
    """``tile[y % 2][x % 2]`` names the filter over pixel (x, y)."""

    tile: tuple[tuple[str, str], tuple[str, str]]
    transmittance: dict[str, Spectrum]

    def __post_init__(self) -> None:
        names = [n for row in self.tile for n in row]
        if len(self.tile) != 2 or any(len(row) != 2 for row in self.tile):
            raise SensorSpecError("CFA tile must be 2×2")
        for name in names:
            if name not in FILTER_NAMES:
                raise SensorSpecError(f"unknown CFA filter '{name}' (expected one of {', '.join(FILTER_NAMES)})")
            if name not in self.transmittance:
                raise SensorSpecError(f"no transmittance for CFA filter '{name}'")
        for name, spectrum in self.transmittance.items():
            try:
                spectrum.validate_unit_range(f"transmittance of {name}")
            except ValueError as exc:
                raise SensorSpecError(str(exc)) from exc

    @property
    def grid(self) -> WavelengthGrid:
        return next(iter(self.transmittance.values())).grid

    def filter_at(self, x: int, y: int) -> str:
        return self.tile[y % 2][x % 2]

    def filter_map(self, rows: int, cols: int) -> np.ndarray:
        """(rows, cols) array of filter names."""
        tile = np.array(self.tile, dtype="<U1")
        return np.tile(tile, ((rows + 1) // 2, (cols + 1) // 2))[:rows, :cols]

    def transmittance_stack(self, rows: int, cols: int) -> np.ndarray:
        """(rows, cols, bands) transmittance of the filter over each pixel."""
        names = self.filter_map(rows, cols)
        out = np.empty((rows, cols, self.grid.n_bands))
        for name in set(names.reshape(-1)):
            out[names == name] = self.transmittance[name].values
        return out


def cfa_filter_at(cfa: CFAPattern, x: int, y: int) -> str:
    if x < 0 or y < 0:
        raise ValueError("pixel coordinates must be non-negative")
    return cfa.filter_at(x, y)


def build_cfa(spec: CFASpec, grid: WavelengthGrid, base_dir: Path | None = None) -> CFAPattern:
    """Resolve a CFA spec: preset or explicit tile, bundled or overridden transmittances."""
    if spec.tile is not None:
        tile = tuple(tuple(row) for row in spec.tile)
    else:
        key = (spec.pattern or "").lower()
        if key not in PRESETS:
            raise SensorSpecError(f"unknown CFA pattern '{spec.pattern}' (presets: {', '.join(PRESETS)})")
        tile = PRESETS[key]
    used = {n for row in tile for n in row}
    transmittance = {}
    for name in sorted(used):
        source = spec.transmittance.get(name, DEFAULT_TRANSMITTANCE.get(name))
        if source is None:
            raise SensorSpecError(f"no transmittance for CFA filter '{name}'")
        try:
            transmittance[name] = source.to_spectrum(grid, base_dir)
        except (OSError, ValueError) as exc:
            raise SensorSpecError(f"transmittance of {name}: {exc}") from exc
    return CFAPattern(tile, transmittance)
