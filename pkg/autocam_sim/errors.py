"""Exception types raised across the simulation pipeline."""

from __future__ import annotations


class SimulationError(Exception):
    """Base class for every error the pipeline reports to callers."""


class ConfigError(SimulationError):
    """Invalid or unreadable pipeline/road/traffic configuration."""

    def __init__(self, message: str, field_path: str = ""):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}" if field_path else message)


class AssetParseError(SimulationError):
    """Syntax or validation error in an asset description."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        self.reason = message
        super().__init__(f"line {line}, column {column}: {message}")


class RecipeError(SimulationError):
    """Scene recipe schema violation or unresolvable reference."""

    def __init__(self, message: str, field_path: str = "", asset_id: str | None = None):
        self.field_path = field_path
        self.asset_id = asset_id
        super().__init__(f"{field_path}: {message}" if field_path else message)


class SpectralContainerError(SimulationError):
    """Malformed, truncated or unsupported spectral image container."""


class GridMismatchError(SimulationError):
    """Spectra on different wavelength grids; the caller must resample first."""


class LensFormatError(SimulationError):
    """Invalid lens prescription file."""

    def __init__(self, message: str, lines: tuple[int, ...] = ()):
        self.lines = lines
        where = ", ".join(str(n) for n in lines)
        super().__init__(f"line {where}: {message}" if lines else message)


class PlacementError(SimulationError):
    """Scene assembly cannot satisfy a placement request."""


class SensorSpecError(SimulationError):
    """Inconsistent sensor parameterization or image/sensor mismatch."""


class GroundTruthError(SimulationError):
    """Metadata planes that cannot be turned into ground-truth objects."""


class DetectionFormatError(SimulationError):
    """Malformed line in a detection or ground-truth text file."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)
