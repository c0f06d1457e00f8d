"""Path management for pipeline runs.

Handles the output layout of a run directory and the location of the
bundled data shipped inside the package:
- recipes/     - scene recipes and placement logs
- irradiance/  - spectral containers and previews
- sensor/      - digitized sensor images
- eval/        - ground truth and AP results
"""

from __future__ import annotations

from pathlib import Path


def get_bundled_config_dir() -> Path:
    """Get the package's bundled data directory.

    Returns:
        Path to autocam_sim/config
    """
    return Path(__file__).parent.parent / "config"


def resolve_data_file(reference: str | Path, kind: str, base_dir: Path | None = None) -> Path:
    """Find a data file by path, relative to ``base_dir``, or among the bundled files.

    Args:
        reference: file name or path, e.g. ``wide_angle_6mm.lens``
        kind: bundled subdirectory to search, e.g. ``lenses``
        base_dir: directory that relative references are tried against first

    Returns:
        Existing path

    Raises:
        FileNotFoundError: if no candidate exists
    """
    ref = Path(reference)
    candidates = [ref] if ref.is_absolute() else []
    if not ref.is_absolute():
        if base_dir is not None:
            candidates.append(base_dir / ref)
        candidates.append(Path.cwd() / ref)
        candidates.append(get_bundled_config_dir() / kind / ref)
    for candidate in candidates:
        if candidate.is_file():
            return candidate.resolve()
    raise FileNotFoundError(f"{kind} file '{reference}' not found")


class RunPaths:
    """Output directories of one pipeline run."""

    def __init__(self, root: Path | str):
        """Initialize run paths.

        Args:
            root: run output directory
        """
        self.root = Path(root)

    def get_recipes_dir(self) -> Path:
        return self.root / "recipes"

    def get_irradiance_dir(self) -> Path:
        return self.root / "irradiance"

    def get_sensor_dir(self, sensor_name: str | None = None) -> Path:
        """Get sensor output directory, one subdirectory per sensor.

        Args:
            sensor_name: sensor spec name

        Returns:
            Path to sensor directory
        """
        base = self.root / "sensor"
        return base / sensor_name if sensor_name else base

    def get_eval_dir(self) -> Path:
        return self.root / "eval"

    def get_manifest_file(self) -> Path:
        return self.root / "manifest.json"

    def recipe_file(self, scene_id: str) -> Path:
        return self.get_recipes_dir() / f"{scene_id}.json"

    def placement_log_file(self, scene_id: str) -> Path:
        return self.get_recipes_dir() / f"{scene_id}.placement.log"

    def irradiance_file(self, scene_id: str) -> Path:
        return self.get_irradiance_dir() / f"{scene_id}.spim"

    def preview_file(self, scene_id: str) -> Path:
        return self.get_irradiance_dir() / f"{scene_id}.png"

    def sensor_file(self, sensor_name: str, scene_id: str) -> Path:
        return self.get_sensor_dir(sensor_name) / f"{scene_id}.pgm"

    def ensure_directories(self) -> None:
        """Create all run directories if they don't exist."""
        for directory in (
            self.root,
            self.get_recipes_dir(),
            self.get_irradiance_dir(),
            self.get_sensor_dir(),
            self.get_eval_dir(),
        ):
            directory.mkdir(parents=True, exist_ok=True)

