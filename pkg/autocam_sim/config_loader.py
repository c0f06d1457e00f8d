"""Configuration loader for pipeline runs, road networks and traffic statistics."""

from __future__ import annotations

import copy
import logging
from pathlib import Path
from typing import Any

import yaml
from pydantic import ConfigDict, Field, PrivateAttr, ValidationError, field_validator, model_validator

from autocam_sim.assembly.road import RoadNetwork
from autocam_sim.assembly.traffic import TrafficConfig
from autocam_sim.errors import ConfigError
from autocam_sim.evaluation.ground_truth import MIN_PIXELS
from autocam_sim.evaluation.matching import DEFAULT_IOU_THRESHOLD
from autocam_sim.evaluation.metrics import DEFAULT_BIN_EDGES
from autocam_sim.models import CameraConfig, LightingConfig, ShutterConfig, StrictModel
from autocam_sim.render.config import RenderConfig
from autocam_sim.sceneformat.recipe_io import validation_error_path
from autocam_sim.utils.paths import get_bundled_config_dir, resolve_data_file

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0.0"
SETTINGS_FILE = "settings.yaml"
GROUND_TRUTH_DETECTIONS = "ground_truth"


def _read_yaml(path: Path) -> dict[str, Any]:
    """Read a YAML (or JSON) mapping.

    Raises:
        ConfigError: unreadable file or a document that is not a mapping
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"{path.name}: invalid YAML: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path.name}: top level must be a mapping")
    return data


def _deep_merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    """Merge ``override`` into a copy of ``base``; nested mappings merge, everything else replaces."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _validate(model: type[StrictModel], data: dict[str, Any], source: str) -> Any:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        field_path, message = validation_error_path(e)
        raise ConfigError(f"{source}: {message}", field_path=field_path) from e


class PathsConfig(StrictModel):
    asset_store: str = "assets"
    out: str = "runs/default"


class StageToggles(StrictModel):
    assemble: bool = True
    render: bool = True
    sensor: bool = True
    evaluate: bool = True


class AssembleConfig(StrictModel):
    """Scene assembly stage: ``n_scenes`` recipes on one road with shared statistics."""

    n_scenes: int = Field(default=1, ge=0)
    road: str = "straight_4lane.yaml"
    traffic: dict[str, Any] = Field(default_factory=dict)
    camera: CameraConfig = Field(default_factory=CameraConfig)
    lighting: LightingConfig = Field(default_factory=LightingConfig)
    shutter: ShutterConfig = Field(default_factory=ShutterConfig)

    @field_validator("traffic")
    @classmethod
    def _no_traffic_seed(cls, traffic: dict[str, Any]) -> dict[str, Any]:
        if "seed" in traffic:
            raise ValueError("traffic seeds are derived from the master seed; remove 'seed'")
        return traffic


class EvaluateConfig(StrictModel):
    """Evaluation stage.

    ``detections`` is a detection file or ``ground_truth``, which scores the
    ground truth itself as a pipeline self-check. ``sensor`` picks the sensor
    whose pixel grid the boxes are expressed in (the render grid when unset).
    """

    detections: str | None = None
    sensor: str | None = None
    bin_edges: list[float] = Field(default_factory=lambda: list(DEFAULT_BIN_EDGES))
    iou_threshold: float = Field(default=DEFAULT_IOU_THRESHOLD, gt=0, le=1)
    min_pixels: int = Field(default=MIN_PIXELS, ge=1)

    @field_validator("bin_edges")
    @classmethod
    def _increasing(cls, edges: list[float]) -> list[float]:
        if len(edges) < 2 or any(b <= a for a, b in zip(edges[:-1], edges[1:])):
            raise ValueError("bin_edges must be at least two strictly increasing values")
        return edges


class PipelineConfig(StrictModel):
    """A whole pipeline run.

    Relative paths are resolved against ``base_dir`` (the directory of the
    config file), then the working directory, then the bundled data.
    """

    model_config = ConfigDict(extra="forbid", frozen=False, populate_by_name=True)

    schema_version: str = Field(default=SCHEMA_VERSION, alias="$schema_version")
    seed: int = Field(default=0, ge=0, lt=2**64)
    jobs: int = Field(default=1, ge=1)
    paths: PathsConfig = Field(default_factory=PathsConfig)
    stages: StageToggles = Field(default_factory=StageToggles)
    assemble: AssembleConfig = Field(default_factory=AssembleConfig)
    render: RenderConfig = Field(default_factory=RenderConfig)
    sensors: list[str] = Field(default_factory=list)
    evaluate: EvaluateConfig = Field(default_factory=EvaluateConfig)
    _base_dir: Path = PrivateAttr(default_factory=Path.cwd)

    @property
    def base_dir(self) -> Path:
        return self._base_dir

    @field_validator("schema_version")
    @classmethod
    def _supported(cls, version: str) -> str:
        if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
            raise ValueError(f"unsupported schema version {version} (expected {SCHEMA_VERSION})")
        return version

    @model_validator(mode="after")
    def _evaluate_sensor_known(self) -> PipelineConfig:
        if self.evaluate.sensor is not None and self.evaluate.sensor not in self.sensors:
            raise ValueError(f"evaluate.sensor '{self.evaluate.sensor}' is not listed in sensors")
        return self

    def resolve(self, reference: str, kind: str) -> Path:
        """Resolve a referenced data file.

        Raises:
            ConfigError: if the file does not exist
        """
        try:
            return resolve_data_file(reference, kind, self.base_dir)
        except FileNotFoundError as e:
            raise ConfigError(str(e)) from e

    def resolve_dir(self, reference: str, kind: str) -> Path:
        """Resolve a directory like :meth:`resolve`, falling back to the bundled ``kind`` directory."""
        ref = Path(reference)
        candidates = [ref] if ref.is_absolute() else [self.base_dir / ref, Path.cwd() / ref]
        if not ref.is_absolute() and reference == kind:
            candidates.append(get_bundled_config_dir() / kind)
        for candidate in candidates:
            if candidate.is_dir():
                return candidate.resolve()
        raise ConfigError(f"{kind} directory '{reference}' not found", field_path="paths.asset_store")

    @property
    def asset_store_dir(self) -> Path:
        return self.resolve_dir(self.paths.asset_store, "assets")

    @property
    def out_dir(self) -> Path:
        out = Path(self.paths.out)
        return out if out.is_absolute() else (self.base_dir / out).resolve()

    def check_references(self) -> None:
        """Check that every referenced file exists for the enabled stages.

        Raises:
            ConfigError: naming the first missing reference
        """
        if self.stages.assemble:
            _ = self.asset_store_dir
            self.resolve(self.assemble.road, "roads")
        if self.stages.render and not self.stages.assemble:
            _ = self.asset_store_dir
        if self.stages.sensor:
            for sensor in self.sensors:
                self.resolve(sensor, "sensors")
        detections = self.evaluate.detections
        if self.stages.evaluate and detections and detections != GROUND_TRUTH_DETECTIONS:
            self.resolve(detections, "detections")

    def with_overrides(
        self, seed: int | None = None, jobs: int | None = None, out: str | Path | None = None
    ) -> PipelineConfig:
        """Apply command-line overrides."""
        update: dict[str, Any] = {}
        if seed is not None:
            if not 0 <= seed < 2**64:
                raise ConfigError("seed must lie in [0, 2**64)", field_path="seed")
            update["seed"] = seed
        if jobs is not None:
            if jobs < 1:
                raise ConfigError("jobs must be >= 1", field_path="jobs")
            update["jobs"] = jobs
        if out is not None:
            update["paths"] = self.paths.model_copy(update={"out": str(Path(out).resolve())})
        return self.model_copy(update=update)

    def traffic_config(self, seed: int) -> TrafficConfig:
        """Traffic statistics of one scene with its derived seed."""
        return _validate(TrafficConfig, {**self.assemble.traffic, "seed": seed}, "assemble.traffic")


def load_settings(settings_path: Path | None = None) -> dict[str, Any]:
    """Load the default settings that pipeline files are merged over.

    Args:
        settings_path: settings file (defaults to the bundled settings.yaml)

    Returns:
        Settings mapping
    """
    path = settings_path or get_bundled_config_dir() / SETTINGS_FILE
    if not path.exists():
        logger.debug(f"No settings file at {path}, using built-in defaults")
        return {}
    return _read_yaml(path)


def parse_pipeline_config(data: dict[str, Any], base_dir: Path | None = None) -> PipelineConfig:
    """Validate a pipeline mapping merged over the default settings.

    Raises:
        ConfigError: with the dotted path of the offending field
    """
    merged = _deep_merge(load_settings(), data)
    config = _validate(PipelineConfig, merged, "pipeline config")
    config._base_dir = (base_dir or Path.cwd()).resolve()
    return config


def load_pipeline_config(path: Path | str | None = None) -> PipelineConfig:
    """Load a pipeline config file; with no path, the bundled example pipeline.

    Args:
        path: YAML or JSON pipeline file

    Returns:
        Validated configuration whose relative paths resolve against the file's directory

    Raises:
        ConfigError: unreadable file or invalid content
    """
    if path is None:
        config_path = get_bundled_config_dir() / "pipeline.yaml"
    else:
        config_path = Path(path)
        if not config_path.is_file():
            raise ConfigError(f"config file not found: {config_path}")
    config = parse_pipeline_config(_read_yaml(config_path), config_path.parent)
    if path is None:
        # the bundled example writes below the working directory, not into the package
        config = config.with_overrides(out=Path.cwd() / config.paths.out)
    logger.info(f"Loaded pipeline config {config_path.name} (seed {config.seed}, {config.jobs} job(s))")
    return config


def load_road_network(path: Path | str) -> RoadNetwork:
    """Load a road network YAML file.

    Raises:
        ConfigError: unreadable file or invalid geometry
    """
    path = Path(path)
    return _validate(RoadNetwork, _read_yaml(path), path.name)
