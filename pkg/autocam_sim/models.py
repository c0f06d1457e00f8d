"""Data models shared by scene assembly, recipes and rendering."""

from __future__ import annotations

from enum import Enum
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from autocam_sim.geometry import Transform, decompose_matrix, quat_to_axis_angle
from autocam_sim.spectral import WavelengthGrid

Vec3 = tuple[float, float, float]

SUPPORTED_RECIPE_VERSIONS = ("1.0",)


class ClassLabel(str, Enum):
    """Object classes; the integer id is what the class_id plane stores."""

    CAR = "car"
    PEDESTRIAN = "pedestrian"
    CYCLIST = "cyclist"
    BUILDING = "building"
    TREE = "tree"
    SIGN = "sign"
    TRAFFIC_LIGHT = "traffic_light"
    OTHER = "other"

    @property
    def id(self) -> int:
        return CLASS_IDS[self]

    @classmethod
    def from_id(cls, class_id: int) -> ClassLabel:
        try:
            return CLASS_LABEL_BY_ID[int(class_id)]
        except KeyError:
            raise ValueError(f"unknown class id {class_id}") from None


CLASS_IDS: dict[ClassLabel, int] = {label: i + 1 for i, label in enumerate(ClassLabel)}
CLASS_LABEL_BY_ID: dict[int, ClassLabel] = {v: k for k, v in CLASS_IDS.items()}

MOBILE_CLASSES = frozenset({ClassLabel.CAR, ClassLabel.PEDESTRIAN, ClassLabel.CYCLIST})
STATIC_CLASSES = frozenset(
    {ClassLabel.BUILDING, ClassLabel.TREE, ClassLabel.SIGN, ClassLabel.TRAFFIC_LIGHT}
)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSpec(StrictModel):
    """Wavelength grid as written in configuration files."""

    lambda_min: float = 395.0
    lambda_max: float = 705.0
    n_bands: int = Field(default=31, ge=1)

    def to_grid(self) -> WavelengthGrid:
        return WavelengthGrid(self.lambda_min, self.lambda_max, self.n_bands)


class RotationSpec(StrictModel):
    axis: Vec3 = (0.0, 0.0, 1.0)
    angle_deg: float = 0.0


class TransformSpec(StrictModel):
    """Object-to-world transform as stored in recipes.

    Files may instead give ``{"matrix": [[...4 rows...]]}``; it is decomposed
    into translation, rotation and uniform scale on load.
    """

    translation: Vec3 = (0.0, 0.0, 0.0)
    rotation: RotationSpec = Field(default_factory=RotationSpec)
    scale: float = Field(default=1.0, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _decompose_matrix(cls, data: Any) -> Any:
        if isinstance(data, dict) and "matrix" in data:
            if len(data) != 1:
                raise ValueError("'matrix' cannot be combined with other transform fields")
            t = decompose_matrix(np.asarray(data["matrix"], dtype=np.float64))
            return cls.from_transform(t).model_dump()
        return data

    @field_validator("rotation")
    @classmethod
    def _axis_non_zero(cls, rotation: RotationSpec) -> RotationSpec:
        if rotation.angle_deg != 0.0 and not any(rotation.axis):
            raise ValueError("rotation axis must be non-zero")
        return rotation

    def to_transform(self) -> Transform:
        return Transform.from_axis_angle(
            self.translation, self.rotation.axis, self.rotation.angle_deg, self.scale
        )

    @classmethod
    def from_transform(cls, t: Transform) -> TransformSpec:
        axis, angle = quat_to_axis_angle(t.rotation)
        return cls(
            translation=tuple(float(v) for v in t.translation),
            rotation=RotationSpec(
                axis=tuple(float(v) for v in axis), angle_deg=float(np.degrees(angle))
            ),
            scale=t.scale,
        )


class PlacedObject(StrictModel):
    """One asset instance in a scene, with its pose at shutter open and close."""

    asset_id: str = Field(min_length=1)
    class_label: ClassLabel
    instance_id: int = Field(ge=1)
    transform_start: TransformSpec
    transform_end: TransformSpec
    speed: float = Field(default=0.0, ge=0)

    @property
    def is_static(self) -> bool:
        return self.transform_start == self.transform_end


class CameraConfig(StrictModel):
    """Camera pose, model and film description.

    ``fov_deg`` is the horizontal field of view for pinhole and fisheye
    cameras; lens cameras take their optics from ``lens_file``.
    """

    model: Literal["pinhole", "fisheye", "lens"] = "pinhole"
    position: Vec3 = (0.0, 0.0, 1.4)
    look_at: Vec3 = (10.0, 0.0, 1.4)
    up: Vec3 = (0.0, 0.0, 1.0)
    fov_deg: float = Field(default=112.0, gt=0, le=360)
    focal_length_mm: float = Field(default=6.0, gt=0)
    lens_file: str | None = None
    film_width_px: int = Field(default=64, ge=1)
    film_height_px: int = Field(default=64, ge=1)
    film_width_mm: float = Field(default=4.512, gt=0)
    f_number: float = Field(default=2.0, gt=0)
    exposure: float = Field(default=0.01, gt=0)

    @model_validator(mode="after")
    def _check_model(self) -> CameraConfig:
        if self.model == "lens" and not self.lens_file:
            raise ValueError("lens camera needs a lens_file")
        if self.model == "pinhole" and self.fov_deg >= 180:
            raise ValueError("pinhole fov_deg must be below 180")
        forward = np.subtract(self.look_at, self.position)
        if not np.any(forward):
            raise ValueError("look_at must differ from position")
        if np.linalg.norm(np.cross(forward, self.up)) == 0:
            raise ValueError("up must not be parallel to the viewing direction")
        return self

    @property
    def film_height_mm(self) -> float:
        return self.film_width_mm * self.film_height_px / self.film_width_px


class LightingConfig(StrictModel):
    """Sky environment: ``builtin:uniform``, ``builtin:clear_day`` or a SPIM map path."""

    sky_map: str = "builtin:uniform"
    sky_radiance: float = Field(default=0.01, ge=0)
    sky_scale: float = Field(default=1.0, ge=0)


class ShutterConfig(StrictModel):
    open: float = 0.0
    close: float = Field(default=1.0 / 60.0)

    @model_validator(mode="after")
    def _ordered(self) -> ShutterConfig:
        if not self.open < self.close:
            raise ValueError("shutter open must be before close")
        return self

    @property
    def duration(self) -> float:
        return self.close - self.open


class SceneRecipe(StrictModel):
    """Complete, self-describing description of one scene."""

    recipe_version: str = SUPPORTED_RECIPE_VERSIONS[-1]
    seed: int = Field(default=0, ge=0, lt=2**64)
    objects: list[PlacedObject] = Field(default_factory=list)
    camera: CameraConfig = Field(default_factory=CameraConfig)
    lighting: LightingConfig = Field(default_factory=LightingConfig)
    shutter: ShutterConfig = Field(default_factory=ShutterConfig)
    asset_store_path: str = ""

    @field_validator("recipe_version")
    @classmethod
    def _known_version(cls, version: str) -> str:
        if version not in SUPPORTED_RECIPE_VERSIONS:
            raise ValueError(
                f"unsupported recipe_version '{version}' (supported: {', '.join(SUPPORTED_RECIPE_VERSIONS)})"
            )
        return version

    @model_validator(mode="after")
    def _unique_instances(self) -> SceneRecipe:
        seen: set[int] = set()
        for obj in self.objects:
            if obj.instance_id in seen:
                raise ValueError(f"duplicate instance_id {obj.instance_id}")
            seen.add(obj.instance_id)
        return self
