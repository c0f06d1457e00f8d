"""Stochastic placement of mobile objects (vehicles, cyclists, pedestrians).

A single-timestep model: along each lane, vehicle positions follow a
renewal process with exponential gaps of mean 1/density; gaps below
``min_gap`` are redrawn. Each object gets a speed uniform in its class
range and moves along its lane heading during the shutter interval.
"""

from __future__ import annotations

import logging

import numpy as np
from pydantic import Field, field_validator, model_validator

from autocam_sim.assembly.placement_log import PlacementLog
from autocam_sim.assembly.road import RoadNetwork
from autocam_sim.errors import PlacementError
from autocam_sim.geometry import Transform
from autocam_sim.models import (
    STATIC_CLASSES,
    ClassLabel,
    PlacedObject,
    StrictModel,
    TransformSpec,
)
from autocam_sim.sceneformat.asset_store import AssetEntry, AssetStore

logger = logging.getLogger(__name__)

# Redraws of a single gap before the lane is considered saturated.
_MAX_GAP_REDRAWS = 1000


class SpeedRange(StrictModel):
    min: float = Field(ge=0)
    max: float = Field(ge=0)

    @model_validator(mode="after")
    def _ordered(self) -> SpeedRange:
        if self.min > self.max:
            raise ValueError("speed range min must not exceed max")
        return self


class ExplicitObject(StrictModel):
    """A named asset at a fixed road position (placed before stochastic objects)."""

    asset_id: str
    position: tuple[float, float]
    z: float = 0.0
    yaw_deg: float = 0.0
    speed: float = Field(default=0.0, ge=0)


def _default_speeds() -> dict[ClassLabel, SpeedRange]:
    return {
        ClassLabel.CAR: SpeedRange(min=8.0, max=15.0),
        ClassLabel.CYCLIST: SpeedRange(min=3.0, max=6.0),
        ClassLabel.PEDESTRIAN: SpeedRange(min=0.8, max=1.6),
    }


class TrafficConfig(StrictModel):
    """Statistical parameters of a scene.

    Densities: vehicles per metre per lane, pedestrians per metre of
    sidewalk band, static objects per 100 m of band.
    """

    vehicle_density: float = Field(default=0.02, ge=0)
    pedestrian_density: float = Field(default=0.01, ge=0)
    speed_ranges: dict[ClassLabel, SpeedRange] = Field(default_factory=_default_speeds)
    min_gap: float = Field(default=8.0, gt=0)
    class_mix: dict[ClassLabel, float] = Field(
        default_factory=lambda: {ClassLabel.CAR: 0.9, ClassLabel.CYCLIST: 0.1}
    )
    static_densities: dict[ClassLabel, float] = Field(
        default_factory=lambda: {ClassLabel.BUILDING: 4.0, ClassLabel.TREE: 6.0}
    )
    explicit_objects: list[ExplicitObject] = Field(default_factory=list)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @field_validator("class_mix")
    @classmethod
    def _mix_weights(cls, mix: dict[ClassLabel, float]) -> dict[ClassLabel, float]:
        for label, weight in mix.items():
            if weight < 0:
                raise ValueError(f"class_mix weight for {label.value} must be >= 0")
            if label not in (ClassLabel.CAR, ClassLabel.CYCLIST):
                raise ValueError(f"class_mix only covers lane traffic (car, cyclist), not {label.value}")
        return mix

    @field_validator("static_densities")
    @classmethod
    def _static_classes(cls, densities: dict[ClassLabel, float]) -> dict[ClassLabel, float]:
        for label, density in densities.items():
            if label not in STATIC_CLASSES:
                raise ValueError(f"{label.value} is not a static class")
            if density < 0:
                raise ValueError(f"static density for {label.value} must be >= 0")
        return densities

    @model_validator(mode="after")
    def _mix_usable(self) -> TrafficConfig:
        if self.vehicle_density > 0 and sum(self.class_mix.values()) <= 0:
            raise ValueError("class_mix needs a positive weight when vehicle_density > 0")
        return self

    def speed_range(self, label: ClassLabel) -> SpeedRange:
        return self.speed_ranges.get(label, SpeedRange(min=0.0, max=0.0))


def moving_object(
    entry: AssetEntry,
    position: np.ndarray,
    heading: np.ndarray,
    speed: float,
    shutter_duration: float,
    instance_id: int = 1,
) -> PlacedObject:
    """Object at ``position`` facing ``heading`` and displaced by speed × duration."""
    heading = np.asarray(heading, dtype=np.float64)
    yaw = float(np.arctan2(heading[1], heading[0]))
    start = Transform.from_yaw(np.asarray(position, dtype=np.float64), yaw)
    if speed > 0:
        step = speed * shutter_duration * np.array([heading[0], heading[1], 0.0])
        end = Transform(start.translation + step, start.rotation, start.scale)
    else:
        end = start
    start_spec = TransformSpec.from_transform(start)
    end_spec = start_spec if end is start else TransformSpec.from_transform(end)
    return PlacedObject(
        asset_id=entry.asset_id,
        class_label=entry.class_label,
        instance_id=instance_id,
        transform_start=start_spec,
        transform_end=end_spec,
        speed=float(speed),
    )


def _assets_for(store: AssetStore, label: ClassLabel) -> list[AssetEntry]:
    entries = store.list_assets(label)
    if not entries:
        raise PlacementError(f"asset store {store.root} has no '{label.value}' assets")
    return entries


def _draw_gap(rng: np.random.Generator, mean: float, min_gap: float) -> float:
    for _ in range(_MAX_GAP_REDRAWS):
        gap = rng.exponential(mean)
        if gap >= min_gap:
            return gap
    return min_gap


def place_explicit(
    road: RoadNetwork,
    cfg: TrafficConfig,
    store: AssetStore,
    shutter_duration: float,
) -> list[PlacedObject]:
    """Objects named in ``cfg.explicit_objects``, in listed order."""
    placed = []
    for i, spec in enumerate(cfg.explicit_objects):
        if not store.contains(spec.asset_id):
            raise PlacementError(f"explicit_objects[{i}]: asset '{spec.asset_id}' not in store")
        entry = store.entry(spec.asset_id)
        yaw = np.radians(spec.yaw_deg)
        heading = np.array([np.cos(yaw), np.sin(yaw)])
        position = np.array([spec.position[0], spec.position[1], spec.z])
        placed.append(moving_object(entry, position, heading, spec.speed, shutter_duration))
    return placed


def place_traffic(
    road: RoadNetwork,
    cfg: TrafficConfig,
    store: AssetStore,
    shutter_duration: float = 1.0 / 60.0,
    log: PlacementLog | None = None,
) -> list[PlacedObject]:
    """Place vehicles on lanes and pedestrians on sidewalk bands.

    Args:
        road: Road network.
        cfg: Densities, speeds and seed.
        store: Asset source; listings are sorted so draws are reproducible.
        shutter_duration: Seconds between shutter open and close.
        log: Receives ego-exclusion skips.

    Returns:
        Placed objects in placement order (instance ids are provisional).

    Raises:
        PlacementError: a class with non-zero density has no assets.
    """
    log = log if log is not None else PlacementLog()
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0]))
    placed: list[PlacedObject] = []

    if cfg.vehicle_density > 0:
        labels = sorted((l for l, w in cfg.class_mix.items() if w > 0), key=lambda l: l.id)
        weights = np.array([cfg.class_mix[l] for l in labels], dtype=np.float64)
        weights /= weights.sum()
        pools = {label: _assets_for(store, label) for label in labels}
        mean_gap = 1.0 / cfg.vehicle_density
        ego_lane = road.camera_mount.lane

        for lane_index, lane in enumerate(road.lanes):
            length = road.lane_length(lane)
            heading = road.lane_heading(lane)
            s = rng.exponential(mean_gap)
            while s <= length:
                label = labels[int(rng.choice(len(labels), p=weights))]
                pool = pools[label]
                entry = pool[int(rng.integers(len(pool)))]
                speed_range = cfg.speed_range(label)
                speed = float(rng.uniform(speed_range.min, speed_range.max))
                if lane_index == ego_lane and abs(s - road.camera_mount.position) < cfg.min_gap:
                    log.add("skipped", reason="ego_exclusion", lane=lane_index, s=f"{s:.3f}", asset=entry.asset_id)
                else:
                    xy = road.lane_point(lane, s)
                    placed.append(
                        moving_object(entry, np.array([xy[0], xy[1], 0.0]), heading, speed, shutter_duration)
                    )
                    log.add("placed", lane=lane_index, s=f"{s:.3f}", asset=entry.asset_id, speed=f"{speed:.3f}")
                s += _draw_gap(rng, mean_gap, cfg.min_gap)

    if cfg.pedestrian_density > 0 and road.sidewalks:
        pool = _assets_for(store, ClassLabel.PEDESTRIAN)
        speed_range = cfg.speed_range(ClassLabel.PEDESTRIAN)
        mean_gap = 1.0 / cfg.pedestrian_density
        for band_index, band in enumerate(road.sidewalks):
            for side in band.sides():
                near, far = road.band_range(band, side)
                s = rng.exponential(mean_gap)
                while s <= road.length:
                    entry = pool[int(rng.integers(len(pool)))]
                    t = float(rng.uniform(min(near, far), max(near, far)))
                    direction = 1.0 if rng.random() < 0.5 else -1.0
                    speed = float(rng.uniform(speed_range.min, speed_range.max))
                    xy = road.to_world(s, t)
                    placed.append(
                        moving_object(
                            entry, np.array([xy[0], xy[1], 0.0]), direction * road.axis, speed, shutter_duration
                        )
                    )
                    log.add("placed", band=band_index, side=side, s=f"{s:.3f}", asset=entry.asset_id)
                    s += rng.exponential(mean_gap)

    logger.debug(f"Placed {len(placed)} mobile objects (seed {cfg.seed})")
    return placed
