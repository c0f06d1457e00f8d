"""Straight multi-lane road networks."""

from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import Field, model_validator

from autocam_sim.models import StrictModel

Vec2 = tuple[float, float]


class LaneSpec(StrictModel):
    start: Vec2
    end: Vec2
    width: float = Field(gt=0)
    # +1 travels start -> end, -1 travels end -> start
    direction: Literal[1, -1] = 1


class BandSpec(StrictModel):
    """Strip parallel to the road, ``offset`` metres beyond the roadway edge."""

    side: Literal["left", "right", "both"] = "both"
    offset: float = Field(default=0.0, ge=0)
    width: float = Field(gt=0)

    def sides(self) -> tuple[str, ...]:
        return ("left", "right") if self.side == "both" else (self.side,)


class CameraMount(StrictModel):
    lane: int = Field(default=0, ge=0)
    position: float = Field(default=0.0, ge=0, description="metres along the lane from its start")
    height: float = Field(default=1.4, gt=0)


class RoadNetwork(StrictModel):
    """Centerline, lanes, sidewalk/building bands and the ego camera mount.

    Lateral coordinates are measured along the left normal of the
    centerline direction; the roadway spans the union of the lanes.
    """

    centerline_start: Vec2 = (0.0, 0.0)
    centerline_end: Vec2 = (200.0, 0.0)
    lanes: list[LaneSpec] = Field(min_length=1)
    sidewalks: list[BandSpec] = Field(default_factory=list)
    building_band: BandSpec | None = None
    camera_mount: CameraMount = Field(default_factory=CameraMount)
    ground_asset: str | None = None

    @model_validator(mode="after")
    def _check_geometry(self) -> RoadNetwork:
        if np.allclose(self.centerline_start, self.centerline_end):
            raise ValueError("centerline must have non-zero length")
        axis = self.axis
        for i, lane in enumerate(self.lanes):
            d = np.subtract(lane.end, lane.start)
            length = np.linalg.norm(d)
            if length == 0:
                raise ValueError(f"lane {i} has zero length")
            u = d / length
            if abs(axis[0] * u[1] - axis[1] * u[0]) > 1e-6:
                raise ValueError(f"lane {i} is not parallel to the centerline")
        if self.camera_mount.lane >= len(self.lanes):
            raise ValueError(
                f"camera_mount.lane {self.camera_mount.lane} out of range ({len(self.lanes)} lanes)"
            )
        lane = self.lanes[self.camera_mount.lane]
        if self.camera_mount.position > self.lane_length(lane):
            raise ValueError("camera_mount.position lies beyond the end of its lane")
        return self

    @property
    def origin(self) -> np.ndarray:
        return np.asarray(self.centerline_start, dtype=np.float64)

    @property
    def axis(self) -> np.ndarray:
        d = np.subtract(self.centerline_end, self.centerline_start).astype(np.float64)
        return d / np.linalg.norm(d)

    @property
    def normal(self) -> np.ndarray:
        """Left-pointing unit normal."""
        a = self.axis
        return np.array([-a[1], a[0]])

    @property
    def length(self) -> float:
        return float(np.linalg.norm(np.subtract(self.centerline_end, self.centerline_start)))

    @property
    def yaw(self) -> float:
        a = self.axis
        return float(np.arctan2(a[1], a[0]))

    def to_road_frame(self, point) -> tuple[float, float]:
        """(s along the centerline, t lateral) of a world xy point."""
        d = np.asarray(point, dtype=np.float64)[:2] - self.origin
        return float(d @ self.axis), float(d @ self.normal)

    def to_world(self, s: float, t: float) -> np.ndarray:
        return self.origin + s * self.axis + t * self.normal

    @staticmethod
    def lane_length(lane: LaneSpec) -> float:
        return float(np.linalg.norm(np.subtract(lane.end, lane.start)))

    def lane_offset(self, lane: LaneSpec) -> float:
        return self.to_road_frame(lane.start)[1]

    def lane_heading(self, lane: LaneSpec) -> np.ndarray:
        d = np.subtract(lane.end, lane.start).astype(np.float64)
        return lane.direction * d / np.linalg.norm(d)

    def lane_point(self, lane: LaneSpec, s: float) -> np.ndarray:
        """Point ``s`` metres from the lane start."""
        d = np.subtract(lane.end, lane.start).astype(np.float64)
        return np.asarray(lane.start, dtype=np.float64) + s * d / np.linalg.norm(d)

    def roadway_edges(self) -> tuple[float, float]:
        """Lateral (right, left) extent of the union of lanes."""
        offsets = [(self.lane_offset(l), l.width) for l in self.lanes]
        right = min(t - w / 2 for t, w in offsets)
        left = max(t + w / 2 for t, w in offsets)
        return right, left

    def band_range(self, band: BandSpec, side: str) -> tuple[float, float]:
        """Lateral (near, far) coordinates of ``band`` on ``side``; far is away from the road."""
        right, left = self.roadway_edges()
        if side == "left":
            near = left + band.offset
            return near, near + band.width
        near = right - band.offset
        return near, near - band.width

    def camera_pose(self) -> tuple[np.ndarray, np.ndarray]:
        """Ego camera position (x, y, height) and unit heading in xy."""
        lane = self.lanes[self.camera_mount.lane]
        xy = self.lane_point(lane, self.camera_mount.position)
        position = np.array([xy[0], xy[1], self.camera_mount.height])
        return position, self.lane_heading(lane)
