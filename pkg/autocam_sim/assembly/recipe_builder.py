"""Turn a road network and traffic statistics into a scene recipe."""

from __future__ import annotations

import logging

import numpy as np

from autocam_sim.assembly.placement_log import PlacementLog
from autocam_sim.assembly.road import RoadNetwork
from autocam_sim.assembly.static import place_static
from autocam_sim.assembly.traffic import TrafficConfig, place_explicit, place_traffic
from autocam_sim.errors import PlacementError
from autocam_sim.geometry import Transform
from autocam_sim.models import (
    CameraConfig,
    ClassLabel,
    LightingConfig,
    PlacedObject,
    SceneRecipe,
    ShutterConfig,
    TransformSpec,
)
from autocam_sim.sceneformat.asset_store import AssetStore

logger = logging.getLogger(__name__)

# Distance ahead of the camera used for the look-at point.
_LOOK_AHEAD_M = 10.0


def assemble_recipe(
    road: RoadNetwork,
    cfg: TrafficConfig,
    store: AssetStore,
    camera_cfg: CameraConfig,
    lighting_cfg: LightingConfig,
    shutter: ShutterConfig | None = None,
    log: PlacementLog | None = None,
) -> SceneRecipe:
    """Build a complete recipe.

    Objects are ordered explicit, traffic, static, ground and numbered
    1..N in that order. The camera sits at the ego mount looking along its
    lane; the traffic seed is recorded as the recipe seed.
    """
    shutter = shutter or ShutterConfig()
    log = log if log is not None else PlacementLog()

    objects: list[PlacedObject] = []
    objects += place_explicit(road, cfg, store, shutter.duration)
    objects += place_traffic(road, cfg, store, shutter.duration, log)
    objects += place_static(road, cfg, store, log)
    if road.ground_asset:
        if not store.contains(road.ground_asset):
            raise PlacementError(f"ground asset '{road.ground_asset}' not in store {store.root}")
        spec = TransformSpec.from_transform(Transform.identity())
        objects.append(
            PlacedObject(
                asset_id=road.ground_asset,
                class_label=ClassLabel.OTHER,
                instance_id=1,
                transform_start=spec,
                transform_end=spec,
            )
        )
    objects = [obj.model_copy(update={"instance_id": i}) for i, obj in enumerate(objects, start=1)]

    position, heading = road.camera_pose()
    look_at = position + _LOOK_AHEAD_M * np.array([heading[0], heading[1], 0.0])
    camera = camera_cfg.model_copy(
        update={
            "position": tuple(float(v) for v in position),
            "look_at": tuple(float(v) for v in look_at),
        }
    )
    logger.info(f"Assembled recipe with {len(objects)} objects (seed {cfg.seed})")
    return SceneRecipe(
        seed=cfg.seed,
        objects=objects,
        camera=camera,
        lighting=lighting_cfg,
        shutter=shutter,
        asset_store_path=str(store.root),
    )
