"""Roadside placement of static assets with footprint rejection sampling."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from autocam_sim.assembly.placement_log import PlacementLog
from autocam_sim.assembly.road import BandSpec, RoadNetwork
from autocam_sim.assembly.traffic import TrafficConfig
from autocam_sim.geometry import Transform
from autocam_sim.models import ClassLabel, PlacedObject, TransformSpec
from autocam_sim.sceneformat.asset_store import AssetStore

logger = logging.getLogger(__name__)

MAX_PLACEMENT_ATTEMPTS = 100


@dataclass(frozen=True)
class Footprint:
    """Axis-aligned rectangle in road coordinates (s along, t across)."""

    s_min: float
    s_max: float
    t_min: float
    t_max: float

    def overlaps(self, other: Footprint) -> bool:
        return (
            self.s_min < other.s_max
            and other.s_min < self.s_max
            and self.t_min < other.t_max
            and other.t_min < self.t_max
        )


def footprint_at(bbox_min, bbox_max, s: float, t: float) -> Footprint:
    """Footprint of an asset whose forward axis is aligned with the road at (s, t)."""
    return Footprint(s + bbox_min[0], s + bbox_max[0], t + bbox_min[1], t + bbox_max[1])


def _bands_for(road: RoadNetwork, label: ClassLabel) -> list[BandSpec]:
    if label is ClassLabel.BUILDING:
        return [road.building_band] if road.building_band is not None else []
    return list(road.sidewalks)


def place_static(
    road: RoadNetwork,
    cfg: TrafficConfig,
    store: AssetStore,
    log: PlacementLog | None = None,
) -> list[PlacedObject]:
    """Place buildings in the building band and other static classes on sidewalks.

    Each band side gets ``round(length * density / 100)`` slots at regular
    spacing. Every attempt jitters the slot center by up to half a spacing
    and redraws the asset; a candidate whose footprint overlaps an earlier
    placement is rejected. After :data:`MAX_PLACEMENT_ATTEMPTS` rejections the
    slot is skipped and logged.
    """
    log = log if log is not None else PlacementLog()
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
    placed: list[PlacedObject] = []
    footprints: list[Footprint] = []
    length = road.length

    for label in sorted(cfg.static_densities, key=lambda l: l.id):
        density = cfg.static_densities[label]
        if density <= 0:
            continue
        pool = store.list_assets(label)
        if not pool:
            logger.warning(f"No '{label.value}' assets in {store.root}; skipping static class")
            log.add("skipped", reason="no_assets", cls=label.value)
            continue
        bboxes = {entry.asset_id: store.load(entry.asset_id) for entry in pool}

        for band_index, band in enumerate(_bands_for(road, label)):
            for side in band.sides():
                near, far = road.band_range(band, side)
                t_lo, t_hi = min(near, far), max(near, far)
                n_slots = int(round(length * density / 100.0))
                if n_slots == 0:
                    continue
                spacing = length / n_slots
                for slot in range(n_slots):
                    nominal = (slot + 0.5) * spacing
                    for attempt in range(MAX_PLACEMENT_ATTEMPTS):
                        entry = pool[int(rng.integers(len(pool)))]
                        asset = bboxes[entry.asset_id]
                        lo, hi = asset.bbox_min, asset.bbox_max
                        s = nominal + float(rng.uniform(-0.5, 0.5)) * spacing
                        s = float(np.clip(s, -lo[0], length - hi[0])) if hi[0] - lo[0] <= length else length / 2
                        if label is ClassLabel.BUILDING:
                            # front face on the near edge of the band
                            t = near - lo[1] if side == "left" else near - hi[1]
                        elif hi[1] - lo[1] <= t_hi - t_lo:
                            t = float(rng.uniform(t_lo - lo[1], t_hi - hi[1]))
                        else:
                            t = 0.5 * (t_lo + t_hi)
                        candidate = footprint_at(lo, hi, s, t)
                        if any(candidate.overlaps(f) for f in footprints):
                            continue
                        footprints.append(candidate)
                        xy = road.to_world(s, t)
                        spec = TransformSpec.from_transform(
                            Transform.from_yaw(np.array([xy[0], xy[1], 0.0]), road.yaw)
                        )
                        placed.append(
                            PlacedObject(
                                asset_id=entry.asset_id,
                                class_label=label,
                                instance_id=1,
                                transform_start=spec,
                                transform_end=spec,
                                speed=0.0,
                            )
                        )
                        log.add(
                            "placed", cls=label.value, band=band_index, side=side,
                            slot=slot, asset=entry.asset_id, attempts=attempt + 1,
                        )
                        break
                    else:
                        log.add(
                            "skipped", cls=label.value, band=band_index, side=side,
                            slot=slot, attempts=MAX_PLACEMENT_ATTEMPTS,
                        )
                        logger.info(
                            f"Skipped {label.value} slot {slot} ({side}) after {MAX_PLACEMENT_ATTEMPTS} attempts"
                        )
    return placed
