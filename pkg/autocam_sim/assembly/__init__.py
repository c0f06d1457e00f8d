"""Procedural scene assembly: traffic on lanes, static objects in roadside bands."""

from autocam_sim.assembly.placement_log import PlacementLog
from autocam_sim.assembly.recipe_builder import assemble_recipe
from autocam_sim.assembly.road import BandSpec, CameraMount, LaneSpec, RoadNetwork
from autocam_sim.assembly.static import MAX_PLACEMENT_ATTEMPTS, Footprint, footprint_at, place_static
from autocam_sim.assembly.traffic import ExplicitObject, SpeedRange, TrafficConfig, place_explicit, place_traffic

__all__ = [
    "MAX_PLACEMENT_ATTEMPTS",
    "BandSpec",
    "CameraMount",
    "ExplicitObject",
    "Footprint",
    "LaneSpec",
    "PlacementLog",
    "RoadNetwork",
    "SpeedRange",
    "TrafficConfig",
    "assemble_recipe",
    "footprint_at",
    "place_explicit",
    "place_static",
    "place_traffic",
]
