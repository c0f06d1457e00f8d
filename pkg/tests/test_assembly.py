"""Road networks, stochastic traffic, static placement and recipe assembly."""

from __future__ import annotations

from collections import defaultdict

import numpy as np
import pytest

from autocam_sim.assembly import (
    MAX_PLACEMENT_ATTEMPTS,
    ExplicitObject,
    PlacementLog,
    RoadNetwork,
    TrafficConfig,
    assemble_recipe,
    footprint_at,
    place_explicit,
    place_static,
    place_traffic,
)
from autocam_sim.config_loader import load_road_network
from autocam_sim.errors import PlacementError
from autocam_sim.models import CameraConfig, ClassLabel, LightingConfig, ShutterConfig
from autocam_sim.sceneformat import AssetStore, recipe_to_json
from conftest import box_text, write_asset

NO_STATIC: dict = {}


@pytest.fixture
def road(config_dir) -> RoadNetwork:
    return load_road_network(config_dir / "roads" / "straight_4lane.yaml")


@pytest.fixture
def store(config_dir) -> AssetStore:
    return AssetStore(config_dir / "assets")


def _single_lane(length: float = 200.0, **extra) -> RoadNetwork:
    data = {
        "centerline_start": (0.0, 0.0),
        "centerline_end": (length, 0.0),
        "lanes": [{"start": (0.0, 0.0), "end": (length, 0.0), "width": 3.5}],
    }
    data.update(extra)
    return RoadNetwork.model_validate(data)


def _cars_only_store(asset_root) -> AssetStore:
    write_asset(asset_root, "car", "crate", box_text("crate", "car", (4.0, 1.8, 1.5)))
    return AssetStore(asset_root)


class TestRoadNetwork:
    def test_bundled_geometry(self, road):
        assert road.length == pytest.approx(200.0)
        assert road.roadway_edges() == pytest.approx((-7.0, 7.0))
        position, heading = road.camera_pose()
        np.testing.assert_allclose(position, [20.0, -1.75, 1.4])
        np.testing.assert_allclose(heading, [1.0, 0.0])

    def test_opposite_lane_heading(self, road):
        np.testing.assert_allclose(road.lane_heading(road.lanes[3]), [-1.0, 0.0])

    def test_band_ranges(self, road):
        assert road.band_range(road.building_band, "left") == pytest.approx((11.0, 23.0))
        assert road.band_range(road.building_band, "right") == pytest.approx((-11.0, -23.0))

    def test_non_parallel_lane_rejected(self):
        with pytest.raises(ValueError, match="not parallel"):
            _single_lane(lanes=[{"start": (0, 0), "end": (10, 5), "width": 3.0}])

    def test_camera_lane_out_of_range(self):
        with pytest.raises(ValueError, match="camera_mount.lane"):
            _single_lane(camera_mount={"lane": 2})


class TestTraffic:
    def test_zero_densities(self, road, store):
        cfg = TrafficConfig(vehicle_density=0, pedestrian_density=0, static_densities=NO_STATIC)
        assert place_traffic(road, cfg, store) == []
        assert place_static(road, cfg, store) == []

    def test_same_seed_same_objects(self, road, store):
        cfg = TrafficConfig(vehicle_density=0.05, pedestrian_density=0.02, seed=42)
        assert place_traffic(road, cfg, store) == place_traffic(road, cfg, store)
        other = place_traffic(road, cfg.model_copy(update={"seed": 43}), store)
        assert other != place_traffic(road, cfg, store)

    def test_mean_count_matches_density(self, asset_root):
        store = _cars_only_store(asset_root)
        road = _single_lane(camera_mount={"lane": 0, "position": 0.0})
        counts = []
        for seed in range(1000):
            cfg = TrafficConfig(
                vehicle_density=0.05,
                pedestrian_density=0,
                min_gap=0.1,
                class_mix={ClassLabel.CAR: 1.0},
                static_densities=NO_STATIC,
                seed=seed,
            )
            counts.append(len(place_traffic(road, cfg, store)))
        assert np.mean(counts) == pytest.approx(10.0, rel=0.1)

    def test_min_gap_holds_in_every_lane(self, road, store):
        for seed in range(30):
            cfg = TrafficConfig(vehicle_density=0.1, pedestrian_density=0, min_gap=8.0, seed=seed)
            lanes = defaultdict(list)
            for obj in place_traffic(road, cfg, store):
                x, y, _ = obj.transform_start.translation
                lanes[round(y, 3)].append(x)
            assert lanes
            for xs in lanes.values():
                assert np.all(np.diff(sorted(xs)) >= 8.0 - 1e-9)

    def test_displacement_is_speed_times_shutter(self, road, store):
        shutter = ShutterConfig(open=0.0, close=0.02)
        cfg = TrafficConfig(vehicle_density=0.05, pedestrian_density=0.05, seed=3)
        objects = place_traffic(road, cfg, store, shutter.duration)
        assert any(obj.speed > 0 for obj in objects)
        for obj in objects:
            moved = np.subtract(obj.transform_end.translation, obj.transform_start.translation)
            assert np.linalg.norm(moved) == pytest.approx(obj.speed * shutter.duration, abs=1e-9)
            assert obj.transform_end.rotation == obj.transform_start.rotation

    def test_speeds_within_class_range(self, road, store):
        cfg = TrafficConfig(vehicle_density=0.05, pedestrian_density=0.05, seed=8)
        for obj in place_traffic(road, cfg, store):
            r = cfg.speed_range(obj.class_label)
            assert r.min <= obj.speed <= r.max

    def test_vehicles_face_their_lane(self, road, store):
        cfg = TrafficConfig(vehicle_density=0.05, pedestrian_density=0, seed=5)
        for obj in place_traffic(road, cfg, store):
            _, y, _ = obj.transform_start.translation
            angle = obj.transform_start.rotation.angle_deg
            if y > 0:
                assert abs(angle) == pytest.approx(180.0, abs=1e-6)
            else:
                assert angle == pytest.approx(0.0, abs=1e-6)

    def test_ego_exclusion_is_logged(self, road, store):
        mount = road.camera_mount
        excluded = 0
        for seed in range(20):
            log = PlacementLog()
            cfg = TrafficConfig(vehicle_density=0.2, pedestrian_density=0, min_gap=8.0, seed=seed)
            for obj in place_traffic(road, cfg, store, log=log):
                x, y, _ = obj.transform_start.translation
                if y == pytest.approx(-1.75):
                    assert abs(x - mount.position) >= 8.0
            excluded += sum("reason=ego_exclusion" in line for line in log.skipped())
        assert excluded > 0

    def test_missing_class_assets(self, asset_root):
        store = _cars_only_store(asset_root)
        cfg = TrafficConfig(vehicle_density=0.05, pedestrian_density=0, class_mix={ClassLabel.CYCLIST: 1.0})
        with pytest.raises(PlacementError, match="cyclist"):
            place_traffic(_single_lane(), cfg, store)

    def test_class_mix_rejects_static_classes(self):
        with pytest.raises(ValueError):
            TrafficConfig(class_mix={ClassLabel.TREE: 1.0})

    def test_explicit_objects(self, road, store):
        cfg = TrafficConfig(
            explicit_objects=[ExplicitObject(asset_id="car_sedan_01", position=(30.0, -1.75), yaw_deg=0.0, speed=10.0)]
        )
        (obj,) = place_explicit(road, cfg, store, 0.01)
        assert obj.class_label == ClassLabel.CAR
        np.testing.assert_allclose(obj.transform_end.translation, (30.1, -1.75, 0.0), atol=1e-9)

    def test_explicit_unknown_asset(self, road, store):
        cfg = TrafficConfig(explicit_objects=[ExplicitObject(asset_id="car_999", position=(0.0, 0.0))])
        with pytest.raises(PlacementError, match="car_999"):
            place_explicit(road, cfg, store, 0.01)


class TestStatic:
    def test_no_footprint_overlap(self, road, store):
        cfg = TrafficConfig(
            vehicle_density=0,
            pedestrian_density=0,
            static_densities={
                ClassLabel.BUILDING: 8.0,
                ClassLabel.TREE: 10.0,
                ClassLabel.SIGN: 3.0,
                ClassLabel.TRAFFIC_LIGHT: 2.0,
            },
            seed=11,
        )
        objects = place_static(road, cfg, store)
        assert objects
        prints = []
        for obj in objects:
            asset = store.load(obj.asset_id)
            s, t = road.to_road_frame(obj.transform_start.translation)
            prints.append(footprint_at(asset.bbox_min, asset.bbox_max, s, t))
            assert obj.speed == 0.0
            assert obj.transform_start == obj.transform_end
        for i, a in enumerate(prints):
            for b in prints[i + 1 :]:
                assert not a.overlaps(b)

    def test_buildings_stay_in_their_band(self, road, store):
        cfg = TrafficConfig(vehicle_density=0, pedestrian_density=0, static_densities={ClassLabel.BUILDING: 5.0})
        for obj in place_static(road, cfg, store):
            _, t = road.to_road_frame(obj.transform_start.translation)
            assert 11.0 <= abs(t) <= 23.0

    def test_crowded_band_skips_and_logs(self, asset_root):
        write_asset(asset_root, "building", "hall", box_text("hall", "building", (20.0, 10.0, 10.0)))
        store = AssetStore(asset_root)
        road = _single_lane(30.0, building_band={"side": "left", "offset": 0.0, "width": 12.0})
        cfg = TrafficConfig(vehicle_density=0, pedestrian_density=0, static_densities={ClassLabel.BUILDING: 7.0})
        log = PlacementLog()
        objects = place_static(road, cfg, store, log)
        assert len(objects) == 1
        skipped = log.skipped()
        assert len(skipped) == 1
        assert "slot=1" in skipped[0]
        assert f"attempts={MAX_PLACEMENT_ATTEMPTS}" in skipped[0]

    def test_same_seed_same_placement(self, road, store):
        cfg = TrafficConfig(vehicle_density=0, pedestrian_density=0, seed=4)
        assert place_static(road, cfg, store) == place_static(road, cfg, store)


class TestAssembleRecipe:
    def test_empty_scene(self, store):
        road = _single_lane(camera_mount={"lane": 0, "position": 5.0, "height": 1.2})
        cfg = TrafficConfig(vehicle_density=0, pedestrian_density=0, static_densities=NO_STATIC, seed=9)
        recipe = assemble_recipe(road, cfg, store, CameraConfig(), LightingConfig())
        assert recipe.objects == []
        assert recipe.seed == 9
        assert recipe.camera.position == (5.0, 0.0, 1.2)
        assert recipe.camera.look_at == (15.0, 0.0, 1.2)

    def test_instance_ids_follow_placement_order(self, road, store):
        cfg = TrafficConfig(
            vehicle_density=0.03,
            seed=2,
            explicit_objects=[ExplicitObject(asset_id="sign_stop_01", position=(25.0, -8.0))],
        )
        recipe = assemble_recipe(road, cfg, store, CameraConfig(), LightingConfig())
        assert [o.instance_id for o in recipe.objects] == list(range(1, len(recipe.objects) + 1))
        assert recipe.objects[0].asset_id == "sign_stop_01"
        assert recipe.objects[-1].asset_id == road.ground_asset

    def test_byte_identical_recipe(self, road, store):
        cfg = TrafficConfig(vehicle_density=0.04, pedestrian_density=0.02, seed=123)
        a = recipe_to_json(assemble_recipe(road, cfg, store, CameraConfig(), LightingConfig()))
        b = recipe_to_json(assemble_recipe(road, cfg, store, CameraConfig(), LightingConfig()))
        assert a == b

    def test_missing_ground_asset(self, asset_root):
        store = _cars_only_store(asset_root)
        road = _single_lane(ground_asset="asphalt")
        cfg = TrafficConfig(vehicle_density=0, pedestrian_density=0, static_densities=NO_STATIC)
        with pytest.raises(PlacementError, match="asphalt"):
            assemble_recipe(road, cfg, store, CameraConfig(), LightingConfig())


def test_placement_log_file(tmp_path):
    log = PlacementLog()
    log.add("placed", lane=0, s="1.000")
    log.add("skipped", reason="ego_exclusion")
    path = log.write(tmp_path / "recipes" / "scene.log")
    assert path.read_text(encoding="utf-8") == "placed lane=0 s=1.000\nskipped reason=ego_exclusion\n"
    assert len(log) == 2
