"""Asset grammar, asset store, recipes and the spectral image container."""

from __future__ import annotations

import json
import zipfile

import numpy as np
import pytest

from autocam_sim.errors import AssetParseError, RecipeError, SpectralContainerError
from autocam_sim.models import (
    CameraConfig,
    ClassLabel,
    PlacedObject,
    RotationSpec,
    SceneRecipe,
    TransformSpec,
)
from autocam_sim.sceneformat import (
    AssetStore,
    MaterialKind,
    bundle_resources,
    parse_asset,
    parse_recipe,
    read_recipe,
    read_spectral_image,
    serialize_asset,
    write_recipe,
    write_spectral_image,
)
from autocam_sim.sceneformat.spectral_container import MAGIC
from autocam_sim.spectral import DEFAULT_GRID, SpectralImage, WavelengthGrid

from conftest import quad_text, write_asset

TRIANGLE = """
Asset "tri" "string class" "other"
Material "grey" "string type" "diffuse" "float reflectance" 0.5
NamedMaterial "grey"
Shape "trianglemesh" "point3 P" [0 0 0  1 0 0  0 1 1] "integer indices" [0 1 2]
"""

TWO_SHAPES = """
Asset "pair" "string class" "sign"
Material "shared" "spectrum reflectance" [400 0.2 700 0.6]
AttributeBegin
  NamedMaterial "shared"
  Shape "trianglemesh" "point3 P" [0 0 0  1 0 0  0 1 0] "integer indices" [0 1 2]
AttributeEnd
AttributeBegin
  NamedMaterial "shared"
  Translate 1 0 0
  Shape "trianglemesh" "point3 P" [0 0 0  1 0 0  0 1 0] "integer indices" [0 1 2]
AttributeEnd
"""


class TestParseAsset:
    def test_single_triangle(self):
        asset = parse_asset(TRIANGLE)
        assert asset.asset_id == "tri"
        assert asset.class_label is ClassLabel.OTHER
        assert asset.triangle_count == 1
        assert asset.bbox_min == (0.0, 0.0, 0.0)
        assert asset.bbox_max == (1.0, 1.0, 1.0)
        assert asset.materials["grey"].kind is MaterialKind.DIFFUSE
        np.testing.assert_allclose(asset.materials["grey"].reflectance.values, 0.5)

    def test_index_out_of_range_reports_line(self):
        text = TRIANGLE.replace("[0 1 2]", "[0 1 3]")
        with pytest.raises(AssetParseError, match="index out of range") as exc_info:
            parse_asset(text)
        assert exc_info.value.line == 5

    def test_translate_applies_to_second_shape_only(self):
        asset = parse_asset(TWO_SHAPES)
        (first, m1), (second, m2) = asset.meshes
        assert m1 == m2 == "shared"
        np.testing.assert_allclose(second.vertices, first.vertices + [1.0, 0.0, 0.0])
        assert asset.bbox_max[0] == 2.0

    def test_unknown_material(self):
        text = TRIANGLE.replace('NamedMaterial "grey"', 'NamedMaterial "chrome"')
        with pytest.raises(AssetParseError, match="unknown material reference 'chrome'"):
            parse_asset(text)

    def test_degenerate_triangle(self):
        with pytest.raises(AssetParseError, match="degenerate"):
            parse_asset(TRIANGLE.replace("[0 1 2]", "[0 1 1]"))

    def test_unrecognized_directive_has_position(self):
        text = TRIANGLE + 'LightSource "point"\n'
        with pytest.raises(AssetParseError, match="unrecognized directive 'LightSource'") as exc_info:
            parse_asset(text)
        assert exc_info.value.line == 6
        assert exc_info.value.column == 1

    def test_reflectance_above_one(self):
        with pytest.raises(AssetParseError, match=r"\[0, 1\]"):
            parse_asset(TRIANGLE.replace("0.5", "1.5"))

    def test_unbalanced_attributes(self):
        with pytest.raises(AssetParseError, match="AttributeBegin without"):
            parse_asset("AttributeBegin\n" + TRIANGLE)

    def test_retroreflective_parameters(self):
        asset = parse_asset(
            quad_text("s", "sign", material_type="retroreflective", extra='"float retro_fraction" 0.8 "float retro_sigma" 3')
        )
        m = asset.materials["m"]
        assert m.kind is MaterialKind.RETROREFLECTIVE
        assert m.retro_fraction == 0.8
        assert m.retro_sigma == pytest.approx(np.radians(3.0))

    def test_retro_fraction_range(self):
        with pytest.raises(AssetParseError, match="retro_fraction"):
            parse_asset(quad_text("s", "sign", material_type="retroreflective", extra='"float retro_fraction" 1.5'))

    def test_emissive_needs_emission(self):
        text = (
            'Asset "lamp" "string class" "traffic_light"\n'
            'Material "glow" "string type" "emissive"\n'
            'NamedMaterial "glow"\n'
            'Shape "trianglemesh" "point3 P" [0 0 0 1 0 0 0 1 0] "integer indices" [0 1 2]\n'
        )
        with pytest.raises(AssetParseError, match="emission"):
            parse_asset(text)
        lit = parse_asset(text.replace('"emissive"', '"emissive" "float emission" 2.0'))
        np.testing.assert_allclose(lit.materials["glow"].emission.values, 2.0)

    def test_serialize_reparses_identically(self):
        for text in (TRIANGLE, TWO_SHAPES):
            asset = parse_asset(text)
            assert parse_asset(serialize_asset(asset)) == asset

    def test_arbitrary_input_never_crashes(self):
        rng = np.random.default_rng(7)
        alphabet = list('AssetMaterialShape"[]0123456789.-e# \n\t') + ["AttributeEnd", "trianglemesh"]
        corpus = [TRIANGLE, TWO_SHAPES]
        for trial in range(300):
            if trial % 2:
                base = corpus[trial % 2]
                cut = rng.integers(0, len(base))
                text = base[:cut] + "".join(rng.choice(alphabet, size=5)) + base[cut + 5 :]
            else:
                text = "".join(rng.choice(alphabet, size=rng.integers(1, 80)))
            try:
                parse_asset(text)
            except AssetParseError:
                pass


class TestAssetStore:
    def test_bundled_assets_all_load(self, config_dir):
        store = AssetStore(config_dir / "assets")
        entries = store.list_assets()
        assert [e.asset_id for e in entries] == sorted(e.asset_id for e in entries)
        for entry in entries:
            asset = store.load(entry.asset_id)
            assert asset.class_label is entry.class_label
            assert asset.up_axis == "z"

    def test_canonical_axes_put_pedestrian_upright(self, config_dir):
        store = AssetStore(config_dir / "assets")
        ped = store.load("pedestrian_01")
        height = ped.bbox_max[2] - ped.bbox_min[2]
        assert height > 1.0

    def test_filters_and_sidecar_tags(self, config_dir):
        store = AssetStore(config_dir / "assets")
        cars = store.list_assets(ClassLabel.CAR)
        assert cars and all(e.class_label is ClassLabel.CAR for e in cars)
        assert store.entry("sign_stop_01").tags

    def test_header_must_match_location(self, asset_root):
        write_asset(asset_root, "car", "wall_01", quad_text("wall_01", "building"))
        store = AssetStore(asset_root)
        with pytest.raises(AssetParseError, match="store location"):
            store.load("wall_01")

    def test_non_utf8_file_is_a_parse_error(self, asset_root):
        path = write_asset(asset_root, "other", "panel_01", quad_text("panel_01"))
        path.write_bytes(b"# \xff\n" + path.read_bytes())
        with pytest.raises(AssetParseError, match="not valid UTF-8") as excinfo:
            AssetStore(asset_root).load("panel_01")
        assert (excinfo.value.line, excinfo.value.column) == (1, 3)

    def test_missing_root(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            AssetStore(tmp_path / "nowhere")


def _object(instance_id: int, asset_id: str, label: ClassLabel, x0: float, x1: float) -> PlacedObject:
    return PlacedObject(
        asset_id=asset_id,
        class_label=label,
        instance_id=instance_id,
        transform_start=TransformSpec(translation=(x0, 1.75, 0.0)),
        transform_end=TransformSpec(
            translation=(x1, 1.75, 0.0), rotation=RotationSpec(axis=(0.0, 0.0, 1.0), angle_deg=3.5)
        ),
        speed=abs(x1 - x0) * 60.0,
    )


class TestRecipes:
    def test_empty_scene_round_trip(self, tmp_path):
        recipe = SceneRecipe(camera=CameraConfig(model="pinhole"))
        path = write_recipe(recipe, tmp_path / "empty.json")
        assert read_recipe(path) == recipe

    def test_three_objects_round_trip(self, tmp_path, config_dir):
        recipe = SceneRecipe(
            seed=12345678901234567,
            objects=[
                _object(1, "car_sedan_01", ClassLabel.CAR, 20.0, 20.25),
                _object(2, "pedestrian_01", ClassLabel.PEDESTRIAN, 30.0, 30.02),
                _object(3, "tree_01", ClassLabel.TREE, 40.0, 40.0),
            ],
        )
        path = write_recipe(recipe, tmp_path / "scene.json")
        store = AssetStore(config_dir / "assets")
        back = read_recipe(path, store)
        assert back == recipe
        assert back.objects[0].transform_end.rotation.angle_deg == 3.5

    def test_key_order_does_not_matter(self, tmp_path):
        recipe = SceneRecipe(objects=[_object(1, "car_sedan_01", ClassLabel.CAR, 0.0, 1.0)])
        data = json.loads(recipe.model_dump_json())
        shuffled = dict(reversed(list(data.items())))
        assert parse_recipe(json.dumps(shuffled)) == recipe

    def test_missing_asset_named(self, tmp_path, config_dir):
        recipe = SceneRecipe(objects=[_object(1, "car_999", ClassLabel.CAR, 0.0, 0.0)])
        path = write_recipe(recipe, tmp_path / "scene.json")
        with pytest.raises(RecipeError, match="car_999") as exc_info:
            read_recipe(path, AssetStore(config_dir / "assets"))
        assert exc_info.value.asset_id == "car_999"
        assert exc_info.value.field_path == "objects.0.asset_id"

    def test_class_mismatch_named(self, tmp_path, config_dir):
        recipe = SceneRecipe(objects=[_object(1, "tree_01", ClassLabel.CAR, 0.0, 0.0)])
        path = write_recipe(recipe, tmp_path / "scene.json")
        with pytest.raises(RecipeError, match="is a tree") as exc_info:
            read_recipe(path, AssetStore(config_dir / "assets"))
        assert exc_info.value.field_path == "objects.0.class_label"

    def test_schema_violation_has_field_path(self):
        data = json.loads(SceneRecipe().model_dump_json())
        data["camera"]["exposure"] = -1
        with pytest.raises(RecipeError) as exc_info:
            parse_recipe(json.dumps(data))
        assert exc_info.value.field_path == "camera.exposure"

    def test_unknown_version_rejected(self):
        data = json.loads(SceneRecipe().model_dump_json())
        data["recipe_version"] = "9.9"
        with pytest.raises(RecipeError, match="recipe_version"):
            parse_recipe(json.dumps(data))

    def test_duplicate_instance_ids(self):
        data = json.loads(
            SceneRecipe(objects=[_object(1, "a", ClassLabel.CAR, 0, 0)]).model_dump_json()
        )
        data["objects"].append(dict(data["objects"][0]))
        with pytest.raises(RecipeError, match="duplicate instance_id"):
            parse_recipe(json.dumps(data))

    def test_matrix_transform_accepted(self):
        data = json.loads(SceneRecipe(objects=[_object(1, "a", ClassLabel.CAR, 0, 0)]).model_dump_json())
        data["objects"][0]["transform_start"] = {
            "matrix": [[0, -1, 0, 5], [1, 0, 0, 2], [0, 0, 1, 0], [0, 0, 0, 1]]
        }
        recipe = parse_recipe(json.dumps(data))
        spec = recipe.objects[0].transform_start
        assert spec.translation == pytest.approx((5.0, 2.0, 0.0))
        assert spec.rotation.angle_deg == pytest.approx(90.0)

    def test_bundle_resources(self, tmp_path, config_dir):
        store = AssetStore(config_dir / "assets")
        recipe = SceneRecipe(objects=[_object(1, "sign_stop_01", ClassLabel.SIGN, 5, 5)])
        path = bundle_resources(recipe, store, tmp_path / "bundle.zip")
        with zipfile.ZipFile(path) as zf:
            names = set(zf.namelist())
        assert names == {"sign/sign_stop_01.pbrt", "sign/sign_stop_01.yaml"}


class TestSpectralContainer:
    def test_zeros_round_trip_bit_exact(self, tmp_path):
        img = SpectralImage(2, 2, WavelengthGrid(500.0, 510.0, 1), np.zeros((2, 2, 1)))
        path = write_spectral_image(img, tmp_path / "z.spim")
        back = read_spectral_image(path)
        assert back.data.tobytes() == img.data.tobytes()
        assert back.grid == img.grid

    def test_random_image_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        data = rng.random((16, 16, 31)).astype(np.float32)
        depth = rng.random((16, 16)).astype(np.float32) * 100
        class_id = rng.integers(0, 9, size=(16, 16))
        instance_id = rng.integers(0, 2**20, size=(16, 16))
        img = SpectralImage(16, 16, DEFAULT_GRID, data, depth, class_id, instance_id, {"note": "x"})
        first = write_spectral_image(img, tmp_path / "a.spim")
        back = read_spectral_image(first)
        assert np.array_equal(back.data, data)
        assert np.array_equal(back.depth, depth)
        assert np.array_equal(back.instance_id, instance_id)
        assert back.attributes == {"note": "x"}
        second = write_spectral_image(back, tmp_path / "b.spim")
        assert first.read_bytes() == second.read_bytes()

    def test_header_is_readable_json(self, tmp_path):
        img = SpectralImage(3, 2, DEFAULT_GRID, np.ones((2, 3, 31)))
        raw = write_spectral_image(img, tmp_path / "h.spim").read_bytes()
        assert raw[:4] == MAGIC
        length = int.from_bytes(raw[4:8], "little")
        header = json.loads(raw[8 : 8 + length])
        assert header["width"] == 3 and header["height"] == 2
        assert header["band_centers_nm"][0] == pytest.approx(400.0)
        assert header["units"]["irradiance"] == "W m-2 nm-1"

    def test_truncated_payload(self, tmp_path):
        img = SpectralImage(2, 2, WavelengthGrid(500.0, 510.0, 1), np.zeros((2, 2, 1)))
        path = write_spectral_image(img, tmp_path / "t.spim")
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(SpectralContainerError, match="truncated payload"):
            read_spectral_image(path)

    def test_trailing_bytes(self, tmp_path):
        img = SpectralImage(2, 2, WavelengthGrid(500.0, 510.0, 1), np.zeros((2, 2, 1)))
        path = write_spectral_image(img, tmp_path / "t.spim")
        path.write_bytes(path.read_bytes() + b"\0\0\0\0")
        with pytest.raises(SpectralContainerError, match="mismatch"):
            read_spectral_image(path)

    def test_unknown_version(self, tmp_path):
        img = SpectralImage(2, 2, WavelengthGrid(500.0, 510.0, 1), np.zeros((2, 2, 1)))
        path = write_spectral_image(img, tmp_path / "v.spim")
        raw = path.read_bytes().replace(b'"version": 1', b'"version": 7')
        path.write_bytes(raw)
        with pytest.raises(SpectralContainerError, match="version"):
            read_spectral_image(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.spim"
        path.write_bytes(b"NOPE" + b"\0" * 12)
        with pytest.raises(SpectralContainerError, match="magic"):
            read_spectral_image(path)


def _rewrite_header(raw: bytes, edit) -> bytes:
    length = int.from_bytes(raw[4:8], "little")
    header = json.loads(raw[8 : 8 + length])
    edit(header)
    body = json.dumps(header).encode("utf-8")
    return raw[:4] + len(body).to_bytes(4, "little") + body + raw[8 + length :]


def _set_plane(field, value):
    def edit(header):
        header["planes"][0][field] = value

    return edit


class TestContainerRobustness:
    @pytest.fixture()
    def small_raw(self, tmp_path):
        img = SpectralImage(2, 2, WavelengthGrid(500.0, 510.0, 1), np.ones((2, 2, 1)))
        return write_spectral_image(img, tmp_path / "s.spim").read_bytes()

    @pytest.mark.parametrize(
        "edit",
        [
            _set_plane("offset", -4),
            _set_plane("length", -16),
            lambda h: h.update(width=-2, height=-2),
            lambda h: h.update(width=0),
            lambda h: h["grid"].update(n_bands=3),
            lambda h: h["grid"].update(n_bands=10**9),
            lambda h: h["grid"].update(lambda_min=800.0),
            lambda h: h.update(planes=None),
            lambda h: h.update(planes=["band_0"]),
            lambda h: h.update(attributes="plain text"),
            lambda h: h.update(width="wide"),
        ],
        ids=[
            "negative_offset",
            "negative_length",
            "negative_dims",
            "zero_width",
            "band_count_mismatch",
            "huge_band_count",
            "inverted_grid",
            "planes_null",
            "plane_not_mapping",
            "attributes_not_mapping",
            "width_not_number",
        ],
    )
    def test_edited_header_rejected(self, tmp_path, small_raw, edit):
        path = tmp_path / "edited.spim"
        path.write_bytes(_rewrite_header(small_raw, edit))
        with pytest.raises(SpectralContainerError):
            read_spectral_image(path)

    def test_byte_flips_never_crash(self, tmp_path):
        img = SpectralImage(
            3,
            2,
            WavelengthGrid(500.0, 530.0, 3),
            np.full((2, 3, 3), 0.25),
            np.ones((2, 3)),
            np.zeros((2, 3)),
            np.arange(6).reshape(2, 3),
        )
        raw = bytearray(write_spectral_image(img, tmp_path / "src.spim").read_bytes())
        rng = np.random.default_rng(11)
        path = tmp_path / "flipped.spim"
        for _ in range(300):
            mutated = bytearray(raw)
            for pos in rng.integers(0, len(mutated), size=int(rng.integers(1, 5))):
                mutated[pos] = int(rng.integers(0, 256))
            if rng.random() < 0.2:
                mutated = mutated[: int(rng.integers(0, len(mutated)))]
            path.write_bytes(bytes(mutated))
            try:
                back = read_spectral_image(path)
            except SpectralContainerError:
                continue
            assert back.data.shape == (back.height, back.width, back.grid.n_bands)
