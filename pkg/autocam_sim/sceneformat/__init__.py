"""On-disk formats: asset descriptions, scene recipes and spectral images."""

from autocam_sim.sceneformat.asset_grammar import parse_asset, serialize_asset
from autocam_sim.sceneformat.asset_store import AssetEntry, AssetStore, bundle_resources, validate_recipe
from autocam_sim.sceneformat.assets import AssetDescription, MaterialKind, MaterialSpec, TriangleMesh
from autocam_sim.sceneformat.recipe_io import parse_recipe, read_recipe, recipe_to_json, write_recipe
from autocam_sim.sceneformat.spectral_container import read_spectral_image, write_spectral_image

__all__ = [
    "AssetDescription",
    "AssetEntry",
    "AssetStore",
    "MaterialKind",
    "MaterialSpec",
    "TriangleMesh",
    "bundle_resources",
    "parse_asset",
    "parse_recipe",
    "read_recipe",
    "read_spectral_image",
    "recipe_to_json",
    "serialize_asset",
    "validate_recipe",
    "write_recipe",
    "write_spectral_image",
]
