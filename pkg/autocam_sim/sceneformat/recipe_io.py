"""JSON serialization of scene recipes."""

from __future__ import annotations

import json
from pathlib import Path

from pydantic import ValidationError

from autocam_sim.errors import RecipeError
from autocam_sim.models import SceneRecipe
from autocam_sim.sceneformat.asset_store import AssetStore, validate_recipe


def recipe_to_json(recipe: SceneRecipe) -> str:
    """Canonical JSON text: fixed key order, two-space indent, trailing newline."""
    return json.dumps(recipe.model_dump(mode="json"), indent=2) + "\n"


def write_recipe(recipe: SceneRecipe, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(recipe_to_json(recipe), encoding="utf-8")
    return path


def validation_error_path(exc: ValidationError) -> tuple[str, str]:
    """Dotted field path and message of the first pydantic error."""
    first = exc.errors()[0]
    field_path = ".".join(str(part) for part in first.get("loc", ()))
    return field_path, first.get("msg", str(exc))


def parse_recipe(text: str) -> SceneRecipe:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RecipeError(f"invalid JSON: {exc}") from exc
    try:
        return SceneRecipe.model_validate(data)
    except ValidationError as exc:
        field_path, message = validation_error_path(exc)
        raise RecipeError(message, field_path=field_path) from exc


def read_recipe(path: Path | str, store: AssetStore | None = None) -> SceneRecipe:
    """Read and validate a recipe; with ``store`` also resolve every asset id.

    Raises:
        RecipeError: schema violation (with field path), unknown
            recipe_version, or an asset id missing from ``store``.
    """
    recipe = parse_recipe(Path(path).read_text(encoding="utf-8"))
    if store is not None:
        validate_recipe(recipe, store)
    return recipe
