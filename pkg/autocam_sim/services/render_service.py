"""Render service: scene recipes -> spectral irradiance containers and previews."""

from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from autocam_sim.config_loader import PipelineConfig
from autocam_sim.errors import ConfigError
from autocam_sim.render.integrator import render_with_stats
from autocam_sim.render.preview import write_preview
from autocam_sim.sceneformat.asset_store import AssetStore
from autocam_sim.sceneformat.recipe_io import read_recipe
from autocam_sim.sceneformat.spectral_container import write_spectral_image
from autocam_sim.utils.batch_runner import BatchResult, BatchRunner
from autocam_sim.utils.paths import RunPaths
from autocam_sim.utils.seeds import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RenderedScene:
    scene_id: str
    image_path: Path
    preview_path: Path
    stats_path: Path
    vignetted_fraction: float
    elapsed: float


class RenderService:
    """Service for rendering recipes."""

    def __init__(self, config: PipelineConfig, run_paths: RunPaths) -> None:
        """Initialize render service.

        Args:
            config: Pipeline configuration
            run_paths: Output layout of the run
        """
        self._config = config
        self._run_paths = run_paths
        self._store: AssetStore | None = None

    def _get_store(self) -> AssetStore:
        if self._store is None:
            try:
                self._store = AssetStore(self._config.asset_store_dir, grid=self._config.render.wavelength_grid)
            except FileNotFoundError as e:
                raise ConfigError(str(e), field_path="paths.asset_store") from e
        return self._store

    def stats_file(self, sid: str) -> Path:
        return self._run_paths.get_irradiance_dir() / f"{sid}.render.json"

    def render_one(self, recipe_path: Path) -> RenderedScene:
        """Render one recipe into the run's irradiance directory.

        The render seed is derived from the master seed and the scene id
        (the recipe file stem), so the image does not depend on how many
        other scenes are rendered or in which order.
        """
        sid = recipe_path.stem
        store = self._get_store()
        recipe = read_recipe(recipe_path, store)
        if recipe.asset_store_path and Path(recipe.asset_store_path).resolve() != store.root:
            logger.debug(f"{sid}: recipe names store {recipe.asset_store_path}, rendering with {store.root}")
        cfg = self._config.render.model_copy(update={"seed": derive_seed(self._config.seed, "render", sid)})
        image, stats = render_with_stats(recipe, cfg, store, base_dir=self._config.base_dir)

        preview_path = self._run_paths.preview_file(sid)
        write_preview(image, preview_path, cfg.preview_scale)
        image_path = write_spectral_image(image, self._run_paths.irradiance_file(sid))

        stats_path = self.stats_file(sid)
        stats_path.write_text(json.dumps(stats.to_dict(), indent=2) + "\n", encoding="utf-8")
        return RenderedScene(sid, image_path, preview_path, stats_path, stats.vignetted_fraction, stats.elapsed)

    def render(self, recipe_paths: Sequence[Path]) -> BatchResult:
        """Render every recipe; a failing recipe does not stop the others.

        Returns:
            Batch result whose values are :class:`RenderedScene`
        """
        self._run_paths.get_irradiance_dir().mkdir(parents=True, exist_ok=True)
        paths = [Path(p) for p in recipe_paths]
        return BatchRunner("render", self._config.jobs).run(self.render_one, paths, [p.stem for p in paths])
