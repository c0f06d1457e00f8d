"""Assemble service: road network + traffic statistics -> scene recipes."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from autocam_sim.assembly.placement_log import PlacementLog
from autocam_sim.assembly.recipe_builder import assemble_recipe
from autocam_sim.config_loader import PipelineConfig, load_road_network
from autocam_sim.errors import ConfigError
from autocam_sim.sceneformat.asset_store import AssetStore
from autocam_sim.sceneformat.recipe_io import write_recipe
from autocam_sim.utils.batch_runner import BatchResult, BatchRunner
from autocam_sim.utils.paths import RunPaths
from autocam_sim.utils.seeds import derive_seed

logger = logging.getLogger(__name__)


def scene_id(index: int) -> str:
    return f"scene_{index:04d}"


@dataclass(frozen=True)
class AssembledScene:
    scene_id: str
    recipe_path: Path
    log_path: Path
    seed: int
    n_objects: int


class AssembleService:
    """Service for generating scene recipes."""

    def __init__(self, config: PipelineConfig, run_paths: RunPaths) -> None:
        """Initialize assemble service.

        Args:
            config: Pipeline configuration
            run_paths: Output layout of the run
        """
        self._config = config
        self._run_paths = run_paths

    def open_store(self) -> AssetStore:
        """Open the configured asset store.

        Raises:
            ConfigError: if the store is missing or holds no assets
        """
        root = self._config.asset_store_dir
        try:
            store = AssetStore(root, grid=self._config.render.wavelength_grid)
        except FileNotFoundError as e:
            raise ConfigError(str(e), field_path="paths.asset_store") from e
        if not store.list_assets():
            raise ConfigError(f"asset store {root} holds no assets", field_path="paths.asset_store")
        return store

    def assemble(self, n_scenes: int | None = None) -> BatchResult:
        """Write ``n_scenes`` recipes, each with its own seed derived from the master seed.

        Args:
            n_scenes: number of scenes (defaults to ``assemble.n_scenes``)

        Returns:
            Batch result whose values are :class:`AssembledScene`

        Raises:
            ConfigError: invalid road, traffic statistics or asset store
        """
        cfg = self._config.assemble
        n = cfg.n_scenes if n_scenes is None else n_scenes
        road = load_road_network(self._config.resolve(cfg.road, "roads"))
        store = self.open_store()
        # validate the shared statistics once so a bad config is a config error, not n failures
        self._config.traffic_config(0)
        ids = [scene_id(i) for i in range(n)]

        def build(sid: str) -> AssembledScene:
            seed = derive_seed(self._config.seed, "assemble", sid)
            log = PlacementLog()
            recipe = assemble_recipe(
                road,
                self._config.traffic_config(seed),
                store,
                cfg.camera,
                cfg.lighting,
                cfg.shutter,
                log,
            )
            recipe_path = write_recipe(recipe, self._run_paths.recipe_file(sid))
            log_path = log.write(self._run_paths.placement_log_file(sid))
            return AssembledScene(sid, recipe_path, log_path, seed, len(recipe.objects))

        return BatchRunner("assemble", self._config.jobs).run(build, ids, ids)
