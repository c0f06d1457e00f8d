"""
Camera simulation pipeline.
Assembles driving scenes, renders spectral irradiance, simulates sensors and
scores detections against the rendered ground truth.

Usage:
    python -m autocam_sim <assemble|render|sensor|evaluate|all> [--config FILE]
        [--seed N] [--jobs N] [--out DIR] [-v]

Exit codes: 0 success, 1 an item failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from autocam_sim.config_loader import GROUND_TRUTH_DETECTIONS, PipelineConfig, load_pipeline_config
from autocam_sim.errors import ConfigError, SimulationError
from autocam_sim.evaluation.detections_io import read_ground_truth
from autocam_sim.services import AssembleService, EvaluateService, RenderService, SensorService
from autocam_sim.sensor.pixel_model import SensorResponse
from autocam_sim.sensor.spec import SensorSpec
from autocam_sim.utils.batch_runner import BatchResult
from autocam_sim.utils.manifest import RunManifest
from autocam_sim.utils.paths import RunPaths

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


class StageFailed(Exception):
    """Raised by a stage whose whole run (not a single item) could not complete."""


def load_sensors(
    service: SensorService, references: Sequence[str] | None = None
) -> tuple[list[SensorSpec], dict[str, SensorResponse]]:
    """Load sensor specs and their filter data, reporting problems as config errors.

    Raises:
        ConfigError: with field path ``sensors``
    """
    try:
        specs = service.load_specs(references)
        return specs, service.load_responses(specs)
    except SimulationError as e:
        raise ConfigError(str(e), field_path="sensors") from e


class Pipeline:
    """One CLI invocation: configuration, run directory and manifest."""

    def __init__(self, config: PipelineConfig) -> None:
        """Initialize pipeline.

        Args:
            config: Validated pipeline configuration
        """
        self.config = config
        self.paths = RunPaths(config.out_dir)
        self.paths.ensure_directories()
        self.manifest = RunManifest.load(self.paths.get_manifest_file(), self.paths.root)
        self.manifest.master_seed = config.seed
        self.failed = False

    def _report(self, batch: BatchResult) -> None:
        print(f"[{batch.stage}] {len(batch.succeeded)} ok, {len(batch.failed)} failed")
        for item in batch.failed:
            print(f"  [X] {item.item_id}: {item.error}")
        if batch.failed:
            self.failed = True

    def assemble(self, n_scenes: int | None = None) -> list[Path]:
        """Write recipes and start a fresh manifest for them."""
        batch = AssembleService(self.config, self.paths).assemble(n_scenes)
        self.manifest = RunManifest(self.paths.root, master_seed=self.config.seed)
        for scene in batch.values():
            self.manifest.add_scene(scene.scene_id, scene.recipe_path)
            self.manifest.record(scene.recipe_path, scene.log_path)
        self._report(batch)
        return [scene.recipe_path for scene in batch.values()]

    def render(self, recipe_paths: Sequence[Path] | None = None) -> list[Path]:
        if recipe_paths is None:
            recipe_paths = sorted(self.paths.get_recipes_dir().glob("*.json"))
        batch = RenderService(self.config, self.paths).render(recipe_paths)
        for scene in batch.values():
            self.manifest.record(scene.image_path, scene.preview_path)
            print(f"  {scene.scene_id}: vignetted {scene.vignetted_fraction:.1%}, {scene.elapsed:.1f}s")
        self._report(batch)
        return [scene.image_path for scene in batch.values()]

    def sensor(self, image_paths: Sequence[Path] | None = None, sensors: Sequence[str] | None = None) -> None:
        if image_paths is None:
            image_paths = sorted(self.paths.get_irradiance_dir().glob("*.spim"))
        service = SensorService(self.config, self.paths)
        specs, responses = load_sensors(service, sensors)
        if not specs:
            print("[sensor] no sensors configured, nothing to do")
            return
        batch = service.simulate(image_paths, specs, responses)
        for output in batch.values():
            self.manifest.record(output.image_path, output.sidecar_path)
        self._report(batch)

    def evaluate(
        self,
        image_paths: Sequence[Path] | None = None,
        detections: str | None = None,
        ground_truth: Path | None = None,
    ) -> None:
        service = EvaluateService(self.config, self.paths)
        try:
            if ground_truth is not None:
                gts = read_ground_truth(ground_truth)
            else:
                if image_paths is None:
                    image_paths = sorted(self.paths.get_irradiance_dir().glob("*.spim"))
                sensor = None
                if self.config.evaluate.sensor:
                    sensor = SensorService(self.config, self.paths).load_specs([self.config.evaluate.sensor])[0]
                gts = service.ground_truth(image_paths, sensor)
            dets = service.load_detections(detections, gts)
            report = service.evaluate(dets, gts)
        except ConfigError:
            raise
        except SimulationError as e:
            raise StageFailed(f"evaluate: {e}") from e
        self.manifest.record(*report.files)

        print("\n" + "=" * 60)
        print(f"AP BY DISTANCE (IoU {report.by_distance.iou_threshold:g})")
        print("=" * 60)
        print(report.by_distance.summary_table())
        print("\nOverall AP:")
        for label, ap in report.overall.items():
            print(f"  {label:>14}: {'-' if ap is None else f'{ap:.3f}'}")
        print(f"\n{report.n_detections} detections, {report.n_ground_truth} ground-truth objects")

    def finish(self) -> int:
        path = self.manifest.write(self.paths.get_manifest_file())
        print("\n" + "=" * 60)
        print(f"Run directory: {self.paths.root}")
        print(f"Manifest: {path.name} ({len(self.manifest.scenes)} scenes, {len(self.manifest.artifacts)} artifacts)")
        print(f"Content hash: {self.manifest.content_sha256}")
        print("=" * 60)
        return EXIT_FAILED if self.failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Pipeline config (YAML or JSON; default: bundled pipeline.yaml)")
    common.add_argument("--seed", type=int, help="Master seed overriding the config")
    common.add_argument("--jobs", type=int, help="Items processed concurrently within a stage")
    common.add_argument("--out", type=Path, help="Run output directory overriding the config")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(
        prog="autocam-sim",
        description="Simulate automotive camera images from procedurally assembled driving scenes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assemble", parents=[common], help="Generate scene recipes")
    p.add_argument("--n-scenes", type=int, help="Number of scenes (default: assemble.n_scenes)")

    p = sub.add_parser("render", parents=[common], help="Render recipes to spectral irradiance")
    p.add_argument("recipes", nargs="*", type=Path, help="Recipe files (default: the run's recipes)")

    p = sub.add_parser("sensor", parents=[common], help="Simulate sensors on irradiance images")
    p.add_argument("images", nargs="*", type=Path, help="Spectral containers (default: the run's images)")
    p.add_argument("--sensor", action="append", dest="sensors", help="Sensor spec; repeat for several")

    p = sub.add_parser("evaluate", parents=[common], help="Score detections against ground truth")
    p.add_argument("images", nargs="*", type=Path, help="Spectral containers carrying ground truth")
    p.add_argument("--detections", help=f"Detection file, or '{GROUND_TRUTH_DETECTIONS}' for a self-check")
    p.add_argument("--ground-truth", type=Path, help="Ground-truth file instead of rendered metadata")

    sub.add_parser("all", parents=[common], help="Run every enabled stage in order")
    return parser


def _run(pipeline: Pipeline, args: argparse.Namespace) -> None:
    config = pipeline.config
    if args.command == "assemble":
        if args.n_scenes is not None and args.n_scenes < 0:
            raise ConfigError("--n-scenes must be >= 0")
        pipeline.assemble(args.n_scenes)
    elif args.command == "render":
        pipeline.render(args.recipes or None)
    elif args.command == "sensor":
        pipeline.sensor(args.images or None, args.sensors)
    elif args.command == "evaluate":
        pipeline.evaluate(args.images or None, args.detections, args.ground_truth)
    else:
        recipes = pipeline.assemble() if config.stages.assemble else None
        images = pipeline.render(recipes) if config.stages.render else None
        if config.stages.sensor:
            pipeline.sensor(images)
        if config.stages.evaluate and config.evaluate.detections:
            pipeline.evaluate(images)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s: %(message)s",
    )

    try:
        config = load_pipeline_config(args.config)
        config = config.with_overrides(seed=args.seed, jobs=args.jobs, out=args.out)
        if args.command == "all":
            config.check_references()
            if config.stages.sensor:
                load_sensors(SensorService(config, RunPaths(config.out_dir)))
        pipeline = Pipeline(config)
    except ConfigError as e:
        print(f"Error: {e}")
        return EXIT_CONFIG

    print(f"Running '{args.command}' (seed {config.seed}, {config.jobs} job(s))")
    print("=" * 60)
    try:
        _run(pipeline, args)
    except ConfigError as e:
        print(f"Error: {e}")
        return EXIT_CONFIG
    except StageFailed as e:
        print(f"Error: {e}")
        pipeline.failed = True
    return pipeline.finish()


if __name__ == "__main__":
    sys.exit(main())
