"""Evaluate service: detections + rendered ground truth -> AP as a function of distance."""

from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

from autocam_sim.config_loader import GROUND_TRUTH_DETECTIONS, PipelineConfig
from autocam_sim.errors import ConfigError
from autocam_sim.evaluation.detections_io import (
    Detection,
    ground_truth_as_detections,
    read_detections,
    write_ground_truth,
)
from autocam_sim.evaluation.ground_truth import GroundTruthObject, ground_truth_from_image
from autocam_sim.evaluation.metrics import APByDistance, ap_by_distance, evaluate_ap
from autocam_sim.sceneformat.spectral_container import read_spectral_image
from autocam_sim.sensor.spec import SensorSpec
from autocam_sim.utils.paths import RunPaths

logger = logging.getLogger(__name__)


@dataclass
class EvaluationReport:
    """AP results and the files they were written to."""

    by_distance: APByDistance
    overall: dict[str, float | None]
    n_detections: int
    n_ground_truth: int
    files: list[Path] = field(default_factory=list)


class EvaluateService:
    """Service for scoring detections against ground truth."""

    def __init__(self, config: PipelineConfig, run_paths: RunPaths) -> None:
        """Initialize evaluate service.

        Args:
            config: Pipeline configuration
            run_paths: Output layout of the run
        """
        self._config = config
        self._run_paths = run_paths

    def ground_truth(self, image_paths: Sequence[Path], sensor: SensorSpec | None = None) -> list[GroundTruthObject]:
        """Extract ground truth from the metadata planes of rendered images.

        Args:
            image_paths: spectral containers; the file stem is the image id
            sensor: express boxes in this sensor's pixel grid instead of the render grid

        Returns:
            Ground-truth objects of every image, in image order
        """
        objects: list[GroundTruthObject] = []
        for path in image_paths:
            path = Path(path)
            img = read_spectral_image(path)
            scale = (1.0, 1.0)
            if sensor is not None:
                scale = (sensor.cols / img.width, sensor.rows / img.height)
            found = ground_truth_from_image(img, path.stem, self._config.evaluate.min_pixels, scale)
            logger.debug(f"{path.stem}: {len(found)} ground-truth objects")
            objects.extend(found)
        return objects

    def load_detections(self, reference: str | None, gts: Sequence[GroundTruthObject]) -> list[Detection]:
        """Read detections, or score the ground truth itself for ``ground_truth``.

        Raises:
            ConfigError: if no detection source is configured or the file is missing
            DetectionFormatError: malformed line, with its line number
        """
        reference = reference or self._config.evaluate.detections
        if reference is None:
            raise ConfigError("no detections configured", field_path="evaluate.detections")
        if reference == GROUND_TRUTH_DETECTIONS:
            return ground_truth_as_detections(gts)
        return read_detections(self._config.resolve(reference, "detections"))

    def evaluate(self, detections: Sequence[Detection], gts: Sequence[GroundTruthObject]) -> EvaluationReport:
        """Compute AP overall and per distance bin and write the result files.

        Writes ``ground_truth.txt``, ``ap_by_distance.json``,
        ``ap_by_distance.csv`` and ``ap_overall.json`` under the eval directory.
        """
        cfg = self._config.evaluate
        eval_dir = self._run_paths.get_eval_dir()
        eval_dir.mkdir(parents=True, exist_ok=True)

        by_distance = ap_by_distance(detections, gts, cfg.bin_edges, cfg.iou_threshold)
        overall = {c.value: ap for c, ap in evaluate_ap(detections, gts, cfg.iou_threshold).items()}
        overall_path = eval_dir / "ap_overall.json"
        overall_path.write_text(
            json.dumps({"iou_threshold": cfg.iou_threshold, "ap": overall}, indent=2) + "\n", encoding="utf-8"
        )
        files = [
            write_ground_truth(gts, eval_dir / "ground_truth.txt"),
            by_distance.write_json(eval_dir / "ap_by_distance.json"),
            by_distance.write_csv(eval_dir / "ap_by_distance.csv"),
            overall_path,
        ]
        logger.info(f"Evaluated {len(detections)} detections against {len(gts)} ground-truth objects")
        return EvaluationReport(by_distance, overall, len(detections), len(gts), files)
