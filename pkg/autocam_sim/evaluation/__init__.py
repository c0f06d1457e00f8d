"""Detection scoring against rendered ground truth."""

from autocam_sim.evaluation.boxes import Box, iou, iou_matrix
from autocam_sim.evaluation.detections_io import (
    Detection,
    parse_detections,
    parse_ground_truth,
    read_detections,
    read_ground_truth,
    write_detections,
    write_ground_truth,
)
from autocam_sim.evaluation.ground_truth import GroundTruthObject, extract_ground_truth, ground_truth_from_image
from autocam_sim.evaluation.matching import MatchResult, match
from autocam_sim.evaluation.metrics import APByDistance, ap_by_distance, average_precision, evaluate_ap

__all__ = [
    "APByDistance",
    "Box",
    "Detection",
    "GroundTruthObject",
    "MatchResult",
    "ap_by_distance",
    "average_precision",
    "evaluate_ap",
    "extract_ground_truth",
    "ground_truth_from_image",
    "iou",
    "iou_matrix",
    "match",
    "parse_detections",
    "parse_ground_truth",
    "read_detections",
    "read_ground_truth",
    "write_detections",
    "write_ground_truth",
]
