"""Boxes, matching, average precision and AP by distance."""

from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from autocam_sim.errors import DetectionFormatError, GroundTruthError
from autocam_sim.evaluation import (
    Box,
    Detection,
    GroundTruthObject,
    ap_by_distance,
    average_precision,
    evaluate_ap,
    extract_ground_truth,
    ground_truth_from_image,
    iou,
    iou_matrix,
    match,
    parse_detections,
    parse_ground_truth,
    read_detections,
    read_ground_truth,
    write_detections,
    write_ground_truth,
)
from autocam_sim.evaluation.detections_io import ground_truth_as_detections
from autocam_sim.models import ClassLabel
from autocam_sim.spectral import SpectralImage, WavelengthGrid

CAR = ClassLabel.CAR


def _gt(image: str, x: float, distance: float, label: ClassLabel = CAR) -> GroundTruthObject:
    return GroundTruthObject(image, label, Box(x, 0.0, x + 10.0, 10.0), distance)


def _det(image: str, x: float, score: float, label: ClassLabel = CAR) -> Detection:
    return Detection(image, label, Box(x, 0.0, x + 10.0, 10.0), score)


class TestBoxes:
    def test_half_overlap(self):
        assert iou(Box(0, 0, 10, 10), Box(5, 0, 15, 10)) == pytest.approx(1.0 / 3.0)

    def test_disjoint(self):
        assert iou(Box(0, 0, 1, 1), Box(2, 2, 3, 3)) == 0.0

    def test_identical_degenerate(self):
        assert iou(Box(3, 3, 3, 3), Box(3, 3, 3, 3)) == 1.0
        assert iou(Box(3, 3, 3, 3), Box(4, 4, 4, 4)) == 0.0

    def test_corner_order(self):
        with pytest.raises(ValueError):
            Box(2, 0, 1, 1)

    def test_matrix_matches_pairwise(self):
        rng = np.random.default_rng(0)
        boxes = []
        for _ in range(8):
            x, y = rng.uniform(0, 20, 2)
            w, h = rng.uniform(1, 10, 2)
            boxes.append(Box(x, y, x + w, y + h))
        table = iou_matrix(boxes[:3], boxes[3:])
        for i, a in enumerate(boxes[:3]):
            for j, b in enumerate(boxes[3:]):
                assert table[i, j] == pytest.approx(iou(a, b))
        assert iou_matrix([], boxes).shape == (0, 8)


def _reference_flags(dets, gts, threshold):
    """Plain-loop greedy assignment used as an oracle."""
    order = sorted(range(len(dets)), key=lambda i: -dets[i].score)
    taken = set()
    flags = []
    for i in order:
        best, best_j = -1.0, None
        for j, g in enumerate(gts):
            if j in taken:
                continue
            v = iou(dets[i].box, g.box)
            if v > best:
                best, best_j = v, j
        if best_j is not None and best >= threshold and best > 0:
            taken.add(best_j)
            flags.append(True)
        else:
            flags.append(False)
    return flags


class TestMatching:
    def test_highest_score_claims_first(self):
        gts = [_gt("a", 0.0, 10.0)]
        dets = [_det("a", 1.0, 0.4), _det("a", 0.0, 0.9)]
        result = match(dets, gts)
        assert result.order.tolist() == [1, 0]
        assert result.tp.tolist() == [True, False]
        assert result.gt_index.tolist() == [0, -1]
        assert result.best_gt.tolist() == [0, 0]

    def test_below_threshold_is_false_positive(self):
        result = match([_det("a", 6.0, 0.9)], [_gt("a", 0.0, 10.0)])
        assert result.tp.tolist() == [False]
        assert result.best_gt.tolist() == [0]

    def test_no_ground_truth(self):
        result = match([_det("a", 0.0, 0.5)], [])
        assert result.tp.tolist() == [False]
        assert result.best_gt.tolist() == [-1]

    def test_agrees_with_reference_on_small_instances(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            n_det, n_gt = rng.integers(0, 7, 2)
            gts = [_gt("a", float(x), 10.0) for x in rng.uniform(0, 30, n_gt)]
            dets = [_det("a", float(x), float(s)) for x, s in zip(rng.uniform(0, 30, n_det), rng.random(n_det))]
            result = match(dets, gts)
            assert result.tp.tolist() == _reference_flags(dets, gts, 0.5)


class TestAveragePrecision:
    def test_all_true_positives(self):
        assert average_precision([True, True, True], 3) == 1.0

    def test_single_miss(self):
        assert average_precision([False], 1) == 0.0

    def test_hand_computed_envelope(self):
        assert average_precision([True, False, True], 2) == pytest.approx(5.0 / 6.0)

    def test_no_ground_truth_is_absent(self):
        assert average_precision([], 0) is None
        assert average_precision([False], 0) is None

    def test_no_detections(self):
        assert average_precision([], 4) == 0.0

    def test_monotone_score_transform(self):
        gts = [_gt("a", 0.0, 10.0), _gt("a", 40.0, 20.0), _gt("b", 0.0, 30.0)]
        dets = [_det("a", 1.0, 0.9), _det("a", 20.0, 0.8), _det("a", 41.0, 0.3), _det("b", 2.0, 0.5)]
        squashed = [Detection(d.image_id, d.class_label, d.box, d.score**3) for d in dets]
        assert evaluate_ap(dets, gts) == evaluate_ap(squashed, gts)

    def test_duplicate_never_helps(self):
        gts = [_gt("a", 0.0, 10.0), _gt("a", 40.0, 20.0)]
        dets = [_det("a", 0.0, 0.9), _det("a", 40.0, 0.6)]
        base = evaluate_ap(dets, gts)[CAR]
        for score in (0.95, 0.7, 0.1):
            with_dup = evaluate_ap(dets + [_det("a", 0.5, score)], gts)[CAR]
            assert with_dup <= base

    def test_per_class(self):
        gts = [_gt("a", 0.0, 10.0), _gt("a", 30.0, 10.0, ClassLabel.PEDESTRIAN)]
        dets = [_det("a", 0.0, 0.9), _det("a", 30.0, 0.9, ClassLabel.CYCLIST)]
        result = evaluate_ap(dets, gts)
        assert result[CAR] == 1.0
        assert result[ClassLabel.PEDESTRIAN] == 0.0
        assert result[ClassLabel.CYCLIST] is None


class TestAPByDistance:
    def test_perfect_detections(self):
        gts = [_gt(f"i{k}", 0.0, 5.0 + 10.0 * k) for k in range(8)]
        result = ap_by_distance(ground_truth_as_detections(gts), gts)
        for ap, n in zip(result.ap[CAR], result.n_gt[CAR]):
            assert (ap == 1.0) if n else (ap is None)
        assert sum(result.n_gt[CAR]) == 8

    def test_far_dropout_lowers_far_bins_only(self):
        gts = [_gt(f"i{k}", 0.0, 2.0 + 2.5 * k) for k in range(40)]
        fine = ground_truth_as_detections(gts)
        coarse = [d for d, g in zip(fine, gts) if g.distance <= 40.0]
        edges = [0, 20, 40, 60, 80, 100]
        fine_ap = ap_by_distance(fine, gts, edges).ap[CAR]
        coarse_ap = ap_by_distance(coarse, gts, edges).ap[CAR]
        assert fine_ap[:2] == coarse_ap[:2]
        assert coarse_ap[2] < fine_ap[2]
        assert coarse_ap[3] < fine_ap[3]

    def test_single_bin_equals_plain_ap(self):
        rng = np.random.default_rng(2)
        gts = [_gt("a", float(20 * k), float(rng.uniform(1, 90))) for k in range(6)]
        dets = [_det("a", float(x), float(s)) for x, s in zip(rng.uniform(0, 120, 10), rng.random(10))]
        dets.append(_det("a", 500.0, 0.99))
        pooled = ap_by_distance(dets, gts, [0.0, 100.0])
        assert pooled.ap[CAR][0] == pytest.approx(evaluate_ap(dets, gts)[CAR])
        assert pooled.unassigned_fp[CAR] == 0

    def test_unassigned_false_positives(self):
        gts = [_gt("a", 0.0, 15.0)]
        dets = [_det("a", 0.0, 0.5), _det("a", 300.0, 0.9)]
        result = ap_by_distance(dets, gts, [0, 10, 20])
        assert result.unassigned_fp[CAR] == 1
        assert result.ap[CAR] == [None, 1.0]

    def test_unmatched_detection_goes_to_best_overlap_bin(self):
        gts = [_gt("a", 0.0, 5.0), _gt("a", 100.0, 15.0)]
        dets = [_det("a", 0.0, 0.9), _det("a", 106.0, 0.8)]
        result = ap_by_distance(dets, gts, [0, 10, 20])
        assert result.ap[CAR] == [1.0, 0.0]

    @pytest.mark.parametrize("edges", [[0.0], [10.0, 10.0], [20.0, 10.0]])
    def test_bad_edges(self, edges):
        with pytest.raises(ValueError):
            ap_by_distance([], [], edges)

    def test_outputs(self, tmp_path):
        gts = [_gt("a", 0.0, 5.0), _gt("a", 40.0, 15.0, ClassLabel.PEDESTRIAN)]
        result = ap_by_distance(ground_truth_as_detections(gts), gts, [0, 10, 20])
        data = json.loads(result.write_json(tmp_path / "ap.json").read_text(encoding="utf-8"))
        assert data["bin_edges_m"] == [0.0, 10.0, 20.0]
        assert data["classes"]["car"]["ap"] == [1.0, None]
        with open(result.write_csv(tmp_path / "ap.csv"), encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["bin_center", "class", "ap", "n_gt"]
        assert ["5", "car", "1.000000", "1"] in rows
        assert ["15", "car", "", "0"] in rows
        assert "pedestrian" in result.summary_table()


class TestGroundTruth:
    def _planes(self):
        depth = np.zeros((6, 8))
        class_id = np.zeros((6, 8), dtype=np.int32)
        instance_id = np.zeros((6, 8), dtype=np.int32)
        depth[1:3, 1:4] = [[12.0, 11.0, 12.0], [12.5, 11.5, 13.0]]
        class_id[1:3, 1:4] = CAR.id
        instance_id[1:3, 1:4] = 4
        depth[4, 6] = 30.0
        class_id[4, 6] = ClassLabel.PEDESTRIAN.id
        instance_id[4, 6] = 9
        return depth, class_id, instance_id

    def test_tight_box_and_nearest_depth(self):
        discarded: list[int] = []
        (obj,) = extract_ground_truth(*self._planes(), image_id="s0", discarded=discarded)
        assert obj.box == Box(1.0, 1.0, 3.0, 2.0)
        assert obj.distance == 11.0
        assert obj.class_label == CAR
        assert obj.pixel_count == 6
        assert discarded == [9]

    def test_small_instances_kept_when_allowed(self):
        objects = extract_ground_truth(*self._planes(), min_pixels=1)
        assert [o.instance_id for o in objects] == [4, 9]

    def test_mixed_class_instance(self):
        depth, class_id, instance_id = self._planes()
        class_id[1, 1] = ClassLabel.SIGN.id
        with pytest.raises(GroundTruthError, match="instance 4"):
            extract_ground_truth(depth, class_id, instance_id)

    def test_misaligned_planes(self):
        depth, class_id, instance_id = self._planes()
        with pytest.raises(GroundTruthError):
            extract_ground_truth(depth[:5], class_id, instance_id)

    def test_from_image_with_scale(self):
        grid = WavelengthGrid(400.0, 700.0, 2)
        depth, class_id, instance_id = self._planes()
        img = SpectralImage(8, 6, grid, np.zeros((6, 8, 2)), depth, class_id, instance_id)
        (obj,) = ground_truth_from_image(img, "s0", scale=(0.5, 0.5))
        assert obj.box == Box(0.5, 0.5, 1.5, 1.0)

    def test_image_without_metadata(self):
        img = SpectralImage(2, 2, WavelengthGrid(400.0, 700.0, 2), np.zeros((2, 2, 2)))
        with pytest.raises(GroundTruthError):
            ground_truth_from_image(img, "s0")


class TestDetectionFiles:
    def test_round_trip(self, tmp_path):
        dets = [_det("scene_0001", 1.5, 0.75), _det("scene_0002", 3.0, 0.5, ClassLabel.PEDESTRIAN)]
        assert read_detections(write_detections(dets, tmp_path / "d.txt")) == dets
        gts = [_gt("scene_0001", 1.5, 12.25)]
        assert read_ground_truth(write_ground_truth(gts, tmp_path / "g.txt")) == gts

    def test_comments_and_blank_lines(self):
        text = "# header\n\nscene_0001 car 0 0 10 10 0.9  # trailing\n"
        (det,) = parse_detections(text)
        assert det.score == 0.9

    @pytest.mark.parametrize(
        "line, message",
        [
            ("scene car 0 0 10 10", "expected 7 fields"),
            ("scene truck 0 0 10 10 0.5", "unknown class"),
            ("scene car 0 0 ten 10 0.5", "not a number"),
            ("scene car 10 0 0 10 0.5", "empty box"),
            ("scene car 0 0 10 10 1.5", "outside"),
            ("scene car 0 0 10 nan 0.5", "finite"),
        ],
    )
    def test_errors_carry_line_number(self, line, message):
        text = f"# detections\nscene car 0 0 1 1 0.5\n{line}\n"
        with pytest.raises(DetectionFormatError, match=message) as info:
            parse_detections(text)
        assert info.value.line == 3

    def test_ground_truth_distance_positive(self):
        with pytest.raises(DetectionFormatError, match="distance"):
            parse_ground_truth("scene car 0 0 1 1 0\n")

    def test_ground_truth_allows_point_boxes(self):
        (gt,) = parse_ground_truth("scene car 4 4 4 4 8.5\n")
        assert gt.box.area == 0.0
