"""Average precision overall and as a function of object distance."""

from __future__ import annotations

import csv
import json
import logging
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from autocam_sim.evaluation.detections_io import Detection
from autocam_sim.evaluation.ground_truth import GroundTruthObject
from autocam_sim.evaluation.matching import DEFAULT_IOU_THRESHOLD, match
from autocam_sim.models import ClassLabel

logger = logging.getLogger(__name__)

DEFAULT_BIN_EDGES = tuple(float(x) for x in range(0, 160, 10))


def average_precision(flags: Sequence[bool], n_gt: int) -> float | None:
    """All-point interpolated AP of score-ordered TP/FP flags.

    Returns None when there is no ground truth.
    """
    if n_gt <= 0:
        return None
    flags = np.asarray(flags, dtype=bool)
    if flags.size == 0:
        return 0.0
    tp = np.cumsum(flags)
    fp = np.cumsum(~flags)
    precision = tp / (tp + fp)
    recall = tp / n_gt
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    prev_recall = np.concatenate(([0.0], recall[:-1]))
    return float(np.sum((recall - prev_recall) * envelope))


def _group(items: Iterable, key) -> dict:
    out: dict = defaultdict(list)
    for item in items:
        out[key(item)].append(item)
    return out


@dataclass
class _Scored:
    score: float
    tp: bool


def _matched_per_class(
    dets: Sequence[Detection], gts: Sequence[GroundTruthObject], iou_threshold: float
) -> dict[ClassLabel, list[tuple[_Scored, GroundTruthObject | None, GroundTruthObject | None]]]:
    """Per class: every detection with its TP flag, matched GT and best-overlap GT."""
    det_groups = _group(dets, lambda d: (d.class_label, d.image_id))
    gt_groups = _group(gts, lambda g: (g.class_label, g.image_id))
    out: dict = defaultdict(list)
    for key in sorted(set(det_groups) | set(gt_groups), key=lambda k: (k[0].id, k[1])):
        d_list = det_groups.get(key, [])
        g_list = gt_groups.get(key, [])
        result = match(d_list, g_list, iou_threshold)
        for k in range(len(result.order)):
            matched = g_list[result.gt_index[k]] if result.gt_index[k] >= 0 else None
            best = g_list[result.best_gt[k]] if result.best_gt[k] >= 0 else None
            out[key[0]].append((_Scored(float(result.scores[k]), bool(result.tp[k])), matched, best))
    return out


def _ap_of(scored: list[_Scored], n_gt: int) -> float | None:
    # stable sort keeps the per-image order among equal scores
    ordered = sorted(scored, key=lambda s: -s.score)
    return average_precision([s.tp for s in ordered], n_gt)


def evaluate_ap(
    dets: Sequence[Detection], gts: Sequence[GroundTruthObject], iou_threshold: float = DEFAULT_IOU_THRESHOLD
) -> dict[ClassLabel, float | None]:
    """AP per class over all images; classes come from either input."""
    matched = _matched_per_class(dets, gts, iou_threshold)
    n_gt = _group(gts, lambda g: g.class_label)
    classes = sorted(set(matched) | set(n_gt), key=lambda c: c.id)
    return {c: _ap_of([m[0] for m in matched.get(c, [])], len(n_gt.get(c, []))) for c in classes}


@dataclass
class APByDistance:
    """AP per (class, distance bin); None where a bin holds no ground truth."""

    edges: list[float]
    ap: dict[ClassLabel, list[float | None]] = field(default_factory=dict)
    n_gt: dict[ClassLabel, list[int]] = field(default_factory=dict)
    unassigned_fp: dict[ClassLabel, int] = field(default_factory=dict)
    iou_threshold: float = DEFAULT_IOU_THRESHOLD

    @property
    def centers(self) -> list[float]:
        return [(a + b) / 2.0 for a, b in zip(self.edges[:-1], self.edges[1:])]

    def to_dict(self) -> dict[str, Any]:
        return {
            "iou_threshold": self.iou_threshold,
            "bin_edges_m": self.edges,
            "classes": {
                c.value: {
                    "ap": self.ap[c],
                    "n_gt": self.n_gt[c],
                    "unassigned_fp": self.unassigned_fp.get(c, 0),
                }
                for c in sorted(self.ap, key=lambda c: c.id)
            },
        }

    def write_json(self, path: Path | str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")
        return path

    def write_csv(self, path: Path | str) -> Path:
        """Plot data: one row per (bin, class) with ``bin_center,class,ap,n_gt``; absent AP is empty."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["bin_center", "class", "ap", "n_gt"])
            for c in sorted(self.ap, key=lambda c: c.id):
                for center, ap, n in zip(self.centers, self.ap[c], self.n_gt[c]):
                    writer.writerow([f"{center:g}", c.value, "" if ap is None else f"{ap:.6f}", n])
        return path

    def summary_table(self) -> str:
        lines = [f"{'bin (m)':>12}  " + "  ".join(f"{c.value:>14}" for c in sorted(self.ap, key=lambda c: c.id))]
        for b, (lo, hi) in enumerate(zip(self.edges[:-1], self.edges[1:])):
            cells = []
            for c in sorted(self.ap, key=lambda c: c.id):
                ap = self.ap[c][b]
                text = "-" if ap is None else f"{ap:.3f}"
                cells.append(f"{text:>8} ({self.n_gt[c][b]:>3})")
            lines.append(f"{f'{lo:g}-{hi:g}':>12}  " + "  ".join(f"{cell:>14}" for cell in cells))
        return "\n".join(lines)


def ap_by_distance(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthObject],
    bins: Sequence[float] = DEFAULT_BIN_EDGES,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
) -> APByDistance:
    """AP per class and ground-truth distance bin.

    A detection belongs to the bin of the ground truth it matched, or, if
    unmatched, of the ground truth it overlaps most. Unmatched detections
    overlapping nothing are counted in ``unassigned_fp``; with a single bin
    they join that bin, so one all-covering bin reproduces plain AP.
    Ground truth outside the bin range is ignored.

    Raises:
        ValueError: if the bin edges are not strictly increasing.
    """
    edges = [float(e) for e in bins]
    if len(edges) < 2 or any(b <= a for a, b in zip(edges[:-1], edges[1:])):
        raise ValueError("distance bin edges must be at least two strictly increasing values")
    n_bins = len(edges) - 1

    def bin_of(gt: GroundTruthObject) -> int:
        b = int(np.searchsorted(edges, gt.distance, side="right")) - 1
        if b == n_bins and gt.distance == edges[-1]:
            b = n_bins - 1
        return b if 0 <= b < n_bins else -1

    matched = _matched_per_class(dets, gts, iou_threshold)
    gt_by_class = _group(gts, lambda g: g.class_label)
    result = APByDistance(edges=edges, iou_threshold=iou_threshold)
    for c in sorted(set(matched) | set(gt_by_class), key=lambda c: c.id):
        counts = [0] * n_bins
        for gt in gt_by_class.get(c, []):
            b = bin_of(gt)
            if b >= 0:
                counts[b] += 1
        per_bin: list[list[_Scored]] = [[] for _ in range(n_bins)]
        unassigned = 0
        for scored, gt_match, gt_best in matched.get(c, []):
            anchor = gt_match or gt_best
            if anchor is None:
                if n_bins == 1:
                    per_bin[0].append(scored)
                else:
                    unassigned += 1
                continue
            b = bin_of(anchor)
            if b >= 0:
                per_bin[b].append(scored)
        result.ap[c] = [_ap_of(per_bin[b], counts[b]) for b in range(n_bins)]
        result.n_gt[c] = counts
        result.unassigned_fp[c] = unassigned
        if unassigned:
            logger.info(f"{c.value}: {unassigned} false positives overlap no ground truth and sit in no bin")
    return result
