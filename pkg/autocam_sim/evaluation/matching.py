"""Greedy score-ordered matching of detections to ground truth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from autocam_sim.evaluation.boxes import iou_matrix

DEFAULT_IOU_THRESHOLD = 0.5


@dataclass(frozen=True)
class MatchResult:
    """Outcome per detection, in descending score order.

    ``order[k]`` is the input index of the k-th detection; ``gt_index[k]``
    the matched ground truth or -1; ``best_gt[k]`` the ground truth with the
    largest IoU (any, matched or not) or -1 when nothing overlaps.
    """

    order: np.ndarray
    tp: np.ndarray
    gt_index: np.ndarray
    best_gt: np.ndarray
    scores: np.ndarray


def match(dets, gts, iou_threshold: float = DEFAULT_IOU_THRESHOLD) -> MatchResult:
    """Match one image's detections of one class to its ground truth.

    Detections are taken by descending score (ties keep input order); each
    claims the unmatched ground truth with the highest IoU, provided that
    IoU reaches ``iou_threshold``. Anything else is a false positive.
    """
    scores = np.array([d.score for d in dets], dtype=np.float64)
    order = np.argsort(-scores, kind="stable")
    overlaps = iou_matrix([dets[i].box for i in order], [g.box for g in gts])
    taken = np.zeros(len(gts), dtype=bool)
    tp = np.zeros(len(order), dtype=bool)
    gt_index = np.full(len(order), -1, dtype=np.int64)
    best_gt = np.full(len(order), -1, dtype=np.int64)
    for k in range(len(order)):
        if not len(gts):
            break
        row = overlaps[k]
        if row.max() > 0:
            best_gt[k] = int(np.argmax(row))
        free = np.where(taken, -1.0, row)
        j = int(np.argmax(free))
        if free[j] >= iou_threshold and free[j] > 0:
            taken[j] = True
            tp[k] = True
            gt_index[k] = j
    return MatchResult(order, tp, gt_index, best_gt, scores[order])
