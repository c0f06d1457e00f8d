"""Line-oriented detection and ground-truth files.

Detections: ``image_id class x0 y0 x1 y1 score``.
Ground truth: ``image_id class x0 y0 x1 y1 distance``.
Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

from autocam_sim.errors import DetectionFormatError
from autocam_sim.evaluation.boxes import Box
from autocam_sim.evaluation.ground_truth import GroundTruthObject
from autocam_sim.models import ClassLabel

_FIELDS = 7


@dataclass(frozen=True)
class Detection:
    image_id: str
    class_label: ClassLabel
    box: Box
    score: float


def _records(text: str) -> Iterable[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != _FIELDS:
            raise DetectionFormatError(f"expected {_FIELDS} fields, found {len(parts)}", lineno)
        yield lineno, parts


def _parse_common(parts: list[str], lineno: int, allow_degenerate: bool = False) -> tuple[ClassLabel, Box, float]:
    try:
        label = ClassLabel(parts[1])
    except ValueError:
        raise DetectionFormatError(f"unknown class '{parts[1]}'", lineno) from None
    try:
        numbers = [float(p) for p in parts[2:]]
    except ValueError as exc:
        raise DetectionFormatError(f"not a number: {exc}", lineno) from None
    if not all(math.isfinite(v) for v in numbers):
        raise DetectionFormatError("values must be finite", lineno)
    x0, y0, x1, y1, last = numbers
    if x1 < x0 or y1 < y0 or (not allow_degenerate and (x1 == x0 or y1 == y0)):
        raise DetectionFormatError(f"empty box ({x0}, {y0}, {x1}, {y1})", lineno)
    return label, Box(x0, y0, x1, y1), last


def parse_detections(text: str) -> list[Detection]:
    """Parse detection lines.

    Raises:
        DetectionFormatError: with the offending line number.
    """
    detections = []
    for lineno, parts in _records(text):
        label, box, score = _parse_common(parts, lineno)
        if not 0.0 <= score <= 1.0:
            raise DetectionFormatError(f"score {score} outside [0, 1]", lineno)
        detections.append(Detection(parts[0], label, box, score))
    return detections


def parse_ground_truth(text: str) -> list[GroundTruthObject]:
    objects = []
    for lineno, parts in _records(text):
        label, box, distance = _parse_common(parts, lineno, allow_degenerate=True)
        if distance <= 0:
            raise DetectionFormatError(f"distance {distance} must be > 0", lineno)
        objects.append(GroundTruthObject(parts[0], label, box, distance))
    return objects


def read_detections(path: Path | str) -> list[Detection]:
    return parse_detections(Path(path).read_text(encoding="utf-8"))


def read_ground_truth(path: Path | str) -> list[GroundTruthObject]:
    return parse_ground_truth(Path(path).read_text(encoding="utf-8"))


def _line(image_id: str, label: ClassLabel, box: Box, last: float) -> str:
    return f"{image_id} {label.value} {box.x0:g} {box.y0:g} {box.x1:g} {box.y1:g} {last:.6g}"


def write_detections(detections: Iterable[Detection], path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# image_id class x0 y0 x1 y1 score"]
    lines += [_line(d.image_id, d.class_label, d.box, d.score) for d in detections]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_ground_truth(objects: Iterable[GroundTruthObject], path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# image_id class x0 y0 x1 y1 distance"]
    lines += [_line(o.image_id, o.class_label, o.box, o.distance) for o in objects]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def ground_truth_as_detections(objects: Iterable[GroundTruthObject]) -> list[Detection]:
    """Perfect detections (score 1) for pipeline self-checks."""
    return [Detection(o.image_id, o.class_label, o.box, 1.0) for o in objects]
