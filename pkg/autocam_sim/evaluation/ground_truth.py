"""Ground-truth objects from the depth, class and instance metadata planes."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from autocam_sim.errors import GroundTruthError
from autocam_sim.evaluation.boxes import Box
from autocam_sim.models import ClassLabel
from autocam_sim.spectral import SpectralImage

logger = logging.getLogger(__name__)

MIN_PIXELS = 4


@dataclass(frozen=True)
class GroundTruthObject:
    image_id: str
    class_label: ClassLabel
    box: Box
    distance: float
    instance_id: int = 0
    pixel_count: int = 0


def extract_ground_truth(
    depth: np.ndarray,
    class_id: np.ndarray,
    instance_id: np.ndarray,
    image_id: str = "",
    min_pixels: int = MIN_PIXELS,
    discarded: list[int] | None = None,
) -> list[GroundTruthObject]:
    """One object per nonzero instance id, ordered by instance id.

    The box is the tight pixel box (x0, y0, x1, y1) with inclusive corner
    indices; distance is the smallest depth over the instance. Instances
    smaller than ``min_pixels`` are skipped and their ids appended to
    ``discarded`` when given.

    Raises:
        GroundTruthError: if an instance carries more than one class id,
            or the planes are misaligned.
    """
    depth = np.asarray(depth)
    class_id = np.asarray(class_id)
    instance_id = np.asarray(instance_id)
    if not depth.shape == class_id.shape == instance_id.shape:
        raise GroundTruthError(
            f"metadata planes disagree in shape: {depth.shape}, {class_id.shape}, {instance_id.shape}"
        )
    objects = []
    for inst in np.unique(instance_id):
        if inst == 0:
            continue
        ys, xs = np.nonzero(instance_id == inst)
        classes = np.unique(class_id[ys, xs])
        if classes.size != 1:
            raise GroundTruthError(
                f"instance {int(inst)} in image '{image_id}' has class ids {classes.tolist()}"
            )
        if ys.size < min_pixels:
            logger.debug(f"{image_id}: instance {int(inst)} has {ys.size} pixels, discarded")
            if discarded is not None:
                discarded.append(int(inst))
            continue
        try:
            label = ClassLabel.from_id(int(classes[0]))
        except ValueError as exc:
            raise GroundTruthError(f"instance {int(inst)}: {exc}") from exc
        objects.append(
            GroundTruthObject(
                image_id=image_id,
                class_label=label,
                box=Box(float(xs.min()), float(ys.min()), float(xs.max()), float(ys.max())),
                distance=float(depth[ys, xs].min()),
                instance_id=int(inst),
                pixel_count=int(ys.size),
            )
        )
    return objects


def ground_truth_from_image(
    img: SpectralImage, image_id: str, min_pixels: int = MIN_PIXELS, scale: tuple[float, float] = (1.0, 1.0)
) -> list[GroundTruthObject]:
    """Ground truth of a rendered image, optionally rescaled to another pixel grid.

    ``scale`` is (sx, sy), multiplying x and y box coordinates, for example
    to express boxes in sensor pixels when the render was supersampled.
    """
    if not img.has_metadata:
        raise GroundTruthError(f"image '{image_id}' carries no metadata planes")
    objects = extract_ground_truth(img.depth, img.class_id, img.instance_id, image_id, min_pixels)
    sx, sy = scale
    if (sx, sy) == (1.0, 1.0):
        return objects
    return [
        GroundTruthObject(
            o.image_id,
            o.class_label,
            Box(o.box.x0 * sx, o.box.y0 * sy, o.box.x1 * sx, o.box.y1 * sy),
            o.distance,
            o.instance_id,
            o.pixel_count,
        )
        for o in objects
    ]
