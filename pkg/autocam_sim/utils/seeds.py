"""Stage seeds derived from one master seed.

``derive_seed(master, stage, key)`` is the first 8 bytes (big endian) of
``sha256(f"{master}:{stage}:{key}")``. Every stochastic stage draws its
seed this way, so a run is reproduced from the master seed alone and
adding a scene never shifts the seeds of the others.
"""

from __future__ import annotations

import hashlib

STAGES = ("assemble", "render", "sensor")


def derive_seed(master: int, stage: str, key: str | int = "") -> int:
    """Derive a 64-bit seed for one stage item.

    Args:
        master: master seed of the run
        stage: stage name, e.g. ``"render"``
        key: item key within the stage, e.g. a scene id

    Returns:
        Seed in [0, 2**64)
    """
    digest = hashlib.sha256(f"{master}:{stage}:{key}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def stage_seeds(master: int, key: str | int = "") -> dict[str, int]:
    """Seeds of every stage for one item, as recorded in the run manifest."""
    return {stage: derive_seed(master, stage, key) for stage in STAGES}
