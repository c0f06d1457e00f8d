"""Run manifest: scenes, their derived seeds and the hashes of every artifact."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from autocam_sim.utils.seeds import stage_seeds

logger = logging.getLogger(__name__)

MANIFEST_VERSION = "1.0.0"


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """Everything needed to reproduce and verify a run.

    Paths are relative to the run directory, so two runs of the same
    configuration in different directories have the same content hash.
    """

    root: Path
    master_seed: int = 0
    scenes: dict[str, dict[str, Any]] = field(default_factory=dict)
    artifacts: dict[str, str] = field(default_factory=dict)

    def add_scene(self, scene_id: str, recipe_path: Path) -> None:
        self.scenes[scene_id] = {
            "recipe": self.relative(recipe_path),
            "seeds": stage_seeds(self.master_seed, scene_id),
        }

    def relative(self, path: Path) -> str:
        try:
            return Path(path).resolve().relative_to(self.root.resolve()).as_posix()
        except ValueError:
            return Path(path).resolve().as_posix()

    def record(self, *paths: Path) -> None:
        """Hash artifacts into the manifest."""
        for path in paths:
            self.artifacts[self.relative(path)] = file_sha256(Path(path))

    def content(self) -> dict[str, Any]:
        return {
            "$schema_version": MANIFEST_VERSION,
            "master_seed": self.master_seed,
            "scenes": {k: self.scenes[k] for k in sorted(self.scenes)},
            "artifacts": {k: self.artifacts[k] for k in sorted(self.artifacts)},
        }

    @property
    def content_sha256(self) -> str:
        text = json.dumps(self.content(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def write(self, path: Path) -> Path:
        data = self.content()
        data["content_sha256"] = self.content_sha256
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
        logger.debug(f"Manifest written to {path} ({len(self.artifacts)} artifacts)")
        return path

    @classmethod
    def load(cls, path: Path, root: Path) -> RunManifest:
        """Load an existing manifest, or start an empty one if there is none."""
        if not path.exists():
            return cls(root)
        data = json.loads(path.read_text(encoding="utf-8"))
        return cls(
            root=root,
            master_seed=int(data.get("master_seed", 0)),
            scenes=dict(data.get("scenes", {})),
            artifacts=dict(data.get("artifacts", {})),
        )
