"""Line-oriented record of placement decisions written next to each recipe."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)


@dataclass
class PlacementLog:
    lines: list[str] = field(default_factory=list)

    def add(self, event: str, **fields: object) -> None:
        details = " ".join(f"{k}={v}" for k, v in fields.items())
        line = f"{event} {details}".rstrip()
        self.lines.append(line)
        logger.debug(line)

    def skipped(self) -> list[str]:
        return [line for line in self.lines if line.startswith("skipped")]

    def __len__(self) -> int:
        return len(self.lines)

    def __iter__(self):
        return iter(self.lines)

    def write(self, path: Path | str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("".join(f"{line}\n" for line in self.lines), encoding="utf-8")
        return path
