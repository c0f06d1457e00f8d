"""Batch runner for processing the items of one pipeline stage in parallel."""

from __future__ import annotations

import logging
import threading
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Generic, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass
class ItemResult:
    """Outcome of one batch item."""

    item_id: str
    success: bool = False
    value: Any = None
    error: str | None = None


@dataclass
class BatchResult(Generic[T]):
    """Results of a whole batch, in submission order."""

    stage: str
    items: list[ItemResult] = field(default_factory=list)

    @property
    def succeeded(self) -> list[ItemResult]:
        return [item for item in self.items if item.success]

    @property
    def failed(self) -> list[ItemResult]:
        return [item for item in self.items if not item.success]

    @property
    def ok(self) -> bool:
        return not self.failed

    def values(self) -> list[Any]:
        return [item.value for item in self.succeeded]


class BatchRunner:
    """Run one function over many items with per-item failure isolation.

    An exception raised for one item is logged and recorded in its
    :class:`ItemResult`; the remaining items still run. Results keep the
    submission order whatever order the workers finish in.
    """

    def __init__(self, stage: str, max_workers: int = 1):
        """Initialize batch runner.

        Args:
            stage: stage name used in progress lines
            max_workers: maximum number of concurrent items
        """
        self.stage = stage
        self.max_workers = max(1, max_workers)
        self._done = 0
        self._lock = threading.Lock()

    def _run_one(self, func: Callable[[T], Any], item_id: str, item: T, total: int) -> ItemResult:
        result = ItemResult(item_id)
        try:
            result.value = func(item)
            result.success = True
        except Exception as e:
            result.error = f"{type(e).__name__}: {e}"
            logger.error(f"[{self.stage}] {item_id} failed: {result.error}")
            logger.debug(f"[{self.stage}] {item_id} traceback", exc_info=True)
        with self._lock:
            self._done += 1
            status = "done" if result.success else "FAILED"
            logger.info(f"[{self.stage}] {self._done}/{total} {item_id} {status}")
        return result

    def run(self, func: Callable[[T], Any], items: Sequence[T], ids: Sequence[str]) -> BatchResult:
        """Apply ``func`` to every item.

        Args:
            func: work for one item; its return value lands in ``ItemResult.value``
            items: work items
            ids: display id per item, same length as ``items``

        Returns:
            Batch result in submission order
        """
        if len(items) != len(ids):
            raise ValueError(f"{len(items)} items but {len(ids)} ids")
        batch = BatchResult(self.stage)
        self._done = 0
        total = len(items)
        if total == 0:
            logger.info(f"[{self.stage}] No items to process")
            return batch
        logger.info(f"[{self.stage}] Processing {total} item(s) on {self.max_workers} worker(s)")
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            futures = [pool.submit(self._run_one, func, item_id, item, total) for item, item_id in zip(items, ids)]
            batch.items = [future.result() for future in futures]
        if batch.failed:
            logger.warning(f"[{self.stage}] {len(batch.failed)}/{total} item(s) failed")
        return batch
