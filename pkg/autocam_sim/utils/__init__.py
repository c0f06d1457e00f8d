"""Utility modules."""

from autocam_sim.utils.batch_runner import BatchResult, BatchRunner, ItemResult
from autocam_sim.utils.manifest import RunManifest, file_sha256
from autocam_sim.utils.paths import RunPaths, get_bundled_config_dir, resolve_data_file
from autocam_sim.utils.seeds import derive_seed, stage_seeds

__all__ = [
    "BatchResult",
    "BatchRunner",
    "ItemResult",
    "RunManifest",
    "RunPaths",
    "derive_seed",
    "file_sha256",
    "get_bundled_config_dir",
    "resolve_data_file",
    "stage_seeds",
]
