"""Local on-disk asset store.

Layout::

    <root>/<class_label>/<asset_id>.pbrt     asset description
    <root>/<class_label>/<asset_id>.yaml     optional sidecar: tags, description
    <root>/skies/<name>.spim                 optional environment maps

Listings are sorted by asset_id so that seeded placement draws the same
assets on every machine.
"""

from __future__ import annotations

import logging
import threading
import zipfile
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from autocam_sim.errors import AssetParseError, RecipeError
from autocam_sim.models import ClassLabel, SceneRecipe
from autocam_sim.sceneformat.asset_grammar import parse_asset
from autocam_sim.sceneformat.assets import AssetDescription
from autocam_sim.spectral import DEFAULT_GRID, WavelengthGrid

logger = logging.getLogger(__name__)

ASSET_SUFFIX = ".pbrt"


@dataclass(frozen=True)
class AssetEntry:
    """Listing entry; the asset itself is parsed lazily by :meth:`AssetStore.load`."""

    asset_id: str
    class_label: ClassLabel
    path: Path
    tags: tuple[str, ...] = ()
    description: str = ""


@dataclass
class AssetStore:
    """Index over an asset directory tree."""

    root: Path
    grid: WavelengthGrid = DEFAULT_GRID
    _entries: dict[str, AssetEntry] = field(default_factory=dict, init=False, repr=False)
    _cache: dict[str, AssetDescription] = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self) -> None:
        self.root = Path(self.root).resolve()
        if not self.root.is_dir():
            raise FileNotFoundError(f"asset store not found: {self.root}")
        self._scan()

    def _scan(self) -> None:
        for class_dir in sorted(p for p in self.root.iterdir() if p.is_dir()):
            try:
                label = ClassLabel(class_dir.name)
            except ValueError:
                continue
            for asset_file in sorted(class_dir.glob(f"*{ASSET_SUFFIX}")):
                asset_id = asset_file.stem
                if asset_id in self._entries:
                    logger.warning(f"Duplicate asset id '{asset_id}' in {class_dir}, keeping the first")
                    continue
                tags: tuple[str, ...] = ()
                description = ""
                sidecar = asset_file.with_suffix(".yaml")
                if sidecar.exists():
                    with open(sidecar, "r", encoding="utf-8") as f:
                        meta = yaml.safe_load(f) or {}
                    tags = tuple(str(t) for t in meta.get("tags", []))
                    description = str(meta.get("description", ""))
                self._entries[asset_id] = AssetEntry(asset_id, label, asset_file, tags, description)
        logger.debug(f"Indexed {len(self._entries)} assets under {self.root}")

    def list_assets(self, class_label: ClassLabel | None = None, tag: str | None = None) -> list[AssetEntry]:
        """Entries filtered by class and tag, sorted by asset_id."""
        entries = sorted(self._entries.values(), key=lambda e: e.asset_id)
        if class_label is not None:
            entries = [e for e in entries if e.class_label == class_label]
        if tag is not None:
            entries = [e for e in entries if tag in e.tags]
        return entries

    def contains(self, asset_id: str) -> bool:
        return asset_id in self._entries

    def entry(self, asset_id: str) -> AssetEntry:
        try:
            return self._entries[asset_id]
        except KeyError:
            raise KeyError(f"asset '{asset_id}' not found in {self.root}") from None

    def load(self, asset_id: str) -> AssetDescription:
        """Parse (once) and return an asset in canonical axes (up +z, forward +x).

        Raises:
            KeyError: unknown asset id.
            AssetParseError: the file does not parse, or its header disagrees
                with its location in the store.
        """
        with self._lock:
            cached = self._cache.get(asset_id)
        if cached is not None:
            return cached
        entry = self.entry(asset_id)
        raw = entry.path.read_bytes()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            line = raw.count(b"\n", 0, exc.start) + 1
            column = exc.start - raw.rfind(b"\n", 0, exc.start)
            raise AssetParseError(f"{entry.path}: not valid UTF-8", line, column) from exc
        asset = parse_asset(text, self.grid)
        if asset.asset_id != asset_id or asset.class_label != entry.class_label:
            raise AssetParseError(
                f"{entry.path}: header declares '{asset.asset_id}' ({asset.class_label.value}), "
                f"store location implies '{asset_id}' ({entry.class_label.value})",
                1,
                1,
            )
        asset = replace(asset.canonicalized(), tags=entry.tags)
        with self._lock:
            self._cache.setdefault(asset_id, asset)
            return self._cache[asset_id]

    def resolve(self, reference: str) -> Path:
        """Path of a store-relative resource such as ``skies/dusk.spim``."""
        path = (self.root / reference).resolve()
        if not path.exists():
            raise FileNotFoundError(f"resource '{reference}' not found in {self.root}")
        return path


def validate_recipe(recipe: SceneRecipe, store: AssetStore) -> None:
    """Check every object's asset exists in ``store`` with the declared class.

    Raises:
        RecipeError: naming the first missing asset id and its field path.
    """
    for i, obj in enumerate(recipe.objects):
        if not store.contains(obj.asset_id):
            raise RecipeError(
                f"asset '{obj.asset_id}' not found in asset store {store.root}",
                field_path=f"objects.{i}.asset_id",
                asset_id=obj.asset_id,
            )
        entry = store.entry(obj.asset_id)
        if entry.class_label != obj.class_label:
            raise RecipeError(
                f"asset '{obj.asset_id}' is a {entry.class_label.value}, recipe says {obj.class_label.value}",
                field_path=f"objects.{i}.class_label",
                asset_id=obj.asset_id,
            )


def bundle_resources(recipe: SceneRecipe, store: AssetStore, zip_path: Path | str) -> Path:
    """Collect every asset file (and sidecar) the recipe references into one zip."""
    validate_recipe(recipe, store)
    zip_path = Path(zip_path)
    zip_path.parent.mkdir(parents=True, exist_ok=True)
    files: set[Path] = set()
    for obj in recipe.objects:
        entry = store.entry(obj.asset_id)
        files.add(entry.path)
        sidecar = entry.path.with_suffix(".yaml")
        if sidecar.exists():
            files.add(sidecar)
    sky = recipe.lighting.sky_map
    if not sky.startswith("builtin:"):
        files.add(store.resolve(sky))

    with zipfile.ZipFile(zip_path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for path in sorted(files):
            info = zipfile.ZipInfo(path.relative_to(store.root).as_posix(), date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, path.read_bytes())
    logger.info(f"Bundled {len(files)} files into {zip_path}")
    return zip_path
