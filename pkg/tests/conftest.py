"""Shared fixtures: small wavelength grids, scratch asset stores and sensor specs."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from autocam_sim.spectral import WavelengthGrid
from autocam_sim.utils.paths import get_bundled_config_dir

# Eight 40 nm bands keep render tests fast.
SMALL_GRID = WavelengthGrid(400.0, 720.0, 8)


def quad_text(
    asset_id: str,
    class_label: str = "other",
    x: float = 0.0,
    half: float = 1.0,
    reflectance: float = 0.5,
    material_type: str = "diffuse",
    extra: str = "",
) -> str:
    """A square facing -x at ``x`` (vertices at +-half in y and z)."""
    return (
        f'Asset "{asset_id}" "string class" "{class_label}"\n'
        f'Material "m" "string type" "{material_type}" "float reflectance" {reflectance} {extra}\n'
        'NamedMaterial "m"\n'
        f'Shape "trianglemesh" "point3 P" [{x} {-half} {-half}  {x} {half} {-half}  {x} {half} {half}  {x} {-half} {half}]\n'
        '  "integer indices" [0 1 2  0 2 3]\n'
    )


def box_text(asset_id: str, class_label: str, size: tuple[float, float, float], reflectance: float = 0.5) -> str:
    """Axis-aligned box standing on z = 0, centered on the origin in x and y."""
    sx, sy, sz = (s / 2.0 for s in size)
    p = [
        (-sx, -sy, 0), (sx, -sy, 0), (sx, sy, 0), (-sx, sy, 0),
        (-sx, -sy, 2 * sz), (sx, -sy, 2 * sz), (sx, sy, 2 * sz), (-sx, sy, 2 * sz),
    ]
    faces = [0, 2, 1, 0, 3, 2, 4, 5, 6, 4, 6, 7, 0, 1, 5, 0, 5, 4, 1, 2, 6, 1, 6, 5, 2, 3, 7, 2, 7, 6, 3, 0, 4, 3, 4, 7]
    points = "  ".join(f"{x:g} {y:g} {z:g}" for x, y, z in p)
    return (
        f'Asset "{asset_id}" "string class" "{class_label}"\n'
        f'Material "body" "float reflectance" {reflectance}\n'
        'NamedMaterial "body"\n'
        f'Shape "trianglemesh" "point3 P" [{points}] "integer indices" [{" ".join(map(str, faces))}]\n'
    )


def write_asset(root: Path, class_label: str, asset_id: str, text: str) -> Path:
    path = root / class_label / f"{asset_id}.pbrt"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def sensor_spec_data(name: str, pixel_um: float, rows: int, cols: int, **overrides) -> dict:
    """Noise-free mono sensor on the small grid with unit QE."""
    spec = {
        "name": name,
        "pixel_pitch_um": pixel_um,
        "rows": rows,
        "cols": cols,
        "exposure_s": 0.01,
        "qe": {"constant": 1.0},
        "cfa": {"pattern": "mono"},
        "conversion_gain_uv": 10.0,
        "voltage_swing_mv": 1000.0,
        "dark_rate_mv_per_s": 0.0,
        "read_noise_mv": 0.0,
        "prnu_sigma": 0.0,
        "dsnu_sigma_mv": 0.0,
        "adc_bits": 12,
        "grid": SMALL_GRID.to_dict(),
    }
    spec.update(overrides)
    return spec


def write_sensor_spec(path: Path, name: str, pixel_um: float, rows: int, cols: int, **overrides) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(sensor_spec_data(name, pixel_um, rows, cols, **overrides), indent=2), encoding="utf-8")
    return path


@pytest.fixture
def config_dir() -> Path:
    return get_bundled_config_dir()


@pytest.fixture
def small_grid() -> WavelengthGrid:
    return SMALL_GRID


@pytest.fixture
def asset_root(tmp_path: Path) -> Path:
    root = tmp_path / "assets"
    root.mkdir()
    return root
