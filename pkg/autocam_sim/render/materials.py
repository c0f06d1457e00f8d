"""Surface scattering for diffuse, retroreflective and emissive materials.

Reflected directions do not depend on wavelength, so throughput is
carried as a full band vector per path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from autocam_sim.optics.diffraction import tangent_basis, tilt_directions
from autocam_sim.sceneformat.assets import MaterialKind, MaterialSpec
from autocam_sim.spectral import Spectrum, WavelengthGrid, resample

_KIND_CODES = {MaterialKind.DIFFUSE: 0, MaterialKind.RETROREFLECTIVE: 1, MaterialKind.EMISSIVE: 2}
EMISSIVE = _KIND_CODES[MaterialKind.EMISSIVE]


def _band_values(s: Spectrum | None, grid: WavelengthGrid) -> np.ndarray:
    if s is None:
        return np.zeros(grid.n_bands)
    return resample(s, grid).values


@dataclass(frozen=True)
class MaterialTable:
    """Per-material arrays indexed by the scene's global material index."""

    kind: np.ndarray  # (M,)
    reflectance: np.ndarray  # (M, B)
    emission: np.ndarray  # (M, B)
    retro_fraction: np.ndarray  # (M,)
    retro_sigma: np.ndarray  # (M,) radians

    @classmethod
    def from_specs(cls, specs: list[MaterialSpec], grid: WavelengthGrid) -> MaterialTable:
        n = len(specs)
        return cls(
            kind=np.array([_KIND_CODES[s.kind] for s in specs], dtype=np.int64),
            reflectance=np.array([_band_values(s.reflectance, grid) for s in specs]).reshape(n, grid.n_bands),
            emission=np.array([_band_values(s.emission, grid) for s in specs]).reshape(n, grid.n_bands),
            retro_fraction=np.array(
                [s.retro_fraction if s.kind == MaterialKind.RETROREFLECTIVE else 0.0 for s in specs]
            ),
            retro_sigma=np.array([s.retro_sigma for s in specs]),
        )


def cosine_hemisphere(normals: np.ndarray, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Cosine-weighted directions about each normal (pdf = cos θ / π)."""
    r = np.sqrt(u1)
    phi = 2.0 * np.pi * u2
    z = np.sqrt(np.maximum(0.0, 1.0 - u1))
    t1, t2 = tangent_basis(normals)
    return (r * np.cos(phi))[:, None] * t1 + (r * np.sin(phi))[:, None] * t2 + z[:, None] * normals


def retro_lobe(w_in: np.ndarray, normals: np.ndarray, sigma: np.ndarray, gauss: np.ndarray) -> np.ndarray:
    """Gaussian lobe around ``-w_in``; samples below the surface are mirrored back above it."""
    out = tilt_directions(-w_in, sigma * gauss[:, 0], sigma * gauss[:, 1])
    below = np.einsum("ij,ij->i", out, normals)
    return np.where((below < 0)[:, None], out - 2.0 * below[:, None] * normals, out)


def sample_scatter(
    table: MaterialTable,
    material: np.ndarray,
    w_in: np.ndarray,
    normals: np.ndarray,
    u_select: np.ndarray,
    u_dir: np.ndarray,
    gauss: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Scatter a batch of paths.

    Args:
        table: scene materials.
        material: (N,) material index per hit.
        w_in: (N, 3) incoming ray directions (pointing at the surface).
        normals: (N, 3) unit normals on the side of the incoming ray.
        u_select: (N,) uniform choosing lobe versus diffuse.
        u_dir: (N, 2) uniforms for the diffuse direction.
        gauss: (N, 2) standard normals for the lobe tilt.

    Returns:
        (w_out, throughput (N, B), lobe mask).
    """
    lobe = u_select < table.retro_fraction[material]
    w_out = cosine_hemisphere(normals, u_dir[:, 0], u_dir[:, 1])
    if lobe.any():
        w_out[lobe] = retro_lobe(w_in[lobe], normals[lobe], table.retro_sigma[material[lobe]], gauss[lobe])
    return w_out, table.reflectance[material], lobe


def scatter(
    material: MaterialSpec,
    w_in: np.ndarray,
    normal: np.ndarray,
    band: int,
    rng: np.random.Generator,
    grid: WavelengthGrid | None = None,
) -> tuple[np.ndarray, float]:
    """Single-path scatter: outgoing direction and the band's throughput."""
    if material.kind == MaterialKind.EMISSIVE:
        raise ValueError("emissive materials terminate paths and do not scatter")
    grid = grid or (material.reflectance.grid if material.reflectance is not None else WavelengthGrid())
    table = MaterialTable.from_specs([material], grid)
    w_in = np.asarray(w_in, dtype=np.float64).reshape(1, 3)
    normal = np.asarray(normal, dtype=np.float64).reshape(1, 3)
    if float(w_in[0] @ normal[0]) > 0:
        normal = -normal
    w_out, throughput, _ = sample_scatter(
        table,
        np.zeros(1, dtype=np.int64),
        w_in,
        normal,
        rng.random(1),
        rng.random((1, 2)),
        rng.standard_normal((1, 2)),
    )
    return w_out[0], float(throughput[0, band])
